#include "koopman/stability.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "koopman/coherency.hpp"
#include "koopman/error.hpp"

namespace koopman {

using Eigen::Index;

StabilityVerdict assess(const KoopmanDecomposition& decomp, double margin) {
    if (margin < 0.0) throw Error(ErrorCode::InvalidArgument, "margin must be nonnegative");
    StabilityVerdict v;
    v.margin = margin;
    std::vector<bool> done(decomp.size(), false);
    for (Index j = 0; j < decomp.size(); ++j) {
        if (done[j]) continue;
        done[j] = true;
        const Index p = conjugate_partner(decomp, j);
        Index rep = j;
        if (p >= 0) {
            done[p] = true;
            if (decomp.eigenvalues(j).imag() < 0) rep = p;
        }
        const auto lambda = decomp.eigenvalues(rep);
        if (std::abs(lambda) > 1.0 + margin) {
            const auto [g, f] = eigen_frequency(lambda, decomp.period_s);
            v.unstable_pairs.push_back({rep, g, f});
        }
    }
    v.verdict = v.unstable_pairs.empty() ? Verdict::stable : Verdict::unstable;
    return v;
}

SnapshotSeries base_flow(const KoopmanDecomposition& decomp, Index pair, Index k_max) {
    if (pair < 0 || pair >= decomp.size())
        throw Error(ErrorCode::OutOfRange, "mode index " + std::to_string(pair) + " out of range");
    if (is_real_eigenvalue(decomp.eigenvalues(pair)) || conjugate_partner(decomp, pair) < 0)
        throw Error(ErrorCode::NotAPair, "mode " + std::to_string(pair) + " is not part of a conjugate pair");
    return modal_dynamics(decomp, pair, k_max);
}

GridSpec GridSpec::uniform(int bins, double extent) {
    if (bins < 1 || !(extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid needs bins >= 1 and extent > 0");
    GridSpec g;
    for (int i = 0; i <= bins; ++i) g.re_edges.push_back(-extent + 2.0 * extent * i / bins);
    g.im_edges = g.re_edges;
    return g;
}

int bin_index(const std::vector<double>& edges, double x) {
    if (edges.size() < 2 || x < edges.front() || x > edges.back()) return -1;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    int i = static_cast<int>(it - edges.begin()) - 1;
    return std::min(i, static_cast<int>(edges.size()) - 2);
}

DensityGrid density_sweep(const SnapshotSeries& series, Index n_min, Algorithm algorithm, const GridSpec& grid,
                          double margin, unsigned threads) {
    if (algorithm != Algorithm::arnoldi && algorithm != Algorithm::prony && algorithm != Algorithm::dmd)
        throw Error(ErrorCode::InvalidArgument, "density sweep supports arnoldi, prony and dmd");
    const Index floor = algorithm == Algorithm::prony ? 4 : 3;
    if (n_min < floor)
        throw Error(ErrorCode::InvalidArgument, "n_min must be at least " + std::to_string(floor));
    if (n_min > series.N()) throw Error(ErrorCode::OutOfRange, "n_min exceeds series length");
    if (grid.re_edges.size() < 2 || grid.im_edges.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "grid needs at least one bin per axis");

    std::vector<Index> lengths;
    for (Index n = n_min; n <= series.N(); ++n)
        if (algorithm != Algorithm::prony || n % 2 == 0) lengths.push_back(n);

    struct WindowResult {
        std::vector<std::complex<double>> unstable;
        std::string error;
    };
    std::vector<WindowResult> results(lengths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t w = next++; w < lengths.size(); w = next++) {
            try {
                const auto sub = window(series, WindowSpec{0, static_cast<std::size_t>(lengths[w])});
                DecomposeOptions opt;
                opt.algorithm = algorithm;
                const auto d = decompose(sub, opt);
                for (Index j = 0; j < d.size(); ++j)
                    if (std::abs(d.eigenvalues(j)) > 1.0 + margin) results[w].unstable.push_back(d.eigenvalues(j));
            } catch (const Error& e) {
                results[w].error = e.what();
            }
        }
    };
    unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, lengths.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    DensityGrid out;
    out.re_edges = grid.re_edges;
    out.im_edges = grid.im_edges;
    out.counts = Eigen::MatrixXi::Zero(static_cast<Index>(grid.re_edges.size() - 1),
                                       static_cast<Index>(grid.im_edges.size() - 1));
    out.algorithm = algorithm;
    out.margin = margin;
    for (std::size_t w = 0; w < lengths.size(); ++w) {
        if (!results[w].error.empty()) {
            out.skipped.push_back({lengths[w], results[w].error});
            continue;
        }
        out.window_lengths.push_back(lengths[w]);
        out.per_window.push_back(static_cast<long>(results[w].unstable.size()));
        for (const auto& l : results[w].unstable) {
            ++out.total;
            const int i = bin_index(grid.re_edges, l.real());
            const int j = bin_index(grid.im_edges, l.imag());
            if (i < 0 || j < 0)
                ++out.out_of_grid;
            else
                ++out.counts(i, j);
        }
    }
    return out;
}

SnapshotSeries synthetic_ucte(std::uint64_t seed, const SyntheticUcteOptions& o) {
    if (o.channels < 1 || o.samples < 2 || !(o.period_s > 0.0) || !(o.oscillation_period_s > 0.0))
        throw Error(ErrorCode::InvalidArgument, "invalid synthetic dataset options");
    constexpr double pi = std::numbers::pi;
    constexpr std::array<double, 8> phase_table{0.0, 0.3, pi, pi - 0.2, 1.0, 2.0, 0.5, -1.0};
    constexpr std::array<double, 4> minor_amp{0.1, 0.12, 0.08, 0.15};
    struct Clutter {
        double radius;
        double cycles_per_sample;
    };
    constexpr std::array<Clutter, 4> clutter{{{0.9, 0.07}, {0.85, 0.15}, {0.8, 0.3}, {0.7, 0.0}}};

    const int m = o.channels;
    const int N = o.samples;
    const double nu = o.period_s / o.oscillation_period_s;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-pi, pi);

    Eigen::MatrixXd Y(m, N);
    for (int i = 0; i < m; ++i) {
        const double amp = i < 4 ? 1.0 - 0.1 * i : minor_amp[(i - 4) % 4];
        const double ph = phase_table[i % 8];
        for (int k = 0; k < N; ++k) Y(i, k) = amp * std::pow(o.growth, k) * std::cos(2.0 * pi * nu * k + ph);
    }
    for (const auto& c : clutter) {
        Eigen::VectorXd a(m), p(m);
        for (int i = 0; i < m; ++i) a(i) = o.clutter_sigma * gauss(rng);
        for (int i = 0; i < m; ++i) p(i) = uniform(rng);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < N; ++k)
                Y(i, k) += a(i) * std::pow(c.radius, k) * std::cos(2.0 * pi * c.cycles_per_sample * k + p(i));
    }
    const double snr = std::pow(10.0, o.snr_db / 10.0);
    for (int i = 0; i < m; ++i) {
        const double sigma = std::sqrt(Y.row(i).squaredNorm() / N / snr);
        for (int k = 0; k < N; ++k) Y(i, k) += sigma * gauss(rng);
    }
    std::vector<std::string> labels;
    for (int i = 0; i < m; ++i) labels.push_back("ch" + std::to_string(i + 1));
    return make_series(std::move(labels), std::move(Y), o.period_s);
}

}  // namespace koopman
