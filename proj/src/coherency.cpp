#include "koopman/coherency.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "koopman/error.hpp"

namespace koopman {

using Eigen::Index;

double wrap_phase(double angle) {
    constexpr double pi = std::numbers::pi;
    double a = std::remainder(angle, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

double circular_distance(double a, double b) {
    return std::abs(wrap_phase(a - b));
}

ModeSummary summarize_mode(const KoopmanDecomposition& decomp, Index index) {
    if (index < 0 || index >= decomp.size())
        throw Error(ErrorCode::OutOfRange, "mode index " + std::to_string(index) + " out of range");
    const Index partner = conjugate_partner(decomp, index);
    Index rep = index;
    if (partner >= 0 && decomp.eigenvalues(index).imag() < 0) rep = partner;

    ModeSummary s;
    s.mode_index = rep;
    s.is_pair = partner >= 0;
    const auto [growth, freq] = eigen_frequency(decomp.eigenvalues(rep), decomp.period_s);
    s.growth_rate = growth;
    s.frequency_hz = freq;
    s.norm = decomp.mode_norm(rep);
    s.channels = decomp.channels;
    const auto& v = decomp.modes.col(rep);
    s.amplitudes = v.cwiseAbs() * (s.is_pair ? 2.0 : 1.0);
    s.phases.resize(v.size());
    for (Index i = 0; i < v.size(); ++i) s.phases(i) = wrap_phase(std::arg(v(i)));
    return s;
}

std::vector<ModeSummary> summarize(const KoopmanDecomposition& decomp) {
    if (decomp.size() == 0) throw Error(ErrorCode::EmptyInput, "decomposition has no modes");
    std::vector<ModeSummary> out;
    std::vector<bool> done(decomp.size(), false);
    for (Index j = 0; j < decomp.size(); ++j) {
        if (done[j]) continue;
        done[j] = true;
        const Index p = conjugate_partner(decomp, j);
        if (p >= 0) done[p] = true;
        out.push_back(summarize_mode(decomp, j));
    }
    return out;
}

SnapshotSeries modal_dynamics(const KoopmanDecomposition& decomp, Index index, Index k_max) {
    if (index < 0 || index >= decomp.size())
        throw Error(ErrorCode::OutOfRange, "mode index " + std::to_string(index) + " out of range");
    if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be at least 1");
    const auto lambda = decomp.eigenvalues(index);
    if (!is_real_eigenvalue(lambda) && conjugate_partner(decomp, index) < 0)
        throw Error(ErrorCode::NotAPair, "mode " + std::to_string(index) + " has no conjugate partner");

    const double r = std::abs(lambda);
    const double theta = std::arg(lambda);
    const auto& v = decomp.modes.col(index);
    Eigen::MatrixXd out(v.size(), k_max + 1);
    for (Index k = 0; k <= k_max; ++k) {
        const double env = 2.0 * std::pow(r, static_cast<double>(k));
        for (Index i = 0; i < v.size(); ++i)
            out(i, k) = env * std::abs(v(i)) * std::cos(theta * static_cast<double>(k) + std::arg(v(i)));
    }
    SnapshotSeries s;
    s.channels = decomp.channels;
    if (s.channels.empty())
        for (Index i = 0; i < v.size(); ++i) s.channels.push_back("c" + std::to_string(i));
    s.samples = std::move(out);
    s.period_s = decomp.period_s;
    return s;
}

std::vector<CoherentGroup> phase_groups(const ModeSummary& summary, double epsilon_rad, double min_amplitude) {
    if (!(epsilon_rad > 0.0 && epsilon_rad < std::numbers::pi))
        throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, pi)");
    if (min_amplitude < 0.0) throw Error(ErrorCode::InvalidArgument, "amplitude floor must be nonnegative");

    std::vector<Index> active;
    for (Index i = 0; i < summary.amplitudes.size(); ++i)
        if (summary.amplitudes(i) >= min_amplitude) active.push_back(i);

    std::vector<std::size_t> parent(active.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t a = 0; a < active.size(); ++a)
        for (std::size_t b = a + 1; b < active.size(); ++b)
            if (circular_distance(summary.phases(active[a]), summary.phases(active[b])) <= epsilon_rad + 1e-12) {
                const auto ra = find(a), rb = find(b);
                if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
            }

    std::vector<CoherentGroup> groups;
    std::vector<long> slot(active.size(), -1);
    for (std::size_t a = 0; a < active.size(); ++a) {
        const auto root = find(a);
        if (slot[root] < 0) {
            slot[root] = static_cast<long>(groups.size());
            groups.push_back(CoherentGroup{summary.mode_index, epsilon_rad, {}, 0.0});
        }
        const Index ch = active[a];
        groups[slot[root]].members.push_back(ch < static_cast<Index>(summary.channels.size())
                                                 ? summary.channels[ch]
                                                 : "c" + std::to_string(ch));
    }
    std::vector<double> sx(groups.size(), 0.0), sy(groups.size(), 0.0);
    for (std::size_t a = 0; a < active.size(); ++a) {
        const auto g = slot[find(a)];
        sx[g] += std::cos(summary.phases(active[a]));
        sy[g] += std::sin(summary.phases(active[a]));
    }
    for (std::size_t g = 0; g < groups.size(); ++g) groups[g].reference_phase_rad = wrap_phase(std::atan2(sy[g], sx[g]));
    return groups;
}

}  // namespace koopman
