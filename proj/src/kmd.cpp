#include "koopman/kmd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "koopman/error.hpp"

namespace koopman {

using cd = std::complex<double>;
using Eigen::Index;

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::arnoldi: return "arnoldi";
        case Algorithm::prony: return "prony";
        case Algorithm::fourier: return "fourier";
        case Algorithm::dmd: return "dmd";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "arnoldi") return Algorithm::arnoldi;
    if (name == "prony") return Algorithm::prony;
    if (name == "fourier") return Algorithm::fourier;
    if (name == "dmd") return Algorithm::dmd;
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + name + "'");
}

namespace detail {

void balance(Eigen::MatrixXd& A) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    const Index n = A.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Index i = 0; i < n; ++i) {
            double c = A.col(i).cwiseAbs().sum() - std::abs(A(i, i));
            double r = A.row(i).cwiseAbs().sum() - std::abs(A(i, i));
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                A.row(i) /= f;
                A.col(i) *= f;
            }
        }
    }
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0)) return Eigen::VectorXd::Zero(A.cols());
    const double smin = s(s.size() - 1);
    const bool full_rank = A.cols() <= A.rows() && smin > 0.0;
    if (full_rank) {
        const double cond = (s(0) / smin) * (s(0) / smin);
        if (cond < 1e8) {
            Eigen::MatrixXd gram = A.transpose() * A;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
            if (ldlt.info() == Eigen::Success) {
                Eigen::VectorXd x = ldlt.solve(A.transpose() * b);
                if (x.allFinite()) return x;
            }
        }
    }
    const double cutoff = 1e-12 * s(0);
    Eigen::VectorXd utb = svd.matrixU().transpose() * b;
    for (Index i = 0; i < s.size(); ++i) utb(i) = s(i) > cutoff ? utb(i) / s(i) : 0.0;
    return svd.matrixV() * utb;
}

Eigen::VectorXcd companion_roots(const Eigen::VectorXd& last_column) {
    const Index n = last_column.size();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    if (n > 1) C.diagonal(-1).setOnes();
    C.col(n - 1) = last_column;
    balance(C);
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "companion eigenvalue iteration failed");
    return es.eigenvalues();
}

}  // namespace detail

namespace {

void check_distinct(const Eigen::VectorXcd& lambda) {
    for (Index i = 0; i < lambda.size(); ++i)
        for (Index j = i + 1; j < lambda.size(); ++j) {
            const double scale = std::max(std::abs(lambda(i)), std::abs(lambda(j)));
            if (std::abs(lambda(i) - lambda(j)) <= 1e-10 * scale)
                throw Error(ErrorCode::DegenerateEigenvalues,
                            "eigenvalues " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
        }
}

// Solves V T = K with T(j, k) = lambda_j^k through the transposed system.
Eigen::MatrixXcd vandermonde_modes(const Eigen::VectorXcd& lambda, const Eigen::MatrixXd& K) {
    const Index n = lambda.size();
    Eigen::MatrixXcd Tt(n, n);
    Tt.row(0).setOnes();
    for (Index k = 1; k < n; ++k) Tt.row(k) = Tt.row(k - 1).cwiseProduct(lambda.transpose());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Tt);
    Eigen::MatrixXcd X = lu.solve(K.transpose().cast<cd>());
    if (!X.allFinite()) throw Error(ErrorCode::SolveFailure, "Vandermonde system is singular");
    return X.transpose();
}

// Makes conjugate eigenvalues carry exactly conjugate modes.
void enforce_conjugate_symmetry(KoopmanDecomposition& d) {
    std::vector<bool> used(d.size(), false);
    for (Index j = 0; j < d.size(); ++j) {
        if (used[j]) continue;
        if (is_real_eigenvalue(d.eigenvalues(j))) {
            d.modes.col(j) = d.modes.col(j).real().cast<cd>();
            continue;
        }
        const Index p = conjugate_partner(d, j);
        if (p < 0) continue;
        used[j] = used[p] = true;
        const Index pos = d.eigenvalues(j).imag() > 0 ? j : p;
        const Index neg = pos == j ? p : j;
        Eigen::VectorXcd v = 0.5 * (d.modes.col(pos) + d.modes.col(neg).conjugate());
        d.modes.col(pos) = v;
        d.modes.col(neg) = v.conjugate();
        d.eigenvalues(neg) = std::conj(d.eigenvalues(pos));
    }
}

void finalize(KoopmanDecomposition& d, ModeOrder order) {
    enforce_conjugate_symmetry(d);
    sort_modes(d, order);
}

double wrap_nu(double nu) {
    return nu >= 0.5 ? nu - 1.0 : nu;
}

}  // namespace

bool is_real_eigenvalue(cd lambda) {
    return lambda.imag() == 0.0;
}

Index conjugate_partner(const KoopmanDecomposition& d, Index j) {
    const cd lj = d.eigenvalues(j);
    if (is_real_eigenvalue(lj)) return -1;
    const double tol = 1e-9 * std::max(1.0, std::abs(lj));
    auto matches = [&](Index k) {
        return k >= 0 && k < d.size() && k != j && std::abs(d.eigenvalues(k) - std::conj(lj)) <= tol;
    };
    if (matches(j + 1)) return j + 1;
    if (matches(j - 1)) return j - 1;
    Index best = -1;
    double best_dist = tol;
    for (Index k = 0; k < d.size(); ++k) {
        if (k == j) continue;
        const double dist = std::abs(d.eigenvalues(k) - std::conj(lj));
        if (dist <= best_dist) {
            best = k;
            best_dist = dist;
        }
    }
    return best;
}

void sort_modes(KoopmanDecomposition& d, ModeOrder order) {
    struct Unit {
        Index first;
        Index second;  // -1 for a single mode
        double norm;
        double growth;
    };
    std::vector<Unit> units;
    std::vector<bool> used(d.size(), false);
    for (Index j = 0; j < d.size(); ++j) {
        if (used[j]) continue;
        used[j] = true;
        Index p = conjugate_partner(d, j);
        if (p >= 0 && used[p]) p = -1;
        Unit u{j, -1, d.mode_norm(j), std::abs(d.eigenvalues(j))};
        if (p >= 0) {
            used[p] = true;
            if (d.eigenvalues(j).imag() > 0) {
                u.second = p;
            } else {
                u.first = p;
                u.second = j;
            }
        }
        units.push_back(u);
    }
    std::stable_sort(units.begin(), units.end(), [order](const Unit& a, const Unit& b) {
        if (order == ModeOrder::growth && a.growth != b.growth) return a.growth > b.growth;
        if (a.norm != b.norm) return a.norm > b.norm;
        return a.growth > b.growth;
    });
    std::vector<Index> perm;
    perm.reserve(d.size());
    for (const auto& u : units) {
        perm.push_back(u.first);
        if (u.second >= 0) perm.push_back(u.second);
    }
    Eigen::VectorXcd lam(d.size());
    Eigen::MatrixXcd modes(d.modes.rows(), d.size());
    for (Index i = 0; i < d.size(); ++i) {
        lam(i) = d.eigenvalues(perm[i]);
        modes.col(i) = d.modes.col(perm[i]);
    }
    d.eigenvalues = std::move(lam);
    d.modes = std::move(modes);
}

KoopmanDecomposition decompose_arnoldi(const SnapshotSeries& series, ModeOrder order) {
    const Index N = series.N();
    if (N < 3) throw Error(ErrorCode::TooFewSnapshots, "arnoldi needs N >= 3, got " + std::to_string(N));
    const Index n = N - 1;
    const Eigen::MatrixXd K = series.samples.leftCols(n);
    const Eigen::VectorXd b = series.samples.col(n);

    const Eigen::VectorXd c = detail::least_squares(K, b);
    const Eigen::VectorXcd lambda = detail::companion_roots(c);
    check_distinct(lambda);

    KoopmanDecomposition d;
    d.eigenvalues = lambda;
    d.modes = vandermonde_modes(lambda, K);
    d.residual = b - K * c;
    d.algorithm = Algorithm::arnoldi;
    d.period_s = series.period_s;
    d.channels = series.channels;
    d.n_snapshots = N;
    finalize(d, order);
    return d;
}

KoopmanDecomposition decompose_prony(const SnapshotSeries& series, ModeOrder order) {
    const Index N = series.N();
    if (N % 2 != 0) throw Error(ErrorCode::OddSampleCount, "prony needs an even sample count, got " + std::to_string(N));
    if (N < 4) throw Error(ErrorCode::TooFewSnapshots, "prony needs N >= 4, got " + std::to_string(N));
    const Index n = N / 2;
    const Index m = series.m();

    Eigen::MatrixXd H(m * n, n);
    Eigen::VectorXd b(m * n);
    for (Index l = 0; l < n; ++l) {
        H.middleRows(l * m, m) = series.samples.middleCols(l, n);
        b.segment(l * m, m) = -series.samples.col(l + n);
    }
    const Eigen::VectorXd p = detail::least_squares(H, b);
    const Eigen::VectorXcd lambda = detail::companion_roots(-p);
    check_distinct(lambda);

    KoopmanDecomposition d;
    d.eigenvalues = lambda;
    d.modes = vandermonde_modes(lambda, series.samples.leftCols(n));
    d.residual = b - H * p;
    d.algorithm = Algorithm::prony;
    d.period_s = series.period_s;
    d.channels = series.channels;
    d.n_snapshots = N;
    finalize(d, order);
    return d;
}

KoopmanDecomposition decompose_dmd(const SnapshotSeries& series, double rel_tol, ModeOrder order) {
    const Index N = series.N();
    if (N < 3) throw Error(ErrorCode::TooFewSnapshots, "dmd needs N >= 3, got " + std::to_string(N));
    const Index n = N - 1;
    const Eigen::MatrixXd K = series.samples.leftCols(n);
    const Eigen::MatrixXd Yp = series.samples.rightCols(n);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Index r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
    if (r == 0) throw Error(ErrorCode::RankCollapse, "all singular values below tolerance");

    const Eigen::MatrixXd U = svd.matrixU().leftCols(r);
    const Eigen::MatrixXd V = svd.matrixV().leftCols(r);
    const Eigen::VectorXd sinv = s.head(r).cwiseInverse();
    const Eigen::MatrixXd A = U.transpose() * Yp * V * sinv.asDiagonal();

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "DMD eigenvalue iteration failed");
    const Eigen::MatrixXcd Phi = U.cast<cd>() * es.eigenvectors();
    const Eigen::VectorXcd amp = Phi.completeOrthogonalDecomposition().solve(series.samples.col(0).cast<cd>());

    KoopmanDecomposition d;
    d.eigenvalues = es.eigenvalues();
    d.modes = Phi * amp.asDiagonal();
    d.algorithm = Algorithm::dmd;
    d.period_s = series.period_s;
    d.channels = series.channels;
    d.n_snapshots = N;
    finalize(d, order);
    Eigen::VectorXcd last = Eigen::VectorXcd::Zero(series.m());
    for (Index j = 0; j < d.size(); ++j) last += std::pow(d.eigenvalues(j), static_cast<double>(n)) * d.modes.col(j);
    d.residual = series.samples.col(n) - last.real();
    return d;
}

ProjectionResult project_fourier(const SnapshotSeries& series, double freq_hz) {
    const double nyquist = 0.5 / series.period_s;
    if (!(freq_hz >= 0.0 && freq_hz <= nyquist))
        throw Error(ErrorCode::FrequencyOutOfRange,
                    std::to_string(freq_hz) + " Hz outside [0, " + std::to_string(nyquist) + "]");
    const double nu = freq_hz * series.period_s;
    const Index N = series.N();
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(series.m());
    for (Index k = 0; k < N; ++k) {
        const cd w = std::polar(1.0, -2.0 * std::numbers::pi * nu * static_cast<double>(k));
        acc += w * series.samples.col(k).cast<cd>();
    }
    return ProjectionResult{wrap_nu(nu), acc / static_cast<double>(N)};
}

KoopmanDecomposition decompose_fourier(const SnapshotSeries& series, const std::vector<double>& freqs_hz,
                                       ModeOrder order) {
    if (freqs_hz.empty()) throw Error(ErrorCode::InvalidArgument, "fourier decomposition needs frequencies");
    std::vector<cd> lam;
    std::vector<Eigen::VectorXcd> vecs;
    for (double f : freqs_hz) {
        const auto pr = project_fourier(series, f);
        const double nu = f * series.period_s;
        if (nu == 0.0) {
            lam.emplace_back(1.0, 0.0);
            vecs.push_back(pr.vector.real().cast<cd>());
        } else if (nu == 0.5) {
            lam.emplace_back(-1.0, 0.0);
            vecs.push_back(pr.vector.real().cast<cd>());
        } else {
            const cd l = std::polar(1.0, 2.0 * std::numbers::pi * nu);
            lam.push_back(l);
            vecs.push_back(pr.vector);
            lam.push_back(std::conj(l));
            vecs.push_back(pr.vector.conjugate());
        }
    }
    KoopmanDecomposition d;
    d.eigenvalues = Eigen::Map<Eigen::VectorXcd>(lam.data(), static_cast<Index>(lam.size()));
    d.modes.resize(series.m(), static_cast<Index>(vecs.size()));
    for (std::size_t j = 0; j < vecs.size(); ++j) d.modes.col(static_cast<Index>(j)) = vecs[j];
    d.algorithm = Algorithm::fourier;
    d.period_s = series.period_s;
    d.channels = series.channels;
    d.n_snapshots = series.N();
    sort_modes(d, order);
    return d;
}

KoopmanDecomposition decompose(const SnapshotSeries& series, const DecomposeOptions& options) {
    switch (options.algorithm) {
        case Algorithm::arnoldi: return decompose_arnoldi(series, options.order);
        case Algorithm::prony: return decompose_prony(series, options.order);
        case Algorithm::dmd: return decompose_dmd(series, options.dmd_rel_tol, options.order);
        case Algorithm::fourier: return decompose_fourier(series, options.fourier_freqs_hz, options.order);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

std::pair<double, double> eigen_frequency(cd lambda, double period_s) {
    if (lambda == cd(0.0, 0.0)) throw Error(ErrorCode::ZeroEigenvalue, "eigenvalue is zero");
    double arg = std::arg(lambda);
    if (arg <= -std::numbers::pi) arg = std::numbers::pi;
    return {std::abs(lambda), arg / (2.0 * std::numbers::pi * period_s)};
}

Eigen::MatrixXd reconstruct(const KoopmanDecomposition& d, Index k_max) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d.modes.rows(), k_max + 1);
    Eigen::VectorXcd pw = Eigen::VectorXcd::Ones(d.size());
    for (Index k = 0; k <= k_max; ++k) {
        out.col(k) = d.modes * pw;
        pw = pw.cwiseProduct(d.eigenvalues);
    }
    return out.real();
}

KoopmanDecomposition truncate_modes(const KoopmanDecomposition& d, Index count) {
    if (count <= 0) throw Error(ErrorCode::InvalidArgument, "mode count must be positive");
    count = std::min(count, d.size());
    if (count < d.size() && conjugate_partner(d, count - 1) == count) ++count;
    KoopmanDecomposition out = d;
    out.eigenvalues = d.eigenvalues.head(count);
    out.modes = d.modes.leftCols(count);
    return out;
}

}  // namespace koopman
