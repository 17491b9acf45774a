#pragma once

#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/kmd.hpp"
#include "koopman/timeseries.hpp"

namespace planted {

using cd = std::complex<double>;

struct Modes {
    Eigen::VectorXcd lambda;  // conjugate pairs adjacent
    Eigen::MatrixXcd V;
};

/// `pairs` conjugate pairs with moduli in [rmin, rmax] and well separated angles.
inline Modes random_pairs(std::mt19937_64& rng, int m, int pairs, double rmin, double rmax) {
    std::uniform_real_distribution<double> radius(rmin, rmax);
    std::normal_distribution<double> g;
    Modes p;
    p.lambda.resize(2 * pairs);
    p.V.resize(m, 2 * pairs);
    const double slot = (std::numbers::pi - 0.4) / pairs;
    for (int j = 0; j < pairs; ++j) {
        std::uniform_real_distribution<double> within(0.2 + j * slot + 0.1 * slot, 0.2 + (j + 1) * slot - 0.1 * slot);
        const cd l = std::polar(radius(rng), within(rng));
        p.lambda(2 * j) = l;
        p.lambda(2 * j + 1) = std::conj(l);
        for (int i = 0; i < m; ++i) {
            const cd v(g(rng), g(rng));
            p.V(i, 2 * j) = v;
            p.V(i, 2 * j + 1) = std::conj(v);
        }
    }
    return p;
}

inline koopman::SnapshotSeries series(const Modes& p, int N, double T = 1.0) {
    const auto m = p.V.rows();
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(m, N);
    Eigen::VectorXcd pw = Eigen::VectorXcd::Ones(p.lambda.size());
    for (int k = 0; k < N; ++k) {
        Y.col(k) = p.V * pw;
        pw = pw.cwiseProduct(p.lambda);
    }
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < m; ++i) labels.push_back("c" + std::to_string(i));
    return koopman::make_series(labels, Y.real(), T);
}

struct Match {
    double max_eig_err = 0.0;
    double max_mode_rel_err = 0.0;
};

/// For every planted mode, the closest recovered eigenvalue and its mode error
/// after optimal complex phase alignment.
inline Match compare(const Modes& p, const koopman::KoopmanDecomposition& d) {
    Match out;
    for (Eigen::Index j = 0; j < p.lambda.size(); ++j) {
        Eigen::Index best = 0;
        double dist = 1e300;
        for (Eigen::Index k = 0; k < d.size(); ++k) {
            const double e = std::abs(d.eigenvalues(k) - p.lambda(j));
            if (e < dist) {
                dist = e;
                best = k;
            }
        }
        out.max_eig_err = std::max(out.max_eig_err, dist);
        const Eigen::VectorXcd v = d.modes.col(best);
        const Eigen::VectorXcd t = p.V.col(j);
        const cd inner = v.dot(t);
        const cd align = std::abs(inner) > 0 ? inner / std::abs(inner) : cd(1.0);
        const double rel = (align * v - t).norm() / t.norm();
        out.max_mode_rel_err = std::max(out.max_mode_rel_err, rel);
    }
    return out;
}

}  // namespace planted
