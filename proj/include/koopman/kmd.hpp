#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "koopman/timeseries.hpp"

namespace koopman {

enum class Algorithm { arnoldi, prony, fourier, dmd };
enum class ModeOrder { norm, growth };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

/// Finite Koopman mode decomposition: y_k ~ sum_j lambda_j^k V_j.
struct KoopmanDecomposition {
    Eigen::VectorXcd eigenvalues;  // length M
    Eigen::MatrixXcd modes;        // m x M
    Eigen::VectorXd residual;      // m (arnoldi, dmd), m*n (prony), empty (fourier)
    Algorithm algorithm = Algorithm::arnoldi;
    double period_s = 1.0;
    std::vector<std::string> channels;
    Eigen::Index n_snapshots = 0;

    Eigen::Index size() const { return eigenvalues.size(); }
    double mode_norm(Eigen::Index j) const { return modes.col(j).norm(); }
};

struct ProjectionResult {
    double nu = 0.0;           // in [-1/2, 1/2)
    Eigen::VectorXcd vector;   // phi(x0) V at that frequency
};

KoopmanDecomposition decompose_arnoldi(const SnapshotSeries& series, ModeOrder order = ModeOrder::norm);

/// Vector Prony on N = 2n snapshots; returns n modes.
KoopmanDecomposition decompose_prony(const SnapshotSeries& series, ModeOrder order = ModeOrder::norm);

/// Exact DMD. Modes are scaled by least-squares amplitudes against y_0 so that
/// y_k ~ sum_j lambda_j^k V_j holds as for the other algorithms.
KoopmanDecomposition decompose_dmd(const SnapshotSeries& series, double rel_tol = 1e-10,
                                   ModeOrder order = ModeOrder::norm);

ProjectionResult project_fourier(const SnapshotSeries& series, double freq_hz);

/// Unit-modulus eigenvalues at the given frequencies with projected modes;
/// positive frequencies below Nyquist also get their conjugate partner.
KoopmanDecomposition decompose_fourier(const SnapshotSeries& series, const std::vector<double>& freqs_hz,
                                       ModeOrder order = ModeOrder::norm);

struct DecomposeOptions {
    Algorithm algorithm = Algorithm::arnoldi;
    ModeOrder order = ModeOrder::norm;
    double dmd_rel_tol = 1e-10;
    std::vector<double> fourier_freqs_hz;
};

KoopmanDecomposition decompose(const SnapshotSeries& series, const DecomposeOptions& options);

/// (|lambda|, Arg(lambda) / (2 pi T)).
std::pair<double, double> eigen_frequency(std::complex<double> lambda, double period_s);

/// Index of the conjugate partner of mode j, -1 if none or if lambda_j is real.
Eigen::Index conjugate_partner(const KoopmanDecomposition& d, Eigen::Index j);

bool is_real_eigenvalue(std::complex<double> lambda);

/// Reorders modes; conjugate pairs stay adjacent with the positive-imaginary member first.
void sort_modes(KoopmanDecomposition& d, ModeOrder order);

/// Real part of sum_j lambda_j^k V_j for k = 0..k_max, as an m x (k_max+1) matrix.
Eigen::MatrixXd reconstruct(const KoopmanDecomposition& d, Eigen::Index k_max);

/// Keeps the first `count` modes, extended so no conjugate pair is split.
KoopmanDecomposition truncate_modes(const KoopmanDecomposition& d, Eigen::Index count);

namespace detail {
/// Parlett-Reinsch diagonal similarity scaling (in place).
void balance(Eigen::MatrixXd& A);
/// Least squares min ||A x - b||: normal equations when cond(A^T A) < 1e8,
/// otherwise SVD pseudo-inverse with relative cutoff 1e-12.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);
Eigen::VectorXcd companion_roots(const Eigen::VectorXd& last_column);
}  // namespace detail

}  // namespace koopman
