#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/kmd.hpp"
#include "koopman/timeseries.hpp"

namespace koopman {

struct ModeSummary {
    Eigen::Index mode_index = 0;  // index of the representative in the decomposition
    bool is_pair = false;
    double growth_rate = 0.0;
    double frequency_hz = 0.0;
    double norm = 0.0;
    std::vector<std::string> channels;
    Eigen::VectorXd amplitudes;
    Eigen::VectorXd phases;  // (-pi, pi]
};

struct CoherentGroup {
    Eigen::Index mode_index = 0;
    double epsilon_rad = 0.0;
    std::vector<std::string> members;  // channel order
    double reference_phase_rad = 0.0;
};

/// One entry per real mode or conjugate pair. Pairs use the positive-frequency
/// member and report doubled amplitudes.
std::vector<ModeSummary> summarize(const KoopmanDecomposition& decomp);

ModeSummary summarize_mode(const KoopmanDecomposition& decomp, Eigen::Index index);

/// 2 |lambda|^k A_j cos(2 pi k nu + alpha_j) for k = 0..k_max.
SnapshotSeries modal_dynamics(const KoopmanDecomposition& decomp, Eigen::Index index, Eigen::Index k_max);

/// Single-linkage clusters of channels whose phases lie within epsilon_rad
/// (circular distance). Channels below `min_amplitude` are ignored.
std::vector<CoherentGroup> phase_groups(const ModeSummary& summary, double epsilon_rad, double min_amplitude = 0.0);

double wrap_phase(double angle);
double circular_distance(double a, double b);

}  // namespace koopman
