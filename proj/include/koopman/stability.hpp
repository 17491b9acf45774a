#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/kmd.hpp"
#include "koopman/timeseries.hpp"

namespace koopman {

struct UnstableMode {
    Eigen::Index mode_index;
    double growth_rate;
    double frequency_hz;
};

enum class Verdict { stable, unstable };

struct StabilityVerdict {
    std::vector<UnstableMode> unstable_pairs;  // one entry per pair or real mode
    double margin = 0.0;
    Verdict verdict = Verdict::stable;
};

StabilityVerdict assess(const KoopmanDecomposition& decomp, double margin = 0.0);

/// Same series as modal_dynamics, restricted to genuine conjugate pairs.
SnapshotSeries base_flow(const KoopmanDecomposition& decomp, Eigen::Index pair, Eigen::Index k_max);

struct GridSpec {
    std::vector<double> re_edges;
    std::vector<double> im_edges;

    static GridSpec uniform(int bins = 41, double extent = 1.2);
};

struct SkippedWindow {
    Eigen::Index length;
    std::string reason;
};

struct DensityGrid {
    std::vector<double> re_edges;
    std::vector<double> im_edges;
    Eigen::MatrixXi counts;  // re bins x im bins
    long total = 0;          // all unstable eigenvalues, in grid or not
    long out_of_grid = 0;
    std::vector<Eigen::Index> window_lengths;
    std::vector<long> per_window;
    std::vector<SkippedWindow> skipped;
    Algorithm algorithm = Algorithm::arnoldi;
    double margin = 0.0;
};

/// Histogram of unstable eigenvalues over growing windows [0, n), n = n_min..N.
/// Prony only visits even n. Windows are evaluated on `threads` workers
/// (0 = hardware concurrency); the result does not depend on the thread count.
DensityGrid density_sweep(const SnapshotSeries& series, Eigen::Index n_min, Algorithm algorithm,
                          const GridSpec& grid = GridSpec::uniform(), double margin = 0.0, unsigned threads = 0);

/// Bin index of x in monotone edges, -1 outside.
int bin_index(const std::vector<double>& edges, double x);

struct SyntheticUcteOptions {
    int channels = 8;
    int samples = 41;
    double period_s = 30.0;
    double growth = 1.02;
    double oscillation_period_s = 37.0 * 60.0;
    double snr_db = 20.0;
    double clutter_sigma = 0.3;
};

/// Growing 37-minute oscillation dominated by four channels, plus four decaying
/// clutter modes with random per-channel amplitudes and white noise at the
/// requested per-channel SNR.
SnapshotSeries synthetic_ucte(std::uint64_t seed, const SyntheticUcteOptions& options = {});

}  // namespace koopman
