#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace koopman {

/// Uniformly sampled multichannel data. Column k of `samples` is snapshot y_k.
struct SnapshotSeries {
    std::vector<std::string> channels;
    Eigen::MatrixXd samples;  // m x N
    double period_s = 1.0;
    double t0_s = 0.0;

    Eigen::Index m() const { return samples.rows(); }
    Eigen::Index N() const { return samples.cols(); }
    Eigen::Index channel_index(const std::string& label) const;
};

struct WindowSpec {
    std::size_t start_index = 0;
    std::size_t length = 2;
};

/// Validates invariants (m >= 1, N >= 2, finite, T > 0, unique labels).
SnapshotSeries make_series(std::vector<std::string> channels, Eigen::MatrixXd samples,
                           double period_s, double t0_s = 0.0);

/// Rows are time samples, the first row holds channel labels.
SnapshotSeries read_csv(std::istream& in, double period_s, const std::string& source = "<stream>");
SnapshotSeries load_csv(const std::string& path, double period_s);

void write_csv(std::ostream& out, const SnapshotSeries& series);
void save_csv(const std::string& path, const SnapshotSeries& series);

SnapshotSeries window(const SnapshotSeries& series, const WindowSpec& spec);

SnapshotSeries remove_mean(const SnapshotSeries& series);

struct SpectrumPoint {
    double frequency_hz;
    double magnitude;
};

/// One-sided DFT coefficients X_k / N for k = 0..floor(N/2).
std::vector<std::complex<double>> complex_spectrum(const SnapshotSeries& series,
                                                   const std::string& channel);

/// Single-sided amplitude spectrum: a cosine of amplitude A at a bin frequency
/// shows magnitude A.
std::vector<SpectrumPoint> power_spectrum(const SnapshotSeries& series, const std::string& channel);

/// Strict local maxima with magnitude above `threshold`, sorted by descending magnitude.
std::vector<SpectrumPoint> find_peaks(const std::vector<SpectrumPoint>& spectrum, double threshold);

/// Root-sum-square of the amplitude spectra of the given channels (all when empty).
std::vector<SpectrumPoint> combined_spectrum(const SnapshotSeries& series, const std::vector<std::string>& channels = {});

/// Frequencies of the `count` largest combined-spectrum peaks above `min_hz`, ascending.
std::vector<double> dominant_frequencies(const SnapshotSeries& series, std::size_t count, double min_hz,
                                         const std::vector<std::string>& channels = {});

}  // namespace koopman
