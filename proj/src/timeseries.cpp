#include "koopman/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <fftw3.h>

#include "koopman/error.hpp"

namespace koopman {

namespace {

std::mutex fftw_planner_mutex;

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        cells.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return cells;
}

bool parse_double(const std::string& cell, double& value) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

std::string where(const std::string& source, std::size_t row, std::size_t col) {
    std::ostringstream os;
    os << source << " row " << row << " column " << col;
    return os.str();
}

}  // namespace

Eigen::Index SnapshotSeries::channel_index(const std::string& label) const {
    auto it = std::find(channels.begin(), channels.end(), label);
    if (it == channels.end()) throw Error(ErrorCode::UnknownChannel, "no channel '" + label + "'");
    return static_cast<Eigen::Index>(it - channels.begin());
}

SnapshotSeries make_series(std::vector<std::string> channels, Eigen::MatrixXd samples,
                           double period_s, double t0_s) {
    if (samples.rows() < 1) throw Error(ErrorCode::EmptyInput, "series has no channels");
    if (samples.cols() < 2)
        throw Error(ErrorCode::TooFewSnapshots, "series needs at least 2 snapshots");
    if (static_cast<Eigen::Index>(channels.size()) != samples.rows())
        throw Error(ErrorCode::ChannelMismatch, "label count does not match row count");
    if (!(period_s > 0.0) || !std::isfinite(period_s))
        throw Error(ErrorCode::InvalidArgument, "period_s must be positive");
    std::set<std::string> seen;
    for (const auto& c : channels)
        if (!seen.insert(c).second) throw Error(ErrorCode::InvalidArgument, "duplicate channel '" + c + "'");
    for (Eigen::Index k = 0; k < samples.cols(); ++k)
        for (Eigen::Index i = 0; i < samples.rows(); ++i)
            if (!std::isfinite(samples(i, k)))
                throw Error(ErrorCode::NonFinite, "sample " + std::to_string(k) + " channel " + channels[i]);
    return SnapshotSeries{std::move(channels), std::move(samples), period_s, t0_s};
}

SnapshotSeries read_csv(std::istream& in, double period_s, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            header = split_row(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::EmptyFile, source + " is empty");
    if (!header.empty() && header[0].size() >= 3 && static_cast<unsigned char>(header[0][0]) == 0xEF)
        header[0] = header[0].substr(3);  // UTF-8 BOM
    {
        double tmp;
        bool all_numeric = std::all_of(header.begin(), header.end(),
                                       [&](const std::string& c) { return parse_double(c, tmp); });
        if (all_numeric)
            throw Error(ErrorCode::MissingHeader, source + " row " + std::to_string(lineno) +
                                                      " is numeric, expected channel labels");
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j].empty()) throw Error(ErrorCode::MissingHeader, where(source, lineno, j + 1) + " empty label");
    }

    const std::size_t m = header.size();
    std::vector<double> values;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (cells.size() != m)
            throw Error(ErrorCode::RaggedRows, source + " row " + std::to_string(lineno) + " has " +
                                                   std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(m));
        for (std::size_t j = 0; j < m; ++j) {
            double v;
            if (!parse_double(cells[j], v))
                throw Error(ErrorCode::ParseError, where(source, lineno, j + 1) + " not numeric: '" + cells[j] + "'");
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, where(source, lineno, j + 1));
            values.push_back(v);
        }
        ++n_rows;
    }
    if (n_rows == 0) throw Error(ErrorCode::EmptyFile, source + " has no data rows");

    Eigen::MatrixXd samples(m, n_rows);
    for (std::size_t k = 0; k < n_rows; ++k)
        for (std::size_t j = 0; j < m; ++j) samples(j, k) = values[k * m + j];
    return make_series(std::move(header), std::move(samples), period_s);
}

SnapshotSeries load_csv(const std::string& path, double period_s) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_csv(in, period_s, path);
}

void write_csv(std::ostream& out, const SnapshotSeries& series) {
    for (std::size_t j = 0; j < series.channels.size(); ++j) out << (j ? "," : "") << series.channels[j];
    out << '\n';
    char buf[64];
    for (Eigen::Index k = 0; k < series.N(); ++k) {
        for (Eigen::Index j = 0; j < series.m(); ++j) {
            auto res = std::to_chars(buf, buf + sizeof buf, series.samples(j, k));
            if (j) out << ',';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

void save_csv(const std::string& path, const SnapshotSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    write_csv(out, series);
}

SnapshotSeries window(const SnapshotSeries& series, const WindowSpec& spec) {
    const auto N = static_cast<std::size_t>(series.N());
    if (spec.length < 2 || spec.start_index > N || spec.length > N - spec.start_index)
        throw Error(ErrorCode::OutOfRange, "window [" + std::to_string(spec.start_index) + ", +" +
                                               std::to_string(spec.length) + ") outside N=" + std::to_string(N));
    SnapshotSeries out;
    out.channels = series.channels;
    out.samples = series.samples.middleCols(static_cast<Eigen::Index>(spec.start_index),
                                            static_cast<Eigen::Index>(spec.length));
    out.period_s = series.period_s;
    out.t0_s = series.t0_s + static_cast<double>(spec.start_index) * series.period_s;
    return out;
}

SnapshotSeries remove_mean(const SnapshotSeries& series) {
    SnapshotSeries out = series;
    out.samples.colwise() -= series.samples.rowwise().mean();
    return out;
}

std::vector<std::complex<double>> complex_spectrum(const SnapshotSeries& series, const std::string& channel) {
    const auto row = series.channel_index(channel);
    const int N = static_cast<int>(series.N());
    const int n_out = N / 2 + 1;

    double* in = fftw_alloc_real(N);
    fftw_complex* out = fftw_alloc_complex(n_out);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan = fftw_plan_dft_r2c_1d(N, in, out, FFTW_ESTIMATE);
    }
    for (int k = 0; k < N; ++k) in[k] = series.samples(row, k);
    fftw_execute(plan);

    std::vector<std::complex<double>> result(n_out);
    for (int k = 0; k < n_out; ++k) result[k] = std::complex<double>(out[k][0], out[k][1]) / static_cast<double>(N);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return result;
}

std::vector<SpectrumPoint> power_spectrum(const SnapshotSeries& series, const std::string& channel) {
    const auto X = complex_spectrum(series, channel);
    const auto N = series.N();
    const double df = 1.0 / (static_cast<double>(N) * series.period_s);
    std::vector<SpectrumPoint> spec(X.size());
    for (std::size_t k = 0; k < X.size(); ++k) {
        const bool edge = k == 0 || (N % 2 == 0 && static_cast<Eigen::Index>(k) == N / 2);
        spec[k] = {static_cast<double>(k) * df, (edge ? 1.0 : 2.0) * std::abs(X[k])};
    }
    return spec;
}

std::vector<SpectrumPoint> find_peaks(const std::vector<SpectrumPoint>& spectrum, double threshold) {
    std::vector<SpectrumPoint> peaks;
    const std::size_t n = spectrum.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double v = spectrum[k].magnitude;
        if (v <= threshold) continue;
        const bool left = k == 0 || v > spectrum[k - 1].magnitude;
        const bool right = k + 1 == n || v > spectrum[k + 1].magnitude;
        if (left && right) peaks.push_back(spectrum[k]);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.magnitude > b.magnitude; });
    return peaks;
}

std::vector<SpectrumPoint> combined_spectrum(const SnapshotSeries& series, const std::vector<std::string>& channels) {
    const std::vector<std::string>& names = channels.empty() ? series.channels : channels;
    if (names.empty()) throw Error(ErrorCode::EmptyInput, "no channels to combine");
    std::vector<SpectrumPoint> out;
    for (const auto& name : names) {
        const auto spec = power_spectrum(series, name);
        if (out.empty()) {
            out = spec;
            for (auto& p : out) p.magnitude = 0.0;
        }
        for (std::size_t k = 0; k < spec.size(); ++k) out[k].magnitude += spec[k].magnitude * spec[k].magnitude;
    }
    for (auto& p : out) p.magnitude = std::sqrt(p.magnitude);
    return out;
}

std::vector<double> dominant_frequencies(const SnapshotSeries& series, std::size_t count, double min_hz,
                                         const std::vector<std::string>& channels) {
    std::vector<double> freqs;
    for (const auto& p : find_peaks(combined_spectrum(series, channels), 0.0)) {
        if (freqs.size() == count) break;
        if (p.frequency_hz > min_hz) freqs.push_back(p.frequency_hz);
    }
    std::sort(freqs.begin(), freqs.end());
    return freqs;
}

}  // namespace koopman
