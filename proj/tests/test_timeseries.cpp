#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "koopman/error.hpp"
#include "koopman/timeseries.hpp"

using namespace koopman;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected koopman::Error");
    return ErrorCode::InvalidArgument;
}

SnapshotSeries ramp(int m, int N, double T = 1.0) {
    Eigen::MatrixXd Y(m, N);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < N; ++k) Y(i, k) = 10.0 * i + k;
    std::vector<std::string> labels;
    for (int i = 0; i < m; ++i) labels.push_back("c" + std::to_string(i));
    return make_series(labels, Y, T);
}

// Reference DFT by direct summation.
std::vector<std::complex<double>> direct_dft(const Eigen::RowVectorXd& x) {
    const auto N = x.size();
    std::vector<std::complex<double>> X(static_cast<std::size_t>(N / 2 + 1));
    for (Eigen::Index f = 0; f <= N / 2; ++f) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index k = 0; k < N; ++k)
            acc += x(k) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(f * k) / static_cast<double>(N));
        X[static_cast<std::size_t>(f)] = acc / static_cast<double>(N);
    }
    return X;
}

}  // namespace

TEST_CASE("load_csv transposes rows into snapshots") {
    std::istringstream in("a,b,c\n0,0,0\n0,0,0\n0,0,0\n0,0,0\n0,0,0\n");
    const auto s = read_csv(in, 0.02);
    CHECK(s.m() == 3);
    CHECK(s.N() == 5);
    CHECK(s.samples.isZero());
    CHECK(s.period_s == 0.02);
    CHECK(s.channels == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("load_csv layout matches the snapshot convention") {
    std::istringstream in("x,y\n1,2\n3,4\n5,6\n");
    const auto s = read_csv(in, 1.0);
    CHECK(s.samples(0, 0) == 1);
    CHECK(s.samples(1, 0) == 2);
    CHECK(s.samples(0, 2) == 5);
    CHECK(s.samples(1, 2) == 6);
}

TEST_CASE("load_csv nine generator channels, 1001 rows") {
    std::ostringstream csv;
    csv << "g2,g3,g4,g5,g6,g7,g8,g9,g10\n";
    for (int k = 0; k < 1001; ++k) {
        for (int i = 0; i < 9; ++i) csv << (i ? "," : "") << std::sin(0.01 * k * (i + 1));
        csv << "\n";
    }
    std::istringstream in(csv.str());
    const auto s = read_csv(in, 1.0 / 50.0);
    CHECK(s.m() == 9);
    CHECK(s.N() == 1001);
}

TEST_CASE("load_csv rejections name the offending cell") {
    {
        std::istringstream in("a,b\n1,NaN\n2,3\n");
        try {
            read_csv(in, 1.0, "f.csv");
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFinite);
            CHECK(std::string(e.what()).find("row 2 column 2") != std::string::npos);
        }
    }
    {
        std::istringstream in("a,b\n1,2\n3\n");
        CHECK(code_of([&] { read_csv(in, 1.0); }) == ErrorCode::RaggedRows);
    }
    {
        std::istringstream in("");
        CHECK(code_of([&] { read_csv(in, 1.0); }) == ErrorCode::EmptyFile);
    }
    {
        std::istringstream in("1,2\n3,4\n");
        CHECK(code_of([&] { read_csv(in, 1.0); }) == ErrorCode::MissingHeader);
    }
    {
        std::istringstream in("a,b\n1,x\n");
        CHECK(code_of([&] { read_csv(in, 1.0); }) == ErrorCode::ParseError);
    }
    {
        std::istringstream in("a,b\n");
        CHECK(code_of([&] { read_csv(in, 1.0); }) == ErrorCode::EmptyFile);
    }
    CHECK(code_of([&] { load_csv("/nonexistent/file.csv", 1.0); }) == ErrorCode::IoError);
}

TEST_CASE("series invariants") {
    CHECK(code_of([] { make_series({"a", "a"}, Eigen::MatrixXd::Zero(2, 3), 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_series({"a"}, Eigen::MatrixXd::Zero(1, 3), 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_series({"a"}, Eigen::MatrixXd::Zero(1, 1), 1.0); }) == ErrorCode::TooFewSnapshots);
}

TEST_CASE("csv round trip is bit identical") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1e3);
    Eigen::MatrixXd Y(3, 50);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = g(rng);
    Y(0, 0) = 0.1;
    Y(1, 0) = -1e-300;
    const auto s = make_series({"a", "b", "c"}, Y, 0.5);
    std::stringstream buf;
    write_csv(buf, s);
    const std::string first = buf.str();
    const auto back = read_csv(buf, 0.5);
    CHECK(back.samples == s.samples);
    std::ostringstream again;
    write_csv(again, back);
    CHECK(again.str() == first);
}

TEST_CASE("window") {
    const auto s = ramp(2, 41, 30.0);
    SUBCASE("full window is identity") {
        const auto w = window(s, {0, 41});
        CHECK(w.samples == s.samples);
        CHECK(w.t0_s == s.t0_s);
    }
    SUBCASE("shortest density window") {
        const auto w = window(s, {0, 8});
        CHECK(w.N() == 8);
        CHECK(w.samples == s.samples.leftCols(8));
    }
    SUBCASE("offset advances t0") {
        const auto w = window(s, {5, 10});
        CHECK(w.t0_s == doctest::Approx(150.0));
        CHECK(w.samples(1, 0) == s.samples(1, 5));
    }
    SUBCASE("out of range") {
        const auto t = ramp(1, 10);
        CHECK(code_of([&] { window(t, {5, 6}); }) == ErrorCode::OutOfRange);
        CHECK(code_of([&] { window(t, {0, 1}); }) == ErrorCode::OutOfRange);
    }
    SUBCASE("composition") {
        for (std::size_t a = 0; a < 10; a += 3)
            for (std::size_t b = 0; b < 5; ++b) {
                const auto outer = window(s, {a, 25});
                const auto inner = window(outer, {b, 12});
                const auto direct = window(s, {a + b, 12});
                CHECK(inner.samples == direct.samples);
                CHECK(inner.t0_s == doctest::Approx(direct.t0_s));
            }
    }
}

TEST_CASE("remove_mean zeroes channel means") {
    const auto s = remove_mean(ramp(3, 20));
    CHECK(s.samples.rowwise().mean().norm() < 1e-12);
}

TEST_CASE("complex spectrum matches direct DFT summation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int N : {7, 16, 101, 256}) {
        Eigen::MatrixXd Y(1, N);
        for (int k = 0; k < N; ++k) Y(0, k) = g(rng);
        const auto s = make_series({"x"}, Y, 0.1);
        const auto fft = complex_spectrum(s, "x");
        const auto ref = direct_dft(Y.row(0));
        REQUIRE(fft.size() == ref.size());
        for (std::size_t f = 0; f < fft.size(); ++f) CHECK(std::abs(fft[f] - ref[f]) < 1e-12);
    }
}

TEST_CASE("power spectrum peak of a 1.10 Hz cosine") {
    const int N = 1000;
    const double T = 1.0 / 50.0;
    Eigen::MatrixXd Y(1, N);
    for (int k = 0; k < N; ++k) Y(0, k) = std::cos(2.0 * std::numbers::pi * 1.10 * k * T);
    const auto s = make_series({"g3"}, Y, T);
    const auto spec = power_spectrum(s, "g3");
    CHECK(spec.back().frequency_hz == doctest::Approx(25.0));
    const auto peaks = find_peaks(spec, 0.1);
    REQUIRE(peaks.size() == 1);
    CHECK(std::abs(peaks[0].frequency_hz - 1.10) <= 1.0 / (N * T));
    CHECK(peaks[0].magnitude == doctest::Approx(1.0).epsilon(1e-9));

    const auto ref = direct_dft(Y.row(0));
    for (std::size_t f = 1; f + 1 < spec.size(); ++f) CHECK(spec[f].magnitude == doctest::Approx(2.0 * std::abs(ref[f])));
}

TEST_CASE("power spectrum of a constant channel") {
    const auto s = make_series({"c"}, Eigen::MatrixXd::Constant(1, 64, 3.0), 0.5);
    const auto spec = power_spectrum(s, "c");
    CHECK(spec[0].magnitude == doctest::Approx(3.0));
    for (std::size_t f = 1; f < spec.size(); ++f) CHECK(spec[f].magnitude < 1e-12);
    CHECK(find_peaks(spec, 1e-9).size() == 1);
}

TEST_CASE("complex spectrum is linear") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    Eigen::MatrixXd Y(3, 128);
    for (Eigen::Index i = 0; i < 2 * 128; ++i) Y(i) = g(rng);
    Y.row(2) = 2.5 * Y.row(0) - 0.5 * Y.row(1);
    const auto s = make_series({"a", "b", "c"}, Y, 1.0);
    const auto A = complex_spectrum(s, "a"), B = complex_spectrum(s, "b"), C = complex_spectrum(s, "c");
    for (std::size_t f = 0; f < A.size(); ++f) CHECK(std::abs(C[f] - (2.5 * A[f] - 0.5 * B[f])) < 1e-12);
}

TEST_CASE("unknown channel") {
    const auto s = ramp(2, 8);
    CHECK(code_of([&] { power_spectrum(s, "zz"); }) == ErrorCode::UnknownChannel);
}
