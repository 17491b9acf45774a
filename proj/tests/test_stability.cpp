#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <numbers>
#include <random>

#include "koopman/error.hpp"
#include "koopman/stability.hpp"
#include "planted.hpp"

using namespace koopman;
using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

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

KoopmanDecomposition single_pair(cd lambda, cd v, double T = 1.0) {
    KoopmanDecomposition d;
    d.eigenvalues = (Eigen::VectorXcd(2) << lambda, std::conj(lambda)).finished();
    d.modes = (Eigen::MatrixXcd(1, 2) << v, std::conj(v)).finished();
    d.period_s = T;
    d.channels = {"x"};
    return d;
}

}  // namespace

TEST_CASE("decaying spectrum is stable") {
    KoopmanDecomposition d;
    d.eigenvalues = (Eigen::VectorXcd(3) << 0.5, std::polar(0.9, 0.2), std::polar(0.9, -0.2)).finished();
    d.modes = Eigen::MatrixXcd::Ones(1, 3);
    const auto v = assess(d);
    CHECK(v.verdict == Verdict::stable);
    CHECK(v.unstable_pairs.empty());
}

TEST_CASE("planted growing pair is reported once") {
    std::mt19937_64 rng(4);
    auto p = planted::random_pairs(rng, 4, 2, 0.9, 0.95);
    p.lambda(0) = std::polar(1.05, std::arg(p.lambda(0)));
    p.lambda(1) = std::conj(p.lambda(0));
    const auto d = decompose_arnoldi(planted::series(p, 10, 30.0));
    const auto v = assess(d, 0.01);
    CHECK(v.verdict == Verdict::unstable);
    REQUIRE(v.unstable_pairs.size() == 1);
    const auto& u = v.unstable_pairs[0];
    CHECK(u.growth_rate == doctest::Approx(1.05).epsilon(1e-8));
    CHECK(u.frequency_hz == doctest::Approx(std::arg(p.lambda(0)) / (2 * pi * 30.0)).epsilon(1e-8));
    CHECK(d.eigenvalues(u.mode_index).imag() > 0);
    CHECK(assess(d, 0.06).verdict == Verdict::stable);
    CHECK(code_of([&] { assess(d, -0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("verdict is invariant under data scaling") {
    std::mt19937_64 rng(6);
    const auto p = planted::random_pairs(rng, 5, 2, 0.97, 1.03);
    auto s = planted::series(p, 10);
    const auto a = assess(decompose_arnoldi(s));
    s.samples *= 1e4;
    const auto b = assess(decompose_arnoldi(s));
    CHECK(a.verdict == b.verdict);
    CHECK(a.unstable_pairs.size() == b.unstable_pairs.size());
}

TEST_CASE("base flow of a quarter-turn pair") {
    const auto s = base_flow(single_pair(cd(0.0, 1.0), 1.0), 0, 4);
    const double expect[] = {2, 0, -2, 0, 2};
    for (int k = 0; k <= 4; ++k) CHECK(s.samples(0, k) == doctest::Approx(expect[k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("base flow envelope of a growing pair") {
    const double r = 1.05;
    const auto s = base_flow(single_pair(std::polar(r, 0.4), std::polar(0.5, 0.2)), 0, 40);
    CHECK(std::pow(r, 10) == doctest::Approx(1.6289).epsilon(1e-4));
    double prev = 0.0;
    for (int k = 0; k <= 40; ++k) {
        const double env = 2.0 * 0.5 * std::pow(r, k);
        CHECK(std::abs(s.samples(0, k)) <= env * (1 + 1e-12));
        CHECK(env > prev);
        prev = env;
    }
    const auto d = single_pair(std::polar(r, 0.4), 1.0);
    CHECK(std::abs(base_flow(d, 0, 10).samples(0, 10) - 2.0 * std::pow(r, 10) * std::cos(4.0)) < 1e-12);
}

TEST_CASE("base flow rejects real modes") {
    KoopmanDecomposition d;
    d.eigenvalues = (Eigen::VectorXcd(1) << 1.1).finished();
    d.modes = Eigen::MatrixXcd::Ones(1, 1);
    CHECK(code_of([&] { base_flow(d, 0, 3); }) == ErrorCode::NotAPair);
}

TEST_CASE("bin index") {
    const auto g = GridSpec::uniform(41, 1.2);
    CHECK(g.re_edges.size() == 42);
    CHECK(bin_index(g.re_edges, -1.2) == 0);
    CHECK(bin_index(g.re_edges, 1.2) == 40);
    CHECK(bin_index(g.re_edges, 0.0) == 20);
    CHECK(bin_index(g.re_edges, 1.3) == -1);
}

TEST_CASE("density sweep of decaying data is empty") {
    std::mt19937_64 rng(60);
    const auto p = planted::random_pairs(rng, 8, 2, 0.8, 0.9);
    const auto d = density_sweep(planted::series(p, 41), 8, Algorithm::arnoldi);
    CHECK(d.total == 0);
    CHECK(d.counts.sum() == 0);
}

TEST_CASE("density sweep bookkeeping") {
    std::mt19937_64 rng(61);
    auto p = planted::random_pairs(rng, 8, 3, 0.85, 0.95);
    p.lambda(0) = std::polar(1.02, 0.6);
    p.lambda(1) = std::conj(p.lambda(0));
    auto s = planted::series(p, 41, 30.0);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (Eigen::Index i = 0; i < s.samples.size(); ++i) s.samples(i) += g(rng);
    const auto d = density_sweep(s, 8, Algorithm::arnoldi, GridSpec::uniform(), 0.0, 1);
    CHECK(d.window_lengths.front() == 8);
    CHECK(d.window_lengths.size() + d.skipped.size() == 34);
    long sum = 0;
    for (auto c : d.per_window) sum += c;
    CHECK(sum == d.total);
    CHECK(d.counts.sum() + d.out_of_grid == d.total);

    // Per-window count agrees with a direct decomposition of that window.
    for (std::size_t w = 0; w < d.window_lengths.size(); w += 7) {
        const auto dec = decompose_arnoldi(window(s, {0, static_cast<std::size_t>(d.window_lengths[w])}));
        long direct = 0;
        for (Eigen::Index j = 0; j < dec.size(); ++j) direct += std::abs(dec.eigenvalues(j)) > 1.0;
        CHECK(direct == d.per_window[w]);
    }

    const int i = bin_index(d.re_edges, p.lambda(0).real());
    const int j = bin_index(d.im_edges, p.lambda(0).imag());
    CHECK(d.counts(i, j) >= 20);

    SUBCASE("thread count does not change the result") {
        const auto e = density_sweep(s, 8, Algorithm::arnoldi, GridSpec::uniform(), 0.0, 4);
        CHECK(e.counts == d.counts);
        CHECK(e.per_window == d.per_window);
        CHECK(e.total == d.total);
    }
    SUBCASE("prony visits even windows") {
        const auto e = density_sweep(s, 8, Algorithm::prony);
        for (auto n : e.window_lengths) CHECK(n % 2 == 0);
    }
}

TEST_CASE("density sweep arguments") {
    std::mt19937_64 rng(62);
    const auto s = planted::series(planted::random_pairs(rng, 3, 1, 0.9, 1.0), 10);
    CHECK(code_of([&] { density_sweep(s, 2, Algorithm::arnoldi); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { density_sweep(s, 11, Algorithm::arnoldi); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { density_sweep(s, 4, Algorithm::fourier); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("synthetic dataset shape and dominant channels") {
    const auto s = synthetic_ucte(1);
    CHECK(s.m() == 8);
    CHECK(s.N() == 41);
    CHECK(s.period_s == 30.0);
    CHECK(synthetic_ucte(1).samples == s.samples);
    CHECK(synthetic_ucte(2).samples != s.samples);

    const auto d = decompose_arnoldi(s);
    const auto v = assess(d);
    REQUIRE_FALSE(v.unstable_pairs.empty());
    const double f0 = 1.0 / 2220.0;
    auto best = v.unstable_pairs[0];
    for (const auto& u : v.unstable_pairs)
        if (std::abs(u.frequency_hz - f0) < std::abs(best.frequency_hz - f0)) best = u;
    CHECK(best.frequency_hz == doctest::Approx(f0).epsilon(0.1));
    const Eigen::VectorXd amp = d.modes.col(best.mode_index).cwiseAbs();
    std::vector<Eigen::Index> order(8);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return amp(a) > amp(b); });
    std::sort(order.begin(), order.begin() + 4);
    CHECK(std::vector<Eigen::Index>(order.begin(), order.begin() + 4) == std::vector<Eigen::Index>{0, 1, 2, 3});
}
