#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numbers>
#include <random>

#include "koopman/coherency.hpp"
#include "koopman/error.hpp"
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

KoopmanDecomposition manual(const Eigen::VectorXcd& lambda, const Eigen::MatrixXcd& V) {
    KoopmanDecomposition d;
    d.eigenvalues = lambda;
    d.modes = V;
    d.period_s = 1.0;
    for (Eigen::Index i = 0; i < V.rows(); ++i) d.channels.push_back("g" + std::to_string(i + 1));
    return d;
}

ModeSummary with_phases(const std::vector<double>& phases) {
    ModeSummary s;
    s.amplitudes = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(phases.size()));
    s.phases = Eigen::Map<const Eigen::VectorXd>(phases.data(), s.amplitudes.size());
    for (std::size_t i = 0; i < phases.size(); ++i) s.channels.push_back("c" + std::to_string(i));
    return s;
}

std::vector<std::vector<std::string>> members(const std::vector<CoherentGroup>& groups) {
    std::vector<std::vector<std::string>> out;
    for (const auto& g : groups) out.push_back(g.members);
    return out;
}

}  // namespace

TEST_CASE("real mode summary") {
    const auto d = manual((Eigen::VectorXcd(1) << 0.8).finished(), (Eigen::MatrixXcd(2, 1) << 1.0, -1.0).finished());
    const auto s = summarize_mode(d, 0);
    CHECK_FALSE(s.is_pair);
    CHECK(s.amplitudes(0) == doctest::Approx(1.0));
    CHECK(s.amplitudes(1) == doctest::Approx(1.0));
    CHECK(s.phases(0) == doctest::Approx(0.0));
    CHECK(s.phases(1) == doctest::Approx(pi));
    CHECK(s.frequency_hz == 0.0);
}

TEST_CASE("pair summary doubles amplitudes and groups in-phase channels") {
    const cd lam = std::polar(0.99, 0.5);
    Eigen::MatrixXcd V(3, 2);
    V.col(0) << std::polar(0.6, 3 * pi / 4), std::polar(0.6, 3 * pi / 4), std::polar(0.05, 0.0);
    V.col(1) = V.col(0).conjugate();
    const auto d = manual((Eigen::VectorXcd(2) << lam, std::conj(lam)).finished(), V);
    const auto all = summarize(d);
    REQUIRE(all.size() == 1);
    const auto& s = all[0];
    CHECK(s.is_pair);
    CHECK(s.mode_index == 0);
    CHECK(s.amplitudes(0) == doctest::Approx(1.2));
    CHECK(s.amplitudes(2) == doctest::Approx(0.1));
    CHECK(s.phases(1) == doctest::Approx(3 * pi / 4));
    CHECK(s.frequency_hz == doctest::Approx(0.5 / (2 * pi)));

    const auto g = phase_groups(s, 0.3, 0.5);
    REQUIRE(g.size() == 1);
    CHECK(g[0].members == std::vector<std::string>{"g1", "g2"});
    CHECK(g[0].reference_phase_rad == doctest::Approx(3 * pi / 4));
    CHECK(phase_groups(s, 0.3).size() == 2);
}

TEST_CASE("summary picks the positive frequency member") {
    const cd lam = std::polar(0.99, 0.5);
    Eigen::MatrixXcd V(1, 2);
    V << std::polar(1.0, 0.4), std::polar(1.0, -0.4);
    const auto d = manual((Eigen::VectorXcd(2) << std::conj(lam), lam).finished(), V.rowwise().reverse());
    const auto s = summarize(d);
    REQUIRE(s.size() == 1);
    CHECK(s[0].mode_index == 1);
    CHECK(s[0].phases(0) == doctest::Approx(0.4));
}

TEST_CASE("modal dynamics of a real mode") {
    const double lam = 0.9;
    const auto d = manual((Eigen::VectorXcd(1) << lam).finished(), (Eigen::MatrixXcd(1, 1) << 1.0).finished());
    const auto s = modal_dynamics(d, 0, 3);
    REQUIRE(s.N() == 4);
    for (int k = 0; k <= 3; ++k) CHECK(s.samples(0, k) == doctest::Approx(2.0 * std::pow(lam, k)));
}

TEST_CASE("modal dynamics of pairs reconstruct the data") {
    std::mt19937_64 rng(17);
    auto p = planted::random_pairs(rng, 4, 2, 0.95, 1.02);
    // Add one real mode so both branches of the identity are exercised.
    p.lambda.conservativeResize(5);
    p.lambda(4) = 0.97;
    p.V.conservativeResize(4, 5);
    p.V.col(4) << 0.5, -0.2, 0.1, 0.3;
    const int N = 12;
    const auto s = planted::series(p, N);
    const auto d = decompose_arnoldi(s);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(4, N - 1);
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (is_real_eigenvalue(d.eigenvalues(j)))
            sum += 0.5 * modal_dynamics(d, j, N - 2).samples;
        else if (d.eigenvalues(j).imag() > 0)
            sum += modal_dynamics(d, j, N - 2).samples;
    }
    CHECK((sum - s.samples.leftCols(N - 1)).norm() < 1e-8 * s.samples.norm());
}

TEST_CASE("modal dynamics errors") {
    const cd lam = std::polar(0.9, 0.3);
    const auto lone = manual((Eigen::VectorXcd(1) << lam).finished(), (Eigen::MatrixXcd(1, 1) << 1.0).finished());
    CHECK(code_of([&] { modal_dynamics(lone, 0, 5); }) == ErrorCode::NotAPair);
    CHECK(code_of([&] { modal_dynamics(lone, 3, 5); }) == ErrorCode::OutOfRange);
}

TEST_CASE("single linkage chains through intermediate channels") {
    const auto g = phase_groups(with_phases({0.0, 0.1, 0.25, pi}), 0.15);
    REQUIRE(g.size() == 2);
    CHECK(g[0].members == std::vector<std::string>{"c0", "c1", "c2"});
    CHECK(g[1].members == std::vector<std::string>{"c3"});
}

TEST_CASE("phase wrap-around") {
    CHECK(circular_distance(pi - 0.05, -pi + 0.05) == doctest::Approx(0.1));
    CHECK(wrap_phase(-pi) == doctest::Approx(pi));
    CHECK(wrap_phase(3 * pi) == doctest::Approx(pi));
    const auto g = phase_groups(with_phases({pi - 0.05, -pi + 0.05}), 0.2);
    CHECK(g.size() == 1);
    CHECK(std::abs(g[0].reference_phase_rad) == doctest::Approx(pi));
}

TEST_CASE("grouping is invariant under a common rotation") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> ph(9);
        for (auto& x : ph) x = u(rng);
        const double rot = u(rng);
        std::vector<double> rotated(ph.size());
        std::transform(ph.begin(), ph.end(), rotated.begin(), [&](double x) { return wrap_phase(x + rot); });
        auto a = members(phase_groups(with_phases(ph), 0.4));
        auto b = members(phase_groups(with_phases(rotated), 0.4));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("raising the amplitude floor never enlarges a group") {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(-pi, pi), amp(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = with_phases(std::vector<double>(10));
        for (Eigen::Index i = 0; i < 10; ++i) {
            s.phases(i) = u(rng);
            s.amplitudes(i) = amp(rng);
        }
        const auto low = phase_groups(s, 0.5, 0.2);
        const auto high = phase_groups(s, 0.5, 0.6);
        for (const auto& gh : high) {
            bool contained = false;
            for (const auto& gl : low)
                contained |= std::includes(gl.members.begin(), gl.members.end(), gh.members.begin(), gh.members.end(),
                                           [](const std::string& x, const std::string& y) {
                                               return std::stoi(x.substr(1)) < std::stoi(y.substr(1));
                                           });
            CHECK(contained);
        }
    }
}

TEST_CASE("groups are epsilon coherent and separated") {
    std::mt19937_64 rng(82);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> ph(8);
        for (auto& x : ph) x = u(rng);
        const double eps = 0.5;
        const auto groups = phase_groups(with_phases(ph), eps);
        std::vector<int> label(8);
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (const auto& m : groups[g].members) label[std::stoul(m.substr(1))] = static_cast<int>(g);
        for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b)
                if (circular_distance(ph[a], ph[b]) <= eps) CHECK(label[a] == label[b]);
        for (const auto& g : groups)
            if (g.members.size() == 2) {
                const auto a = std::stoul(g.members[0].substr(1)), b = std::stoul(g.members[1].substr(1));
                CHECK(circular_distance(ph[a], ph[b]) <= eps);
            }
    }
}

TEST_CASE("epsilon bounds") {
    const auto s = with_phases({0.0, 1.0});
    CHECK(code_of([&] { phase_groups(s, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { phase_groups(s, pi); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { phase_groups(s, 0.1, -1.0); }) == ErrorCode::InvalidArgument);
}
