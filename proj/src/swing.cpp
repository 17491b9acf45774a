#include "koopman/swing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "koopman/error.hpp"

namespace koopman {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd to_vector(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "field '" + name + "' must be an array");
    VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

MatrixXd to_matrix(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "field '" + name + "' must be a 2-D array");
    MatrixXd M(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size()) throw Error(ErrorCode::RaggedRows, "field '" + name + "' is ragged");
        for (std::size_t c = 0; c < j[r].size(); ++c)
            M(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
    return M;
}

double inertia_scale(const SwingSystem& sys, Index i) {
    return std::numbers::pi * sys.f_b / sys.H(i);
}

}  // namespace

void SwingSystem::validate() const {
    const Index n = n_gen;
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "swing system: " + what); };
    if (n < 1) bad("no generators");
    if (H.size() != n || D.size() != n || P_m.size() != n || E.size() != n) bad("vector sizes differ from n_gen");
    if (G.rows() != n || G.cols() != n || B.rows() != n || B.cols() != n) bad("admittance matrices must be n_gen x n_gen");
    if (bus.G.size() != n || bus.B.size() != n) bad("infinite-bus coupling sizes differ from n_gen");
    if (static_cast<Index>(labels.size()) != n) bad("label count differs from n_gen");
    if ((H.array() <= 0).any()) bad("H must be positive");
    if ((E.array() <= 0).any()) bad("E must be positive");
    if ((D.array() < 0).any()) bad("D must be nonnegative");
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (std::abs(G(i, j) - G(j, i)) > 1e-9 || std::abs(B(i, j) - B(j, i)) > 1e-9) bad("G and B must be symmetric");
}

SwingSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    SwingSystem s;
    try {
        s.f_b = j.at("f_b").get<double>();
        s.labels = j.at("labels").get<std::vector<std::string>>();
        s.H = to_vector(j.at("H"), "H");
        s.D = to_vector(j.at("D"), "D");
        s.P_m = to_vector(j.at("P_m"), "P_m");
        s.E = to_vector(j.at("E"), "E");
        s.G = to_matrix(j.at("G"), "G");
        s.B = to_matrix(j.at("B"), "B");
        s.n_gen = static_cast<int>(s.H.size());
        const auto& ib = j.at("infinite_bus");
        s.bus.label = ib.value("label", "g1");
        s.bus.E = ib.at("E").get<double>();
        s.bus.delta = ib.value("delta", 0.0);
        s.bus.G = to_vector(ib.at("G"), "infinite_bus.G");
        s.bus.B = to_vector(ib.at("B"), "infinite_bus.B");
        s.delta_guess = j.contains("delta_guess") ? to_vector(j["delta_guess"], "delta_guess") : VectorXd::Zero(s.n_gen);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    s.validate();
    return s;
}

VectorXd electrical_power(const SwingSystem& sys, const VectorXd& delta) {
    const Index n = sys.n_gen;
    VectorXd pe(n);
    for (Index i = 0; i < n; ++i) {
        double p = sys.G(i, i) * sys.E(i) * sys.E(i);
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = delta(i) - delta(j);
            p += sys.E(i) * sys.E(j) * (sys.G(i, j) * std::cos(d) + sys.B(i, j) * std::sin(d));
        }
        const double d = delta(i) - sys.bus.delta;
        p += sys.E(i) * sys.bus.E * (sys.bus.G(i) * std::cos(d) + sys.bus.B(i) * std::sin(d));
        pe(i) = p;
    }
    return pe;
}

MatrixXd power_jacobian(const SwingSystem& sys, const VectorXd& delta) {
    const Index n = sys.n_gen;
    MatrixXd J = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = delta(i) - delta(j);
            const double e = sys.E(i) * sys.E(j);
            J(i, j) = e * (sys.G(i, j) * std::sin(d) - sys.B(i, j) * std::cos(d));
            J(i, i) -= J(i, j);
        }
        const double d = delta(i) - sys.bus.delta;
        J(i, i) += sys.E(i) * sys.bus.E * (-sys.bus.G(i) * std::sin(d) + sys.bus.B(i) * std::cos(d));
    }
    return J;
}

SwingDerivative rhs(const SwingSystem& sys, const SwingState& state) {
    const VectorXd pe = electrical_power(sys, state.delta);
    SwingDerivative out{state.omega, VectorXd(sys.n_gen)};
    for (Index i = 0; i < sys.n_gen; ++i)
        out.d_omega(i) = inertia_scale(sys, i) * (-sys.D(i) * state.omega(i) + sys.P_m(i) - pe(i));
    return out;
}

Equilibrium find_equilibrium(const SwingSystem& sys, const VectorXd& guess, int max_iter, double tol) {
    if (guess.size() != sys.n_gen || !guess.allFinite())
        throw Error(ErrorCode::InvalidArgument, "equilibrium guess must be a finite n_gen vector");
    const Index n = sys.n_gen;
    VectorXd scale(n);
    for (Index i = 0; i < n; ++i) scale(i) = inertia_scale(sys, i);

    Equilibrium eq;
    VectorXd delta = guess;
    auto mismatch = [&](const VectorXd& d) { return VectorXd(sys.P_m - electrical_power(sys, d)); };
    VectorXd f = mismatch(delta);
    int it = 0;
    while (f.cwiseProduct(scale).cwiseAbs().maxCoeff() > tol) {
        if (it == max_iter)
            throw Error(ErrorCode::NoConvergence, "Newton did not converge in " + std::to_string(max_iter) + " iterations");
        const MatrixXd J = power_jacobian(sys, delta);
        Eigen::PartialPivLU<MatrixXd> lu(J);
        const VectorXd step = lu.solve(f);
        if (!step.allFinite()) throw Error(ErrorCode::NoConvergence, "singular power-flow Jacobian");
        delta += step;
        f = mismatch(delta);
        ++it;
    }
    eq.state = SwingState{delta, VectorXd::Zero(n), 0.0};
    eq.iterations = it;
    eq.residual = f.cwiseProduct(scale).cwiseAbs().maxCoeff();

    MatrixXd A = MatrixXd::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n) = -(scale.asDiagonal() * power_jacobian(sys, delta));
    A.bottomRightCorner(n, n) = (-scale.cwiseProduct(sys.D)).asDiagonal();
    Eigen::EigenSolver<MatrixXd> es(A, false);
    const double max_re = es.eigenvalues().real().maxCoeff();
    eq.stable = es.info() == Eigen::Success && max_re <= 1e-6 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return eq;
}

VectorXd pack(const SwingState& s) {
    VectorXd x(s.delta.size() + s.omega.size());
    x << s.delta, s.omega;
    return x;
}

SwingState unpack(const VectorXd& x, int n_gen) {
    if (x.size() != 2 * n_gen) throw Error(ErrorCode::ChannelMismatch, "state vector length must be 2 n_gen");
    return SwingState{x.head(n_gen), x.tail(n_gen), 0.0};
}

SwingState rk4_step(const SwingSystem& sys, const SwingState& s, double dt) {
    auto f = [&](const SwingState& st) {
        const auto d = rhs(sys, st);
        return SwingState{d.d_delta, d.d_omega, 0.0};
    };
    auto axpy = [](const SwingState& a, double h, const SwingState& k) {
        return SwingState{a.delta + h * k.delta, a.omega + h * k.omega, 0.0};
    };
    const SwingState k1 = f(s);
    const SwingState k2 = f(axpy(s, 0.5 * dt, k1));
    const SwingState k3 = f(axpy(s, 0.5 * dt, k2));
    const SwingState k4 = f(axpy(s, dt, k3));
    SwingState out;
    out.delta = s.delta + (dt / 6.0) * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta);
    out.omega = s.omega + (dt / 6.0) * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
    out.t_s = s.t_s + dt;
    return out;
}

Observable parse_observable(const std::string& name) {
    if (name == "omega") return Observable::omega;
    if (name == "delta") return Observable::delta;
    if (name == "full_state" || name == "full") return Observable::full_state;
    throw Error(ErrorCode::InvalidArgument, "unknown observable '" + name + "'");
}

const char* to_string(Observable o) {
    switch (o) {
        case Observable::omega: return "omega";
        case Observable::delta: return "delta";
        case Observable::full_state: return "full_state";
    }
    return "unknown";
}

std::vector<std::string> channel_labels(const SwingSystem& sys, Observable o) {
    std::vector<std::string> out;
    if (o == Observable::omega) return sys.labels;
    for (const auto& l : sys.labels) out.push_back("delta_" + l);
    if (o == Observable::full_state)
        for (const auto& l : sys.labels) out.push_back("omega_" + l);
    return out;
}

SimulationResult simulate(const SwingSystem& sys, const SwingState& initial, const SimulationOptions& o) {
    if (!(o.dt_s > 0.0) || !(o.t_end_s > 0.0) || !(o.period_s > 0.0))
        throw Error(ErrorCode::InvalidArgument, "dt, t_end and period must be positive");
    const auto steps_per_sample = static_cast<long>(std::llround(o.period_s / o.dt_s));
    if (steps_per_sample < 1 || std::abs(steps_per_sample * o.dt_s - o.period_s) > 1e-9 * o.period_s)
        throw Error(ErrorCode::InvalidArgument, "sampling period must be an integer multiple of dt");
    if (initial.delta.size() != sys.n_gen || initial.omega.size() != sys.n_gen)
        throw Error(ErrorCode::InvalidArgument, "initial state size differs from n_gen");
    const auto n_samples = static_cast<Index>(std::floor(o.t_end_s / o.period_s + 1e-9)) + 1;
    const Index n = sys.n_gen;
    const Index rows = o.observable == Observable::full_state ? 2 * n : n;

    Eigen::MatrixXd data(rows, n_samples);
    auto record = [&](Index k, const SwingState& s) {
        switch (o.observable) {
            case Observable::omega: data.col(k) = s.omega; break;
            case Observable::delta: data.col(k) = s.delta; break;
            case Observable::full_state: data.col(k) << s.delta, s.omega; break;
        }
    };

    SimulationResult res;
    SwingState s = initial;
    record(0, s);
    Index recorded = 1;
    for (Index k = 1; k < n_samples && !res.blew_up; ++k) {
        for (long step = 0; step < steps_per_sample; ++step) {
            s = rk4_step(sys, s, o.dt_s);
            const bool finite = s.delta.allFinite() && s.omega.allFinite();
            if (!finite || s.delta.cwiseAbs().maxCoeff() > o.delta_bound || s.omega.cwiseAbs().maxCoeff() > o.omega_bound) {
                res.blew_up = true;
                res.blowup_time_s = s.t_s;
                break;
            }
        }
        if (!res.blew_up) {
            record(k, s);
            recorded = k + 1;
        }
    }
    res.series.channels = channel_labels(sys, o.observable);
    res.series.samples = data.leftCols(recorded);
    res.series.period_s = o.period_s;
    res.series.t0_s = initial.t_s;
    res.final_state = s;
    return res;
}

SnapshotSeries coa(const SwingSystem& sys, const SnapshotSeries& full_state) {
    const Index n = sys.n_gen;
    std::vector<Index> d_rows, w_rows;
    std::string missing;
    for (const auto& l : sys.labels) {
        auto find = [&](const std::string& name) -> Index {
            auto it = std::find(full_state.channels.begin(), full_state.channels.end(), name);
            if (it == full_state.channels.end()) {
                missing += (missing.empty() ? "" : ",") + name;
                return -1;
            }
            return static_cast<Index>(it - full_state.channels.begin());
        };
        d_rows.push_back(find("delta_" + l));
        w_rows.push_back(find("omega_" + l));
    }
    if (!missing.empty()) throw Error(ErrorCode::MissingChannels, "missing " + missing);
    const VectorXd w = sys.H / sys.H.sum();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2, full_state.N());
    for (Index i = 0; i < n; ++i) {
        out.row(0) += w(i) * full_state.samples.row(d_rows[i]);
        out.row(1) += w(i) * full_state.samples.row(w_rows[i]);
    }
    SnapshotSeries s;
    s.channels = {"delta_coa", "omega_coa"};
    s.samples = std::move(out);
    s.period_s = full_state.period_s;
    s.t0_s = full_state.t0_s;
    return s;
}

std::function<VectorXd(const VectorXd&)> flow_map(const SwingSystem& sys, double period_s, double dt_s) {
    const auto steps = std::llround(period_s / dt_s);
    if (steps < 1 || std::abs(steps * dt_s - period_s) > 1e-9 * period_s)
        throw Error(ErrorCode::InvalidArgument, "flow period must be an integer multiple of dt");
    return [sys, steps, dt_s](const VectorXd& x) {
        SwingState s = unpack(x, sys.n_gen);
        for (long long i = 0; i < steps; ++i) s = rk4_step(sys, s, dt_s);
        return pack(s);
    };
}

ScenarioKick scenario_kick(const std::string& name) {
    if (name == "eq32") return {"g8", 1.5, 3.0};
    if (name == "eq33") return {"g8", 1.0, 3.0};
    if (name == "eq34") return {"g8", 1.575, 3.0};
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
}

SwingState perturbed_state(const SwingSystem& sys, const SwingState& equilibrium, const ScenarioKick& kick) {
    auto it = std::find(sys.labels.begin(), sys.labels.end(), kick.generator);
    if (it == sys.labels.end()) throw Error(ErrorCode::UnknownChannel, "no generator '" + kick.generator + "'");
    const auto i = static_cast<Index>(it - sys.labels.begin());
    SwingState s = equilibrium;
    s.delta(i) += kick.delta_offset_rad;
    s.omega(i) = kick.omega_rad_s;
    return s;
}

}  // namespace koopman
