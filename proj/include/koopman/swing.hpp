#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/timeseries.hpp"

namespace koopman {

/// Constant-voltage node coupled to every generator through fixed admittances.
struct InfiniteBus {
    std::string label = "g1";
    double E = 1.0;
    double delta = 0.0;
    Eigen::VectorXd G;  // coupling conductances to each generator
    Eigen::VectorXd B;
};

/// Classical swing model on the network reduced to generator internal nodes.
struct SwingSystem {
    int n_gen = 0;
    double f_b = 60.0;
    std::vector<std::string> labels;
    Eigen::VectorXd H, D, P_m, E;
    Eigen::MatrixXd G, B;
    InfiniteBus bus;
    Eigen::VectorXd delta_guess;

    void validate() const;
};

SwingSystem load_system(const std::string& path);

struct SwingState {
    Eigen::VectorXd delta;
    Eigen::VectorXd omega;
    double t_s = 0.0;
};

struct SwingDerivative {
    Eigen::VectorXd d_delta;
    Eigen::VectorXd d_omega;
};

Eigen::VectorXd electrical_power(const SwingSystem& sys, const Eigen::VectorXd& delta);

SwingDerivative rhs(const SwingSystem& sys, const SwingState& state);

struct Equilibrium {
    SwingState state;
    int iterations = 0;
    double residual = 0.0;  // max |d_omega|
    bool stable = true;     // linearization check
};

Equilibrium find_equilibrium(const SwingSystem& sys, const Eigen::VectorXd& guess, int max_iter = 50,
                             double tol = 1e-10);

/// d(P_e)/d(delta), n_gen x n_gen.
Eigen::MatrixXd power_jacobian(const SwingSystem& sys, const Eigen::VectorXd& delta);

/// One classical RK4 step of size dt.
SwingState rk4_step(const SwingSystem& sys, const SwingState& s, double dt);

enum class Observable { omega, delta, full_state };

Observable parse_observable(const std::string& name);
const char* to_string(Observable o);

struct SimulationOptions {
    double t_end_s = 20.0;
    double dt_s = 1e-3;
    double period_s = 0.02;
    Observable observable = Observable::omega;
    double delta_bound = 100.0;
    double omega_bound = 1000.0;
};

struct SimulationResult {
    SnapshotSeries series;
    bool blew_up = false;
    double blowup_time_s = 0.0;
    SwingState final_state;
};

SimulationResult simulate(const SwingSystem& sys, const SwingState& initial, const SimulationOptions& options);

std::vector<std::string> channel_labels(const SwingSystem& sys, Observable o);

/// Inertia-weighted center of angle: channels delta_coa, omega_coa.
SnapshotSeries coa(const SwingSystem& sys, const SnapshotSeries& full_state);

/// Full state (delta then omega) as one vector.
Eigen::VectorXd pack(const SwingState& s);
SwingState unpack(const Eigen::VectorXd& x, int n_gen);

/// Time-T flow on packed states, integrated with RK4 steps of dt.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> flow_map(const SwingSystem& sys, double period_s, double dt_s);

struct ScenarioKick {
    std::string generator = "g8";
    double delta_offset_rad = 1.5;
    double omega_rad_s = 3.0;
};

/// Presets: eq32 (+1.5 rad, 3 rad/s), eq33 (+1.0 rad), eq34 (+1.575 rad), all on g8.
ScenarioKick scenario_kick(const std::string& name);

SwingState perturbed_state(const SwingSystem& sys, const SwingState& equilibrium, const ScenarioKick& kick);

}  // namespace koopman
