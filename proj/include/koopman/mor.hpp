#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/kmd.hpp"
#include "koopman/timeseries.hpp"

namespace koopman {

using RealMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ComplexMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

/// Discrete-time map of the full system. A physical map acts on real states and
/// receives the real part of the lifted state; an exact map acts on complex
/// states directly.
struct FullMap {
    RealMap real;
    ComplexMap complex;

    static FullMap physical(RealMap f);
    static FullMap exact(ComplexMap f);
};

/// Petrov-Galerkin projection onto retained Koopman modes.
struct ReducedModel {
    Eigen::MatrixXcd basis;        // n x M
    Eigen::VectorXcd eigenvalues;  // M
    Eigen::PartialPivLU<Eigen::MatrixXcd> gram;
    double gram_condition = 1.0;
    double flow_period_s = 1.0;
    Eigen::VectorXd offset;  // equilibrium, subtracted before projection
    std::vector<std::string> channels;

    Eigen::Index n() const { return basis.rows(); }
    Eigen::Index M() const { return basis.cols(); }
};

/// Keeps the M largest-norm modes. Throws PairSplit if M would separate a
/// conjugate pair and IllConditionedGram if cond(V* V) >= 1e10.
ReducedModel build_reduced(const KoopmanDecomposition& decomp, Eigen::Index M,
                           const Eigen::VectorXd& offset = Eigen::VectorXd());

ReducedModel make_reduced(Eigen::MatrixXcd basis, Eigen::VectorXcd eigenvalues, double flow_period_s,
                          Eigen::VectorXd offset = Eigen::VectorXd(), std::vector<std::string> channels = {});

/// (V* V)^-1 V* (x - offset).
Eigen::VectorXcd project(const ReducedModel& model, const Eigen::VectorXd& x);
Eigen::VectorXcd project_complex(const ReducedModel& model, const Eigen::VectorXcd& x);

/// Re(V z) + offset.
Eigen::VectorXd lift(const ReducedModel& model, const Eigen::VectorXcd& z);

Eigen::VectorXcd reduced_step(const ReducedModel& model, const Eigen::VectorXcd& z, const FullMap& full_map);

struct ActionAngleState {
    Eigen::VectorXd theta;
    Eigen::VectorXd action;
    std::vector<bool> phase_undefined;
};

ActionAngleState to_action_angle(const Eigen::VectorXcd& z);
Eigen::VectorXcd from_action_angle(const ActionAngleState& s);

/// J = D_I G - I, central differences in each action with step
/// rel_step * max(I_j, floor), angles held fixed.
Eigen::MatrixXd action_transfer(const ReducedModel& model, const ActionAngleState& state, const FullMap& full_map,
                                double rel_step = 1e-5, double floor = 1e-8);

std::vector<ActionAngleState> track_actions(const ReducedModel& model, const SnapshotSeries& trajectory);

}  // namespace koopman
