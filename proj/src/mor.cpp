#include "koopman/mor.hpp"

#include <cmath>
#include <numbers>

#include "koopman/error.hpp"

namespace koopman {

using cd = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

FullMap FullMap::physical(RealMap f) {
    FullMap m;
    m.real = std::move(f);
    return m;
}

FullMap FullMap::exact(ComplexMap f) {
    FullMap m;
    m.complex = std::move(f);
    return m;
}

ReducedModel make_reduced(MatrixXcd basis, VectorXcd eigenvalues, double flow_period_s, VectorXd offset,
                          std::vector<std::string> channels) {
    if (basis.cols() == 0 || basis.cols() > basis.rows())
        throw Error(ErrorCode::InvalidArgument, "reduced basis needs 1 <= M <= n columns");
    if (eigenvalues.size() != basis.cols()) throw Error(ErrorCode::InvalidArgument, "one eigenvalue per basis column");
    if (offset.size() == 0) offset = VectorXd::Zero(basis.rows());
    if (offset.size() != basis.rows()) throw Error(ErrorCode::ChannelMismatch, "offset length differs from basis rows");

    Eigen::JacobiSVD<MatrixXcd> svd(basis);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    const double cond = smin > 0.0 ? (s(0) / smin) * (s(0) / smin) : INFINITY;
    if (!(cond < 1e10))
        throw Error(ErrorCode::IllConditionedGram, "cond(V*V) = " + std::to_string(cond));

    ReducedModel r;
    r.basis = std::move(basis);
    r.eigenvalues = std::move(eigenvalues);
    r.gram.compute(r.basis.adjoint() * r.basis);
    r.gram_condition = cond;
    r.flow_period_s = flow_period_s;
    r.offset = std::move(offset);
    r.channels = std::move(channels);
    return r;
}

ReducedModel build_reduced(const KoopmanDecomposition& decomp, Index M, const VectorXd& offset) {
    if (M < 1 || M > decomp.size())
        throw Error(ErrorCode::InvalidArgument, "M must lie in 1.." + std::to_string(decomp.size()));
    KoopmanDecomposition d = decomp;
    sort_modes(d, ModeOrder::norm);
    if (M < d.size() && conjugate_partner(d, M - 1) == M)
        throw Error(ErrorCode::PairSplit, "M = " + std::to_string(M) + " splits a conjugate pair");
    return make_reduced(d.modes.leftCols(M), d.eigenvalues.head(M), d.period_s, offset, d.channels);
}

VectorXcd project_complex(const ReducedModel& model, const VectorXcd& x) {
    if (x.size() != model.n()) throw Error(ErrorCode::ChannelMismatch, "state length differs from basis rows");
    return model.gram.solve(model.basis.adjoint() * (x - model.offset.cast<cd>()));
}

VectorXcd project(const ReducedModel& model, const VectorXd& x) {
    return project_complex(model, x.cast<cd>());
}

VectorXd lift(const ReducedModel& model, const VectorXcd& z) {
    return (model.basis * z).real() + model.offset;
}

VectorXcd reduced_step(const ReducedModel& model, const VectorXcd& z, const FullMap& full_map) {
    if (z.size() != model.M()) throw Error(ErrorCode::ChannelMismatch, "reduced state length differs from M");
    if (full_map.real) return project(model, full_map.real(lift(model, z)));
    if (full_map.complex) {
        const VectorXcd x = model.basis * z + model.offset.cast<cd>();
        return project_complex(model, full_map.complex(x));
    }
    throw Error(ErrorCode::InvalidArgument, "full map is empty");
}

ActionAngleState to_action_angle(const VectorXcd& z) {
    ActionAngleState s;
    s.theta.resize(z.size());
    s.action.resize(z.size());
    s.phase_undefined.assign(static_cast<std::size_t>(z.size()), false);
    for (Index j = 0; j < z.size(); ++j) {
        s.action(j) = std::abs(z(j));
        if (s.action(j) == 0.0) {
            s.theta(j) = 0.0;
            s.phase_undefined[static_cast<std::size_t>(j)] = true;
        } else {
            double a = std::arg(z(j));
            if (a <= -std::numbers::pi) a = std::numbers::pi;
            s.theta(j) = a;
        }
    }
    return s;
}

VectorXcd from_action_angle(const ActionAngleState& s) {
    VectorXcd z(s.action.size());
    for (Index j = 0; j < z.size(); ++j) z(j) = s.action(j) * std::exp(cd(0.0, s.theta(j)));
    return z;
}

Eigen::MatrixXd action_transfer(const ReducedModel& model, const ActionAngleState& state, const FullMap& full_map,
                                double rel_step, double floor) {
    if (!(rel_step > 0.0) || !(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "steps must be positive");
    const Index M = model.M();
    if (state.action.size() != M || state.theta.size() != M)
        throw Error(ErrorCode::ChannelMismatch, "action-angle state length differs from M");
    Eigen::MatrixXd J(M, M);
    for (Index j = 0; j < M; ++j) {
        const double h = rel_step * std::max(state.action(j), floor);
        ActionAngleState plus = state, minus = state;
        plus.action(j) += h;
        minus.action(j) -= h;
        if (plus.action(j) == minus.action(j))
            throw Error(ErrorCode::StepUnderflow, "action step vanishes at index " + std::to_string(j));
        const VectorXd gp = reduced_step(model, from_action_angle(plus), full_map).cwiseAbs();
        const VectorXd gm = reduced_step(model, from_action_angle(minus), full_map).cwiseAbs();
        J.col(j) = (gp - gm) / (plus.action(j) - minus.action(j));
    }
    J -= Eigen::MatrixXd::Identity(M, M);
    return J;
}

std::vector<ActionAngleState> track_actions(const ReducedModel& model, const SnapshotSeries& trajectory) {
    if (trajectory.m() != model.n())
        throw Error(ErrorCode::ChannelMismatch, "trajectory has " + std::to_string(trajectory.m()) +
                                                    " channels, basis has " + std::to_string(model.n()));
    if (!model.channels.empty() && model.channels != trajectory.channels)
        throw Error(ErrorCode::ChannelMismatch, "trajectory channel labels differ from the model's");
    std::vector<ActionAngleState> out;
    out.reserve(static_cast<std::size_t>(trajectory.N()));
    for (Index k = 0; k < trajectory.N(); ++k) out.push_back(to_action_angle(project(model, trajectory.samples.col(k))));
    return out;
}

}  // namespace koopman
