#include "koopman/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace koopman {

using nlohmann::json;
using Eigen::Index;

namespace {

void write(std::string& out, const json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out += buf;
            }
            break;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad;
                out += json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                write(out, it.value(), indent, depth + 1);
            }
            out += nl;
            out += close_pad;
            out += "}";
            break;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            const bool scalars = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    write(out, j[i], indent, depth + 1);
                }
                out += "]";
                break;
            }
            out += "[";
            out += nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) {
                    out += ",";
                    out += nl;
                }
                out += pad;
                write(out, j[i], indent, depth + 1);
            }
            out += nl;
            out += close_pad;
            out += "]";
            break;
        }
        default:
            out += j.dump();
    }
}

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    write(out, j, indent, 0);
    out += "\n";
    return out;
}

json to_json(const KoopmanDecomposition& d) {
    json modes = json::array();
    for (Index j = 0; j < d.size(); ++j) {
        const auto lambda = d.eigenvalues(j);
        json entry;
        entry["index"] = j;
        entry["re"] = lambda.real();
        entry["im"] = lambda.imag();
        if (lambda != std::complex<double>(0.0, 0.0)) {
            const auto [g, f] = eigen_frequency(lambda, d.period_s);
            entry["growth_rate"] = g;
            entry["frequency_hz"] = f;
        } else {
            entry["growth_rate"] = 0.0;
            entry["frequency_hz"] = nullptr;
        }
        entry["norm"] = d.mode_norm(j);
        json comps = json::array();
        for (Index i = 0; i < d.modes.rows(); ++i) {
            const auto v = d.modes(i, j);
            const double phase = wrap_phase(std::arg(v));
            comps.push_back({{"channel", i < static_cast<Index>(d.channels.size()) ? d.channels[i] : std::to_string(i)},
                             {"re", v.real()},
                             {"im", v.imag()},
                             {"amplitude", std::abs(v)},
                             {"phase_rad", phase}});
        }
        entry["mode"] = std::move(comps);
        modes.push_back(std::move(entry));
    }
    return {{"algorithm", to_string(d.algorithm)},
            {"residual_norm", d.residual.norm()},
            {"n_snapshots", d.n_snapshots},
            {"period_s", d.period_s},
            {"n_modes", d.size()},
            {"modes", std::move(modes)}};
}

json to_json(const ModeSummary& s) {
    json chans = json::array();
    for (Index i = 0; i < s.amplitudes.size(); ++i)
        chans.push_back({{"channel", s.channels.at(static_cast<std::size_t>(i))},
                         {"amplitude", s.amplitudes(i)},
                         {"phase_rad", s.phases(i)}});
    return {{"mode_index", s.mode_index}, {"is_pair", s.is_pair},   {"growth_rate", s.growth_rate},
            {"frequency_hz", s.frequency_hz}, {"norm", s.norm}, {"channels", std::move(chans)}};
}

json to_json(const CoherentGroup& g) {
    return {{"mode_index", g.mode_index},
            {"epsilon_rad", g.epsilon_rad},
            {"members", g.members},
            {"reference_phase_rad", g.reference_phase_rad}};
}

json to_json(const StabilityVerdict& v) {
    json pairs = json::array();
    for (const auto& u : v.unstable_pairs)
        pairs.push_back({{"mode_index", u.mode_index}, {"growth_rate", u.growth_rate}, {"frequency_hz", u.frequency_hz}});
    return {{"verdict", v.verdict == Verdict::stable ? "stable" : "unstable"},
            {"margin", v.margin},
            {"unstable_pairs", std::move(pairs)}};
}

json to_json(const DensityGrid& g) {
    json skipped = json::array();
    for (const auto& s : g.skipped) skipped.push_back({{"length", s.length}, {"reason", s.reason}});
    json windows = json::array();
    for (std::size_t i = 0; i < g.window_lengths.size(); ++i)
        windows.push_back({{"length", g.window_lengths[i]}, {"unstable", g.per_window[i]}});
    return {{"algorithm", to_string(g.algorithm)},
            {"margin", g.margin},
            {"total", g.total},
            {"out_of_grid", g.out_of_grid},
            {"re_edges", g.re_edges},
            {"im_edges", g.im_edges},
            {"windows", std::move(windows)},
            {"skipped_windows", std::move(skipped)}};
}

json to_json(const ReducedModel& r) {
    json basis = json::array();
    for (Index j = 0; j < r.M(); ++j) {
        json col = json::array();
        for (Index i = 0; i < r.n(); ++i) col.push_back({r.basis(i, j).real(), r.basis(i, j).imag()});
        basis.push_back(std::move(col));
    }
    json eig = json::array();
    for (Index j = 0; j < r.M(); ++j) eig.push_back({{"re", r.eigenvalues(j).real()}, {"im", r.eigenvalues(j).imag()}});
    return {{"M", r.M()},
            {"n", r.n()},
            {"flow_period_s", r.flow_period_s},
            {"gram_condition", r.gram_condition},
            {"channels", r.channels},
            {"eigenvalues", std::move(eig)},
            {"basis_columns", std::move(basis)},
            {"offset", vec(r.offset)}};
}

}  // namespace koopman
