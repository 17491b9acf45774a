#include "koopman/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "koopman/coherency.hpp"
#include "koopman/error.hpp"
#include "koopman/json_io.hpp"
#include "koopman/kmd.hpp"
#include "koopman/mor.hpp"
#include "koopman/stability.hpp"
#include "koopman/swing.hpp"
#include "koopman/timeseries.hpp"

namespace koopman {

using nlohmann::json;
using Eigen::Index;

namespace {

struct Io {
    std::istream& in;
    std::ostream& out;
};

struct InputOpts {
    std::string path = "-";
    double period_s = 0.0;
    bool remove_mean = false;
};

void add_input(CLI::App* sub, InputOpts& o) {
    sub->add_option("-i,--input", o.path, "CSV input, '-' for stdin")->capture_default_str();
    sub->add_option("--period", o.period_s, "sampling period in seconds (else <input>.json sidecar)");
    sub->add_flag("--remove-mean", o.remove_mean, "subtract the per-channel mean");
}

double sidecar_period(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) return 0.0;
    try {
        json j;
        in >> j;
        return j.value("period_s", 0.0);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ".json: " + e.what());
    }
}

SnapshotSeries read_input(const InputOpts& o, Io& io) {
    double period = o.period_s;
    if (period <= 0.0 && o.path != "-") period = sidecar_period(o.path);
    if (period <= 0.0) throw Error(ErrorCode::InvalidArgument, "sampling period required (--period or sidecar JSON)");
    SnapshotSeries s = o.path == "-" ? read_csv(io.in, period, "<stdin>") : load_csv(o.path, period);
    return o.remove_mean ? remove_mean(s) : s;
}

json input_config(const InputOpts& o) {
    return {{"input", o.path}, {"period_s", o.period_s}, {"remove_mean", o.remove_mean}};
}

void emit(const std::string& path, const std::string& text, Io& io) {
    if (path == "-") {
        io.out << text;
        io.out.flush();
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    f << text;
}

unsigned thread_count(int flag) {
    if (flag > 0) return static_cast<unsigned>(flag);
    if (const char* env = std::getenv("KOOPMAN_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 0;
}

ModeOrder parse_order(const std::string& s) {
    if (s == "norm") return ModeOrder::norm;
    if (s == "growth") return ModeOrder::growth;
    throw Error(ErrorCode::InvalidArgument, "unknown order '" + s + "'");
}

struct DecompOpts {
    std::string algo = "arnoldi";
    std::string order = "norm";
    std::vector<double> freqs;
    double dmd_tol = 1e-10;
};

void add_decomp(CLI::App* sub, DecompOpts& o) {
    sub->add_option("--algo", o.algo, "arnoldi | prony | dmd | fourier")
        ->check(CLI::IsMember({"arnoldi", "prony", "dmd", "fourier"}))
        ->capture_default_str();
    sub->add_option("--order", o.order, "mode order: norm | growth")
        ->check(CLI::IsMember({"norm", "growth"}))
        ->capture_default_str();
    sub->add_option("--freqs", o.freqs, "Fourier projection frequencies in Hz")->delimiter(',');
    sub->add_option("--dmd-tol", o.dmd_tol, "DMD relative singular value cutoff")->capture_default_str();
}

DecomposeOptions to_options(const DecompOpts& o) {
    DecomposeOptions d;
    d.algorithm = parse_algorithm(o.algo);
    d.order = parse_order(o.order);
    d.fourier_freqs_hz = o.freqs;
    d.dmd_rel_tol = o.dmd_tol;
    return d;
}

json decomp_config(const DecompOpts& o) {
    return {{"algo", o.algo}, {"order", o.order}, {"freqs", o.freqs}, {"dmd_tol", o.dmd_tol}};
}

struct SimOpts {
    std::string system = "data/ne39.json";
    std::string scenario = "eq32";
    std::string kick_gen = "g8";
    double kick_delta = 0.0;
    double kick_omega = 0.0;
    double t_end = 20.0;
    double dt = 1e-3;
    double period = 0.02;
    std::string observable = "omega";
    std::string damping = "on";
};

void add_sim(CLI::App* sub, SimOpts& o, bool with_observable) {
    sub->add_option("--system", o.system, "swing system JSON")->capture_default_str();
    sub->add_option("--scenario", o.scenario, "eq32 | eq33 | eq34 | custom")
        ->check(CLI::IsMember({"eq32", "eq33", "eq34", "custom"}))
        ->capture_default_str();
    sub->add_option("--kick-gen", o.kick_gen, "custom scenario: generator label")->capture_default_str();
    sub->add_option("--kick-delta", o.kick_delta, "custom scenario: angle offset in rad");
    sub->add_option("--kick-omega", o.kick_omega, "custom scenario: speed deviation in rad/s");
    sub->add_option("--t-end", o.t_end, "simulated time in s")->capture_default_str();
    sub->add_option("--dt", o.dt, "RK4 step in s")->capture_default_str();
    sub->add_option("--sample-period", o.period, "output sampling period in s")->capture_default_str();
    if (with_observable)
        sub->add_option("--observable", o.observable, "omega | delta | full_state")
            ->check(CLI::IsMember({"omega", "delta", "full_state"}))
            ->capture_default_str();
    sub->add_option("--damping", o.damping, "on | off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
}

json sim_config(const SimOpts& o) {
    return {{"system", o.system},     {"scenario", o.scenario},       {"kick_gen", o.kick_gen},
            {"kick_delta", o.kick_delta}, {"kick_omega", o.kick_omega}, {"t_end", o.t_end},
            {"dt", o.dt},             {"sample_period", o.period},    {"observable", o.observable},
            {"damping", o.damping}};
}

struct Scenario {
    SwingSystem sys;
    Equilibrium eq;
    SwingState initial;
};

Scenario prepare(const SimOpts& o, const std::string& scenario) {
    Scenario s{load_system(o.system), {}, {}};
    if (o.damping == "off") s.sys.D.setZero();
    s.eq = find_equilibrium(s.sys, s.sys.delta_guess);
    const ScenarioKick kick =
        scenario == "custom" ? ScenarioKick{o.kick_gen, o.kick_delta, o.kick_omega} : scenario_kick(scenario);
    s.initial = perturbed_state(s.sys, s.eq.state, kick);
    return s;
}

std::string join_csv_row(const std::vector<std::string>& cells) {
    std::string r;
    for (std::size_t i = 0; i < cells.size(); ++i) r += (i ? "," : "") + cells[i];
    return r + "\n";
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- handlers

int cmd_simulate(const SimOpts& o, const std::string& output, const std::string& meta, Io& io) {
    Scenario sc = prepare(o, o.scenario);
    SimulationOptions so;
    so.t_end_s = o.t_end;
    so.dt_s = o.dt;
    so.period_s = o.period;
    so.observable = parse_observable(o.observable);
    const auto res = simulate(sc.sys, sc.initial, so);
    std::ostringstream csv;
    write_csv(csv, res.series);
    emit(output, csv.str(), io);
    if (!meta.empty()) {
        json config = sim_config(o);
        config["subcommand"] = "simulate";
        json m = {{"config", config},
                  {"period_s", o.period},
                  {"n_samples", res.series.N()},
                  {"blew_up", res.blew_up},
                  {"blowup_time_s", res.blowup_time_s},
                  {"equilibrium_delta", std::vector<double>(sc.eq.state.delta.data(),
                                                            sc.eq.state.delta.data() + sc.eq.state.delta.size())},
                  {"equilibrium_iterations", sc.eq.iterations},
                  {"equilibrium_stable", sc.eq.stable}};
        emit(meta, dump_json(m), io);
    }
    return exit_ok;
}

int cmd_decompose(const InputOpts& in, const DecompOpts& d, int top, const std::string& output, Io& io) {
    const auto series = read_input(in, io);
    auto decomp = decompose(series, to_options(d));
    if (top > 0) decomp = truncate_modes(decomp, top);
    json config = input_config(in);
    config.update(decomp_config(d));
    config["subcommand"] = "decompose";
    config["top"] = top;
    json j = to_json(decomp);
    j["config"] = config;
    emit(output, dump_json(j), io);
    return exit_ok;
}

int cmd_coherency(const InputOpts& in, const DecompOpts& d, double eps, double floor, int n_modes,
                  const std::string& output, const std::string& csv_path, Io& io) {
    const auto series = read_input(in, io);
    const auto decomp = decompose(series, to_options(d));
    const auto summaries = summarize(decomp);
    json modes = json::array();
    std::string csv = "mode_index,frequency_hz,channel,amplitude,phase_rad\n";
    const auto count = std::min<std::size_t>(summaries.size(), static_cast<std::size_t>(std::max(1, n_modes)));
    for (std::size_t k = 0; k < count; ++k) {
        const auto& s = summaries[k];
        json entry = to_json(s);
        json groups = json::array();
        for (const auto& g : phase_groups(s, eps, floor)) groups.push_back(to_json(g));
        entry["groups"] = std::move(groups);
        modes.push_back(std::move(entry));
        for (Index i = 0; i < s.amplitudes.size(); ++i)
            csv += join_csv_row({std::to_string(s.mode_index), num(s.frequency_hz), s.channels[i], num(s.amplitudes(i)),
                                 num(s.phases(i))});
    }
    json config = input_config(in);
    config.update(decomp_config(d));
    config["subcommand"] = "coherency";
    config["epsilon_rad"] = eps;
    config["min_amplitude"] = floor;
    config["modes"] = n_modes;
    emit(output, dump_json({{"config", config}, {"modes", modes}}), io);
    if (!csv_path.empty()) emit(csv_path, csv, io);
    return exit_ok;
}

int cmd_stability(const InputOpts& in, const DecompOpts& d, double margin, const std::string& output, Io& io) {
    const auto series = read_input(in, io);
    const auto decomp = decompose(series, to_options(d));
    json config = input_config(in);
    config.update(decomp_config(d));
    config["subcommand"] = "stability";
    config["margin"] = margin;
    json j = to_json(assess(decomp, margin));
    j["config"] = config;
    j["n_modes"] = decomp.size();
    emit(output, dump_json(j), io);
    return exit_ok;
}

int cmd_density(const InputOpts& in, const std::string& algo, int n_min, double margin, int bins, double extent,
                int threads, const std::string& output, const std::string& meta, Io& io) {
    const auto series = read_input(in, io);
    const auto grid = density_sweep(series, n_min, parse_algorithm(algo), GridSpec::uniform(bins, extent), margin,
                                    thread_count(threads));
    std::string csv = "re_bin_center,im_bin_center,count\n";
    for (Index i = 0; i < grid.counts.rows(); ++i)
        for (Index j = 0; j < grid.counts.cols(); ++j) {
            const double re = 0.5 * (grid.re_edges[i] + grid.re_edges[i + 1]);
            const double im = 0.5 * (grid.im_edges[j] + grid.im_edges[j + 1]);
            csv += num(re) + "," + num(im) + "," + std::to_string(grid.counts(i, j)) + "\n";
        }
    emit(output, csv, io);
    if (!meta.empty()) {
        json config = input_config(in);
        config.update({{"subcommand", "density"}, {"algo", algo}, {"n_min", n_min}, {"margin", margin},
                       {"bins", bins}, {"extent", extent}});
        json j = to_json(grid);
        j["config"] = config;
        emit(meta, dump_json(j), io);
    }
    return exit_ok;
}

Eigen::VectorXd equilibrium_offset(const SwingSystem& sys, const Equilibrium& eq) {
    Eigen::VectorXd off(2 * sys.n_gen);
    off << eq.state.delta, Eigen::VectorXd::Zero(sys.n_gen);
    return off;
}

int cmd_reduce(const InputOpts& in, const DecompOpts& d, const SimOpts& sim, int M, bool no_offset,
               const std::string& output, Io& io) {
    auto series = read_input(in, io);
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(series.m());
    if (!no_offset) {
        SwingSystem sys = load_system(sim.system);
        if (sim.damping == "off") sys.D.setZero();
        const auto eq = find_equilibrium(sys, sys.delta_guess);
        offset = equilibrium_offset(sys, eq);
        if (offset.size() != series.m())
            throw Error(ErrorCode::ChannelMismatch, "reduce expects a full-state trajectory of the given system");
    }
    series.samples.colwise() -= offset;
    const auto decomp = decompose(series, to_options(d));
    const auto model = build_reduced(decomp, M > 0 ? M : decomp.size(), offset);
    json config = input_config(in);
    config.update(decomp_config(d));
    config.update({{"subcommand", "reduce"}, {"M", M}, {"system", sim.system}, {"no_offset", no_offset}});
    json j = to_json(model);
    j["config"] = config;
    emit(output, dump_json(j), io);
    return exit_ok;
}

int cmd_transfer(const SimOpts& sim, const std::string& basis_scenario, std::vector<double> freqs, int stride,
                 double rel_step, const std::string& output, const std::string& actions_path, const std::string& meta,
                 Io& io) {
    if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
    SimulationOptions so;
    so.t_end_s = sim.t_end;
    so.dt_s = sim.dt;
    so.period_s = sim.period;
    so.observable = Observable::full_state;

    Scenario base = prepare(sim, basis_scenario);
    const Eigen::VectorXd offset = equilibrium_offset(base.sys, base.eq);
    auto basis_run = simulate(base.sys, base.initial, so).series;
    basis_run.samples.colwise() -= offset;
    if (freqs.empty()) {
        std::vector<std::string> speeds;
        for (const auto& l : base.sys.labels) speeds.push_back("omega_" + l);
        freqs = dominant_frequencies(basis_run, 5, 0.2, speeds);
    }
    const auto decomp = decompose_fourier(basis_run, freqs);
    const auto model = build_reduced(decomp, decomp.size(), offset);

    Scenario run = prepare(sim, sim.scenario);
    const auto traj = simulate(run.sys, run.initial, so);
    const auto states = track_actions(model, traj.series);
    const FullMap map = FullMap::physical(flow_map(run.sys, sim.period, sim.dt));

    std::string csv = "k,t_s,row,col,value\n";
    for (Index k = 0; k < traj.series.N(); k += stride) {
        const auto J = action_transfer(model, states[static_cast<std::size_t>(k)], map, rel_step);
        const double t = static_cast<double>(k) * sim.period;
        for (Index r = 0; r < J.rows(); ++r)
            for (Index c = 0; c < J.cols(); ++c)
                csv += std::to_string(k) + "," + num(t) + "," + std::to_string(r) + "," + std::to_string(c) + "," +
                       num(J(r, c)) + "\n";
    }
    emit(output, csv, io);
    if (!actions_path.empty()) {
        std::string a = "k,t_s";
        for (Index j = 0; j < model.M(); ++j) a += ",I" + std::to_string(j + 1);
        a += "\n";
        for (std::size_t k = 0; k < states.size(); ++k) {
            a += std::to_string(k) + "," + num(static_cast<double>(k) * sim.period);
            for (Index j = 0; j < model.M(); ++j) a += "," + num(states[k].action(j));
            a += "\n";
        }
        emit(actions_path, a, io);
    }
    if (!meta.empty()) {
        json config = sim_config(sim);
        config.update({{"subcommand", "transfer-op"}, {"basis_scenario", basis_scenario}, {"freqs", freqs},
                       {"stride", stride}, {"rel_step", rel_step}});
        json j = {{"config", config}, {"model", to_json(model)}, {"blew_up", traj.blew_up},
                  {"blowup_time_s", traj.blowup_time_s}};
        emit(meta, dump_json(j), io);
    }
    return exit_ok;
}

int cmd_synth(std::uint64_t seed, const SyntheticUcteOptions& o, const std::string& output, Io& io) {
    std::ostringstream csv;
    write_csv(csv, synthetic_ucte(seed, o));
    emit(output, csv.str(), io);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Io io{in, out};
    CLI::App app{"Koopman mode analysis of power system swing data"};
    app.name("koopman");
    app.require_subcommand(1);

    std::string output = "-", meta, csv_path, actions_path;

    SimOpts sim;
    auto* s_sim = app.add_subcommand("simulate", "integrate the swing model and write a CSV series");
    add_sim(s_sim, sim, true);
    s_sim->add_option("-o,--output", output, "CSV output, '-' for stdout")->capture_default_str();
    s_sim->add_option("--meta", meta, "JSON run metadata path");

    InputOpts inp;
    DecompOpts dec;
    int top = 0;
    auto* s_dec = app.add_subcommand("decompose", "Koopman mode decomposition to JSON");
    add_input(s_dec, inp);
    add_decomp(s_dec, dec);
    s_dec->add_option("--top", top, "keep only the first K modes (pairs kept whole)");
    s_dec->add_option("-o,--output", output, "JSON output")->capture_default_str();

    double eps = 0.3, floor = 0.0;
    int n_modes = 10;
    auto* s_coh = app.add_subcommand("coherency", "amplitude/phase tables and phase-coherent groups");
    add_input(s_coh, inp);
    add_decomp(s_coh, dec);
    s_coh->add_option("--epsilon", eps, "phase linkage threshold in rad")->capture_default_str();
    s_coh->add_option("--min-amplitude", floor, "ignore channels below this amplitude")->capture_default_str();
    s_coh->add_option("--modes", n_modes, "number of leading modes to report")->capture_default_str();
    s_coh->add_option("--csv", csv_path, "scatter data CSV path");
    s_coh->add_option("-o,--output", output, "JSON output")->capture_default_str();

    double margin = 0.0;
    auto* s_stab = app.add_subcommand("stability", "unstable eigenvalue verdict");
    add_input(s_stab, inp);
    add_decomp(s_stab, dec);
    s_stab->add_option("--margin", margin, "flag |lambda| > 1 + margin")->capture_default_str();
    s_stab->add_option("-o,--output", output, "JSON output")->capture_default_str();

    std::string density_algo = "arnoldi";
    int n_min = 8, bins = 41, threads = 0;
    double extent = 1.2;
    auto* s_den = app.add_subcommand("density", "unstable eigenvalue density over growing windows");
    add_input(s_den, inp);
    s_den->add_option("--algo", density_algo, "arnoldi | prony | dmd")
        ->check(CLI::IsMember({"arnoldi", "prony", "dmd"}))
        ->capture_default_str();
    s_den->add_option("--n-min", n_min, "shortest window")->capture_default_str();
    s_den->add_option("--margin", margin, "flag |lambda| > 1 + margin")->capture_default_str();
    s_den->add_option("--bins", bins, "bins per axis")->capture_default_str();
    s_den->add_option("--extent", extent, "grid covers [-extent, extent]^2")->capture_default_str();
    s_den->add_option("--threads", threads, "worker threads (default: KOOPMAN_THREADS or all cores)");
    s_den->add_option("-o,--output", output, "CSV output")->capture_default_str();
    s_den->add_option("--meta", meta, "JSON metadata path");

    int M = 0;
    bool no_offset = false;
    auto* s_red = app.add_subcommand("reduce", "Petrov-Galerkin reduced model from a full-state trajectory");
    add_input(s_red, inp);
    add_decomp(s_red, dec);
    s_red->add_option("--system", sim.system, "swing system JSON (equilibrium offset)")->capture_default_str();
    s_red->add_option("--damping", sim.damping, "on | off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    s_red->add_option("--M", M, "retained modes (default: all)");
    s_red->add_flag("--no-offset", no_offset, "do not subtract the equilibrium");
    s_red->add_option("-o,--output", output, "JSON output")->capture_default_str();

    std::string basis_scenario = "eq33";
    std::vector<double> freqs;
    int stride = 25;
    double rel_step = 1e-5;
    SimOpts tsim;
    tsim.scenario = "eq34";
    tsim.damping = "off";
    auto* s_tr = app.add_subcommand("transfer-op", "action transfer operator along a simulated trajectory");
    add_sim(s_tr, tsim, false);
    s_tr->add_option("--basis-scenario", basis_scenario, "scenario whose trajectory provides the KM basis")
        ->check(CLI::IsMember({"eq32", "eq33", "eq34"}))
        ->capture_default_str();
    s_tr->add_option("--freqs", freqs, "basis frequencies in Hz (default: five largest peaks of the combined speed spectrum)")->delimiter(',');
    s_tr->add_option("--stride", stride, "evaluate J every K samples")->capture_default_str();
    s_tr->add_option("--rel-step", rel_step, "relative central-difference step")->capture_default_str();
    s_tr->add_option("-o,--output", output, "CSV frames of J")->capture_default_str();
    s_tr->add_option("--actions", actions_path, "CSV of tracked actions");
    s_tr->add_option("--meta", meta, "JSON model and run metadata");

    std::uint64_t seed = 1;
    SyntheticUcteOptions uo;
    auto* s_syn = app.add_subcommand("synth-ucte", "synthetic 8-channel dataset with one growing oscillation");
    s_syn->add_option("--seed", seed, "random seed")->capture_default_str();
    s_syn->add_option("--growth", uo.growth, "modulus of the planted eigenvalue")->capture_default_str();
    s_syn->add_option("--snr-db", uo.snr_db, "per-channel signal-to-noise ratio")->capture_default_str();
    s_syn->add_option("--samples", uo.samples, "number of samples")->capture_default_str();
    s_syn->add_option("-o,--output", output, "CSV output")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*s_sim) return cmd_simulate(sim, output, meta, io);
        if (*s_dec) return cmd_decompose(inp, dec, top, output, io);
        if (*s_coh) return cmd_coherency(inp, dec, eps, floor, n_modes, output, csv_path, io);
        if (*s_stab) return cmd_stability(inp, dec, margin, output, io);
        if (*s_den) return cmd_density(inp, density_algo, n_min, margin, bins, extent, threads, output, meta, io);
        if (*s_red) return cmd_reduce(inp, dec, sim, M, no_offset, output, io);
        if (*s_tr) return cmd_transfer(tsim, basis_scenario, freqs, stride, rel_step, output, actions_path, meta, io);
        if (*s_syn) return cmd_synth(seed, uo, output, io);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.category()) {
            case ErrorCategory::Usage: return exit_usage;
            case ErrorCategory::Data: return exit_data;
            case ErrorCategory::Numerical: return exit_numerical;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}

}  // namespace koopman
