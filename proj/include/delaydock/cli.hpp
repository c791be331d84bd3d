#pragma once

// Command-line front end: deterministic JSON/CSV outputs for scripting and
// figure regeneration. Exit codes: 0 success, 2 usage error, 3 domain/parse
// error, 4 numerical error. Errors go to stderr with an error_code= prefix.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaydock/delaydock.hpp"

namespace delaydock::cli {

using json = nlohmann::json;

namespace detail {

/// NaN-safe JSON value (nlohmann serializes NaN as null already; this keeps
/// intent explicit for optional metrics).
inline json num_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : rows) out += k + "," + v + "\n";
    return out;
}

inline PlaneAxis axis_from(const std::string& name) {
    if (name == "b") return PlaneAxis::Damping;
    if (name == "k") return PlaneAxis::Stiffness;
    if (name == "m") return PlaneAxis::Mass;
    throw CLI::ValidationError("--y", "axis must be one of b, k, m");
}

inline GainParam gain_from(const std::string& name) {
    if (name == "h") return GainParam::Delay;
    if (name == "b") return GainParam::Damping;
    if (name == "k") return GainParam::Stiffness;
    if (name == "m") return GainParam::Mass;
    throw CLI::ValidationError("--vary", "parameter must be one of h, b, k, m");
}

inline Method method_from(const std::string& name) {
    if (name == "pole" || name == "pole-location") return Method::PoleLocation;
    if (name == "pade") return Method::Pade;
    throw CLI::ValidationError("--method", "method must be pole or pade");
}

/// Held parameters of a stability plane; the y (and swept) slots are
/// substituted per sample and carry placeholders here.
inline PlantParams plane_fixed(PlaneAxis y_axis, double m, double k, double b,
                               PlaneAxis sweep_axis, bool has_sweep) {
    auto held = [&](PlaneAxis a) { return a != y_axis && !(has_sweep && a == sweep_axis); };
    if (held(PlaneAxis::Mass) && !(m > 0.0))
        throw std::domain_error("held mass required: pass --m > 0");
    if (held(PlaneAxis::Stiffness) && !(k > 0.0))
        throw std::domain_error("held stiffness required: pass --k > 0");
    return {held(PlaneAxis::Mass) ? m : 1.0, held(PlaneAxis::Stiffness) ? k : 1.0,
            held(PlaneAxis::Damping) ? b : 0.0, 0.0};
}

struct DelayOption {
    double h_s = 0.0;
    double h_ms = 0.0;
    CLI::Option* opt_s = nullptr;
    CLI::Option* opt_ms = nullptr;

    void attach(CLI::App* sub, bool required) {
        opt_s = sub->add_option("--h-s", h_s, "loop delay in seconds");
        opt_ms = sub->add_option("--h-ms", h_ms, "loop delay in milliseconds");
        opt_s->excludes(opt_ms);
        opt_ms->excludes(opt_s);
        if (required) {
            // exactly one of the two unit flags
            sub->callback([this] {
                if (opt_s->count() == 0 && opt_ms->count() == 0)
                    throw CLI::RequiredError("one of --h-s / --h-ms");
            });
        }
    }

    double seconds() const { return opt_ms->count() ? h_ms * 1e-3 : h_s; }
};

struct OutputOptions {
    std::string format = "json";
    std::string out_path;
    bool stamp = false;

    void attach(CLI::App* sub) {
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", out_path, "write the payload to this file (atomic)");
        sub->add_flag("--stamp", stamp, "include a generation timestamp in JSON output");
    }

    void deliver(const std::string& payload, std::ostream& out) const {
        if (out_path.empty())
            out << payload;
        else
            io::atomic_write(out_path, payload);
    }

    void stamp_json(json& j) const {
        if (!stamp) return;
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        j["generated_at"] = buf;
    }
};

inline json metrics_json(const ContactMetrics& m, SimStatus status, double dt, bool dt_adjusted) {
    json j;
    j["v_minus"] = num_or_null(m.v_minus);
    j["v_plus"] = num_or_null(m.v_plus);
    j["epsilon"] = num_or_null(m.epsilon);
    j["tau"] = num_or_null(m.tau);
    j["tau_hat"] = num_or_null(m.tau_hat);
    j["k_hat"] = num_or_null(m.k_hat);
    j["delta_E_final"] = num_or_null(m.delta_E_final);
    j["status"] = to_string(status);
    j["no_contact"] = m.no_contact;
    j["dt"] = dt;
    j["dt_adjusted"] = dt_adjusted;
    return j;
}

inline std::string metrics_csv(const json& j) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& [key, value] : j.items()) {
        if (value.is_number())
            rows.emplace_back(key, io::csv_num(value.get<double>()));
        else if (value.is_boolean())
            rows.emplace_back(key, value.get<bool>() ? "1" : "0");
        else if (value.is_string())
            rows.emplace_back(key, value.get<std::string>());
        else
            rows.emplace_back(key, "");
    }
    return kv_csv(rows);
}

inline std::string observer_csv(const std::vector<std::pair<double, double>>& series) {
    std::string out = "t,delta_E\n";
    for (const auto& [t, e] : series) out += io::csv_num(t) + "," + io::csv_num(e) + "\n";
    return out;
}

}  // namespace detail

/// Parse and execute one invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"loop-delay docking simulator analysis toolkit"};
    app.require_subcommand(1);

    // shared state filled by whichever subcommand runs
    double m = 0.0, k = 0.0, b = 0.0;

    // ---- critical ----
    auto* critical = app.add_subcommand("critical", "crossing frequency and critical delay set");
    int crit_n = 3;
    detail::OutputOptions crit_out;
    critical->add_option("--m", m, "equivalent mass [kg]")->required();
    critical->add_option("--k", k, "stiffness [N/m]")->required();
    critical->add_option("--b", b, "damping [N*s/m]")->required();
    critical->add_option("--n", crit_n, "number of crossing delays to list")
        ->check(CLI::PositiveNumber);
    crit_out.attach(critical);

    // ---- analyze ----
    auto* analyze_cmd = app.add_subcommand("analyze", "stability verdict at a given delay");
    detail::DelayOption analyze_h;
    detail::OutputOptions analyze_out;
    analyze_cmd->add_option("--m", m, "equivalent mass [kg]")->required();
    analyze_cmd->add_option("--k", k, "stiffness [N/m]")->required();
    analyze_cmd->add_option("--b", b, "damping [N*s/m]")->required();
    analyze_h.attach(analyze_cmd, true);
    analyze_out.attach(analyze_cmd);

    // ---- pade ----
    auto* pade_cmd = app.add_subcommand("pade", "Pade cubic, Routh margins, critical delay");
    detail::DelayOption pade_h;
    detail::OutputOptions pade_out;
    pade_cmd->add_option("--m", m, "equivalent mass [kg]")->required();
    pade_cmd->add_option("--k", k, "stiffness [N/m]")->required();
    pade_cmd->add_option("--b", b, "damping [N*s/m]")->required();
    pade_h.attach(pade_cmd, false);
    pade_out.attach(pade_cmd);

    // ---- rootlocus ----
    auto* locus_cmd = app.add_subcommand("rootlocus", "root-locus trace over one parameter");
    detail::DelayOption locus_h;
    detail::OutputOptions locus_out;
    std::string vary_name;
    double from = 0.0, to = 0.0;
    int steps = 200;
    locus_cmd->add_option("--m", m, "equivalent mass [kg]")->required();
    locus_cmd->add_option("--k", k, "stiffness [N/m]")->required();
    locus_cmd->add_option("--b", b, "damping [N*s/m]")->required();
    locus_h.attach(locus_cmd, true);
    locus_cmd->add_option("--vary", vary_name, "swept parameter (h, b, k, m)")->required();
    locus_cmd->add_option("--from", from, "sweep start")->required();
    locus_cmd->add_option("--to", to, "sweep end")->required();
    locus_cmd->add_option("--steps", steps, "sample count")->check(CLI::PositiveNumber);
    locus_out.attach(locus_cmd);
    locus_out.format = "csv";

    // ---- boundary ----
    auto* boundary_cmd = app.add_subcommand("boundary", "critical boundary curve in one plane");
    detail::OutputOptions boundary_out;
    std::string y_name, method_name = "pole", sweep_name;
    double y_from = 0.0, y_to = 0.0;
    int samples = 100;
    std::vector<double> sweep_values;
    boundary_cmd->add_option("--y", y_name, "y axis parameter (b, k, m)")->required();
    boundary_cmd->add_option("--m", m, "held mass [kg]");
    boundary_cmd->add_option("--k", k, "held stiffness [N/m]");
    boundary_cmd->add_option("--b", b, "held damping [N*s/m]");
    boundary_cmd->add_option("--y-from", y_from, "y range start")->required();
    boundary_cmd->add_option("--y-to", y_to, "y range end")->required();
    boundary_cmd->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
    boundary_cmd->add_option("--method", method_name, "pole or pade");
    boundary_cmd->add_option("--sweep", sweep_name, "third parameter for a sensitivity family");
    boundary_cmd->add_option("--sweep-values", sweep_values, "values of the swept parameter")
        ->delimiter(',');
    boundary_out.attach(boundary_cmd);
    boundary_out.format = "csv";

    // ---- grid ----
    auto* grid_cmd = app.add_subcommand("grid", "classified stability grid in one plane");
    detail::OutputOptions grid_out;
    double h_from = 0.0, h_to = 0.0;
    int nx = 50, ny = 50;
    grid_cmd->add_option("--y", y_name, "y axis parameter (b, k, m)")->required();
    grid_cmd->add_option("--m", m, "held mass [kg]");
    grid_cmd->add_option("--k", k, "held stiffness [N/m]");
    grid_cmd->add_option("--b", b, "held damping [N*s/m]");
    grid_cmd->add_option("--h-from", h_from, "delay range start [s]")->required();
    grid_cmd->add_option("--h-to", h_to, "delay range end [s]")->required();
    grid_cmd->add_option("--nx", nx, "delay samples")->check(CLI::PositiveNumber);
    grid_cmd->add_option("--y-from", y_from, "y range start")->required();
    grid_cmd->add_option("--y-to", y_to, "y range end")->required();
    grid_cmd->add_option("--ny", ny, "y samples")->check(CLI::PositiveNumber);
    grid_cmd->add_option("--method", method_name, "pole or pade");
    grid_out.attach(grid_cmd);
    grid_out.format = "csv";

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "integrate the contact model and report metrics");
    detail::DelayOption sim_h;
    detail::OutputOptions sim_out;
    double v0 = 0.020, x0 = 0.010, dt = 1e-4, t_max = 30.0, window = 0.2, observer_dt = 4e-3;
    bool clamp_push_only = false, virtual_stiffness = false, hardware_damping = false;
    std::string traj_out, observer_out;
    sim_cmd->add_option("--m", m, "equivalent mass [kg]")->required();
    sim_cmd->add_option("--k", k, "stiffness [N/m]")->required();
    sim_cmd->add_option("--b", b, "damping [N*s/m]")->required();
    sim_h.attach(sim_cmd, true);
    sim_cmd->add_option("--v0", v0, "approach speed [m/s]");
    sim_cmd->add_option("--x0", x0, "initial gap [m]");
    sim_cmd->add_option("--dt", dt, "integration step [s]");
    sim_cmd->add_option("--t-max", t_max, "time horizon [s]");
    sim_cmd->add_option("--window", window, "velocity averaging window [s]");
    sim_cmd->add_option("--observer-dt", observer_dt, "passivity observer period [s]");
    sim_cmd->add_flag("--clamp-push-only", clamp_push_only, "zero tensile contact force");
    sim_cmd->add_flag("--virtual-stiffness", virtual_stiffness,
                      "attribute the stiffness force to software");
    sim_cmd->add_flag("--hardware-damping", hardware_damping,
                      "attribute the damping force to hardware");
    sim_cmd->add_option("--traj-out", traj_out, "write the trajectory CSV here");
    sim_cmd->add_option("--observer-out", observer_out, "write the energy series CSV here");
    sim_out.attach(sim_cmd);

    // ---- metrics ----
    auto* metrics_cmd = app.add_subcommand("metrics", "metrics from an ingested trace CSV");
    detail::DelayOption metrics_h;
    detail::OutputOptions metrics_out;
    std::string traj_path;
    double metrics_mass = std::numeric_limits<double>::quiet_NaN();
    metrics_cmd->add_option("--traj", traj_path, "trace CSV path")->required();
    metrics_h.attach(metrics_cmd, false);
    metrics_cmd->add_option("--m", metrics_mass, "equivalent mass for tau_hat [kg]");
    metrics_cmd->add_option("--window", window, "velocity averaging window [s]");
    metrics_cmd->add_option("--observer-dt", observer_dt, "passivity observer period [s]");
    metrics_out.attach(metrics_cmd);

    // ---- emulate ----
    auto* emulate_cmd = app.add_subcommand("emulate", "solve the virtual damping for a target eps");
    detail::DelayOption emu_h;
    detail::OutputOptions emu_out;
    double target_eps = 0.75, tol = 0.005;
    std::string table_out;
    emulate_cmd->add_option("--target-eps", target_eps, "target restitution coefficient")
        ->required();
    emulate_cmd->add_option("--m", m, "equivalent mass [kg]")->required();
    emulate_cmd->add_option("--k", k, "stiffness [N/m]")->required();
    emu_h.attach(emulate_cmd, true);
    emulate_cmd->add_option("--tol", tol, "solver tolerance on eps");
    emulate_cmd->add_option("--v0", v0, "approach speed [m/s]");
    emulate_cmd->add_option("--x0", x0, "initial gap [m]");
    emulate_cmd->add_option("--dt", dt, "integration step [s]");
    emulate_cmd->add_option("--t-max", t_max, "time horizon [s]");
    emulate_cmd->add_option("--table-out", table_out, "write the comparison table CSV here");
    emu_out.attach(emulate_cmd);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);

        if (*critical) {
            const PlantParams p(m, k, b, 0.0);
            const CrossingSet set = critical_delay_set(p, crit_n);
            json j;
            j["omega_c"] = set.omega_c;
            j["h_c"] = set.h_values.front();
            j["h_c_approx"] = approx_critical_delay(p);
            j["sigma"] = set.sigma;
            j["h_n"] = set.h_values;
            crit_out.stamp_json(j);
            if (crit_out.format == "json") {
                crit_out.deliver(j.dump(2) + "\n", out);
            } else {
                std::vector<std::pair<std::string, std::string>> rows = {
                    {"omega_c", io::csv_num(set.omega_c)},
                    {"h_c", io::csv_num(set.h_values.front())},
                    {"h_c_approx", io::csv_num(approx_critical_delay(p))},
                    {"sigma", io::csv_num(set.sigma)}};
                for (std::size_t i = 0; i < set.h_values.size(); ++i)
                    rows.emplace_back("h_" + std::to_string(i), io::csv_num(set.h_values[i]));
                crit_out.deliver(detail::kv_csv(rows), out);
            }
        } else if (*analyze_cmd) {
            const PlantParams p(m, k, b, analyze_h.seconds());
            const StabilityReport report = analyze(p);
            json j;
            j["verdict"] = to_string(report.verdict.state);
            j["margin"] = report.verdict.margin;
            j["h"] = report.h;
            j["h_c"] = report.h_c;
            j["h_c_approx"] = report.h_c_approx;
            j["omega_c"] = report.omega_c;
            j["sigma"] = report.sigma;
            j["h_n"] = report.h_crossings;
            analyze_out.stamp_json(j);
            if (analyze_out.format == "json") {
                analyze_out.deliver(j.dump(2) + "\n", out);
            } else {
                analyze_out.deliver(detail::kv_csv({{"verdict", to_string(report.verdict.state)},
                                                    {"margin", io::csv_num(report.verdict.margin)},
                                                    {"h", io::csv_num(report.h)},
                                                    {"h_c", io::csv_num(report.h_c)},
                                                    {"h_c_approx", io::csv_num(report.h_c_approx)},
                                                    {"omega_c", io::csv_num(report.omega_c)},
                                                    {"sigma", io::csv_num(report.sigma)}}),
                                    out);
            }
        } else if (*pade_cmd) {
            const bool have_h = pade_h.opt_s->count() || pade_h.opt_ms->count();
            const PlantParams p(m, k, b, have_h ? pade_h.seconds() : 0.0);
            json j;
            if (b > 0.0) {
                j["h_c_pade"] = pade_critical_delay(p);
                j["omega_pade"] = pade_crossing_frequency(p);
            } else {
                j["h_c_pade"] = nullptr;
                j["omega_pade"] = nullptr;
            }
            if (have_h) {
                const PadeCubic c = pade_cubic(p);
                const RouthMargins rm = routh_margins(p);
                j["cubic"] = {{"a3", c.a3}, {"a2", c.a2}, {"a1", c.a1}, {"a0", c.a0}};
                j["routh"] = {{"q34", detail::num_or_null(rm.q34)},
                              {"q35", rm.q35},
                              {"q36", rm.q36},
                              {"undamped", rm.undamped},
                              {"stable", rm.stable}};
            }
            pade_out.stamp_json(j);
            if (pade_out.format == "json") {
                pade_out.deliver(j.dump(2) + "\n", out);
            } else {
                std::vector<std::pair<std::string, std::string>> rows;
                if (b > 0.0) {
                    rows.emplace_back("h_c_pade", io::csv_num(pade_critical_delay(p)));
                    rows.emplace_back("omega_pade", io::csv_num(pade_crossing_frequency(p)));
                }
                if (have_h) {
                    const PadeCubic c = pade_cubic(p);
                    const RouthMargins rm = routh_margins(p);
                    rows.emplace_back("a3", io::csv_num(c.a3));
                    rows.emplace_back("a2", io::csv_num(c.a2));
                    rows.emplace_back("a1", io::csv_num(c.a1));
                    rows.emplace_back("a0", io::csv_num(c.a0));
                    rows.emplace_back("q34", io::csv_num(rm.q34));
                    rows.emplace_back("q35", io::csv_num(rm.q35));
                    rows.emplace_back("q36", io::csv_num(rm.q36));
                    rows.emplace_back("stable", rm.stable ? "1" : "0");
                }
                pade_out.deliver(detail::kv_csv(rows), out);
            }
        } else if (*locus_cmd) {
            const PlantParams p(m, k, b, locus_h.seconds());
            const RootLocusTrace trace = root_locus(p, detail::gain_from(vary_name), from, to, steps);
            if (locus_out.format == "csv") {
                locus_out.deliver(to_csv(trace), out);
            } else {
                json j;
                j["vary"] = to_string(trace.vary);
                json samples = json::array();
                for (const auto& s : trace.samples) {
                    json roots = json::array();
                    for (int i = 0; i < s.n_roots; ++i)
                        roots.push_back({s.roots[i].real(), s.roots[i].imag()});
                    samples.push_back({{"value", s.value}, {"roots", roots}});
                }
                j["samples"] = samples;
                locus_out.stamp_json(j);
                locus_out.deliver(j.dump(2) + "\n", out);
            }
        } else if (*boundary_cmd) {
            const PlaneAxis axis = detail::axis_from(y_name);
            const Method method = detail::method_from(method_name);
            if (!sweep_name.empty()) {
                const PlaneAxis sweep_axis = detail::axis_from(sweep_name);
                const PlantParams fixed = detail::plane_fixed(axis, m, k, b, sweep_axis, true);
                auto family = sensitivity_family(axis, fixed, y_from, y_to, samples, sweep_axis,
                                                 sweep_values, method);
                if (boundary_out.format == "csv") {
                    boundary_out.deliver(to_csv(family, sweep_axis), out);
                } else {
                    json j;
                    j["y_axis"] = to_string(axis);
                    j["sweep"] = to_string(sweep_axis);
                    json curves = json::array();
                    for (const auto& [v, curve] : family) {
                        json pts = json::array();
                        for (const auto& [hh, yy] : curve.points) pts.push_back({hh, yy});
                        curves.push_back({{"value", v}, {"points", pts}});
                    }
                    j["curves"] = curves;
                    boundary_out.stamp_json(j);
                    boundary_out.deliver(j.dump(2) + "\n", out);
                }
            } else {
                const PlantParams fixed =
                    detail::plane_fixed(axis, m, k, b, PlaneAxis::Damping, false);
                const BoundaryCurve curve =
                    boundary_curve(axis, fixed, y_from, y_to, samples, method);
                for (const auto& w : curve.warnings) err << "warning: " << w << "\n";
                if (boundary_out.format == "csv") {
                    boundary_out.deliver(to_csv(curve), out);
                } else {
                    json j;
                    j["y_axis"] = to_string(axis);
                    j["method"] = to_string(method);
                    json pts = json::array();
                    for (const auto& [hh, yy] : curve.points) pts.push_back({hh, yy});
                    j["points"] = pts;
                    boundary_out.stamp_json(j);
                    boundary_out.deliver(j.dump(2) + "\n", out);
                }
            }
        } else if (*grid_cmd) {
            const PlaneAxis axis = detail::axis_from(y_name);
            const Method method = detail::method_from(method_name);
            const PlantParams fixed = detail::plane_fixed(axis, m, k, b, PlaneAxis::Damping, false);
            const StabilityGrid grid =
                classify_grid(fixed, h_from, h_to, nx, axis, y_from, y_to, ny, method);
            if (grid_out.format == "csv") {
                grid_out.deliver(to_csv(grid), out);
            } else {
                json j;
                j["y_axis"] = to_string(axis);
                j["method"] = to_string(method);
                j["h_values"] = grid.h_values;
                j["y_values"] = grid.y_values;
                std::string codes;
                codes.reserve(grid.cells.size());
                for (Stability s : grid.cells) codes += verdict_code(s);
                j["cells"] = codes;
                grid_out.stamp_json(j);
                grid_out.deliver(j.dump(2) + "\n", out);
            }
        } else if (*sim_cmd) {
            SimConfig cfg(PlantParams(m, k, b, sim_h.seconds()));
            cfg.v0 = v0;
            cfg.x0 = x0;
            cfg.dt = dt;
            cfg.t_max = t_max;
            cfg.post_contact_window = window;
            cfg.observer_dt = observer_dt;
            cfg.clamp_push_only = clamp_push_only;
            cfg.virtual_stiffness = virtual_stiffness;
            cfg.virtual_damping = !hardware_damping;
            const SimResult res = simulate(cfg);
            if (!traj_out.empty()) io::atomic_write(traj_out, to_csv(res.trajectory));
            if (!observer_out.empty())
                io::atomic_write(observer_out, detail::observer_csv(res.metrics.delta_E_series));
            if (res.status == SimStatus::Diverged)
                throw NumericalError("simulation diverged; partial trajectory " +
                                     (traj_out.empty() ? std::string("not saved (use --traj-out)")
                                                       : "written to " + traj_out));
            json j = detail::metrics_json(res.metrics, res.status, res.dt_used, res.dt_adjusted);
            sim_out.stamp_json(j);
            if (sim_out.format == "json")
                sim_out.deliver(j.dump(2) + "\n", out);
            else
                sim_out.deliver(detail::metrics_csv(j), out);
        } else if (*metrics_cmd) {
            Trajectory traj = ingest_trace(traj_path);
            traj.h = metrics_h.seconds();
            MetricsOptions opts;
            opts.window = window;
            opts.observer_dt = observer_dt;
            opts.mass = metrics_mass;
            const ContactMetrics metrics = compute_metrics(traj, opts);
            const SimStatus status = metrics.no_contact ? SimStatus::NoContact
                                     : metrics.incomplete ? SimStatus::ContactIncomplete
                                                          : SimStatus::Ok;
            json j = detail::metrics_json(metrics, status, traj.dt, false);
            metrics_out.stamp_json(j);
            if (metrics_out.format == "json")
                metrics_out.deliver(j.dump(2) + "\n", out);
            else
                metrics_out.deliver(detail::metrics_csv(j), out);
        } else if (*emulate_cmd) {
            const double h = emu_h.seconds();
            SimConfig base(PlantParams(m, k, 0.0, h));
            base.v0 = v0;
            base.x0 = x0;
            base.dt = dt;
            base.t_max = t_max;
            const EmulationResult res = solve_virtual_damping(target_eps, m, k, h, base, tol);
            std::vector<EmulationRow> rows = res.comparison;
            rows.front().label = h > 0.0 ? "delayed" : "delay-free";
            if (h > 0.0) {
                // delay-free reference, the physical test being emulated
                const EmulationResult ref = solve_virtual_damping(target_eps, m, k, 0.0, base, tol);
                EmulationRow row = ref.comparison.front();
                row.label = "delay-free";
                rows.insert(rows.begin(), row);
            }
            if (!table_out.empty()) io::atomic_write(table_out, to_csv(rows));
            json j;
            j["b_star"] = res.b_star;
            j["epsilon_achieved"] = res.epsilon_achieved;
            j["iterations"] = res.iterations;
            j["bracket"] = {res.b_lo, res.b_hi};
            json comp = json::array();
            for (const auto& r : rows)
                comp.push_back({{"label", r.label},
                                {"m", r.m},
                                {"k", r.k},
                                {"b", r.b},
                                {"h", r.h},
                                {"epsilon", r.epsilon},
                                {"f_max", r.f_max}});
            j["comparison"] = comp;
            emu_out.stamp_json(j);
            if (emu_out.format == "json")
                emu_out.deliver(j.dump(2) + "\n", out);
            else
                emu_out.deliver(to_csv(rows), out);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help and friends
            out << app.help();
            return 0;
        }
        err << "error_code=usage " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error_code=parse " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        err << "error_code=domain " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        err << "error_code=numerical " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error_code=internal " << e.what() << "\n";
        return 4;
    }
}

}  // namespace delaydock::cli
