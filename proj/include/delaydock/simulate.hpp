#pragma once

// Fixed-step time-domain integration of the loop-delay contact dynamics
//   m x_r''(t) = f(t),   f = -k x(t) - b x'(t) while x(t) < 0, else 0,
//   x(t) = x_r(t - h),
// with a unilateral contact phase, plus the data-driven metrics computed
// from trajectories: restitution, contact duration, fitted stiffness, and
// the passivity-observer energy.
//
// Integrator: classical RK4 with the delayed state served from the stored
// node history (exact at nodes because dt is adjusted so h/dt is integral;
// cubic Hermite at the half-step stage points).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "delaydock/io.hpp"
#include "delaydock/plant.hpp"

namespace delaydock {

struct SimConfig {
    PlantParams plant;
    double v0 = 0.020;                 ///< approach speed [m/s], > 0 toward contact
    double x0 = 0.010;                 ///< initial commanded gap [m], > 0
    double dt = 1e-4;                  ///< step [s]; adjusted so h/dt is integral
    double t_max = 30.0;               ///< horizon [s]
    double post_contact_window = 0.2;  ///< velocity averaging window [s]
    double observer_dt = 4e-3;         ///< passivity-observer sample period [s]
    bool clamp_push_only = false;      ///< zero tensile contact force
    bool virtual_stiffness = false;    ///< stiffness component injected in software
    bool virtual_damping = true;       ///< damping component injected in software

    explicit SimConfig(const PlantParams& p) : plant(p) {}

    void validate() const {
        if (!(v0 > 0.0)) throw std::domain_error("SimConfig: v0 must be > 0");
        if (!(x0 > 0.0)) throw std::domain_error("SimConfig: x0 must be > 0");
        if (!(dt > 0.0)) throw std::domain_error("SimConfig: dt must be > 0");
        if (!(t_max > x0 / v0)) throw std::domain_error("SimConfig: t_max must exceed x0/v0");
        if (!(post_contact_window > 0.0))
            throw std::domain_error("SimConfig: post_contact_window must be > 0");
        if (!(observer_dt >= dt)) throw std::domain_error("SimConfig: observer_dt must be >= dt");
    }
};

/// Uniformly sampled run. x is the measured relative position (the command
/// delayed by h), v_r and v_m the command and measured velocities, f the
/// hardware (measured) force component, f_in the total force fed to the
/// numerical simulator. contact marks x < 0.
struct Trajectory {
    std::vector<double> t, x_r, x, v_r, v_m, f, f_in;
    std::vector<std::uint8_t> contact;
    double dt = 0.0;
    double h = 0.0;  ///< loop delay metadata (0 for ingested traces unless set)

    std::size_t size() const { return t.size(); }
};

enum class SimStatus { Ok, NoContact, ContactIncomplete, Diverged };

inline const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::Ok: return "ok";
        case SimStatus::NoContact: return "no_contact";
        case SimStatus::ContactIncomplete: return "contact_incomplete";
        default: return "diverged";
    }
}

struct ContactMetrics {
    double v_minus = std::numeric_limits<double>::quiet_NaN();
    double v_plus = std::numeric_limits<double>::quiet_NaN();
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double tau_hat = std::numeric_limits<double>::quiet_NaN();
    double k_hat = std::numeric_limits<double>::quiet_NaN();
    double delta_E_final = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> delta_E_series;  ///< (t, J)
    bool no_contact = false;
    bool incomplete = false;
};

/// Contact episode boundaries in a trajectory. Times are sub-step refined
/// by linear interpolation of x across the bracketing samples.
struct ContactSpan {
    bool found = false;
    bool complete = false;
    std::size_t first = 0;       ///< first flagged sample
    std::size_t episode_end = 0; ///< first unflagged sample after `first`
    std::size_t last = 0;        ///< last flagged sample overall
    double t_start = 0.0;
    double t_end = 0.0;
};

inline ContactSpan find_contact(const Trajectory& traj) {
    ContactSpan span;
    const std::size_t n = traj.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (traj.contact[i]) {
            span.found = true;
            span.first = i;
            break;
        }
    }
    if (!span.found) return span;
    span.episode_end = n;
    for (std::size_t i = span.first + 1; i < n; ++i) {
        if (!traj.contact[i]) {
            span.episode_end = i;
            break;
        }
    }
    for (std::size_t i = n; i-- > span.first;) {
        if (traj.contact[i]) {
            span.last = i;
            break;
        }
    }
    span.complete = span.last + 1 < n;

    // refined start: zero crossing between first-1 and first
    if (span.first == 0) {
        span.t_start = traj.t.front();
    } else {
        const double xa = traj.x[span.first - 1], xb = traj.x[span.first];
        span.t_start = traj.t[span.first - 1] + traj.dt * (xa / (xa - xb));
    }
    if (span.complete) {
        const std::size_t j = span.episode_end - 1;  // last sample of first episode
        const double xa = traj.x[j], xb = traj.x[j + 1];
        span.t_end = traj.t[j] + traj.dt * (-xa) / (xb - xa);
    }
    return span;
}

/// Observed contact duration [s]: first zero crossing into contact to the
/// crossing out of it, sub-step refined. Requires a completed contact.
inline double contact_duration(const Trajectory& traj) {
    const ContactSpan span = find_contact(traj);
    if (!span.found) throw std::domain_error("contact_duration: trajectory has no contact");
    if (!span.complete) throw std::domain_error("contact_duration: contact did not complete");
    return span.t_end - span.t_start;
}

struct Restitution {
    double v_minus;
    double v_plus;
    double epsilon;
};

/// Mean approach/recede speeds in windows adjacent to the contact, keeping a
/// 2h guard band next to it, and their ratio epsilon = v_plus / v_minus.
inline Restitution restitution(const Trajectory& traj, double window) {
    if (!(window > 0.0)) throw std::domain_error("restitution: window must be > 0");
    const ContactSpan span = find_contact(traj);
    if (!span.found) throw std::domain_error("restitution: trajectory has no contact");
    if (!span.complete) throw std::domain_error("restitution: contact did not complete");

    const auto guard = static_cast<std::size_t>(std::llround(2.0 * traj.h / traj.dt));
    const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window / traj.dt)));

    if (span.first < guard + 1) throw std::domain_error("restitution: no pre-contact data");
    const std::size_t pre_hi = span.first - guard;
    const std::size_t pre_lo = pre_hi > win ? pre_hi - win : 0;
    double v_minus = 0.0;
    for (std::size_t i = pre_lo; i < pre_hi; ++i) v_minus -= traj.v_m[i];
    v_minus /= static_cast<double>(pre_hi - pre_lo);

    const std::size_t post_lo = span.last + 1 + guard;
    if (post_lo >= traj.size()) throw std::domain_error("restitution: no post-contact data");
    const std::size_t post_hi = std::min(traj.size(), post_lo + win);
    double v_plus = 0.0;
    for (std::size_t i = post_lo; i < post_hi; ++i) v_plus += traj.v_m[i];
    v_plus /= static_cast<double>(post_hi - post_lo);

    return {v_minus, v_plus, v_plus / v_minus};
}

/// Predicted contact duration pi / omega_hat with omega_hat = sqrt(k_hat/m),
/// the half-period of the undamped contact oscillation at the fitted
/// stiffness.
inline double predicted_duration(const PlantParams& p, double k_hat) {
    if (!(k_hat > 0.0)) throw std::domain_error("predicted_duration: k_hat must be > 0");
    return std::numbers::pi * std::sqrt(p.m / k_hat);
}

/// Least-squares linear-spring fit through the origin, -f = k x over contact
/// samples; f is the hardware force column (spring component under the
/// default attribution).
inline double estimate_stiffness(const Trajectory& traj) {
    double sxx = 0.0, sxf = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (!traj.contact[i]) continue;
        sxx += traj.x[i] * traj.x[i];
        sxf += traj.x[i] * traj.f[i];
    }
    if (sxx <= 0.0) throw std::domain_error("estimate_stiffness: no penetration samples");
    return -sxf / sxx;
}

/// Passivity-observer series over the contact,
///   dE(N) = dt_obs * sum_{i=1..N} [ f(i) w_m(i) - f_in(i) w_r(i) ],
/// with velocities in the robot frame of the fixed-target setup (w = -v for
/// the stored relative velocities). Positive final value: the loop injected
/// energy (active); negative: it dissipated (passive).
inline std::vector<std::pair<double, double>> passivity_observer(const Trajectory& traj,
                                                                 double observer_dt) {
    if (!(observer_dt >= traj.dt))
        throw std::domain_error("passivity_observer: observer_dt must be >= trajectory dt");
    std::vector<std::pair<double, double>> series;
    const ContactSpan span = find_contact(traj);
    if (!span.found) return series;

    const double t0 = traj.t[span.first];
    const double t_last = traj.t[span.last];
    const auto n_ticks = static_cast<std::size_t>(std::floor((t_last - t0) / observer_dt));
    double energy = 0.0;
    for (std::size_t j = 1; j <= n_ticks; ++j) {
        const double tj = t0 + static_cast<double>(j) * observer_dt;
        auto i = static_cast<std::size_t>(std::llround((tj - traj.t.front()) / traj.dt));
        i = std::min(i, traj.size() - 1);
        // f*w_m - f_in*w_r with w = -v reduces to f_in*v_r - f*v_m
        energy += observer_dt * (traj.f_in[i] * traj.v_r[i] - traj.f[i] * traj.v_m[i]);
        series.emplace_back(tj, energy);
    }
    if (series.empty()) series.emplace_back(t0, 0.0);
    return series;
}

struct MetricsOptions {
    double window = 0.2;
    double observer_dt = 4e-3;
    /// equivalent mass for the duration prediction; NaN skips tau_hat
    double mass = std::numeric_limits<double>::quiet_NaN();
};

/// All contact metrics derivable from a trajectory. Missing prerequisites
/// (no contact, unfinished contact, not enough window data) set the flags
/// instead of throwing so partial runs remain reportable.
inline ContactMetrics compute_metrics(const Trajectory& traj, const MetricsOptions& opts) {
    ContactMetrics metrics;
    const ContactSpan span = find_contact(traj);
    if (!span.found) {
        metrics.no_contact = true;
        return metrics;
    }
    if (!span.complete) {
        metrics.incomplete = true;
        return metrics;
    }
    metrics.tau = span.t_end - span.t_start;
    try {
        const Restitution r = restitution(traj, opts.window);
        metrics.v_minus = r.v_minus;
        metrics.v_plus = r.v_plus;
        metrics.epsilon = r.epsilon;
    } catch (const std::domain_error&) {
        metrics.incomplete = true;
    }
    try {
        metrics.k_hat = estimate_stiffness(traj);
        if (std::isfinite(opts.mass) && metrics.k_hat > 0.0)
            metrics.tau_hat = std::numbers::pi * std::sqrt(opts.mass / metrics.k_hat);
    } catch (const std::domain_error&) {
        // degenerate penetration; leave k_hat unset
    }
    metrics.delta_E_series = passivity_observer(traj, opts.observer_dt);
    if (!metrics.delta_E_series.empty()) metrics.delta_E_final = metrics.delta_E_series.back().second;
    return metrics;
}

struct SimResult {
    Trajectory trajectory;
    ContactMetrics metrics;
    SimStatus status = SimStatus::Ok;
    double dt_used = 0.0;
    bool dt_adjusted = false;
};

namespace detail {

struct SimNode {
    double x, v, a;
};

/// Contact force from the measured (delayed) state.
inline double contact_force(const SimConfig& cfg, double xd, double vd) {
    if (xd >= 0.0) return 0.0;
    double f = -cfg.plant.k * xd - cfg.plant.b * vd;
    if (cfg.clamp_push_only && f < 0.0) f = 0.0;
    return f;
}

/// Hermite midpoint of a cubic segment with endpoint values and slopes.
inline double hermite_mid(double ya, double sa, double yb, double sb, double dt) {
    return 0.5 * (ya + yb) + 0.125 * dt * (sa - sb);
}

}  // namespace detail

/// Integrate the loop-delay contact model. The run stops at t_max, after the
/// post-contact window (plus the 2h guard) has been captured, or on
/// divergence; the partial trajectory is returned in every case.
inline SimResult simulate(const SimConfig& cfg) {
    cfg.validate();
    const PlantParams& p = cfg.plant;

    SimResult result;
    const auto n_delay =
        p.h > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.h / cfg.dt)))
                  : 0;
    const double dt = p.h > 0.0 ? p.h / static_cast<double>(n_delay) : cfg.dt;
    result.dt_used = dt;
    result.dt_adjusted = std::abs(dt - cfg.dt) > 1e-12 * cfg.dt;

    std::vector<detail::SimNode> hist;
    hist.reserve(static_cast<std::size_t>(cfg.t_max / dt) + n_delay + 2);
    for (std::size_t i = 0; i <= n_delay; ++i) {
        // free-flight prefill over [-h, 0]: x_r(t) = x0 - v0 t
        const double t = (static_cast<double>(i) - static_cast<double>(n_delay)) * dt;
        hist.push_back({cfg.x0 - cfg.v0 * t, -cfg.v0, 0.0});
    }

    const double blow_up = 1e6 * cfg.x0;
    bool contact_seen = false;
    bool contact_done = false;
    double stop_after = cfg.t_max;
    SimStatus status = SimStatus::Ok;

    std::size_t j = n_delay;  // current node (t = 0)
    while (true) {
        const double t = (static_cast<double>(j) - static_cast<double>(n_delay)) * dt;
        const double x_meas = hist[j - n_delay].x;
        if (std::abs(hist[j].x) > blow_up || std::abs(x_meas) > blow_up) {
            status = SimStatus::Diverged;
            break;
        }
        const bool in_contact = x_meas < 0.0;
        if (in_contact && !contact_seen) contact_seen = true;
        if (contact_seen && !contact_done && !in_contact &&
            hist[(j - 1) - n_delay].x < 0.0) {
            contact_done = true;
            stop_after = std::min(cfg.t_max,
                                  t + 2.0 * p.h + cfg.post_contact_window + 5.0 * dt);
        }
        if (t >= stop_after) break;
        if (t >= cfg.t_max) break;

        // one RK4 step from node j
        const double x = hist[j].x, v = hist[j].v;
        double a1, a2, a3, a4;
        if (n_delay == 0) {
            a1 = detail::contact_force(cfg, x, v) / p.m;
            const double xv1 = x + 0.5 * dt * v, vv1 = v + 0.5 * dt * a1;
            a2 = detail::contact_force(cfg, xv1, vv1) / p.m;
            const double xv2 = x + 0.5 * dt * vv1, vv2 = v + 0.5 * dt * a2;
            a3 = detail::contact_force(cfg, xv2, vv2) / p.m;
            const double xv3 = x + dt * vv2, vv3 = v + dt * a3;
            a4 = detail::contact_force(cfg, xv3, vv3) / p.m;
            hist.push_back({x + dt / 6.0 * (v + 2.0 * vv1 + 2.0 * vv2 + vv3),
                            v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4), 0.0});
            hist[j + 1].a = detail::contact_force(cfg, hist[j + 1].x, hist[j + 1].v) / p.m;
        } else {
            const detail::SimNode& da = hist[j - n_delay];
            const detail::SimNode& db = hist[j - n_delay + 1];
            const double xd_mid = detail::hermite_mid(da.x, da.v, db.x, db.v, dt);
            const double vd_mid = detail::hermite_mid(da.v, da.a, db.v, db.a, dt);

            a1 = detail::contact_force(cfg, da.x, da.v) / p.m;
            const double vv1 = v + 0.5 * dt * a1;
            const double f_mid = detail::contact_force(cfg, xd_mid, vd_mid);
            a2 = f_mid / p.m;
            const double vv2 = v + 0.5 * dt * a2;
            a3 = f_mid / p.m;  // same delayed state at both half-step stages
            const double vv3 = v + dt * a3;
            a4 = detail::contact_force(cfg, db.x, db.v) / p.m;
            hist.push_back({x + dt / 6.0 * (v + 2.0 * vv1 + 2.0 * vv2 + vv3),
                            v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
                            a4});  // node RHS at t+dt uses the same delayed node
        }
        ++j;
    }

    if (!contact_seen)
        status = status == SimStatus::Diverged ? status : SimStatus::NoContact;
    else if (!contact_done && status == SimStatus::Ok)
        status = SimStatus::ContactIncomplete;
    result.status = status;

    // assemble the sampled trajectory from t = 0
    Trajectory& traj = result.trajectory;
    traj.dt = dt;
    traj.h = p.h;
    const std::size_t n_samples = hist.size() - n_delay;
    traj.t.reserve(n_samples);
    for (std::size_t i = n_delay; i < hist.size(); ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(n_delay)) * dt;
        const double x_meas = hist[i - n_delay].x;
        const double v_meas = hist[i - n_delay].v;
        const bool in_contact = x_meas < 0.0;
        double spring = 0.0, damper = 0.0;
        if (in_contact) {
            spring = -p.k * x_meas;
            damper = -p.b * v_meas;
        }
        double total = spring + damper;
        double hardware = (cfg.virtual_stiffness ? 0.0 : spring) +
                          (cfg.virtual_damping ? 0.0 : damper);
        if (cfg.clamp_push_only && in_contact && total < 0.0) {
            total = 0.0;
            hardware = 0.0;
        }
        traj.t.push_back(t);
        traj.x_r.push_back(hist[i].x);
        traj.x.push_back(x_meas);
        traj.v_r.push_back(hist[i].v);
        traj.v_m.push_back(v_meas);
        traj.f.push_back(hardware);
        traj.f_in.push_back(total);
        traj.contact.push_back(in_contact ? 1 : 0);
    }

    MetricsOptions opts;
    opts.window = cfg.post_contact_window;
    opts.observer_dt = cfg.observer_dt;
    opts.mass = p.m;
    result.metrics = compute_metrics(traj, opts);
    if (result.status == SimStatus::NoContact) result.metrics.no_contact = true;
    if (result.status == SimStatus::ContactIncomplete) result.metrics.incomplete = true;
    return result;
}

/// CSV export: header t,x_r,x,v_r,v_m,f,f_in,contact with contact in {0,1}.
/// Floats use the shortest round-trip representation so that re-ingesting a
/// trace reproduces its metrics exactly.
inline std::string to_csv(const Trajectory& traj) {
    std::string out = "t,x_r,x,v_r,v_m,f,f_in,contact\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out += io::rt_num(traj.t[i]) + ',' + io::rt_num(traj.x_r[i]) + ',' +
               io::rt_num(traj.x[i]) + ',' + io::rt_num(traj.v_r[i]) + ',' +
               io::rt_num(traj.v_m[i]) + ',' + io::rt_num(traj.f[i]) + ',' +
               io::rt_num(traj.f_in[i]) + ',' + (traj.contact[i] ? '1' : '0') + '\n';
    }
    return out;
}

namespace detail {

inline double parse_field(const std::string& field, std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw ParseError("bad number '" + field + "'", line_no);
    return v;
}

}  // namespace detail

/// Parse a trace CSV. Header must name t,x_r,x,v_r,v_m,f and optionally
/// f_in (defaulting to f when absent); a trailing contact column is ignored
/// and the flag is re-derived as x < 0. Time must be strictly increasing;
/// non-uniform sampling is resampled to a uniform grid by linear
/// interpolation.
inline Trajectory ingest_trace(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("empty trace", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = io::split_csv(line);
    const std::vector<std::string> required = {"t", "x_r", "x", "v_r", "v_m", "f"};
    if (header.size() < required.size())
        throw ParseError("header must be t,x_r,x,v_r,v_m,f[,f_in]", line_no);
    for (std::size_t i = 0; i < required.size(); ++i)
        if (header[i] != required[i])
            throw ParseError("unexpected header column '" + header[i] + "'", line_no);
    const bool has_f_in = header.size() > 6 && header[6] == "f_in";
    const std::size_t expect_min = has_f_in ? 7 : 6;

    std::vector<std::array<double, 7>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = io::split_csv(line);
        if (fields.size() < expect_min)
            throw ParseError("expected at least " + std::to_string(expect_min) + " columns",
                             line_no);
        std::array<double, 7> row{};
        for (std::size_t c = 0; c < 6; ++c) row[c] = detail::parse_field(fields[c], line_no);
        row[6] = has_f_in ? detail::parse_field(fields[6], line_no) : row[5];
        if (!rows.empty() && !(row[0] > rows.back()[0]))
            throw ParseError("time not strictly increasing", line_no);
        rows.push_back(row);
    }
    if (rows.size() < 3) throw ParseError("insufficient samples (need at least 3)", line_no);

    const double span = rows.back()[0] - rows.front()[0];
    const double dt = span / static_cast<double>(rows.size() - 1);
    bool uniform = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (std::abs((rows[i][0] - rows[i - 1][0]) - dt) > 1e-6 * dt) {
            uniform = false;
            break;
        }
    }

    Trajectory traj;
    traj.dt = dt;
    traj.h = 0.0;
    const std::size_t n = rows.size();
    auto emit = [&traj](double t, const std::array<double, 7>& r) {
        traj.t.push_back(t);
        traj.x_r.push_back(r[1]);
        traj.x.push_back(r[2]);
        traj.v_r.push_back(r[3]);
        traj.v_m.push_back(r[4]);
        traj.f.push_back(r[5]);
        traj.f_in.push_back(r[6]);
        traj.contact.push_back(r[2] < 0.0 ? 1 : 0);
    };
    if (uniform) {
        for (const auto& r : rows) emit(r[0], r);
    } else {
        std::size_t seg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rows.front()[0] + static_cast<double>(i) * dt;
            while (seg + 2 < n && rows[seg + 1][0] <= t) ++seg;
            const double t0 = rows[seg][0], t1 = rows[seg + 1][0];
            const double u = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
            std::array<double, 7> r{};
            for (std::size_t c = 1; c < 7; ++c)
                r[c] = rows[seg][c] + u * (rows[seg + 1][c] - rows[seg][c]);
            emit(t, r);
        }
    }
    return traj;
}

inline Trajectory ingest_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path, 0);
    return ingest_trace(in);
}

}  // namespace delaydock
