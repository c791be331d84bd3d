#pragma once

// Inverse contact-behavior problem: given a target restitution coefficient
// and fixed (m, k, h), find the virtual damping b* whose simulated loop
// reproduces the target. Bisection on the monotone map b -> eps(b); every
// evaluation is a full simulation, so robustness beats convergence order.

#include <cmath>
#include <string>
#include <vector>

#include "delaydock/plant.hpp"
#include "delaydock/simulate.hpp"

namespace delaydock {

/// Peak input-force magnitude over the contact interval [N].
inline double peak_force(const Trajectory& traj) {
    const ContactSpan span = find_contact(traj);
    if (!span.found) throw std::domain_error("peak_force: trajectory has no contact");
    double peak = 0.0;
    for (std::size_t i = span.first; i <= span.last; ++i)
        peak = std::max(peak, std::abs(traj.f_in[i]));
    return peak;
}

struct EmulationRow {
    std::string label;
    double m, k, b, h;
    double epsilon;
    double f_max;
};

struct EmulationResult {
    double b_star = 0.0;
    double epsilon_achieved = 0.0;
    int iterations = 0;
    double b_lo = 0.0;        ///< final bracket, eps(b_lo) >= target
    double b_hi = 0.0;        ///< final bracket, eps(b_hi) <= target
    std::vector<EmulationRow> comparison;
};

namespace detail {

struct EpsEval {
    double epsilon;
    double f_max;
    bool completed;
};

inline EpsEval eval_damping(const SimConfig& base, double m, double k, double h, double b) {
    SimConfig cfg(PlantParams(m, k, b, h));
    cfg.v0 = base.v0;
    cfg.x0 = base.x0;
    cfg.dt = base.dt;
    cfg.t_max = base.t_max;
    cfg.post_contact_window = base.post_contact_window;
    cfg.observer_dt = base.observer_dt;
    cfg.clamp_push_only = base.clamp_push_only;
    cfg.virtual_stiffness = base.virtual_stiffness;
    cfg.virtual_damping = base.virtual_damping;
    const SimResult res = simulate(cfg);
    if (res.status == SimStatus::Diverged)
        throw NumericalError("solve_virtual_damping: simulation diverged at b=" + std::to_string(b));
    if (res.status != SimStatus::Ok || !std::isfinite(res.metrics.epsilon))
        return {0.0, 0.0, false};  // heavy damping held the contact past the horizon
    return {res.metrics.epsilon, peak_force(res.trajectory), true};
}

}  // namespace detail

/// Solve eps(b) = target_eps for the virtual damping at fixed (m, k, h).
/// The bracket starts from the k*h boundary estimate and doubles until the
/// target is enclosed, capped at 100 k h + 10 sqrt(k m).
inline EmulationResult solve_virtual_damping(double target_eps, double m, double k, double h,
                                             const SimConfig& base, double tol = 0.005) {
    if (!(target_eps > 0.0 && target_eps <= 1.0))
        throw std::domain_error("solve_virtual_damping: target_eps must be in (0, 1]");
    if (!(tol > 0.0)) throw std::domain_error("solve_virtual_damping: tol must be > 0");

    const double b_cap = 100.0 * k * h + 10.0 * std::sqrt(k * m);
    auto eval = [&](double b) { return detail::eval_damping(base, m, k, h, b); };

    EmulationResult result;
    double lo = 0.0;
    detail::EpsEval lo_eval = eval(lo);
    ++result.iterations;
    if (lo_eval.completed && lo_eval.epsilon <= target_eps + tol &&
        lo_eval.epsilon >= target_eps - tol) {
        result.b_star = lo;
        result.epsilon_achieved = lo_eval.epsilon;
        result.b_lo = result.b_hi = lo;
        result.comparison.push_back({"achieved", m, k, lo, h, lo_eval.epsilon, lo_eval.f_max});
        return result;
    }
    if (lo_eval.completed && lo_eval.epsilon < target_eps)
        throw std::domain_error("solve_virtual_damping: target above the undamped response eps=" +
                                std::to_string(lo_eval.epsilon));

    double hi = std::max(k * h, 0.05 * 2.0 * std::sqrt(k * m));
    detail::EpsEval hi_eval = eval(hi);
    ++result.iterations;
    while (hi_eval.completed && hi_eval.epsilon > target_eps) {
        lo = hi;
        hi *= 2.0;
        if (hi > b_cap)
            throw NumericalError(
                "solve_virtual_damping: bracket expansion exceeded the damping cap; achieved eps "
                "range [" +
                std::to_string(hi_eval.epsilon) + ", " + std::to_string(lo_eval.epsilon) + "]");
        hi_eval = eval(hi);
        ++result.iterations;
    }

    detail::EpsEval mid_eval{};
    double mid = hi;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        mid_eval = eval(mid);
        ++result.iterations;
        const double eps_mid = mid_eval.completed ? mid_eval.epsilon : 0.0;
        if (mid_eval.completed && std::abs(eps_mid - target_eps) <= tol) break;
        if (eps_mid > target_eps)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) < 1e-9 * std::max(1.0, hi)) break;
    }
    if (!mid_eval.completed || std::abs(mid_eval.epsilon - target_eps) > tol)
        throw NumericalError("solve_virtual_damping: bisection failed to reach target " +
                             std::to_string(target_eps) + " (achieved " +
                             std::to_string(mid_eval.epsilon) + ")");

    result.b_star = mid;
    result.epsilon_achieved = mid_eval.epsilon;
    result.b_lo = lo;
    result.b_hi = hi;
    result.comparison.push_back({"achieved", m, k, mid, h, mid_eval.epsilon, mid_eval.f_max});
    return result;
}

/// CSV mirror of the comparison table: label,m,k,b,h,epsilon,f_max.
inline std::string to_csv(const std::vector<EmulationRow>& rows) {
    std::string out = "label,m,k,b,h,epsilon,f_max\n";
    for (const auto& r : rows)
        out += r.label + ',' + io::csv_num(r.m) + ',' + io::csv_num(r.k) + ',' +
               io::csv_num(r.b) + ',' + io::csv_num(r.h) + ',' + io::csv_num(r.epsilon) + ',' +
               io::csv_num(r.f_max) + '\n';
    return out;
}

}  // namespace delaydock
