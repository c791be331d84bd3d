#pragma once

// Exact stability analysis of chi_h(s) = m s^2 + e^{-s h}(k + b s) by the
// pole location method: imaginary-axis crossing frequency, critical delay
// set, switch criterion, verdict classification, and a Newton solver for the
// dominant root pair of the quasi-polynomial.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "delaydock/pade.hpp"
#include "delaydock/plant.hpp"

namespace delaydock {

/// Delay-free verdict from chi(s) = m s^2 + b s + k: stable exactly when all
/// coefficients are positive, neutrally stable for the undamped case.
inline StabilityVerdict delay_free_stable(const PlantParams& p) {
    if (p.b > 0.0) return {Stability::Stable, std::numeric_limits<double>::infinity()};
    return {Stability::NeutrallyStable, 0.0};
}

/// Imaginary-axis crossing frequency [rad/s],
///   omega_c = sqrt( b^2/(2 m^2) + sqrt( b^4/(4 m^4) + k^2/m^2 ) ),
/// the positive root of m^2 w^4 - b^2 w^2 - k^2 = 0. Independent of h.
inline double crossing_frequency(const PlantParams& p) {
    const double u = 0.5 * (p.b / p.m) * (p.b / p.m);
    return std::sqrt(u + std::hypot(u, p.k / p.m));
}

/// First critical delay h_c = arctan(omega_c b / k) / omega_c [s]; exactly 0
/// for b = 0.
inline double critical_delay(const PlantParams& p) {
    const double w = crossing_frequency(p);
    return std::atan(w * p.b / p.k) / w;
}

/// Switch/reversal criterion sigma(omega_c) = sqrt(b^4/(4 m^4) + k^2/m^2).
/// Strictly positive for k > 0, so crossings are always switches (roots
/// leaving the open left half-plane), never reversals.
inline double switch_criterion(const PlantParams& p) {
    const double u = 0.5 * (p.b / p.m) * (p.b / p.m);
    return std::hypot(u, p.k / p.m);
}

/// Small-ratio approximation h_c ~ b/k, valid when omega_c b << k.
inline double approx_critical_delay(const PlantParams& p) { return p.b / p.k; }

/// Crossing frequency plus the ordered set of delays at which root pairs
/// reach the imaginary axis, h_n = h_c + n 2 pi / omega_c.
struct CrossingSet {
    double omega_c;
    std::vector<double> h_values;
    double sigma;
};

inline CrossingSet critical_delay_set(const PlantParams& p, int n_max) {
    if (n_max < 1) throw std::domain_error("critical_delay_set: need n_max >= 1");
    CrossingSet set{crossing_frequency(p), {}, switch_criterion(p)};
    const double hc = critical_delay(p);
    const double gap = 2.0 * std::numbers::pi / set.omega_c;
    set.h_values.reserve(static_cast<std::size_t>(n_max));
    for (int n = 0; n < n_max; ++n) set.h_values.push_back(hc + n * gap);
    return set;
}

namespace detail {
inline double neutral_band(double hc) { return std::max(1e-6, 1e-9 * hc); }
}

/// Verdict at the plant's delay: unstable once h exceeds h_c, with a small
/// tolerance band reported as neutrally stable. margin = h_c - h.
inline StabilityVerdict classify(const PlantParams& p) {
    const double hc = critical_delay(p);
    const double margin = hc - p.h;
    if (std::abs(margin) <= detail::neutral_band(hc)) return {Stability::NeutrallyStable, margin};
    return {margin > 0.0 ? Stability::Stable : Stability::Unstable, margin};
}

/// Minimum damping that puts the delay h on the neutral boundary, i.e. the
/// solution of critical_delay(m, k, b) = h on the rising branch of h_c(b).
/// Throws if no damping can stabilize the given delay (h beyond the peak of
/// the boundary curve).
inline double neutral_damping(double m, double k, double h) {
    PlantParams probe(m, k, 0.0, h);  // validates m, k, h
    if (h == 0.0) return 0.0;
    auto hc = [&](double b) { return critical_delay(probe.with_b(b)); };
    double lo = 0.0, hi = std::max(k * h, 1e-6);
    int guard = 0;
    while (hc(hi) < h) {
        const double next = hi * 2.0;
        if (hc(next) <= hc(hi) || ++guard > 200)
            throw std::domain_error("neutral_damping: no damping stabilizes h=" +
                                    std::to_string(h) + " for m=" + std::to_string(m) +
                                    " k=" + std::to_string(k));
        lo = hi;
        hi = next;
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (hc(mid) < h ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Undamped-to-critically-damped restitution identity for the delay-free
/// plant: eps = exp(-pi zeta / sqrt(1 - zeta^2)), the overshoot of a
/// second-order system. Requires zeta < 1.
inline double delay_free_restitution(const PlantParams& p) {
    const double z = p.zeta();
    if (z >= 1.0) throw std::domain_error("delay_free_restitution: overdamped (zeta >= 1)");
    if (z == 0.0) return 1.0;
    return std::exp(-std::numbers::pi * z / std::sqrt(1.0 - z * z));
}

/// Rightmost root pair of the quasi-polynomial, represented by the member
/// with non-negative imaginary part. residual is |chi_h(s)| normalized by
/// m|s|^2 + k + b|s|.
struct DominantRoot {
    double real_part;
    double imag_part;
    double residual;
};

namespace detail {

inline Complex chi_h(const PlantParams& p, Complex s) {
    return p.m * s * s + std::exp(-s * p.h) * (p.k + p.b * s);
}

inline Complex chi_h_prime(const PlantParams& p, Complex s) {
    return 2.0 * p.m * s + std::exp(-s * p.h) * (p.b - p.h * (p.k + p.b * s));
}

inline double chi_scale(const PlantParams& p, Complex s) {
    return p.m * std::norm(s) + p.k + p.b * std::abs(s);
}

/// Newton iteration on chi_h from one seed. Returns true on convergence and
/// appends the iterates to `trace`.
inline bool newton_root(const PlantParams& p, Complex seed, double tol, Complex& out,
                        std::string& trace) {
    Complex s = seed;
    for (int it = 0; it < 80; ++it) {
        const Complex f = chi_h(p, s);
        const double res = std::abs(f) / chi_scale(p, s);
        trace += "  it=" + std::to_string(it) + " s=(" + std::to_string(s.real()) + "," +
                 std::to_string(s.imag()) + ") res=" + std::to_string(res) + "\n";
        if (res <= tol) {
            out = s;
            return true;
        }
        const Complex df = chi_h_prime(p, s);
        if (std::abs(df) == 0.0) return false;
        const Complex step = f / df;
        s -= step;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
    }
    return false;
}

}  // namespace detail

/// Locate the dominant (rightmost) root of chi_h(s) by Newton iteration,
/// seeded from the rightmost root of the Pade cubic with fallbacks at
/// j omega_c and the delay-free roots. Throws NumericalError with the
/// iterate trace if no seed converges.
inline DominantRoot dominant_root(const PlantParams& p, double tol = 1e-10) {
    if (p.h == 0.0) {
        auto q = solve_quadratic(p.m, p.b, p.k);
        const Complex s = q[0].imag() >= 0.0 ? q[0] : q[1];
        return {s.real(), std::abs(s.imag()),
                std::abs(detail::chi_h(p, s)) / detail::chi_scale(p, s)};
    }

    std::vector<Complex> seeds;
    {
        const PadeCubic c = pade_cubic(p);
        if (c.a3 != 0.0) {
            auto roots = solve_cubic(c.a3, c.a2, c.a1, c.a0);
            seeds.push_back(roots[0].imag() >= 0.0 ? roots[0] : std::conj(roots[0]));
        }
        seeds.emplace_back(0.0, crossing_frequency(p));  // boundary fallback
        auto q = solve_quadratic(p.m, p.b, p.k);
        seeds.push_back(q[0].imag() >= 0.0 ? q[0] : std::conj(q[0]));
    }

    std::string trace;
    bool found = false;
    Complex best(0.0, 0.0);
    for (const Complex& seed : seeds) {
        trace += "seed (" + std::to_string(seed.real()) + "," + std::to_string(seed.imag()) + ")\n";
        Complex s;
        if (detail::newton_root(p, seed, tol, s, trace)) {
            if (s.imag() < 0.0) s = std::conj(s);
            if (!found || s.real() > best.real()) best = s;
            found = true;
        }
    }
    if (!found)
        throw NumericalError("dominant_root: Newton failed for m=" + std::to_string(p.m) +
                             " k=" + std::to_string(p.k) + " b=" + std::to_string(p.b) +
                             " h=" + std::to_string(p.h) + "\n" + trace);
    return {best.real(), best.imag(),
            std::abs(detail::chi_h(p, best)) / detail::chi_scale(p, best)};
}

/// Aggregate report for one operating point.
struct StabilityReport {
    StabilityVerdict verdict;
    double omega_c;
    double h_c;
    double h_c_approx;
    double sigma;
    double h;
    std::vector<double> h_crossings;
};

inline StabilityReport analyze(const PlantParams& p, int n_crossings = 3) {
    const CrossingSet set = critical_delay_set(p, n_crossings);
    return {classify(p),         set.omega_c, set.h_values.front(), approx_critical_delay(p),
            set.sigma,           p.h,         set.h_values};
}

}  // namespace delaydock
