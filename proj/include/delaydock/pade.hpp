#pragma once

// First-order Pade treatment of the loop delay: with
//   e^{-s h} ~ (2 - s h) / (2 + s h)
// the quasi-polynomial chi_h(s) = m s^2 + e^{-s h}(k + b s) becomes a cubic
//   m h s^3 + (2 m - b h) s^2 + (2 b - k h) s + 2 k
// amenable to Routh-Hurwitz margins, a closed-form critical delay, and
// root-locus sweeps over any single parameter.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "delaydock/cubic.hpp"
#include "delaydock/io.hpp"
#include "delaydock/plant.hpp"

namespace delaydock {

/// Coefficients of the delay-rationalized cubic, highest power first.
struct PadeCubic {
    double a3;  ///< m h
    double a2;  ///< 2 m - b h
    double a1;  ///< 2 b - k h
    double a0;  ///< 2 k

    std::array<double, 4> coeffs() const { return {a0, a1, a2, a3}; }  // index = power
};

inline PadeCubic pade_cubic(const PlantParams& p) {
    return {p.m * p.h, 2.0 * p.m - p.b * p.h, 2.0 * p.b - p.k * p.h, 2.0 * p.k};
}

/// Parameter exposed as a root-locus gain.
enum class GainParam { Delay, Damping, Stiffness, Mass };

inline const char* to_string(GainParam g) {
    switch (g) {
        case GainParam::Delay: return "h";
        case GainParam::Damping: return "b";
        case GainParam::Stiffness: return "k";
        default: return "m";
    }
}

/// Factorization P(s) + K Q(s) of the Pade cubic with the chosen parameter K
/// pulled out as the locus gain. Arrays are coefficient-by-power (0..3).
struct EvansForm {
    std::array<double, 4> fixed;  ///< P(s)
    std::array<double, 4> gain;   ///< Q(s)
};

inline EvansForm evans_form(const PlantParams& p, GainParam g) {
    const double m = p.m, k = p.k, b = p.b, h = p.h;
    switch (g) {
        case GainParam::Delay:
            // 2(m s^2 + b s + k) + h * s(m s^2 - b s - k)
            return {{2 * k, 2 * b, 2 * m, 0.0}, {0.0, -k, -b, m}};
        case GainParam::Damping:
            return {{2 * k, -k * h, 2 * m, m * h}, {0.0, 2.0, -h, 0.0}};
        case GainParam::Stiffness:
            return {{0.0, 2 * b, 2 * m - b * h, m * h}, {2.0, -h, 0.0, 0.0}};
        default:  // Mass
            return {{2 * k, 2 * b - k * h, -b * h, 0.0}, {0.0, 0.0, 2.0, h}};
    }
}

/// Routh-Hurwitz margins of the Pade cubic. The active constraint is
///   q34 = h^2 - 2(b/k + 2m/b) h + 4m/k > 0
/// together with positivity of all four coefficients. q35 and q36 are the
/// a2 and a1 positivity margins.
struct RouthMargins {
    double q34;
    double q35;       ///< a2 = 2m - b h
    double q36;       ///< a1 = 2b - k h
    bool undamped;    ///< b = 0: q34 undefined, reported as -infinity
    bool stable;
};

inline RouthMargins routh_margins(const PlantParams& p) {
    const PadeCubic c = pade_cubic(p);
    RouthMargins rm{};
    rm.q35 = c.a2;
    rm.q36 = c.a1;
    rm.undamped = (p.b == 0.0);
    if (rm.undamped) {
        rm.q34 = -std::numeric_limits<double>::infinity();
    } else {
        const double A = p.b / p.k + 2.0 * p.m / p.b;
        rm.q34 = p.h * p.h - 2.0 * A * p.h + 4.0 * p.m / p.k;
    }
    if (c.a3 == 0.0) {
        // h = 0: the cubic collapses to 2(m s^2 + b s + k)
        rm.stable = c.a2 > 0.0 && c.a1 > 0.0 && c.a0 > 0.0;
    } else {
        rm.stable = c.a3 > 0.0 && c.a2 > 0.0 && c.a1 > 0.0 && c.a0 > 0.0 && rm.q34 > 0.0;
    }
    return rm;
}

/// Critical delay of the Pade cubic,
///   h_c = (b/k + 2m/b) - sqrt((b/k + 2m/b)^2 - 4m/k),
/// the smaller root of q34(h) = 0. The discriminant reduces exactly to
/// (b/k)^2 + (2m/b)^2, so it cannot go negative for valid parameters;
/// the guard reports if floating point ever violates that.
inline double pade_critical_delay(const PlantParams& p) {
    if (p.b <= 0.0) throw std::domain_error("pade_critical_delay requires b > 0");
    const double u = p.b / p.k, v = 2.0 * p.m / p.b;
    const double root = std::hypot(u, v);
    const double hc = (4.0 * p.m / p.k) / (u + v + root);  // = (u+v) - root, cancellation-free
    if (!std::isfinite(hc) || hc < 0.0)
        throw NumericalError("pade_critical_delay: discriminant failure at m=" +
                             std::to_string(p.m) + " k=" + std::to_string(p.k) +
                             " b=" + std::to_string(p.b));
    return hc;
}

/// Imaginary-axis frequency of the Pade cubic at its critical delay,
/// omega = sqrt(a1/a3), cross-checked against sqrt(a0/a2).
inline double pade_crossing_frequency(const PlantParams& p) {
    const double hc = pade_critical_delay(p);
    if (hc <= 0.0) throw std::domain_error("pade_crossing_frequency: degenerate h = 0");
    const PadeCubic c = pade_cubic(p.with_h(hc));
    const double w1 = std::sqrt(c.a1 / c.a3);
    const double w0 = std::sqrt(c.a0 / c.a2);
    if (std::abs(w1 - w0) > 1e-6 * w1)
        throw NumericalError("pade_crossing_frequency: boundary identity violated, sqrt(a1/a3)=" +
                             std::to_string(w1) + " sqrt(a0/a2)=" + std::to_string(w0));
    return w1;
}

/// Verdict from the Pade cubic: same tolerance band as the pole-location
/// classifier, applied to the Pade critical delay (b = 0 limit is h_c = 0).
inline StabilityVerdict classify_pade(const PlantParams& p) {
    const double hc = p.b > 0.0 ? pade_critical_delay(p) : 0.0;
    const double margin = hc - p.h;
    const double band = std::max(1e-6, 1e-9 * hc);
    if (std::abs(margin) <= band) return {Stability::NeutrallyStable, margin};
    return {margin > 0.0 ? Stability::Stable : Stability::Unstable, margin};
}

/// One root-locus sample: parameter value plus the cubic's roots. A
/// degenerate leading coefficient reduces the solve to a quadratic; missing
/// roots are filled with the (-inf, 0) sentinel and n_roots tells how many
/// entries are real solutions.
struct LocusSample {
    double value;
    std::array<Complex, 3> roots;
    int n_roots;
};

struct RootLocusTrace {
    GainParam vary;
    std::vector<LocusSample> samples;
};

namespace detail {

inline std::array<Complex, 3> cubic_roots_or_degenerate(double a3, double a2, double a1,
                                                        double a0, int& n_roots) {
    const Complex sentinel(-std::numeric_limits<double>::infinity(), 0.0);
    if (a3 != 0.0) {
        n_roots = 3;
        return solve_cubic(a3, a2, a1, a0);
    }
    if (a2 != 0.0) {
        n_roots = 2;
        auto q = solve_quadratic(a2, a1, a0);
        return {q[0], q[1], sentinel};
    }
    n_roots = a1 != 0.0 ? 1 : 0;
    return {n_roots ? Complex(-a0 / a1, 0.0) : sentinel, sentinel, sentinel};
}

inline double locus_dist(const Complex& a, const Complex& b) {
    const bool fa = std::isfinite(a.real()), fb = std::isfinite(b.real());
    if (!fa && !fb) return 0.0;
    if (fa != fb) return 1e300;
    return std::abs(a - b);
}

/// Reorder `cur` to follow `prev` branch by branch (best of the six
/// assignments; ties resolved by lexicographic permutation order).
inline std::array<Complex, 3> match_branches(const std::array<Complex, 3>& prev,
                                             std::array<Complex, 3> cur) {
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double best = std::numeric_limits<double>::infinity();
    int best_p = 0;
    for (int pi = 0; pi < 6; ++pi) {
        double d = 0.0;
        for (int i = 0; i < 3; ++i) d += locus_dist(prev[i], cur[perms[pi][i]]);
        if (d < best) {
            best = d;
            best_p = pi;
        }
    }
    return {cur[perms[best_p][0]], cur[perms[best_p][1]], cur[perms[best_p][2]]};
}

}  // namespace detail

/// Sweep one parameter over [from, to] and track the Pade cubic's roots,
/// ordered for branch continuity (nearest-neighbor matching against the
/// previous sample, ties broken toward ascending imaginary part by the
/// deterministic initial sort).
inline RootLocusTrace root_locus(const PlantParams& p, GainParam vary, double from, double to,
                                 int steps) {
    if (!(from < to)) throw std::domain_error("root_locus: need from < to");
    if (steps < 2) throw std::domain_error("root_locus: need steps >= 2");
    const double lo_limit = (vary == GainParam::Stiffness || vary == GainParam::Mass) ? 0.0 : 0.0;
    if (from < lo_limit) throw std::domain_error("root_locus: parameter range out of domain");

    RootLocusTrace trace{vary, {}};
    trace.samples.resize(static_cast<std::size_t>(steps));
    io::parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
        const double v = from + (to - from) * static_cast<double>(i) / (steps - 1);
        double m = p.m, k = p.k, b = p.b, h = p.h;
        switch (vary) {
            case GainParam::Delay: h = v; break;
            case GainParam::Damping: b = v; break;
            case GainParam::Stiffness: k = v; break;
            case GainParam::Mass: m = v; break;
        }
        int n = 0;
        auto roots = detail::cubic_roots_or_degenerate(m * h, 2.0 * m - b * h, 2.0 * b - k * h,
                                                       2.0 * k, n);
        trace.samples[i] = {v, roots, n};
    });
    for (std::size_t i = 1; i < trace.samples.size(); ++i)
        trace.samples[i].roots =
            detail::match_branches(trace.samples[i - 1].roots, trace.samples[i].roots);
    return trace;
}

/// Largest root real part of a sample (sentinels ignored).
inline double rightmost_real(const LocusSample& s) {
    double r = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.n_roots; ++i) r = std::max(r, s.roots[i].real());
    return r;
}

/// CSV per the locus interface: param,re1,im1,re2,im2,re3,im3 at 9
/// significant digits. Sentinel roots print as -inf.
inline std::string to_csv(const RootLocusTrace& trace) {
    std::string out = "param,re1,im1,re2,im2,re3,im3\n";
    for (const auto& s : trace.samples) {
        out += io::csv_num(s.value);
        for (const auto& r : s.roots) {
            out += ',';
            out += io::csv_num(r.real());
            out += ',';
            out += io::csv_num(r.imag());
        }
        out += '\n';
    }
    return out;
}

}  // namespace delaydock
