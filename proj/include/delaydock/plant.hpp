#pragma once

// Shared parameter and verdict types for the loop-delay contact model.
// Unit conventions: kg, N/m, N*s/m, s, rad/s (SI throughout; millisecond
// input is converted at the CLI boundary only).

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace delaydock {

/// Numerical failure (non-convergence, divergence). what() carries the
/// iterate trace when one is available.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (trace files).
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t line_no)
        : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    std::size_t line;
};

namespace detail {
inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(name) + " must be finite");
}
}  // namespace detail

/// Chaser and target point masses [kg], both strictly positive.
struct MassPair {
    double m_chaser;
    double m_target;

    MassPair(double chaser, double target) : m_chaser(chaser), m_target(target) {
        detail::require_finite(chaser, "m_chaser");
        detail::require_finite(target, "m_target");
        if (chaser <= 0.0 || target <= 0.0)
            throw std::domain_error("masses must be strictly positive");
    }
};

/// Reduced mass m_C*m_T/(m_C + m_T) governing the relative motion of two
/// free-floating bodies.
inline double equivalent_mass(const MassPair& pair) {
    return pair.m_chaser * pair.m_target / (pair.m_chaser + pair.m_target);
}

/// Parameters of the second-order loop-delay plant
///   chi_h(s) = m s^2 + e^{-s h} (k + b s)
struct PlantParams {
    double m;  ///< equivalent mass [kg], > 0
    double k;  ///< contact stiffness [N/m], > 0
    double b;  ///< contact damping [N*s/m], >= 0
    double h;  ///< loop delay [s], >= 0

    PlantParams(double m_, double k_, double b_, double h_) : m(m_), k(k_), b(b_), h(h_) {
        detail::require_finite(m, "m");
        detail::require_finite(k, "k");
        detail::require_finite(b, "b");
        detail::require_finite(h, "h");
        if (m <= 0.0) throw std::domain_error("m must be > 0");
        if (k <= 0.0) throw std::domain_error("k must be > 0");
        if (b < 0.0) throw std::domain_error("b must be >= 0");
        if (h < 0.0) throw std::domain_error("h must be >= 0");
    }

    /// Undamped natural frequency sqrt(k/m) [rad/s].
    double omega_n() const { return std::sqrt(k / m); }

    /// Non-dimensional damping ratio b/(2 sqrt(k m)).
    double zeta() const { return b / (2.0 * std::sqrt(k * m)); }

    /// Copy with one field replaced; handy for sweeps.
    PlantParams with_m(double v) const { return {v, k, b, h}; }
    PlantParams with_k(double v) const { return {m, v, b, h}; }
    PlantParams with_b(double v) const { return {m, k, v, h}; }
    PlantParams with_h(double v) const { return {m, k, b, v}; }
};

enum class Stability { Stable, NeutrallyStable, Unstable };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "Stable";
        case Stability::NeutrallyStable: return "NeutrallyStable";
        default: return "Unstable";
    }
}

/// One-letter code used in grid CSV output.
inline char verdict_code(Stability s) {
    switch (s) {
        case Stability::Stable: return 'S';
        case Stability::NeutrallyStable: return 'N';
        default: return 'U';
    }
}

/// Stability classification with the signed delay margin h_c - h [s].
/// margin > 0 means stable headroom; for delay-free verdicts with no finite
/// delay bound the margin is +infinity.
struct StabilityVerdict {
    Stability state;
    double margin;
};

}  // namespace delaydock
