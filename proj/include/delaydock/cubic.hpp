#pragma once

// Closed-form quadratic and cubic root finding in double precision.
// Cardano/trigonometric branches with a complex Newton polish; accuracy is
// guarded downstream by Vieta residual checks on every root-locus sample.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace delaydock {

using Complex = std::complex<double>;

namespace detail {

/// One Newton step of p(s) = c3 s^3 + c2 s^2 + c1 s + c0 at s.
inline Complex cubic_newton_step(double c3, double c2, double c1, double c0, Complex s) {
    Complex p = ((c3 * s + c2) * s + c1) * s + c0;
    Complex dp = (3.0 * c3 * s + 2.0 * c2) * s + c1;
    if (std::abs(dp) == 0.0) return s;
    return s - p / dp;
}

}  // namespace detail

/// Roots of c2 s^2 + c1 s + c0 with c2 != 0. Complex pair returned as
/// conjugates, real pair sorted descending.
inline std::array<Complex, 2> solve_quadratic(double c2, double c1, double c0) {
    double a = c1 / c2, b = c0 / c2;
    double disc = 0.25 * a * a - b;
    if (disc >= 0.0) {
        double r = std::sqrt(disc);
        // stable form: avoid cancellation in the smaller root
        double q = -0.5 * a + (a <= 0.0 ? r : -r);
        double r1 = q;
        double r2 = (q != 0.0) ? b / q : -0.5 * a - (a <= 0.0 ? r : -r);
        if (r1 < r2) std::swap(r1, r2);
        return {Complex(r1, 0.0), Complex(r2, 0.0)};
    }
    double re = -0.5 * a, im = std::sqrt(-disc);
    return {Complex(re, im), Complex(re, -im)};
}

/// Roots of c3 s^3 + c2 s^2 + c1 s + c0 with c3 != 0, sorted by descending
/// real part (ties: ascending imaginary part). Complex roots come in exact
/// conjugate pairs.
inline std::array<Complex, 3> solve_cubic(double c3, double c2, double c1, double c0) {
    double a = c2 / c3, b = c1 / c3, c = c0 / c3;
    // depressed form t^3 + p t + q with s = t - a/3
    double shift = a / 3.0;
    double p = b - a * a / 3.0;
    double q = c + a * (2.0 * a * a - 9.0 * b) / 27.0;
    double disc = 0.25 * q * q + p * p * p / 27.0;

    std::array<Complex, 3> roots;
    if (disc > 0.0) {
        // one real root, one conjugate pair
        double sq = std::sqrt(disc);
        double u = std::cbrt(-0.5 * q + sq);
        double v = std::cbrt(-0.5 * q - sq);
        double t0 = u + v;
        roots[0] = Complex(t0 - shift, 0.0);
        double re = -0.5 * t0 - shift;
        double im = 0.5 * std::numbers::sqrt3 * std::abs(u - v);
        roots[1] = Complex(re, im);
        roots[2] = Complex(re, -im);
    } else if (p == 0.0 && q == 0.0) {
        roots.fill(Complex(-shift, 0.0));
    } else {
        // three real roots (trigonometric branch)
        double r = std::sqrt(-p * p * p / 27.0);
        double arg = std::clamp(-0.5 * q / r, -1.0, 1.0);
        double phi = std::acos(arg);
        double mag = 2.0 * std::sqrt(-p / 3.0);
        for (int i = 0; i < 3; ++i) {
            double t = mag * std::cos((phi + 2.0 * std::numbers::pi * i) / 3.0);
            roots[i] = Complex(t - shift, 0.0);
        }
    }

    for (auto& s : roots) {
        for (int it = 0; it < 2; ++it) s = detail::cubic_newton_step(c3, c2, c1, c0, s);
    }
    // re-symmetrize the conjugate pair after polishing
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (roots[i].imag() != 0.0 && std::abs(roots[i].imag() + roots[j].imag()) <
                                              1e-9 * (std::abs(roots[i].imag()) + 1.0)) {
                double re = 0.5 * (roots[i].real() + roots[j].real());
                double im = 0.5 * (roots[i].imag() - roots[j].imag());
                roots[i] = Complex(re, std::abs(im));
                roots[j] = Complex(re, -std::abs(im));
            }
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() < y.imag();
    });
    return roots;
}

}  // namespace delaydock
