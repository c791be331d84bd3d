#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "delaydock/pole_location.hpp"

using namespace delaydock;
using Catch::Approx;

namespace {

// independent oracle: the defining boundary property chi_h(j omega) = 0
double boundary_residual(const PlantParams& p, double omega, double h) {
    const std::complex<double> jw(0.0, omega);
    const std::complex<double> chi =
        p.m * jw * jw + std::exp(-jw * h) * (p.k + p.b * jw);
    return std::abs(chi) / (p.m * omega * omega + p.k + p.b * omega);
}

}  // namespace

TEST_CASE("delay-free verdict", "[pole]") {
    CHECK(delay_free_stable({60, 1000, 50, 0}).state == Stability::Stable);
    CHECK(delay_free_stable({60, 1000, 0, 0}).state == Stability::NeutrallyStable);
    CHECK(delay_free_stable({1, 1, 1, 0}).state == Stability::Stable);
}

TEST_CASE("crossing frequency", "[pole]") {
    CHECK(crossing_frequency({60, 1000, 0, 0}) == std::sqrt(1000.0 / 60.0));  // exact at b = 0
    CHECK(crossing_frequency({60, 1000, 50, 0}) == Approx(4.1253).margin(1e-3));
    CHECK(crossing_frequency({60, 1000, 50, 0}) == Approx(4.125227920329205).epsilon(1e-12));
    CHECK(crossing_frequency({63.2, 1280, 0, 0}) == Approx(4.5007).margin(1e-3));

    // positive root of m^2 w^4 - b^2 w^2 - k^2 = 0
    const PlantParams p(60, 1000, 50, 0);
    const double w = crossing_frequency(p);
    const double poly = p.m * p.m * std::pow(w, 4) - p.b * p.b * w * w - p.k * p.k;
    CHECK(std::abs(poly) <= 1e-9 * p.k * p.k);
}

TEST_CASE("crossing frequency ignores the delay", "[pole]") {
    const double ref = crossing_frequency({60, 1000, 50, 0});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> hs(0.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        CHECK(crossing_frequency({60, 1000, 50, hs(rng)}) == ref);  // bit-identical
    }
}

TEST_CASE("critical delay", "[pole]") {
    CHECK(critical_delay({60, 1000, 50, 0}) == Approx(0.0493).margin(1e-4));
    CHECK(critical_delay({60, 1000, 50, 0}) == Approx(0.04930850456028827).epsilon(1e-12));
    CHECK(critical_delay({60, 1000, 0, 0}) == 0.0);
    CHECK(critical_delay({12, 345, 0, 0}) == 0.0);
    CHECK(critical_delay({63.2, 1066, 17.06, 0}) == Approx(0.016).margin(2e-4));
}

TEST_CASE("boundary property on random draws", "[pole]") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> u(1.0, 1000.0);
    for (int i = 0; i < 200; ++i) {
        const PlantParams p(u(rng), u(rng), u(rng), 0.0);
        const double w = crossing_frequency(p);
        const double hc = critical_delay(p);
        CHECK(boundary_residual(p, w, hc) <= 1e-8);
    }
}

TEST_CASE("critical delay set", "[pole]") {
    const CrossingSet set = critical_delay_set({60, 1000, 50, 0}, 3);
    const double gap = 2.0 * std::numbers::pi / set.omega_c;
    REQUIRE(set.h_values.size() == 3);
    CHECK(set.h_values[0] == Approx(0.0493).margin(1e-4));
    CHECK(set.h_values[1] == Approx(set.h_values[0] + gap).epsilon(1e-14));
    CHECK(set.h_values[2] == Approx(set.h_values[0] + 2 * gap).epsilon(1e-14));

    const CrossingSet undamped = critical_delay_set({60, 1000, 0, 0}, 2);
    CHECK(undamped.h_values[0] == 0.0);
    CHECK(undamped.h_values[1] ==
          Approx(2.0 * std::numbers::pi / std::sqrt(1000.0 / 60.0)).epsilon(1e-14));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(1.0, 500.0);
    for (int i = 0; i < 20; ++i) {
        const CrossingSet s = critical_delay_set({u(rng), u(rng), u(rng), 0.0}, 4);
        const double g = 2.0 * std::numbers::pi / s.omega_c;
        for (std::size_t n = 1; n < s.h_values.size(); ++n)
            CHECK(s.h_values[n] - s.h_values[n - 1] == Approx(g).epsilon(1e-12));
    }
    CHECK_THROWS_AS(critical_delay_set({60, 1000, 50, 0}, 0), std::domain_error);
}

TEST_CASE("switch criterion", "[pole]") {
    CHECK(switch_criterion({60, 1000, 50, 0}) == Approx(16.670).margin(1e-3));
    CHECK(switch_criterion({1, 1, 0, 0}) == Approx(1.0).epsilon(1e-15));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.1, 2000.0);
    for (int i = 0; i < 100; ++i)
        CHECK(switch_criterion({u(rng), u(rng), u(rng), 0.0}) > 0.0);  // only switches occur
}

TEST_CASE("approximate critical delay", "[pole]") {
    CHECK(approx_critical_delay({60, 1000, 20, 0}) == Approx(0.020).epsilon(1e-14));
    CHECK(approx_critical_delay({60, 1000, 0, 0}) == 0.0);
    const double exact = critical_delay({60, 1000, 50, 0});
    const double approx = approx_critical_delay({60, 1000, 50, 0});
    CHECK(std::abs(approx - exact) / exact < 0.015);

    // within 2% wherever omega_c b / k < 0.1
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> mk(5.0, 1000.0), bd(0.1, 80.0);
    int checked = 0;
    while (checked < 100) {
        const PlantParams p(mk(rng), mk(rng) + 200.0, bd(rng), 0.0);
        if (crossing_frequency(p) * p.b / p.k >= 0.1) continue;
        ++checked;
        const double hc = critical_delay(p);
        CHECK(std::abs(approx_critical_delay(p) - hc) <= 0.02 * hc);
    }
}

TEST_CASE("critical delay monotone in damping at small ratio", "[pole]") {
    const PlantParams base(60, 1000, 0, 0);
    double prev = 0.0;
    for (double b = 1.0; b <= 120.0; b += 1.0) {
        const PlantParams p = base.with_b(b);
        if (crossing_frequency(p) * p.b / p.k >= 1.0) break;
        const double hc = critical_delay(p);
        CHECK(hc > prev);
        prev = hc;
    }
}

TEST_CASE("classification", "[pole]") {
    const StabilityVerdict stable = classify({60, 1000, 50, 0.016});
    CHECK(stable.state == Stability::Stable);
    CHECK(stable.margin == Approx(0.0333).margin(1e-4));

    // at the exact critical point the verdict is neutral
    const double hc = critical_delay({60, 1000, 50, 0});
    CHECK(classify({60, 1000, 50, hc}).state == Stability::NeutrallyStable);
    CHECK(classify({63.2, 1066, 0, 0.016}).state == Stability::Unstable);
    CHECK(classify({60, 1000, 0, 0}).state == Stability::NeutrallyStable);
}

TEST_CASE("single stable-unstable transition over the first crossing window", "[pole]") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(5.0, 500.0);
    for (int trial = 0; trial < 10; ++trial) {
        const PlantParams p(u(rng), u(rng) + 100.0, 0.2 * u(rng), 0.0);
        const double hc = critical_delay(p);
        const double h_end = hc + 2.0 * std::numbers::pi / crossing_frequency(p) - 1e-4;
        int transitions = 0;
        bool prev_stable = true;
        for (int i = 0; i <= 2000; ++i) {
            const double h = h_end * i / 2000.0;
            const bool stable = hc - h > 0.0;
            if (i > 0 && stable != prev_stable) ++transitions;
            prev_stable = stable;
        }
        CHECK(transitions == 1);  // switch only, no reversal
    }
}

TEST_CASE("neutral damping inversion", "[pole]") {
    const double b = neutral_damping(63.2, 1066.0, 0.016);
    CHECK(b == Approx(17.0806449972).epsilon(1e-8));
    CHECK(critical_delay({63.2, 1066, b, 0}) == Approx(0.016).epsilon(1e-10));
    CHECK(neutral_damping(60.0, 1000.0, 0.0) == 0.0);
    // delays beyond the boundary peak cannot be stabilized
    CHECK_THROWS_AS(neutral_damping(5.0, 2000.0, 0.2), std::domain_error);
}

TEST_CASE("delay-free restitution identity", "[pole]") {
    CHECK(delay_free_restitution({60, 1000, 0, 0}) == 1.0);
    CHECK(delay_free_restitution({63.2, 1000, 47.5, 0}) == Approx(0.742).margin(5e-4));
    // zeta -> 1 drives eps to 0
    const double b_near = 2.0 * 0.999 * std::sqrt(1000.0 * 63.2);
    CHECK(delay_free_restitution({63.2, 1000, b_near, 0}) < 1e-20);
    const double b_over = 2.0 * std::sqrt(1000.0 * 63.2);
    CHECK_THROWS_AS(delay_free_restitution({63.2, 1000, b_over, 0}), std::domain_error);
}

TEST_CASE("dominant root at the boundary and off it", "[pole]") {
    const PlantParams ref(60, 1000, 50, 0);
    const double hc = critical_delay(ref);

    const DominantRoot at_boundary = dominant_root(ref.with_h(hc));
    CHECK(at_boundary.real_part == Approx(0.0).margin(1e-3));
    CHECK(at_boundary.imag_part == Approx(4.125).margin(5e-3));
    CHECK(at_boundary.residual <= 1e-10);

    // continuity at h -> 0: the delay-free pair of m s^2 + b s + k
    const DominantRoot free_root = dominant_root(ref.with_h(0.0));
    const auto q = solve_quadratic(60, 50, 1000);
    CHECK(free_root.real_part == Approx(q[0].real()).margin(1e-12));
    CHECK(free_root.imag_part == Approx(std::abs(q[0].imag())).margin(1e-12));

    const DominantRoot unstable = dominant_root({63.2, 1066, 0, 0.016});
    CHECK(unstable.real_part > 0.0);
    CHECK(unstable.residual <= 1e-10);
}

TEST_CASE("dominant root sign change locates the critical delay", "[pole]") {
    const PlantParams p(60, 1000, 50, 0);
    const double hc = critical_delay(p);
    double lo = 0.5 * hc, hi = 1.5 * hc;
    REQUIRE(dominant_root(p.with_h(lo)).real_part < 0.0);
    REQUIRE(dominant_root(p.with_h(hi)).real_part > 0.0);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dominant_root(p.with_h(mid)).real_part < 0.0 ? lo : hi) = mid;
    }
    CHECK(0.5 * (lo + hi) == Approx(hc).margin(1e-6));
}

TEST_CASE("analysis report aggregates the point", "[pole]") {
    const StabilityReport report = analyze({60, 1000, 50, 0.016});
    CHECK(report.verdict.state == Stability::Stable);
    CHECK(report.omega_c == Approx(4.1252).margin(1e-3));
    CHECK(report.h_c == Approx(0.0493).margin(1e-4));
    CHECK(report.h == 0.016);
    CHECK(report.h_crossings.size() == 3);
}
