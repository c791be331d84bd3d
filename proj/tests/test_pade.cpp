#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "delaydock/pade.hpp"
#include "delaydock/pole_location.hpp"

using namespace delaydock;
using Catch::Approx;

namespace {

// Vieta residuals of the cubic against its roots, relative to coefficient scale
void check_vieta(const PadeCubic& c, const std::array<Complex, 3>& roots) {
    const Complex sum = roots[0] + roots[1] + roots[2];
    const Complex prod = roots[0] * roots[1] * roots[2];
    const double scale_sum = std::abs(c.a2 / c.a3) + 1.0;
    const double scale_prod = std::abs(c.a0 / c.a3) + 1.0;
    CHECK(std::abs(sum + c.a2 / c.a3) <= 1e-8 * scale_sum);
    CHECK(std::abs(prod + c.a0 / c.a3) <= 1e-8 * scale_prod);
}

double q34_of(double m, double k, double b, double h) {
    return h * h - 2.0 * (b / k + 2.0 * m / b) * h + 4.0 * m / k;
}

}  // namespace

TEST_CASE("pade cubic coefficients", "[pade]") {
    const PadeCubic c = pade_cubic({60, 1000, 50, 0.049478});
    CHECK(c.a3 == Approx(2.9687).margin(1e-3));
    CHECK(c.a2 == Approx(117.526).margin(1e-3));
    CHECK(c.a1 == Approx(50.522).margin(1e-3));
    CHECK(c.a0 == 2000.0);

    const PadeCubic flat = pade_cubic({60, 1000, 50, 0.0});
    CHECK(flat.a3 == 0.0);
    CHECK(flat.a2 == 120.0);
    CHECK(flat.a1 == 100.0);
    CHECK(flat.a0 == 2000.0);

    const PadeCubic unit = pade_cubic({1, 1, 1, 1});
    CHECK(unit.a3 == 1.0);
    CHECK(unit.a2 == 1.0);
    CHECK(unit.a1 == 1.0);
    CHECK(unit.a0 == 2.0);
}

TEST_CASE("evans forms regroup the cubic", "[pade]") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.5, 300.0);
    for (int i = 0; i < 50; ++i) {
        const PlantParams p(u(rng), u(rng), u(rng), 0.002 * u(rng));
        const PadeCubic c = pade_cubic(p);
        const double gains[] = {p.h, p.b, p.k, p.m};
        const GainParam params[] = {GainParam::Delay, GainParam::Damping, GainParam::Stiffness,
                                    GainParam::Mass};
        for (int g = 0; g < 4; ++g) {
            const EvansForm ef = evans_form(p, params[g]);
            const auto want = c.coeffs();
            for (int pow = 0; pow < 4; ++pow) {
                const double got = ef.fixed[pow] + gains[g] * ef.gain[pow];
                CHECK(std::abs(got - want[pow]) <= 1e-12 * (std::abs(want[pow]) + 1.0));
            }
        }
    }
}

TEST_CASE("evans form structure for each gain", "[pade]") {
    const PlantParams p(60, 1000, 50, 0.03);
    const EvansForm eh = evans_form(p, GainParam::Delay);
    // P = 2(m s^2 + b s + k), Q = s (m s^2 - b s - k)
    CHECK(eh.fixed == std::array<double, 4>{2000, 100, 120, 0});
    CHECK(eh.gain == std::array<double, 4>{0, -1000, -50, 60});

    const EvansForm ek = evans_form(p, GainParam::Stiffness);
    CHECK(ek.gain == std::array<double, 4>{2, -0.03, 0, 0});  // Q = 2 - h s

    // with m = 0 only the fixed part remains
    const EvansForm em = evans_form(p, GainParam::Mass);
    const double m0_cubic[4] = {2 * p.k, 2 * p.b - p.k * p.h, -p.b * p.h, 0.0};
    for (int pow = 0; pow < 4; ++pow) CHECK(em.fixed[pow] == Approx(m0_cubic[pow]).margin(1e-12));
}

TEST_CASE("routh margins", "[pade]") {
    const RouthMargins near_crit = routh_margins({60, 1000, 50, 0.0495});
    CHECK(std::abs(near_crit.q34) < 1e-3);

    const RouthMargins stable = routh_margins({60, 1000, 50, 0.016});
    CHECK(stable.q34 > 0.0);
    CHECK(stable.stable);

    const RouthMargins unstable = routh_margins({60, 1000, 50, 0.10});
    CHECK(unstable.q34 < 0.0);
    CHECK_FALSE(unstable.stable);

    const RouthMargins undamped = routh_margins({60, 1000, 0, 0.01});
    CHECK(undamped.undamped);
    CHECK(undamped.q34 == -std::numeric_limits<double>::infinity());
    CHECK_FALSE(undamped.stable);

    // h = 0 collapses to the delay-free quadratic
    CHECK(routh_margins({60, 1000, 50, 0.0}).stable);
}

TEST_CASE("pade critical delay", "[pade]") {
    CHECK(pade_critical_delay({60, 1000, 50, 0}) == Approx(0.0495).margin(1e-4));
    CHECK(pade_critical_delay({60, 1000, 50, 0}) == Approx(0.04947922316843923).epsilon(1e-12));
    CHECK_THROWS_AS(pade_critical_delay({60, 1000, 0, 0}), std::domain_error);

    // small b/k with large 2m/b reduces to the b/k approximation
    const double hc_small = pade_critical_delay({60, 1000, 1, 0});
    CHECK(hc_small == Approx(1.0 / 1000.0).epsilon(1e-4));

    // paired operating points stay within 1% of the pole-location value
    const double ms[] = {5, 60, 500}, ks[] = {500, 1000, 2000}, bs[] = {10, 50, 90};
    for (int i = 0; i < 3; ++i) {
        const PlantParams p(ms[i], ks[i], bs[i], 0.0);
        const double exact = critical_delay(p);
        CHECK(std::abs(pade_critical_delay(p) - exact) / exact < 0.01);
    }
}

TEST_CASE("pade critical delay matches the q34 sign change", "[pade]") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(5.0, 500.0);
    for (int i = 0; i < 25; ++i) {
        const double m = u(rng), k = u(rng) + 400.0, b = 0.3 * u(rng) + 1.0;
        const double hc = pade_critical_delay({m, k, b, 0});
        double lo = 0.0, hi = 2.0 * hc;
        REQUIRE(q34_of(m, k, b, lo) > 0.0);
        REQUIRE(q34_of(m, k, b, hi) < 0.0);
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q34_of(m, k, b, mid) > 0.0 ? lo : hi) = mid;
        }
        CHECK(0.5 * (lo + hi) == Approx(hc).margin(1e-9));
    }
}

TEST_CASE("pade crossing frequency", "[pade]") {
    const double w = pade_crossing_frequency({60, 1000, 50, 0});
    CHECK(w == Approx(4.125).margin(0.05));
    CHECK(w == Approx(std::sqrt(50.522 / 2.9687)).margin(2e-3));

    // b -> 0 continuity with the pole-location frequency sqrt(k/m)
    CHECK(pade_crossing_frequency({60, 1000, 0.01, 0}) ==
          Approx(std::sqrt(1000.0 / 60.0)).epsilon(1e-3));
    CHECK_THROWS_AS(pade_crossing_frequency({60, 1000, 0, 0}), std::domain_error);
}

TEST_CASE("routh verdict matches the root signs", "[pade]") {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> u(1.0, 800.0), hd(0.0005, 0.25);
    int checked = 0;
    while (checked < 1000) {
        const PlantParams p(u(rng), u(rng), u(rng), hd(rng));
        const PadeCubic c = pade_cubic(p);
        const auto roots = solve_cubic(c.a3, c.a2, c.a1, c.a0);
        double max_re = -1e300;
        for (const auto& r : roots) max_re = std::max(max_re, r.real());
        if (std::abs(max_re) < 1e-6) continue;  // boundary draw, verdict undecidable
        ++checked;
        CHECK(routh_margins(p).stable == (max_re < 0.0));
    }
}

TEST_CASE("root locus in the delay", "[pade]") {
    const PlantParams p(60, 1000, 50, 0);
    const RootLocusTrace trace = root_locus(p, GainParam::Delay, 0.0, 0.1, 2001);
    REQUIRE(trace.samples.size() == 2001);

    // degenerate first sample: quadratic roots plus sentinel
    CHECK(trace.samples.front().n_roots == 2);

    double crossing = -1.0;
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const double prev = rightmost_real(trace.samples[i - 1]);
        const double cur = rightmost_real(trace.samples[i]);
        if (prev < 0.0 && cur >= 0.0) {
            const double u = prev / (prev - cur);
            crossing = trace.samples[i - 1].value +
                       u * (trace.samples[i].value - trace.samples[i - 1].value);
            break;
        }
    }
    CHECK(crossing == Approx(0.0495).margin(5e-4));

    for (const auto& s : trace.samples)
        if (s.n_roots == 3)
            check_vieta({p.m * s.value, 2 * p.m - p.b * s.value, 2 * p.b - p.k * s.value, 2 * p.k},
                        s.roots);
}

TEST_CASE("root locus in the damping", "[pade]") {
    const PlantParams p(60, 1000, 0, 0.05);
    const RootLocusTrace trace = root_locus(p, GainParam::Damping, 0.0, 3000.0, 6001);

    // the locus enters the open left half-plane at b ~ 50 and exits ~ 2374
    double entry = -1.0, exit_b = -1.0;
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const bool prev_in = rightmost_real(trace.samples[i - 1]) < 0.0;
        const bool cur_in = rightmost_real(trace.samples[i]) < 0.0;
        if (!prev_in && cur_in && entry < 0.0) entry = trace.samples[i].value;
        if (prev_in && !cur_in && exit_b < 0.0) exit_b = trace.samples[i].value;
    }
    CHECK(entry == Approx(50.5).margin(2.0));
    // both q34 roots at h = 0.05: b = 50.54 and 2374.46
    CHECK(exit_b == Approx(2374.5).margin(20.0));
}

TEST_CASE("root locus in the mass never stabilizes at 50 ms", "[pade]") {
    const PlantParams p(60, 1000, 50, 0.05);
    const RootLocusTrace trace = root_locus(p, GainParam::Mass, 1.0, 5000.0, 2000);
    for (const auto& s : trace.samples) CHECK(rightmost_real(s) >= -1e-6);

    // poles approach the origin as the mass grows
    const auto mag = [](const LocusSample& s) {
        double closest = 1e300;
        for (int i = 0; i < s.n_roots; ++i)
            if (s.roots[i].real() >= -1e-6) closest = std::min(closest, std::abs(s.roots[i]));
        return closest;
    };
    const double at_mid = mag(trace.samples[trace.samples.size() / 2]);
    const double at_end = mag(trace.samples.back());
    CHECK(at_end < at_mid);
}

TEST_CASE("undamped cubic recovers the delay-free pair as h -> 0", "[pade]") {
    const PlantParams p(60, 1000, 0, 0);
    const RootLocusTrace trace = root_locus(p, GainParam::Delay, 0.0, 0.01, 11);
    const LocusSample& s0 = trace.samples.front();
    REQUIRE(s0.n_roots == 2);
    const double wn = std::sqrt(1000.0 / 60.0);
    CHECK(s0.roots[0].real() == Approx(0.0).margin(1e-12));
    CHECK(std::abs(s0.roots[0].imag()) == Approx(wn).epsilon(1e-12));
    CHECK(std::abs(s0.roots[1].imag()) == Approx(wn).epsilon(1e-12));
}

TEST_CASE("locus CSV shape", "[pade]") {
    const RootLocusTrace trace = root_locus({60, 1000, 50, 0}, GainParam::Delay, 0.0, 0.05, 3);
    const std::string csv = to_csv(trace);
    CHECK(csv.rfind("param,re1,im1,re2,im2,re3,im3\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("-inf") != std::string::npos);  // degenerate h = 0 sample
}

TEST_CASE("locus argument validation", "[pade]") {
    CHECK_THROWS_AS(root_locus({60, 1000, 50, 0}, GainParam::Delay, 0.1, 0.0, 10),
                    std::domain_error);
    CHECK_THROWS_AS(root_locus({60, 1000, 50, 0}, GainParam::Delay, 0.0, 0.1, 1),
                    std::domain_error);
}
