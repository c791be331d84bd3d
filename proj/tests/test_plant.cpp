#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delaydock/plant.hpp"

using namespace delaydock;
using Catch::Approx;

TEST_CASE("equivalent mass reduction", "[plant]") {
    // dominant target mass: m -> m_chaser
    CHECK(equivalent_mass({63.2, 1e9}) == Approx(63.2).epsilon(1e-5));
    CHECK(equivalent_mass({2.0, 2.0}) == Approx(1.0));
    CHECK(equivalent_mass({60.0, 30.0}) == Approx(20.0));
}

TEST_CASE("equivalent mass properties", "[plant]") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> mass(0.5, 900.0);
    for (int i = 0; i < 200; ++i) {
        const double a = mass(rng), b = mass(rng);
        CHECK(equivalent_mass({a, b}) == equivalent_mass({b, a}));
        CHECK(equivalent_mass({a, b}) < std::min(a, b));
    }
    const double a = 3.7;
    CHECK(equivalent_mass({a, 1e12 * a}) == Approx(a).epsilon(1e-10));
}

TEST_CASE("parameter validation", "[plant]") {
    CHECK_THROWS_AS(MassPair(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(MassPair(1.0, -2.0), std::domain_error);
    CHECK_THROWS_AS(MassPair(std::nan(""), 1.0), std::domain_error);

    CHECK_THROWS_AS(PlantParams(0.0, 1000.0, 50.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(PlantParams(60.0, 0.0, 50.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(PlantParams(60.0, 1000.0, -1.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(PlantParams(60.0, 1000.0, 50.0, -0.01), std::domain_error);
    CHECK_THROWS_AS(PlantParams(60.0, std::numeric_limits<double>::infinity(), 50.0, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(PlantParams(std::nan(""), 1000.0, 50.0, 0.0), std::domain_error);
    CHECK_NOTHROW(PlantParams(60.0, 1000.0, 0.0, 0.0));
}

TEST_CASE("derived ratios", "[plant]") {
    const PlantParams p(63.2, 1000.0, 47.5, 0.0);
    CHECK(p.omega_n() == Approx(std::sqrt(1000.0 / 63.2)));
    CHECK(p.zeta() == Approx(47.5 / (2.0 * std::sqrt(1000.0 * 63.2))));
}
