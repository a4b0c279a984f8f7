#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "fixtures.hpp"
#include "hap/bemt.hpp"
#include "hap/error.hpp"
#include "hap/io.hpp"
#include "oracles.hpp"

using namespace hap;
using namespace hap::bemt;

namespace {
constexpr double kPi = std::numbers::pi;

AirfoilPolar thin_airfoil(double cd0, double cd2) {
    std::vector<PolarPoint> pts;
    for (int i = -90; i <= 90; ++i) {
        const double a = i * 0.5 * kPi / 180.0;
        pts.push_back({i * 0.5, 2.0 * kPi * std::sin(a) * std::cos(a), cd0 + cd2 * a * a});
    }
    return AirfoilPolar(pts);
}

AirfoilPolar flat_polar(double cl) {
    return AirfoilPolar({{-45.0, cl, 0.0}, {45.0, cl, 0.0}});
}

// Same planform as the shipped fixture, rebuilt from stations.
PropellerSpec tapered(AirfoilPolar polar) {
    std::vector<BladeStation> st;
    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        st.push_back({0.3 + 2.7 * t, 0.35 - 0.23 * t, 35.0 - 23.0 * t});
    }
    return PropellerSpec::from_stations(3, st, std::move(polar));
}

const Atmosphere kAtm = isa_properties(20000.0);
constexpr double kNs = 12.0;  // rev/s
}  // namespace

TEST_CASE("tip loss") {
    CHECK(tip_loss(3, 3.0, 3.0, 0.3) == 0.0);
    CHECK(tip_loss(3, 1.5, 3.0, 0.3) == doctest::Approx(oracle::frozen::kTipLossExample).epsilon(1e-13));
    CHECK(tip_loss(50, 1.5, 3.0, 0.3) > 0.99);
    CHECK(tip_loss(3, 1e-3, 3.0, 0.3) > 0.999999);
    for (double r = 0.3; r < 3.0; r += 0.1) {
        const double k = tip_loss(3, r, 3.0, 0.2);
        CHECK(k >= 0.0);
        CHECK(k <= 1.0);
    }
}

TEST_CASE("axial induction") {
    const double phi = 0.3;
    const double sigma = 0.1;
    const double cl = 2.0 * std::sin(phi) * std::sin(phi) / (sigma * std::cos(phi));
    CHECK(axial_induction(sigma, phi, cl, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(axial_induction(0.1, 0.25, 0.8, 0.02, 0.95) ==
          doctest::Approx(oracle::frozen::kInductionExample).epsilon(1e-12));
    const double cd = 0.5 * std::cos(0.25) / std::sin(0.25);
    CHECK_THROWS_AS(axial_induction(0.1, 0.25, 0.5, cd, 0.95), SectionError);
}

TEST_CASE("section fixed point with a drag-free flat polar") {
    const PropellerSpec spec = tapered(flat_polar(0.6));
    for (double frac : {0.3, 0.5, 0.7, 0.9}) {
        const double r = 0.3 + frac * 2.7;
        const SectionState s = solve_section(spec, 10.0, 5.0, r);
        REQUIRE_FALSE(s.unloaded);
        CHECK(std::abs(axial_induction(s.sigma, s.phi, s.cl, s.cd, s.k_p) - s.a_a) < 1e-9);
    }
}

TEST_CASE("section fixed point on the shipped fixture") {
    const PropellerSpec spec = default_test_propeller();
    const double v0 = 10.0;
    const double ns = 5.0;
    const double r = 0.7 * 3.0;
    const SectionState s = solve_section(spec, v0, ns, r);
    CHECK(s.a_a > 0.0);
    CHECK(s.a_a < 0.5);
    CHECK(std::abs(axial_induction(s.sigma, s.phi, s.cl, s.cd, s.k_p) - s.a_a) < 1e-6);
    CHECK(s.phi == doctest::Approx(std::atan(v0 * (1.0 + s.a_a) / (2.0 * kPi * ns * r))).epsilon(1e-12));

    // Scalar residual solved by bisection with the analytic polar.
    const double t = (r - 0.3) / 2.7;
    const double chord = 0.35 - 0.23 * t;
    const double theta = (35.0 - 23.0 * t) * kPi / 180.0;
    const double sigma = 3.0 * chord / (2.0 * kPi * r);
    const double phi0 = std::atan(v0 / (2.0 * kPi * ns * r));
    const double kp = (2.0 / kPi) * std::acos(std::exp(-3.0 * (3.0 - r) / (2.0 * r * std::sin(phi0))));
    auto residual = [&](double a) {
        const double phi = std::atan(v0 * (1.0 + a) / (2.0 * kPi * ns * r));
        const double al = theta - phi;
        const double cl = 2.0 * kPi * std::sin(al) * std::cos(al);
        const double cd = 0.008 + 0.01 * al * al;
        const double x = 4.0 * kp * std::sin(phi) * std::sin(phi) /
                         (sigma * (cl * std::cos(phi) - cd * std::sin(phi)));
        return a * (x - 1.0) - 1.0;
    };
    double lo = 1e-9;
    double hi = 0.5;
    REQUIRE(residual(lo) * residual(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (residual(lo) * residual(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(s.a_a == doctest::Approx(0.5 * (lo + hi)).epsilon(2e-3));
}

TEST_CASE("tip section carries no load") {
    const PropellerSpec spec = default_test_propeller();
    const SectionState s = solve_section(spec, 10.0, 5.0, spec.r_tip_m);
    CHECK(s.unloaded);
    CHECK(s.k_p < 1e-6);
}

TEST_CASE("every converged section satisfies the balance") {
    const PropellerSpec spec = default_test_propeller();
    for (double v0 : {5.0, 10.0, 15.0}) {
        for (int i = 0; i < 40; ++i) {
            const double r = spec.r_hub_m + (spec.r_tip_m - spec.r_hub_m) * i / 40.0;
            const SectionState s = solve_section(spec, v0, kNs, r);
            if (s.unloaded) continue;
            CHECK(s.residual < 1e-6);
            CHECK(std::abs(axial_induction(s.sigma, s.phi, s.cl, s.cd, s.k_p) - s.a_a) < 1e-6);
        }
    }
}

TEST_CASE("profile drag lowers efficiency") {
    const auto clean = propeller_performance(tapered(thin_airfoil(0.0, 0.0)), kAtm, 10.0, kNs);
    const auto draggy = propeller_performance(tapered(thin_airfoil(0.02, 0.0)), kAtm, 10.0, kNs);
    CHECK(clean.eta_p > draggy.eta_p);
}

TEST_CASE("efficiency definition and quadrature convergence") {
    const PropellerSpec spec = default_test_propeller();
    for (double v0 : {5.0, 10.0, 15.0}) {
        const auto op = propeller_performance(spec, kAtm, v0, kNs);
        CHECK(op.eta_p == doctest::Approx(op.thrust_n * v0 / op.shaft_power_w).epsilon(1e-12));
        CHECK(op.eta_p > 0.0);
        CHECK(op.eta_p < 1.0);

        SolverOptions coarse;
        coarse.quadrature_nodes = 51;
        SolverOptions doubled;
        doubled.quadrature_nodes = 201;
        SolverOptions fine;
        fine.quadrature_nodes = 401;
        const auto half = propeller_performance(spec, kAtm, v0, kNs, coarse);
        const auto twice = propeller_performance(spec, kAtm, v0, kNs, doubled);
        const auto ref = propeller_performance(spec, kAtm, v0, kNs, fine);
        CHECK(std::abs(half.thrust_n / op.thrust_n - 1.0) < 1e-3);
        CHECK(std::abs(twice.thrust_n / op.thrust_n - 1.0) < 1e-3);
        CHECK(std::abs(twice.shaft_power_w / op.shaft_power_w - 1.0) < 1e-3);
        CHECK(std::abs(ref.eta_p / op.eta_p - 1.0) < 1e-4);
    }
}

TEST_CASE("efficiency rises then levels off with airspeed") {
    const PropellerSpec spec = default_test_propeller();
    const double e5 = propeller_performance(spec, kAtm, 5.0, kNs).eta_p;
    const double e10 = propeller_performance(spec, kAtm, 10.0, kNs).eta_p;
    const double e15 = propeller_performance(spec, kAtm, 15.0, kNs).eta_p;
    CHECK(e10 > e5);
    CHECK(std::abs(e15 - e10) < e10 - e5);
}

TEST_CASE("thrust falls towards windmilling") {
    const PropellerSpec spec = default_test_propeller();
    double prev = propeller_performance(spec, kAtm, 10.0, kNs).thrust_n;
    for (double v0 : {12.0, 14.0, 15.0}) {
        const double t = propeller_performance(spec, kAtm, v0, kNs).thrust_n;
        CHECK(t < prev);
        prev = t;
    }
}

TEST_CASE("propeller loaded from csv matches the fixture planform") {
    const PropellerSpec spec = io::read_propeller_dir(fixture::data_path("propeller_default"));
    CHECK(spec.n_blades == 3);
    CHECK(spec.r_hub_m == doctest::Approx(0.3));
    CHECK(spec.r_tip_m == doctest::Approx(3.0));
    const auto a = propeller_performance(spec, kAtm, 10.0, kNs);
    const auto b = propeller_performance(default_test_propeller(), kAtm, 10.0, kNs);
    CHECK(a.thrust_n == doctest::Approx(b.thrust_n).epsilon(1e-2));
}

TEST_CASE("polar lookups outside the table are rejected") {
    const AirfoilPolar polar = thin_airfoil(0.008, 0.01);
    CHECK_THROWS_AS(polar.at(60.0 * kPi / 180.0), RangeError);
}
