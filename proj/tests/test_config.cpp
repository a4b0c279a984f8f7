#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "hap/config.hpp"
#include "hap/error.hpp"
#include "oracles.hpp"

using namespace hap;

namespace {
PowerLedger reference_ledger() {
    PowerLedger l;
    l.p_hap_w = 5000.0;
    l.p_payload_w = 100.0;
    l.p_standby_w = 100.0;
    l.p_rfc_w = 0.338;
    l.p_lo_w = 0.005;
    l.p_bb_w = 0.2;
    l.xi = 2.0;
    l.n_t = 144;
    return l;
}
}  // namespace

TEST_CASE("atmosphere rows") {
    const Atmosphere a20 = isa_properties(20000.0);
    CHECK(a20.rho == 0.08803);
    CHECK(a20.mu == 1.4216e-5);
    CHECK(isa_properties(0.0).rho == doctest::Approx(1.225).epsilon(1e-12));

    const Atmosphere mid = isa_properties(20500.0);
    const Atmosphere a21 = isa_properties(21000.0);
    CHECK(mid.rho < a20.rho);
    CHECK(mid.rho > a21.rho);

    CHECK_THROWS_AS(isa_properties(-1.0), RangeError);
    CHECK_THROWS_AS(isa_properties(32000.5), RangeError);
}

TEST_CASE("density decreases with altitude") {
    double prev = isa_properties(0.0).rho;
    for (double h = 250.0; h <= 32000.0; h += 250.0) {
        const double rho = isa_properties(h).rho;
        CHECK(rho < prev);
        prev = rho;
    }
}

TEST_CASE("static circuit power") {
    PowerLedger l = reference_ledger();
    CHECK(static_comm_power(l) == doctest::Approx(48.877).epsilon(1e-12));
    l.n_t = 0;
    CHECK(static_comm_power(l) == doctest::Approx(0.205).epsilon(1e-12));
    PowerLedger one;
    one.n_t = 1;
    one.p_rfc_w = 1.0;
    CHECK(static_comm_power(one) == 1.0);
}

TEST_CASE("rf budget examples") {
    const PowerLedger l = reference_ledger();
    CHECK(rf_budget(l, 4134.6) == doctest::Approx(oracle::frozen::kRfBudgetExample).epsilon(1e-12));

    PowerLedger exact;
    exact.p_hap_w = 1000.0;
    exact.p_payload_w = 100.0;
    exact.p_standby_w = 100.0;
    exact.p_rfc_w = 1.0;
    exact.n_t = 10;
    exact.xi = 2.0;
    CHECK(rf_budget(exact, 790.0) == 0.0);

    try {
        rf_budget(l, 4800.0);
        FAIL("expected infeasibility");
    } catch (const InfeasibleBudgetError& e) {
        CHECK(e.deficit_w() == doctest::Approx(4800.0 + 248.877 - 5000.0).epsilon(1e-9));
    }
}

TEST_CASE("rf budget is affine with slope -1/xi") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        PowerLedger l = reference_ledger();
        l.p_hap_w = 4000.0 + 4000.0 * u(rng);
        l.xi = 1.0 + 3.0 * u(rng);
        l.n_t = 16 + static_cast<int>(200 * u(rng));
        const double a = 100.0 + 1000.0 * u(rng);
        const double b = a + 500.0 * u(rng);
        const double slope = (rf_budget(l, b) - rf_budget(l, a)) / (b - a);
        CHECK(slope == doctest::Approx(-1.0 / l.xi).epsilon(1e-9));
    }
}

TEST_CASE("total communication power") {
    const PowerLedger l = reference_ledger();
    const std::vector<double> zeros(3, 0.0);
    const std::vector<double> norms{1.0, 2.0, 3.0};
    CHECK(total_comm_power(zeros, norms, l) == static_comm_power(l));

    PowerLedger bare;
    bare.xi = 2.0;
    const std::vector<double> ones{1.0, 1.0};
    CHECK(total_comm_power(ones, ones, bare) == 4.0);

    const std::vector<double> p{0.3, 0.7, 1.1};
    const std::vector<double> p2{0.6, 1.4, 2.2};
    const double base = total_comm_power(p, norms, l) - static_comm_power(l);
    const double scaled = total_comm_power(p2, norms, l) - static_comm_power(l);
    CHECK(scaled == doctest::Approx(4.0 * base).epsilon(1e-14));
}

TEST_CASE("validation rejects inconsistent inputs") {
    PlatformGeometry g{34.0, 140.0, 85000.0, 1.12, 0.85};
    CHECK_THROWS_AS(g.validate(), PreconditionError);
    PowerLedger l = reference_ledger();
    l.xi = 0.5;
    CHECK_THROWS(l.validate());
}
