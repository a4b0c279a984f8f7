#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ee_oracle.hpp"
#include "fixtures.hpp"
#include "hap/error.hpp"
#include "hap/q3e.hpp"
#include "oracles.hpp"

using namespace hap;

namespace {
double spend(const std::vector<double>& p, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c[i] * p[i] * p[i];
    return s;
}

void check_invariants(const AllocationProblem& prob, const Q3eSolution& sol) {
    CHECK(sol.rf_spent_w <= prob.p_tot_w + 1e-9);
    for (std::size_t k : sol.q_set) CHECK(sol.p[k] >= prob.p_min[k] * (1.0 - 1e-9));
    for (std::size_t k = 0; k < prob.users(); ++k) {
        CHECK(sol.rates_bps[k] == doctest::Approx(prob.rate(k, sol.p[k])).epsilon(1e-12));
    }
    CHECK(std::is_sorted(sol.q_set.begin(), sol.q_set.end()));
}

AllocationProblem scaled(AllocationProblem p, double s, bool budget, bool statics, bool gains) {
    for (double& c : p.w_norms_sq) c *= s;
    if (budget) p.p_tot_w *= s;
    if (statics) p.p_static_w *= s;
    if (gains) {
        for (double& g : p.gammas) g *= s;
        for (double& m : p.p_min) m /= std::sqrt(s);
    }
    return p;
}
}  // namespace

TEST_CASE("feasibility partition examples") {
    const std::vector<double> pm{1.0, std::sqrt(2.0), std::sqrt(5.0)};
    const std::vector<double> c{1.0, 1.0, 1.0};
    const auto part = feasibility_partition(pm, c, 4.0);
    CHECK(part.admitted() == 2);
    CHECK(part.satisfied_set == std::vector<std::size_t>{0, 1});
    CHECK(part.residual_budget_w == doctest::Approx(1.0));
    CHECK_FALSE(part.full_feasible);
    CHECK(oracle::brute_force_max_subset({1.0, 2.0, 5.0}, 4.0) == 2);

    const auto all = feasibility_partition(pm, c, 10.0);
    CHECK(all.full_feasible);
    CHECK(all.admitted() == 3);
    CHECK(all.residual_budget_w == doctest::Approx(2.0));

    const auto none = feasibility_partition(pm, c, 0.5);
    CHECK(none.admitted() == 0);
    CHECK(none.residual_budget_w == 0.5);
}

TEST_CASE("ties are broken by user index") {
    const std::vector<double> pm{1.0, 1.0, 1.0};
    const std::vector<double> c{2.0, 1.0, 1.0};
    const auto part = feasibility_partition(pm, c, 2.5);
    CHECK(part.order == std::vector<std::size_t>{1, 2, 0});
    CHECK(part.satisfied_set == std::vector<std::size_t>{1, 2});
}

TEST_CASE("greedy prefix is a maximum-cardinality subset") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + trial % 10;
        std::vector<double> pm(k), c(k), cost(k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            pm[i] = 0.05 + u(rng);
            c[i] = 0.5 + 2.0 * u(rng);
            cost[i] = c[i] * pm[i] * pm[i];
            total += cost[i];
        }
        const double budget = total * u(rng) * 1.1;
        const auto part = feasibility_partition(pm, c, budget);
        CHECK(oracle::brute_force_max_subset(cost, budget) <= part.admitted());
    }
}

TEST_CASE("projector examples") {
    const std::vector<double> c{1.0, 1.0};
    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> in{0.5, 0.7};
    CHECK(project_capped(in, zero, c, 4.0) == in);

    const auto a = project_capped(std::vector<double>{2.0, 2.0}, zero, c, 4.0);
    CHECK(a[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(spend(a, c) == doctest::Approx(4.0).epsilon(1e-15));

    const auto b = project_capped(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 0.0}, c, 3.0);
    CHECK(b[0] == doctest::Approx(std::sqrt(1.0 + 3.0 * 2.0 / 7.0)).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(std::sqrt(4.0 * 2.0 / 7.0)).epsilon(1e-15));
    CHECK(spend(b, c) == doctest::Approx(3.0).epsilon(1e-15));

    CHECK_THROWS_AS(project_capped(in, std::vector<double>{2.0, 2.0}, c, 4.0), PreconditionError);
}

TEST_CASE("projector on random triples") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t k = 1 + t % 9;
        std::vector<double> raw(k), mask(k), c(k);
        double floor_cost = 0.0;
        double clamped_cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            raw[i] = 2.0 * u(rng);
            mask[i] = u(rng) < 0.5 ? 0.0 : u(rng);
            c[i] = 0.2 + 2.0 * u(rng);
            floor_cost += c[i] * mask[i] * mask[i];
            const double cl = std::max(raw[i], mask[i]);
            clamped_cost += c[i] * cl * cl;
        }
        const double budget = floor_cost + (clamped_cost - floor_cost) * 1.3 * u(rng);
        const auto p = project_capped(raw, mask, c, budget);
        for (std::size_t i = 0; i < k; ++i) CHECK(p[i] >= mask[i]);
        CHECK(spend(p, c) <= budget * (1.0 + 1e-12) + 1e-12);
        if (clamped_cost > budget) CHECK(std::abs(spend(p, c) / budget - 1.0) < 1e-9);
        const auto again = project_capped(p, mask, c, budget);
        for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(again[i] - p[i]) <= 1e-12 * std::max(1.0, p[i]));
    }
}

TEST_CASE("projector vjp matches finite differences") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + t % 5;
        std::vector<double> raw(k), mask(k), c(k), w(k);
        for (std::size_t i = 0; i < k; ++i) {
            mask[i] = 0.3 * u(rng);
            raw[i] = mask[i] + 0.1 + u(rng);  // strictly above the floor
            c[i] = 0.5 + u(rng);
            w[i] = u(rng) - 0.5;
        }
        const double budget = 0.5 * spend(raw, c) + 0.5 * spend(mask, c);
        const auto g = project_capped_vjp(raw, mask, c, budget, w);
        for (std::size_t j = 0; j < k; ++j) {
            auto f = [&](double x) {
                auto r = raw;
                r[j] = x;
                const auto p = project_capped(r, mask, c, budget);
                double s = 0.0;
                for (std::size_t i = 0; i < k; ++i) s += w[i] * p[i];
                return s;
            };
            CHECK(g[j] == doctest::Approx(oracle::central_difference(f, raw[j], 1e-6)).epsilon(1e-6));
        }
    }
}

TEST_CASE("P1 single user matches golden section") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto prob = fixture::random_problem(1, seed, 1.5 + seed);
        const auto part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
        REQUIRE(part.full_feasible);
        const auto sol = solve_p1(prob, part);
        const auto ref = oracle::ee_reference(prob);
        check_invariants(prob, sol);
        CHECK(std::abs(sol.ee_bps_per_w / ref.ee - 1.0) < 5e-3);
    }
}

TEST_CASE("P1 at zero slack stays on the floor") {
    auto prob = fixture::random_problem(3, 4, 1.0);
    double cost = 0.0;
    for (std::size_t k = 0; k < 3; ++k) cost += prob.w_norms_sq[k] * prob.p_min[k] * prob.p_min[k];
    prob.p_tot_w = cost;
    const auto part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
    REQUIRE(part.full_feasible);
    const auto sol = solve_p1(prob, part);
    for (std::size_t k = 0; k < 3; ++k) CHECK(sol.p[k] == doctest::Approx(prob.p_min[k]).epsilon(1e-12));
}

TEST_CASE("P1 three users matches the grid oracle") {
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto prob = fixture::random_problem(3, seed, 1.2 + 0.4 * double(seed - 100));
        const auto sol = q3e(prob);
        const auto ref = oracle::ee_reference(prob);
        REQUIRE(ref.admitted.size() == 3);
        check_invariants(prob, sol);
        CHECK(std::abs(sol.ee_bps_per_w / ref.ee - 1.0) < 1e-2);
    }
}

TEST_CASE("P2 cases") {
    // One unserved user left.
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto prob = fixture::random_problem(3, 300 + seed, 0.8);
        const auto part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
        if (part.admitted() != 2) continue;
        const auto sol = solve_p2(prob, part);
        check_invariants(prob, sol);
        const auto ref = oracle::ee_reference(prob);
        CHECK(std::abs(oracle::face_objective(prob, sol.p) / ref.ee - 1.0) < 5e-3);
        // Pinned users sit on their floor; their spend still counts in P_com.
        for (std::size_t k : part.satisfied_set) CHECK(sol.p[k] == prob.p_min[k]);
        CHECK(sol.p_com_w == doctest::Approx(prob.p_com(sol.p)).epsilon(1e-14));
    }

    // No residual: the rest stay off.
    auto tight = fixture::random_problem(3, 9, 1.0);
    const auto pre = feasibility_partition(tight.p_min, tight.w_norms_sq, 1e9);
    double first_two = 0.0;
    for (std::size_t i = 0; i < 2; ++i) first_two += pre.min_cost_w[pre.order[i]];
    tight.p_tot_w = first_two;
    const auto part = feasibility_partition(tight.p_min, tight.w_norms_sq, tight.p_tot_w);
    REQUIRE(part.admitted() == 2);
    const auto sol = solve_p2(tight, part);
    CHECK(sol.p[pre.order[2]] == 0.0);
    CHECK(sol.rates_bps[pre.order[2]] == 0.0);

    // Nobody affordable: pure EE maximization under the budget.
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto prob = fixture::random_problem(3, 500 + seed, 1.0);
        const auto costs = feasibility_partition(prob.p_min, prob.w_norms_sq, 1e9).min_cost_w;
        prob.p_tot_w = 0.9 * *std::min_element(costs.begin(), costs.end());
        const auto s = q3e(prob);
        CHECK(s.q_set.empty());
        const auto ref = oracle::ee_reference(prob);
        CHECK(std::abs(oracle::face_objective(prob, s.p) / ref.ee - 1.0) < 1e-2);
    }
}

TEST_CASE("orchestrator on the reference deployment") {
    const auto dep = fixture::reference_deployment();
    const std::size_t k = dep.scenario.users_count();
    const auto huge = q3e(dep.scenario, dep.ledger, 1e5);
    CHECK(huge.q_set.size() == k);

    const auto none = q3e(dep.scenario, dep.ledger, 0.1);
    CHECK(none.q_set.empty());
    CHECK(none.rf_spent_w <= 0.1 * (1.0 + 1e-12));
    CHECK(none.ee_bps_per_w > 0.0);

    std::size_t prev = 0;
    for (double b = 70.0; b <= 400.0; b += 10.0) {
        const auto zf = zf_beamformer(dep.scenario.steering_matrix());
        const auto prob = AllocationProblem::build(zf, dep.scenario.rate_model(), dep.scenario.qos_bps(), dep.ledger, b);
        const auto sol = q3e(prob);
        check_invariants(prob, sol);
        CHECK(sol.q_set.size() >= prev);
        prev = sol.q_set.size();
        CHECK(baseline_max_sum_rate(prob).q_set.size() <= sol.q_set.size());
        // Communication power equals the static part plus xi times the RF spend.
        CHECK(total_comm_power(sol.p, prob.w_norms_sq, dep.ledger) ==
              doctest::Approx(sol.p_com_w).epsilon(1e-12));
        CHECK(sol.p_com_w <= static_comm_power(dep.ledger) + dep.ledger.xi * b * (1.0 + 1e-12));
    }
}

TEST_CASE("max-sum-rate baseline") {
    AllocationProblem sym = fixture::random_problem(3, 1, 2.0);
    for (std::size_t k = 0; k < 3; ++k) {
        sym.w_norms_sq[k] = 1.1;
        sym.gammas[k] = 1.5e-10;
    }
    const auto eq = baseline_max_sum_rate(sym);
    CHECK(eq.p[0] == doctest::Approx(eq.p[1]).epsilon(1e-9));
    CHECK(eq.p[1] == doctest::Approx(eq.p[2]).epsilon(1e-9));
    CHECK(eq.rf_spent_w == doctest::Approx(sym.p_tot_w).epsilon(1e-9));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto prob = fixture::random_problem(2, 40 + seed, 0.3 + seed * 0.4);
        const auto sol = baseline_max_sum_rate(prob);
        const double c0 = prob.w_norms_sq[0];
        const double c1 = prob.w_norms_sq[1];
        auto sum_rate = [&](double x0) {
            const double x1 = std::max(0.0, (prob.p_tot_w - c0 * x0) / c1);
            return prob.rate(0, std::sqrt(x0)) + prob.rate(1, std::sqrt(x1));
        };
        double best = 0.0;
        for (int i = 0; i <= 4000; ++i) best = std::max(best, sum_rate(prob.p_tot_w / c0 * i / 4000.0));
        const double got = prob.rate(0, sol.p[0]) + prob.rate(1, sol.p[1]);
        CHECK(got >= best * (1.0 - 5e-3));
        CHECK(got <= best * (1.0 + 5e-3));
    }

    auto big = fixture::random_problem(4, 3, 1.0);
    big.p_tot_w = 1e7;
    const auto wf = baseline_max_sum_rate(big);
    const double level = big.w_norms_sq[0] * wf.p[0] * wf.p[0];
    for (std::size_t k = 1; k < 4; ++k)
        CHECK(big.w_norms_sq[k] * wf.p[k] * wf.p[k] == doctest::Approx(level).epsilon(1e-2));
}

TEST_CASE("qos-only baseline") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto prob = fixture::random_problem(1 + seed % 5, 700 + seed, 0.5 + 0.1 * double(seed));
        const auto ours = q3e(prob);
        const auto base = baseline_qos_only(prob);
        CHECK(base.q_set == ours.q_set);
        // The residual goes to admitted users only.
        if (!base.q_set.empty()) CHECK(base.rf_spent_w == doctest::Approx(prob.p_tot_w).epsilon(1e-9));
        CHECK(base.ee_bps_per_w <= ours.ee_bps_per_w + 1e-9);
        check_invariants(prob, base);
    }
    auto zero = fixture::random_problem(3, 12, 1.0);
    const auto costs = feasibility_partition(zero.p_min, zero.w_norms_sq, 1e9).min_cost_w;
    zero.p_tot_w = costs[0] + costs[1] + costs[2];
    const auto a = q3e(zero);
    const auto b = baseline_qos_only(zero);
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.p[k] == doctest::Approx(b.p[k]).epsilon(1e-12));
}

TEST_CASE("scaling invariances") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto prob = fixture::random_problem(4, 900 + seed, 0.6 + 0.3 * double(seed));
        const auto base = q3e(prob);
        for (double s : {0.25, 3.0}) {
            // Norms and budget together: the admitted set is unchanged.
            CHECK(q3e(scaled(prob, s, true, false, false)).q_set == base.q_set);

            // Norms, budget and static power together: same coefficients and rates.
            const auto full = q3e(scaled(prob, s, true, true, false));
            CHECK(full.q_set == base.q_set);
            for (std::size_t k = 0; k < prob.users(); ++k)
                CHECK(full.rates_bps[k] == doctest::Approx(base.rates_bps[k]).epsilon(1e-6));

            // Norms and channel gains together: coefficients shrink by sqrt(s).
            const auto gains = q3e(scaled(prob, s, false, false, true));
            CHECK(gains.q_set == base.q_set);
            for (std::size_t k = 0; k < prob.users(); ++k) {
                CHECK(gains.p[k] == doctest::Approx(base.p[k] / std::sqrt(s)).epsilon(1e-6));
                CHECK(gains.rates_bps[k] == doctest::Approx(base.rates_bps[k]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("solver dispatch") {
    const auto prob = fixture::random_problem(3, 5, 1.3);
    CHECK(solve_with("q3e-numeric", prob).solver_tag == "q3e-numeric");
    CHECK(solve_with("max-sum-rate", prob).solver_tag == "max-sum-rate");
    CHECK(solve_with("qos-only", prob).solver_tag == "qos-only");
    CHECK_THROWS_AS(solve_with("ppo", prob), ConfigError);
    CHECK(backend_from_string("mlp") == Backend::mlp);
    CHECK(to_string(Backend::numeric) == "numeric");
}
