#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hap/allocation.hpp"
#include "hap/io.hpp"

namespace fixture {

inline std::string data_path(const std::string& rel) {
    return std::string(HAP_DATA_DIR) + "/" + rel;
}

// The 9-user reference deployment and its ledger.
struct Deployment {
    hap::Scenario scenario;
    hap::PowerLedger ledger;
};

inline Deployment reference_deployment() {
    const auto cfg = hap::io::ExperimentConfig::load(data_path("solve_reference.json"));
    return {cfg.scenario().scenario, cfg.ledger()};
}

// Small synthetic allocation instance with realistic magnitudes. The budget
// is budget_factor times the cost of serving every user at its floor.
inline hap::AllocationProblem random_problem(std::size_t k, std::uint64_t seed,
                                             double budget_factor) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double tiers[3] = {30e6, 60e6, 90e6};
    hap::AllocationProblem prob;
    prob.bw_hz = 1e7;
    prob.n0_w = 2.18e-11;
    prob.xi = 2.0;
    prob.p_static_w = 48.877;
    double all_cost = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double c = 0.8 + 0.8 * unit(rng);
        const double g = 1.8521949369e-10 * (0.5 + unit(rng));
        const double q = tiers[static_cast<std::size_t>(unit(rng) * 3.0) % 3];
        const double pm = std::sqrt(prob.n0_w * (std::exp2(q / prob.bw_hz) - 1.0) / g);
        prob.w_norms_sq.push_back(c);
        prob.gammas.push_back(g);
        prob.qos_bps.push_back(q);
        prob.p_min.push_back(pm);
        all_cost += c * pm * pm;
    }
    prob.p_tot_w = budget_factor * all_cost;
    return prob;
}

}  // namespace fixture
