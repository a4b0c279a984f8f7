#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hap/beamforming.hpp"
#include "hap/config.hpp"

namespace hap {

// Everything the power-allocation stage needs once the beamformer is fixed.
// Coefficients p_k scale the ZF columns; the RF spend is sum_k c_k p_k^2 with
// c_k = ||w_k||^2.
struct AllocationProblem {
    std::vector<double> w_norms_sq;
    std::vector<double> gammas;
    std::vector<double> qos_bps;
    std::vector<double> p_min;
    double bw_hz = 0.0;
    double n0_w = 0.0;
    double xi = 1.0;
    double p_static_w = 0.0;  // P_t
    double p_tot_w = 0.0;     // RF budget

    static AllocationProblem build(const ZfBeamformer& zf, const RateModel& model,
                                   std::span<const double> qos_bps, const PowerLedger& ledger,
                                   double p_tot_w);

    std::size_t users() const { return w_norms_sq.size(); }
    void validate() const;

    double rate(std::size_t k, double p) const;
    std::vector<double> rates(std::span<const double> p) const;
    double rf_spent(std::span<const double> p) const;
    // xi * rf_spent + P_t
    double p_com(std::span<const double> p) const;
    std::vector<double> min_costs() const;  // c_k p_min,k^2
};

struct FeasibilityPartition {
    std::vector<std::size_t> satisfied_set;  // Q, in admission order
    std::vector<std::size_t> order;          // ascending cost, ties by index
    std::vector<double> min_cost_w;          // per user, original indexing
    double residual_budget_w = 0.0;          // P_tot - cost(Q)
    double p_emin_w = 0.0;                   // cost of serving everyone
    bool full_feasible = false;

    std::size_t admitted() const { return satisfied_set.size(); }
    // Per-user floor used by P1/P2: p_min inside Q, zero outside.
    std::vector<double> floor_mask(std::span<const double> p_min) const;
};

FeasibilityPartition feasibility_partition(std::span<const double> p_mins,
                                           std::span<const double> w_norms_sq, double p_tot_w);

// Clamp to the floor, then pull towards the floor by the common factor alpha
// on squared coefficients until the budget holds. Throws PreconditionError if
// the floor alone exceeds the budget.
std::vector<double> project_capped(std::span<const double> p_raw, std::span<const double> mask,
                                   std::span<const double> w_norms_sq, double p_tot_w);

// Vector-Jacobian product of project_capped at p_raw: returns dL/dp_raw given
// dL/dp. The clamp contributes zero on its clamped side.
std::vector<double> project_capped_vjp(std::span<const double> p_raw,
                                       std::span<const double> mask,
                                       std::span<const double> w_norms_sq, double p_tot_w,
                                       std::span<const double> grad_p);

struct BarrierConfig {
    double lambda = 1e-2;
    double epsilon = 1e-6;
    int max_iters = 200;
    double step_tolerance = 1e-13;
};

struct SolverDiagnostics {
    int iterations = 0;
    double residual = 0.0;   // last Dinkelbach gap or training loss change
    double objective = 0.0;  // value of the phase objective (bps/W)
};

struct Q3eSolution {
    std::vector<double> p;
    std::vector<std::size_t> q_set;
    std::vector<double> rates_bps;
    double ee_bps_per_w = 0.0;  // all users' rates over P_com
    double p_com_w = 0.0;
    double rf_spent_w = 0.0;
    std::string solver_tag;
    SolverDiagnostics diagnostics;

    double satisfaction(std::size_t k_total) const {
        return k_total == 0 ? 0.0
                            : static_cast<double>(q_set.size()) / static_cast<double>(k_total);
    }
};

// Fills rates, EE, P_com and RF spend from p.
Q3eSolution make_solution(const AllocationProblem& prob, std::vector<double> p,
                          std::vector<std::size_t> q_set, std::string tag);

}  // namespace hap
