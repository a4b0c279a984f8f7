#pragma once

#include <string>

#include "hap/allocation.hpp"
#include "hap/config.hpp"
#include "hap/neuro.hpp"
#include "hap/scenario.hpp"

namespace hap {

// Numeric P1/P2 solvers. Both maximize a ratio of concave rates to affine
// power in x = p^2, so Dinkelbach's parametric method applies: each inner
// problem is a water-filling with a budget multiplier found by bisection.

// P1: every user served, maximize total EE over p >= p_min under the budget.
// Precondition: part.full_feasible.
Q3eSolution solve_p1(const AllocationProblem& prob, const FeasibilityPartition& part,
                     const BarrierConfig& cfg = {});

// P2: users in Q pinned at p_min; the rest share the residual budget and only
// their rates enter the objective numerator. P_com still counts the pinned spend.
// Precondition: !part.full_feasible.
Q3eSolution solve_p2(const AllocationProblem& prob, const FeasibilityPartition& part,
                     const BarrierConfig& cfg = {});

enum class Backend { numeric, mlp };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& name);

struct Q3eOptions {
    Backend backend = Backend::numeric;
    BarrierConfig barrier;
    neuro::TrainConfig train;
};

// Two-stage solver: admit the largest affordable user set by ascending
// minimum cost, then maximize EE on the resulting face.
Q3eSolution q3e(const AllocationProblem& prob, const Q3eOptions& opts = {});

// Builds the ZF beamformer and allocation problem from a scenario first.
Q3eSolution q3e(const Scenario& scenario, const PowerLedger& ledger, double p_tot_w,
                const Q3eOptions& opts = {});

// Sum-rate water-filling under the budget, ignoring QoS. q_set reports the
// users whose rate happens to reach the target.
Q3eSolution baseline_max_sum_rate(const AllocationProblem& prob);

// Same admitted set as q3e; the residual is spread as equal headroom
// delta_k = Delta / sqrt(c_k) over the admitted users, so the whole budget is spent.
Q3eSolution baseline_qos_only(const AllocationProblem& prob);

// Dispatch by tag: "q3e-numeric", "q3e-mlp", "max-sum-rate", "qos-only".
Q3eSolution solve_with(const std::string& tag, const AllocationProblem& prob,
                       const Q3eOptions& opts = {});

}  // namespace hap
