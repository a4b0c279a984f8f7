#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hap/io.hpp"
#include "hap/q3e.hpp"
#include "hap/report.hpp"

namespace hap::harness {

struct AirspeedRow {
    double v0_mps = 0.0;
    double t_n = 0.0;
    double cdv = 0.0;
    double re = 0.0;
    double eta_hat = 0.0;
    double p_prop_w = 0.0;
    double p_prop_legacy_w = 0.0;
};

// One row per grid point. Fails loudly (Error) if P_prop is not strictly
// increasing along the grid.
std::vector<AirspeedRow> run_airspeed_sweep(const io::PlatformConfig& platform,
                                            std::span<const double> grid);
report::Table airspeed_table(std::span<const AirspeedRow> rows);

struct BudgetRow {
    double p_tot_w = 0.0;
    std::string backend;
    double satisfaction = 0.0;
    double ee_bps_per_w = 0.0;
    double rf_spent_w = 0.0;
};

struct BudgetSweepOptions {
    std::vector<std::string> backends{"q3e-numeric", "max-sum-rate", "qos-only"};
    Q3eOptions solver;
    unsigned workers = 0;  // 0: hardware concurrency
};

// Rows in grid order, backends in listed order within each point. Solves run
// concurrently. Fails loudly if any Q3E backend's satisfaction drops as the
// budget grows.
std::vector<BudgetRow> run_budget_sweep(const Scenario& scenario, const PowerLedger& ledger,
                                        std::span<const double> grid,
                                        const BudgetSweepOptions& opts);
report::Table budget_table(std::span<const BudgetRow> rows);

struct AblationSpec {
    std::vector<std::uint64_t> seeds;
    double budget_lo_w = 70.0;   // budgets drawn uniformly per seed
    double budget_hi_w = 150.0;
    neuro::TrainConfig train;
    unsigned workers = 0;
};

struct AblationRow {
    std::string variant;          // full, no-soft-loss, no-scale
    double feasibility_pct = 0.0;
    double mean_overshoot_w = 0.0;
    double mean_ee_bps_per_w = 0.0;
    std::size_t runs = 0;
};

// Trains the MLP backend per seed in three variants. Needs at least 10 seeds.
std::vector<AblationRow> run_ablation(const Scenario& scenario, const PowerLedger& ledger,
                                      const AblationSpec& spec);
report::Table ablation_table(std::span<const AblationRow> rows);

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first error.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace hap::harness
