#include "hap/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "hap/error.hpp"

namespace hap::harness {

using report::format_number;

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<AirspeedRow> run_airspeed_sweep(const io::PlatformConfig& platform,
                                            std::span<const double> grid) {
    if (grid.empty()) throw PreconditionError("airspeed grid is empty");
    std::vector<AirspeedRow> rows;
    rows.reserve(grid.size());
    const double slenderness = platform.geometry.slenderness();
    for (double v0 : grid) {
        AirspeedRow r;
        r.v0_mps = v0;
        r.re = reynolds(platform.atm, v0, platform.geometry.length_m);
        r.cdv = hull_drag_coefficient(slenderness, r.re);
        r.t_n = aerodynamic_drag(platform.atm, platform.geometry, v0);
        r.eta_hat = surrogate_efficiency(platform.surrogate, v0);
        r.p_prop_w = propulsion_power(platform.atm, platform.geometry, v0, platform.surrogate);
        r.p_prop_legacy_w =
            propulsion_power_constant_eta(platform.atm, platform.geometry, v0, platform.legacy_eta_p);
        if (!rows.empty() && !(r.p_prop_w > rows.back().p_prop_w)) {
            throw Error("propulsion power not increasing between " +
                        format_number(rows.back().v0_mps) + " and " + format_number(v0) + " m/s");
        }
        rows.push_back(r);
    }
    return rows;
}

report::Table airspeed_table(std::span<const AirspeedRow> rows) {
    report::Table t;
    t.header = {"v0_mps", "t_n", "cdv", "re", "eta_hat", "p_prop_w", "p_prop_legacy_w"};
    for (const auto& r : rows) {
        t.rows.push_back({format_number(r.v0_mps), format_number(r.t_n), format_number(r.cdv),
                          format_number(r.re), format_number(r.eta_hat), format_number(r.p_prop_w),
                          format_number(r.p_prop_legacy_w)});
    }
    return t;
}

std::vector<BudgetRow> run_budget_sweep(const Scenario& scenario, const PowerLedger& ledger,
                                        std::span<const double> grid,
                                        const BudgetSweepOptions& opts) {
    if (grid.empty()) throw PreconditionError("budget grid is empty");
    if (opts.backends.empty()) throw PreconditionError("no backends requested");
    for (double p : grid) {
        if (!(p > 0.0)) throw PreconditionError("budget grid must be positive");
    }
    scenario.validate();
    const ZfBeamformer zf = zf_beamformer(scenario.steering_matrix());
    const RateModel model = scenario.rate_model();
    const std::vector<double> qos = scenario.qos_bps();
    const double k_all = static_cast<double>(scenario.users_count());

    const std::size_t nb = opts.backends.size();
    std::vector<BudgetRow> rows(grid.size() * nb);
    parallel_for(rows.size(), opts.workers, [&](std::size_t idx) {
        const std::size_t gi = idx / nb;
        const std::string& tag = opts.backends[idx % nb];
        const AllocationProblem prob = AllocationProblem::build(zf, model, qos, ledger, grid[gi]);
        const Q3eSolution sol = solve_with(tag, prob, opts.solver);
        rows[idx] = {grid[gi], tag, static_cast<double>(sol.q_set.size()) / k_all,
                     sol.ee_bps_per_w, sol.rf_spent_w};
    });

    for (std::size_t b = 0; b < nb; ++b) {
        const std::string& tag = opts.backends[b];
        if (tag.rfind("q3e", 0) != 0) continue;
        for (std::size_t g = 1; g < grid.size(); ++g) {
            const BudgetRow& prev = rows[(g - 1) * nb + b];
            const BudgetRow& cur = rows[g * nb + b];
            if (cur.satisfaction < prev.satisfaction) {
                throw Error(tag + " satisfaction dropped from " + format_number(prev.satisfaction) +
                            " to " + format_number(cur.satisfaction) + " as the budget rose to " +
                            format_number(cur.p_tot_w) + " W");
            }
        }
    }
    return rows;
}

report::Table budget_table(std::span<const BudgetRow> rows) {
    report::Table t;
    t.header = {"p_tot_w", "backend", "satisfaction", "ee_bps_per_w", "rf_spent_w"};
    for (const auto& r : rows) {
        t.rows.push_back({format_number(r.p_tot_w), r.backend, format_number(r.satisfaction),
                          format_number(r.ee_bps_per_w), format_number(r.rf_spent_w)});
    }
    return t;
}

std::vector<AblationRow> run_ablation(const Scenario& scenario, const PowerLedger& ledger,
                                      const AblationSpec& spec) {
    if (spec.seeds.size() < 10) throw PreconditionError("ablation needs at least 10 seeds");
    if (!(spec.budget_hi_w >= spec.budget_lo_w && spec.budget_lo_w > 0.0)) {
        throw PreconditionError("ablation budget range must be positive and ordered");
    }
    scenario.validate();
    const ZfBeamformer zf = zf_beamformer(scenario.steering_matrix());
    const RateModel model = scenario.rate_model();
    const std::vector<double> qos = scenario.qos_bps();

    struct Variant {
        const char* name;
        bool scaling;
        bool soft;
    };
    const Variant variants[] = {{"full", true, true}, {"no-soft-loss", true, false}, {"no-scale", false, true}};
    constexpr std::size_t kVariants = std::size(variants);

    struct Run {
        bool feasible = false;
        double overshoot = 0.0;
        double ee = 0.0;
    };
    const std::size_t n_seeds = spec.seeds.size();
    std::vector<Run> runs(n_seeds * kVariants);
    parallel_for(runs.size(), spec.workers, [&](std::size_t idx) {
        const std::uint64_t seed = spec.seeds[idx / kVariants];
        const Variant& v = variants[idx % kVariants];
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> budget_dist(spec.budget_lo_w, spec.budget_hi_w);
        const double budget = budget_dist(rng);
        const AllocationProblem prob = AllocationProblem::build(zf, model, qos, ledger, budget);
        const neuro::PhaseProblem pp = neuro::PhaseProblem::make(prob);
        neuro::TrainConfig tc = spec.train;
        tc.seed = seed;
        tc.use_scaling = v.scaling;
        tc.use_soft_loss = v.soft;
        const neuro::TrainResult tr = neuro::train(pp, tc);
        const Q3eSolution sol = make_solution(prob, tr.p, pp.part.satisfied_set, v.name);
        runs[idx] = {tr.feasible, tr.overshoot_w, sol.ee_bps_per_w};
    });

    std::vector<AblationRow> out;
    for (std::size_t vi = 0; vi < kVariants; ++vi) {
        AblationRow row;
        row.variant = variants[vi].name;
        std::size_t feasible = 0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const Run& r = runs[s * kVariants + vi];
            feasible += r.feasible ? 1 : 0;
            row.mean_overshoot_w += r.overshoot;
            row.mean_ee_bps_per_w += r.ee;
        }
        row.runs = n_seeds;
        row.feasibility_pct = 100.0 * static_cast<double>(feasible) / static_cast<double>(n_seeds);
        row.mean_overshoot_w /= static_cast<double>(n_seeds);
        row.mean_ee_bps_per_w /= static_cast<double>(n_seeds);
        out.push_back(row);
    }
    return out;
}

report::Table ablation_table(std::span<const AblationRow> rows) {
    report::Table t;
    t.header = {"variant", "feasibility_pct", "mean_overshoot_w", "mean_ee_bps_per_w", "runs"};
    for (const auto& r : rows) {
        t.rows.push_back({r.variant, format_number(r.feasibility_pct), format_number(r.mean_overshoot_w),
                          format_number(r.mean_ee_bps_per_w), std::to_string(r.runs)});
    }
    return t;
}

}  // namespace hap::harness
