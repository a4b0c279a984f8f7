// Command-line front end: propulsion, bemt, surrogate-fit, solve, sweep, ablation.
// Exit codes: 0 ok, 1 other failure, 2 configuration error, 3 infeasible budget.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hap/bemt.hpp"
#include "hap/error.hpp"
#include "hap/harness.hpp"
#include "hap/io.hpp"
#include "hap/propulsion.hpp"
#include "hap/q3e.hpp"
#include "hap/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using hap::report::format_number;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

void emit_text(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw hap::Error("cannot write " + out);
    f << text;
}

void emit_table(const hap::report::Table& t, const std::string& out) {
    emit_text(hap::report::to_csv(t), out);
}

std::optional<hap::io::ExperimentConfig> load_optional(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return hap::io::ExperimentConfig::load(path);
}

double number_or(const std::optional<hap::io::ExperimentConfig>& cfg, const char* key,
                 std::optional<double> cli, const char* what) {
    if (cli) return *cli;
    if (cfg && cfg->root.contains(key) && cfg->root.at(key).is_number()) {
        return cfg->root.at(key).get<double>();
    }
    throw hap::ConfigError(std::string("missing ") + what + " (flag or config key '" + key + "')");
}

// ---------------------------------------------------------------- verbs

struct PropulsionArgs {
    std::string config, out;
    std::optional<double> v0;
};

int run_propulsion(const PropulsionArgs& a) {
    const auto cfg = hap::io::ExperimentConfig::load(a.config);
    const hap::io::PlatformConfig pc = cfg.platform();
    const double v0 = number_or(cfg, "v0_mps", a.v0, "airspeed");
    const double grid[] = {v0};
    auto rows = hap::harness::run_airspeed_sweep(pc, grid);
    hap::report::Table t = hap::harness::airspeed_table(rows);
    emit_table(t, a.out);
    return kExitOk;
}

struct BemtArgs {
    std::string config, spec, out;
    std::optional<double> v0, ns, altitude;
};

int run_bemt(const BemtArgs& a) {
    const auto cfg = load_optional(a.config);
    std::string dir = a.spec;
    if (dir.empty() && cfg && cfg->root.contains("propeller_dir")) {
        dir = cfg->resolve(cfg->root.at("propeller_dir").get<std::string>()).string();
    }
    const hap::bemt::PropellerSpec spec =
        dir.empty() ? hap::bemt::default_test_propeller() : hap::io::read_propeller_dir(dir);
    const double v0 = number_or(cfg, "v0_mps", a.v0, "airspeed");
    const double ns = number_or(cfg, "n_s", a.ns, "rotational speed");
    double alt = 20000.0;
    if (a.altitude) {
        alt = *a.altitude;
    } else if (cfg && cfg->root.contains("altitude_m")) {
        alt = cfg->root.at("altitude_m").get<double>();
    }
    const hap::Atmosphere atm = hap::isa_properties(alt);
    const auto op = hap::bemt::propeller_performance(spec, atm, v0, ns);
    hap::report::Table t;
    t.header = {"v0_mps", "n_s", "thrust_n", "shaft_power_w", "eta_p"};
    t.rows.push_back({format_number(op.v0_mps), format_number(op.n_s), format_number(op.thrust_n),
                      format_number(op.shaft_power_w), format_number(op.eta_p)});
    emit_table(t, a.out);
    return kExitOk;
}

struct FitArgs {
    std::string config, samples, out;
};

int run_surrogate_fit(const FitArgs& a) {
    const auto cfg = load_optional(a.config);
    fs::path samples = a.samples;
    if (samples.empty()) {
        if (!cfg || !cfg->root.contains("samples")) {
            throw hap::ConfigError("surrogate-fit needs --samples or a config with 'samples'");
        }
        samples = cfg->resolve(cfg->root.at("samples").get<std::string>());
    }
    const auto data = hap::io::read_efficiency_samples(samples);
    const hap::SurrogateCoeffs fit = hap::fit_inverse_power_surrogate(data);
    hap::report::Table t;
    t.header = {"c", "alpha", "beta", "rmse", "n_samples"};
    t.rows.push_back({format_number(fit.c), format_number(fit.alpha), format_number(fit.beta),
                      format_number(fit.rmse), std::to_string(fit.n_samples)});
    emit_table(t, a.out);
    return kExitOk;
}

// Budget from an explicit p_tot_w, or from the platform ledger at v0_mps.
double resolve_budget(const hap::io::ExperimentConfig& cfg, std::optional<double> cli_budget,
                      hap::PowerLedger& ledger_out) {
    ledger_out = cfg.ledger();
    if (cli_budget) return *cli_budget;
    if (cfg.root.contains("p_tot_w")) return cfg.root.at("p_tot_w").get<double>();
    const hap::io::PlatformConfig pc = cfg.platform();
    const double v0 = number_or(cfg, "v0_mps", std::nullopt, "airspeed");
    return hap::rf_budget(pc.ledger, hap::propulsion_power(pc.atm, pc.geometry, v0, pc.surrogate));
}

struct SolveArgs {
    std::string config, out, backend = "q3e-numeric";
    std::optional<double> budget;
};

int run_solve(const SolveArgs& a) {
    const auto cfg = hap::io::ExperimentConfig::load(a.config);
    hap::PowerLedger ledger;
    const double budget = resolve_budget(cfg, a.budget, ledger);
    const hap::io::ScenarioConfig sc = cfg.scenario();
    if (ledger.n_t != sc.scenario.array.n_t()) {
        throw hap::ConfigError("ledger n_t (" + std::to_string(ledger.n_t) +
                               ") does not match the array size (" +
                               std::to_string(sc.scenario.array.n_t()) + ")");
    }
    hap::Q3eOptions opts;
    opts.train = cfg.train();
    const hap::ZfBeamformer zf = hap::zf_beamformer(sc.scenario.steering_matrix());
    const auto qos = sc.scenario.qos_bps();
    const auto prob = hap::AllocationProblem::build(zf, sc.scenario.rate_model(), qos, ledger, budget);
    const hap::Q3eSolution sol = hap::solve_with(a.backend, prob, opts);
    json j{{"p", sol.p},
           {"q_set", sol.q_set},
           {"rates_bps", sol.rates_bps},
           {"ee_bps_per_w", sol.ee_bps_per_w},
           {"p_com_w", sol.p_com_w},
           {"rf_spent_w", sol.rf_spent_w},
           {"p_tot_w", budget},
           {"solver_tag", sol.solver_tag},
           {"iterations", sol.diagnostics.iterations}};
    emit_text(j.dump(2) + "\n", a.out);
    return kExitOk;
}

struct SweepArgs {
    std::string config, out, svg;
    unsigned workers = 0;
};

int run_sweep(const SweepArgs& a) {
    const auto cfg = hap::io::ExperimentConfig::load(a.config);
    if (!cfg.root.contains("sweep")) throw hap::ConfigError("config has no 'sweep' section");
    const json& sw = cfg.root.at("sweep");
    const std::string kind = sw.value("kind", "");
    if (!sw.contains("grid")) throw hap::ConfigError("sweep needs a grid");
    const std::vector<double> grid = hap::io::parse_grid(sw.at("grid"));
    const unsigned workers = a.workers ? a.workers : sw.value("workers", 0u);

    hap::report::Table t;
    hap::report::ChartSpec chart;
    if (kind == "airspeed") {
        const auto rows = hap::harness::run_airspeed_sweep(cfg.platform(), grid);
        t = hap::harness::airspeed_table(rows);
        chart.title = "Propulsion power versus airspeed";
        chart.x_label = "airspeed (m/s)";
        chart.y_label = "propulsion power (W)";
        chart.x_column = "v0_mps";
        chart.y_columns = {"p_prop_w", "p_prop_legacy_w"};
    } else if (kind == "rf_budget") {
        hap::harness::BudgetSweepOptions opts;
        if (sw.contains("backends")) opts.backends = sw.at("backends").get<std::vector<std::string>>();
        if (opts.backends.empty()) throw hap::ConfigError("sweep backends must be non-empty");
        opts.solver.train = cfg.train();
        opts.workers = workers;
        const hap::PowerLedger ledger = cfg.ledger();
        const auto rows = hap::harness::run_budget_sweep(cfg.scenario().scenario, ledger, grid, opts);
        t = hap::harness::budget_table(rows);
        chart.title = "Satisfaction ratio versus RF budget";
        chart.x_label = "RF budget (W)";
        chart.y_label = "satisfaction ratio";
        chart.x_column = "p_tot_w";
        chart.group_column = "backend";
        chart.y_column = "satisfaction";
    } else {
        throw hap::ConfigError("sweep kind must be 'airspeed' or 'rf_budget'");
    }
    emit_table(t, a.out);
    if (!a.svg.empty()) hap::report::emit_report(t, hap::report::Format::svg, a.svg, chart);
    return kExitOk;
}

struct AblationArgs {
    std::string config, out;
    unsigned workers = 0;
};

int run_ablation_verb(const AblationArgs& a) {
    const auto cfg = hap::io::ExperimentConfig::load(a.config);
    hap::harness::AblationSpec spec;
    spec.train = cfg.train();
    std::size_t n_seeds = 20;
    if (cfg.root.contains("ablation")) {
        const json& ab = cfg.root.at("ablation");
        n_seeds = ab.value("seeds", n_seeds);
        if (ab.contains("budget_w")) {
            const auto range = ab.at("budget_w").get<std::vector<double>>();
            if (range.size() != 2) throw hap::ConfigError("ablation.budget_w must be [lo, hi]");
            spec.budget_lo_w = range[0];
            spec.budget_hi_w = range[1];
        }
    }
    for (std::size_t i = 0; i < n_seeds; ++i) spec.seeds.push_back(cfg.seed + i);
    spec.workers = a.workers;
    const hap::PowerLedger ledger = cfg.ledger();
    const auto rows = hap::harness::run_ablation(cfg.scenario().scenario, ledger, spec);
    emit_table(hap::harness::ablation_table(rows), a.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HAP propulsion and downlink power-allocation toolkit"};
    app.require_subcommand(1);

    PropulsionArgs prop;
    auto* c_prop = app.add_subcommand("propulsion", "Drag, surrogate efficiency and propulsion power");
    c_prop->add_option("--config", prop.config, "Platform config JSON")->required();
    c_prop->add_option("--v0", prop.v0, "Airspeed, m/s");
    c_prop->add_option("--out", prop.out, "Output CSV (stdout if omitted)");

    BemtArgs bemt;
    auto* c_bemt = app.add_subcommand("bemt", "Blade-element momentum propeller performance");
    c_bemt->add_option("--config", bemt.config, "Optional JSON with propeller_dir, v0_mps, n_s, altitude_m");
    c_bemt->add_option("--spec", bemt.spec, "Directory holding polar.csv, blade.csv");
    c_bemt->add_option("--v0", bemt.v0, "Airspeed, m/s");
    c_bemt->add_option("--ns", bemt.ns, "Rotational speed, rev/s");
    c_bemt->add_option("--altitude", bemt.altitude, "Altitude, m (default 20000)");
    c_bemt->add_option("--out", bemt.out, "Output CSV");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("surrogate-fit", "Fit eta(V0) = c - alpha V0^-beta to samples");
    c_fit->add_option("--config", fit.config, "Optional JSON with a 'samples' path");
    c_fit->add_option("--samples", fit.samples, "CSV with v0_mps,eta_p");
    c_fit->add_option("--out", fit.out, "Output CSV");

    SolveArgs solve;
    auto* c_solve = app.add_subcommand("solve", "Solve one power-allocation instance");
    c_solve->add_option("--config", solve.config, "Experiment config JSON")->required();
    c_solve->add_option("--backend", solve.backend, "q3e-numeric | q3e-mlp | max-sum-rate | qos-only");
    c_solve->add_option("--budget", solve.budget, "RF budget override, W");
    c_solve->add_option("--out", solve.out, "Solution JSON");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Airspeed or RF-budget sweep");
    c_sweep->add_option("--config", sweep.config, "Experiment config JSON")->required();
    c_sweep->add_option("--out", sweep.out, "Output CSV");
    c_sweep->add_option("--svg", sweep.svg, "Optional SVG chart");
    c_sweep->add_option("--workers", sweep.workers, "Concurrent sweep points");

    AblationArgs abl;
    auto* c_abl = app.add_subcommand("ablation", "Projection and soft-loss ablation of the MLP backend");
    c_abl->add_option("--config", abl.config, "Experiment config JSON")->required();
    c_abl->add_option("--out", abl.out, "Output CSV");
    c_abl->add_option("--workers", abl.workers, "Concurrent trainings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*c_prop) return run_propulsion(prop);
        if (*c_bemt) return run_bemt(bemt);
        if (*c_fit) return run_surrogate_fit(fit);
        if (*c_solve) return run_solve(solve);
        if (*c_sweep) return run_sweep(sweep);
        if (*c_abl) return run_ablation_verb(abl);
    } catch (const hap::InfeasibleBudgetError& e) {
        std::cerr << "infeasible: " << e.what() << " (deficit " << e.deficit_w() << " W)\n";
        return kExitInfeasible;
    } catch (const hap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
