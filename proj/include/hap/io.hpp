#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hap/bemt.hpp"
#include "hap/config.hpp"
#include "hap/neuro.hpp"
#include "hap/propulsion.hpp"
#include "hap/scenario.hpp"

namespace hap::io {

using nlohmann::json;

// Parses a JSON file; syntax errors and missing files become ConfigError.
json read_json(const std::filesystem::path& path);

PlatformGeometry parse_platform(const json& j);  // {l, d, omega, kf, eta_m}
PowerLedger parse_ledger(const json& j);         // {p_hap, p_payload, ..., xi, n_t}

struct PlatformConfig {
    PlatformGeometry geometry;
    PowerLedger ledger;
    Atmosphere atm;
    SurrogateCoeffs surrogate = kPlatformSurrogate;
    double legacy_eta_p = 0.75;  // constant-efficiency comparison model
};

// Root object with "platform", "ledger", "altitude_m"; optional "surrogate"
// {c, alpha, beta} and "legacy_eta_p".
PlatformConfig parse_platform_config(const json& root);

struct ScenarioConfig {
    Scenario scenario;
    double g_tx_db = 3.0;
    double g_rx_db = 3.0;
    double altitude_m = 20000.0;
    double noise_figure_db = 7.0;
    double omega = 0.5;  // weighted-sum weight, accepted and unused
};

// {"array": {nx, ny, spacing_wavelengths, fc_hz}, "users": [{theta_x_deg,
// theta_y_deg, qos_mbps, kappa_db}], "n0_w"?, "bw_hz", "g_tx_db"?, "g_rx_db"?,
// "altitude_m"?, "noise_figure_db"?}. Without n0_w the thermal floor is used.
ScenarioConfig parse_scenario(const json& j);

neuro::TrainConfig parse_train(const json& j, neuro::TrainConfig base = {});

// Numeric grid either as an explicit array or {start, stop, step} (inclusive).
std::vector<double> parse_grid(const json& j);

// A full experiment config file; referenced files are resolved relative to it.
struct ExperimentConfig {
    std::filesystem::path source;
    json root;
    std::uint64_t seed = 1;

    static ExperimentConfig load(const std::filesystem::path& path);
    bool has(const std::string& key) const { return root.contains(key); }
    std::filesystem::path resolve(const std::string& relative) const;
    // "scenario" given inline or as a path string; or "scenario_ref" path.
    ScenarioConfig scenario() const;
    PlatformConfig platform() const;
    // "ledger" inline, else the one inside the referenced platform config.
    PowerLedger ledger() const;
    neuro::TrainConfig train() const;
};

// HPP_SEED, when set to an unsigned integer, replaces the config seed.
std::optional<std::uint64_t> seed_override_from_env();

// CSV with columns v0_mps, eta_p.
std::vector<EfficiencySample> read_efficiency_samples(const std::filesystem::path& path);

// Directory with polar.csv (alpha_deg,cl,cd), blade.csv (r_m,chord_m,pitch_deg)
// and optionally propeller.json ({"n_blades": N}, default 3).
bemt::PropellerSpec read_propeller_dir(const std::filesystem::path& dir);

}  // namespace hap::io
