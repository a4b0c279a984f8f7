#include "hap/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include "hap/channel.hpp"
#include "hap/error.hpp"
#include "hap/report.hpp"

namespace hap::io {

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

}  // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

PlatformGeometry parse_platform(const json& j) {
    require_object(j, "platform");
    PlatformGeometry g;
    g.length_m = get<double>(j, "l", "platform");
    g.width_m = get<double>(j, "d", "platform");
    g.volume_m3 = get<double>(j, "omega", "platform");
    g.tail_correction_kf = get<double>(j, "kf", "platform");
    g.motor_eff = get<double>(j, "eta_m", "platform");
    try {
        g.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("platform: ") + e.what());
    }
    return g;
}

PowerLedger parse_ledger(const json& j) {
    require_object(j, "ledger");
    PowerLedger l;
    l.p_hap_w = get<double>(j, "p_hap", "ledger");
    l.p_payload_w = get<double>(j, "p_payload", "ledger");
    l.p_standby_w = get<double>(j, "p_standby", "ledger");
    l.p_rfc_w = get<double>(j, "p_rfc", "ledger");
    l.p_lo_w = get<double>(j, "p_lo", "ledger");
    l.p_bb_w = get<double>(j, "p_bb", "ledger");
    l.xi = get<double>(j, "xi", "ledger");
    l.n_t = get<int>(j, "n_t", "ledger");
    try {
        l.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("ledger: ") + e.what());
    }
    return l;
}

PlatformConfig parse_platform_config(const json& root) {
    require_object(root, "config");
    PlatformConfig pc;
    pc.geometry = parse_platform(get<json>(root, "platform", "config"));
    pc.ledger = parse_ledger(get<json>(root, "ledger", "config"));
    const double alt = get<double>(root, "altitude_m", "config");
    try {
        pc.atm = isa_properties(alt);
    } catch (const RangeError& e) {
        throw ConfigError(std::string("altitude_m: ") + e.what());
    }
    if (root.contains("surrogate")) {
        const json& s = root.at("surrogate");
        pc.surrogate.c = get<double>(s, "c", "surrogate");
        pc.surrogate.alpha = get<double>(s, "alpha", "surrogate");
        pc.surrogate.beta = get<double>(s, "beta", "surrogate");
    }
    pc.legacy_eta_p = get_or<double>(root, "legacy_eta_p", pc.legacy_eta_p, "config");
    if (!(pc.legacy_eta_p > 0.0 && pc.legacy_eta_p <= 1.0)) {
        throw ConfigError("legacy_eta_p must lie in (0, 1]");
    }
    return pc;
}

ScenarioConfig parse_scenario(const json& j) {
    require_object(j, "scenario");
    ScenarioConfig sc;
    const json arr = get<json>(j, "array", "scenario");
    require_object(arr, "scenario.array");
    const int nx = get<int>(arr, "nx", "scenario.array");
    const int ny = get<int>(arr, "ny", "scenario.array");
    const double spacing = get_or<double>(arr, "spacing_wavelengths", 0.5, "scenario.array");
    const double fc = get<double>(arr, "fc_hz", "scenario.array");
    sc.g_tx_db = get_or<double>(j, "g_tx_db", sc.g_tx_db, "scenario");
    sc.g_rx_db = get_or<double>(j, "g_rx_db", sc.g_rx_db, "scenario");
    sc.altitude_m = get_or<double>(j, "altitude_m", sc.altitude_m, "scenario");
    sc.noise_figure_db = get_or<double>(j, "noise_figure_db", sc.noise_figure_db, "scenario");
    sc.omega = get_or<double>(j, "omega", sc.omega, "scenario");
    try {
        sc.scenario.array = channel::ArrayGeometry::with_spacing_wavelengths(nx, ny, spacing, fc);
        sc.scenario.bw_hz = get<double>(j, "bw_hz", "scenario");
        if (!(sc.scenario.bw_hz > 0.0)) throw ConfigError("scenario: bw_hz must be positive");
        sc.scenario.n0_w = j.contains("n0_w")
                               ? get<double>(j, "n0_w", "scenario")
                               : channel::thermal_noise_power(sc.scenario.bw_hz, sc.noise_figure_db);
        const double gamma =
            channel::mean_channel_power(sc.scenario.array, sc.g_tx_db, sc.g_rx_db, sc.altitude_m);
        const json users = get<json>(j, "users", "scenario");
        if (!users.is_array() || users.empty()) {
            throw ConfigError("scenario: users must be a non-empty array");
        }
        for (const json& u : users) {
            const double kappa = channel::db_to_linear(get_or<double>(u, "kappa_db", 12.0, "user"));
            sc.scenario.users.push_back(channel::UserLink::from_angles(
                deg(get<double>(u, "theta_x_deg", "user")), deg(get<double>(u, "theta_y_deg", "user")),
                gamma, kappa, get<double>(u, "qos_mbps", "user") * 1e6));
        }
        sc.scenario.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return sc;
}

neuro::TrainConfig parse_train(const json& j, neuro::TrainConfig base) {
    require_object(j, "train");
    if (j.contains("hidden")) base.hidden = get<std::vector<std::size_t>>(j, "hidden", "train");
    base.max_epochs = get_or<std::size_t>(j, "max_epochs", base.max_epochs, "train");
    base.patience = get_or<std::size_t>(j, "patience", base.patience, "train");
    base.step = get_or<double>(j, "step", base.step, "train");
    base.beta1 = get_or<double>(j, "beta1", base.beta1, "train");
    base.beta2 = get_or<double>(j, "beta2", base.beta2, "train");
    base.eps_adam = get_or<double>(j, "eps_adam", base.eps_adam, "train");
    base.barrier.lambda = get_or<double>(j, "lambda", base.barrier.lambda, "train");
    base.barrier.epsilon = get_or<double>(j, "epsilon", base.barrier.epsilon, "train");
    base.lambda_halving_epochs =
        get_or<std::size_t>(j, "lambda_halving_epochs", base.lambda_halving_epochs, "train");
    base.seed = get_or<std::uint64_t>(j, "seed", base.seed, "train");
    base.validate();
    return base;
}

std::vector<double> parse_grid(const json& j) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (const json& v : j) {
            if (!v.is_number()) throw ConfigError("grid entries must be numbers");
            grid.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        const double start = get<double>(j, "start", "grid");
        const double stop = get<double>(j, "stop", "grid");
        const double step = get<double>(j, "step", "grid");
        if (!(step > 0.0) || stop < start) throw ConfigError("grid needs step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) grid.push_back(start + step * static_cast<double>(i));
    } else {
        throw ConfigError("grid must be an array or {start, stop, step}");
    }
    if (grid.empty()) throw ConfigError("grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw ConfigError("grid must be strictly increasing");
    }
    return grid;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    ExperimentConfig cfg;
    cfg.source = path;
    cfg.root = read_json(path);
    require_object(cfg.root, path.string());
    cfg.seed = get_or<std::uint64_t>(cfg.root, "seed", 1, "config");
    if (auto env = seed_override_from_env()) cfg.seed = *env;
    return cfg;
}

std::filesystem::path ExperimentConfig::resolve(const std::string& relative) const {
    std::filesystem::path p(relative);
    if (p.is_absolute()) return p;
    return source.parent_path() / p;
}

ScenarioConfig ExperimentConfig::scenario() const {
    if (root.contains("scenario")) {
        const json& s = root.at("scenario");
        if (s.is_string()) return parse_scenario(read_json(resolve(s.get<std::string>())));
        return parse_scenario(s);
    }
    if (root.contains("scenario_ref")) {
        return parse_scenario(read_json(resolve(get<std::string>(root, "scenario_ref", "config"))));
    }
    throw ConfigError(source.string() + ": no scenario given");
}

PlatformConfig ExperimentConfig::platform() const {
    if (root.contains("platform_ref")) {
        return parse_platform_config(read_json(resolve(get<std::string>(root, "platform_ref", "config"))));
    }
    return parse_platform_config(root);
}

PowerLedger ExperimentConfig::ledger() const {
    if (root.contains("ledger")) return parse_ledger(root.at("ledger"));
    if (root.contains("platform_ref")) return platform().ledger;
    throw ConfigError(source.string() + ": no ledger given");
}

neuro::TrainConfig ExperimentConfig::train() const {
    neuro::TrainConfig base;
    base.seed = seed;
    neuro::TrainConfig tc = root.contains("train") ? parse_train(root.at("train"), base) : base;
    if (seed_override_from_env()) tc.seed = seed;
    return tc;
}

std::optional<std::uint64_t> seed_override_from_env() {
    const char* raw = std::getenv("HPP_SEED");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (!end || *end != '\0') throw ConfigError("HPP_SEED must be an unsigned integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<EfficiencySample> read_efficiency_samples(const std::filesystem::path& path) {
    const report::Table t = report::read_csv(path);
    std::vector<EfficiencySample> out;
    try {
        const std::size_t vi = t.column("v0_mps");
        const std::size_t ei = t.column("eta_p");
        for (const auto& row : t.rows) {
            out.push_back({report::parse_number(row[vi]), report::parse_number(row[ei])});
        }
    } catch (const PreconditionError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return out;
}

bemt::PropellerSpec read_propeller_dir(const std::filesystem::path& dir) {
    try {
        const report::Table polar_t = report::read_csv(dir / "polar.csv");
        std::vector<bemt::PolarPoint> polar;
        const std::size_t ai = polar_t.column("alpha_deg");
        const std::size_t li = polar_t.column("cl");
        const std::size_t di = polar_t.column("cd");
        for (const auto& row : polar_t.rows) {
            polar.push_back({report::parse_number(row[ai]), report::parse_number(row[li]),
                             report::parse_number(row[di])});
        }
        const report::Table blade_t = report::read_csv(dir / "blade.csv");
        std::vector<bemt::BladeStation> stations;
        const std::size_t ri = blade_t.column("r_m");
        const std::size_t ci = blade_t.column("chord_m");
        const std::size_t pi = blade_t.column("pitch_deg");
        for (const auto& row : blade_t.rows) {
            stations.push_back({report::parse_number(row[ri]), report::parse_number(row[ci]),
                                report::parse_number(row[pi])});
        }
        int n_blades = 3;
        if (std::filesystem::exists(dir / "propeller.json")) {
            n_blades = get<int>(read_json(dir / "propeller.json"), "n_blades", "propeller.json");
        }
        bemt::PropellerSpec spec =
            bemt::PropellerSpec::from_stations(n_blades, stations, bemt::AirfoilPolar(polar));
        spec.validate();
        return spec;
    } catch (const PreconditionError& e) {
        throw ConfigError(dir.string() + ": " + e.what());
    } catch (const RangeError& e) {
        throw ConfigError(dir.string() + ": " + e.what());
    }
}

}  // namespace hap::io
