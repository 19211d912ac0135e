// ============================================================================
// config.hpp -- experiment configuration (single JSON document)
//
// Physical quantities are linear except "pav", which accepts either a linear
// number or a string with a "dB" suffix ("1 dB"). Sweep values for the P_av
// axis are given in dB.
// ============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ehwsn/errors.hpp"
#include "ehwsn/network.hpp"
#include "ehwsn/optimizer.hpp"

namespace ehwsn {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct BatteryFigureConfig {
    int cdf_capacity = 20;
    std::vector<double> cdf_p_e{0.5, 0.75, 0.82};
    int pmf_capacity = 50;
    double pmf_p_e = 0.8;
    std::size_t sensor = 0;
    std::uint64_t simulation_steps = 10000000;

    bool operator==(const BatteryFigureConfig&) const = default;
};

struct ExperimentConfig {
    NetworkSpec network;
    double false_alarm = 0.5;
    std::vector<double> budgets{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int grid_points = 60;
    double grid_lower = 0.0;
    std::optional<double> grid_upper;  // default: shared useful range
    std::size_t channel_draws = 500;
    std::uint64_t seed = 1;
    std::uint64_t validation_trials = 1000000;
    std::uint64_t sweep_trials = 100000;
    KlMethod kl_method = KlMethod::Gaussian;
    std::vector<double> pav_sweep_db{-2.0, 0.0, 1.0, 2.0, 4.0, 6.0};
    std::vector<int> capacity_sweep{2, 5, 10, 20, 30, 40, 50, 60, 70, 80};
    std::optional<double> capacity_sweep_p_e = 0.8;
    BatteryFigureConfig battery_figure;

    bool operator==(const ExperimentConfig&) const = default;

    std::size_t sensors() const { return network.size(); }

    ThresholdGrid grid() const {
        ThresholdGrid g = shared_grid(network.sensors, grid_points);
        g.lower = grid_lower;
        if (grid_upper) g.upper = *grid_upper;
        return g;
    }

    std::vector<ThresholdGrid> grids() const { return std::vector<ThresholdGrid>(sensors(), grid()); }
};

namespace detail {

template <class T>
bool strictly_increasing(const std::vector<T>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

inline KlMethod parse_kl_method(const std::string& s) {
    if (s == "gaussian") return KlMethod::Gaussian;
    if (s == "lowsnr") return KlMethod::LowSnr;
    if (s == "exact") return KlMethod::Exact;
    throw ConfigError("kl_method must be one of gaussian|lowsnr|exact, got '" + s + "'");
}

inline double parse_pav(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError("pav must be a number (linear) or a string like \"1 dB\"");
    std::string s = j.get<std::string>();
    const auto pos = s.find("dB");
    if (pos == std::string::npos || pos + 2 != s.size()) {
        throw ConfigError("pav string must end with 'dB', got '" + s + "'");
    }
    try {
        std::size_t used = 0;
        const std::string number = s.substr(0, pos);
        const double db = std::stod(number, &used);
        if (number.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("trailing characters");
        return db_to_linear(db);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse pav '" + s + "'");
    }
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
    try {
        c.network.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(c.false_alarm > 0.0 && c.false_alarm < 1.0)) throw ConfigError("false_alarm must be in (0,1)");
    if (c.budgets.empty()) throw ConfigError("budgets must not be empty");
    for (double a : c.budgets)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("budgets must lie in (0,1)");
    if (!detail::strictly_increasing(c.budgets)) throw ConfigError("budgets must be strictly increasing");
    if (!detail::strictly_increasing(c.pav_sweep_db)) throw ConfigError("pav sweep values must be strictly increasing");
    if (!detail::strictly_increasing(c.capacity_sweep)) throw ConfigError("capacity sweep values must be strictly increasing");
    for (int k : c.capacity_sweep)
        if (k < 1) throw ConfigError("capacity sweep values must be >= 1");
    if (c.capacity_sweep_p_e && !(*c.capacity_sweep_p_e >= 0.0 && *c.capacity_sweep_p_e <= 1.0)) {
        throw ConfigError("capacity sweep p_e must be in [0,1]");
    }
    if (c.grid_points < 2) throw ConfigError("grid.points must be >= 2");
    try {
        c.grid().validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (c.channel_draws < 1) throw ConfigError("channel_draws must be >= 1");
    if (c.validation_trials < 1 || c.sweep_trials < 1) throw ConfigError("trial counts must be >= 1");
    const auto& bf = c.battery_figure;
    if (bf.cdf_capacity < 1 || bf.pmf_capacity < 1) throw ConfigError("battery_figure capacities must be >= 1");
    if (bf.sensor >= c.sensors()) throw ConfigError("battery_figure.sensor out of range");
    for (double p : bf.cdf_p_e)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("battery_figure.cdf_p_e must lie in [0,1]");
    if (!detail::strictly_increasing(bf.cdf_p_e)) throw ConfigError("battery_figure.cdf_p_e must be strictly increasing");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        const double lambda = j.value("lambda", 1.0);
        if (!j.contains("sensors") || !j.contains("channels")) throw ConfigError("config needs 'sensors' and 'channels'");
        for (const auto& s : j.at("sensors")) {
            SensorParams p;
            p.amplitude = s.value("amplitude", 1.0);
            p.samples = s.value("samples", 100);
            p.sigma_w2 = s.value("sigma_w2", 1.0);
            p.gamma_g = s.at("gamma_g").get<double>();
            c.network.sensors.push_back(p);
        }
        for (const auto& ch : j.at("channels")) {
            ChannelParams p;
            p.gamma_h = ch.at("gamma_h").get<double>();
            p.sigma_n2 = ch.at("sigma_n2").get<double>();
            p.lambda = ch.value("lambda", lambda);
            c.network.channels.push_back(p);
        }
        if (j.contains("battery")) {
            c.network.capacity = j["battery"].value("capacity", c.network.capacity);
            c.network.p_e = j["battery"].value("p_e", c.network.p_e);
        }
        c.network.prior_h1 = j.value("prior_h1", c.network.prior_h1);
        if (!j.contains("pav")) throw ConfigError("config needs 'pav'");
        c.network.pav_target = detail::parse_pav(j.at("pav"));
        if (j.contains("reference_thetas") && !j["reference_thetas"].is_null()) {
            c.network.reference_thetas = j["reference_thetas"].get<std::vector<double>>();
        }
        c.false_alarm = j.value("false_alarm", c.false_alarm);
        if (j.contains("budgets")) c.budgets = j["budgets"].get<std::vector<double>>();
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            c.grid_points = g.value("points", c.grid_points);
            c.grid_lower = g.value("lower", c.grid_lower);
            if (g.contains("upper") && !g["upper"].is_null()) c.grid_upper = g["upper"].get<double>();
        }
        c.channel_draws = j.value("channel_draws", c.channel_draws);
        if (!j.contains("seed")) throw ConfigError("config needs 'seed'");
        c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("trials")) {
            c.validation_trials = j["trials"].value("validation", c.validation_trials);
            c.sweep_trials = j["trials"].value("sweep", c.sweep_trials);
        }
        if (j.contains("kl_method")) c.kl_method = detail::parse_kl_method(j["kl_method"].get<std::string>());
        if (j.contains("sweeps")) {
            const auto& s = j["sweeps"];
            if (s.contains("pav_db")) c.pav_sweep_db = s["pav_db"].get<std::vector<double>>();
            if (s.contains("capacity")) c.capacity_sweep = s["capacity"].get<std::vector<int>>();
            if (s.contains("capacity_p_e")) {
                if (s["capacity_p_e"].is_null()) c.capacity_sweep_p_e.reset();
                else c.capacity_sweep_p_e = s["capacity_p_e"].get<double>();
            }
        }
        if (j.contains("battery_figure")) {
            const auto& b = j["battery_figure"];
            auto& bf = c.battery_figure;
            bf.cdf_capacity = b.value("cdf_capacity", bf.cdf_capacity);
            if (b.contains("cdf_p_e")) bf.cdf_p_e = b["cdf_p_e"].get<std::vector<double>>();
            bf.pmf_capacity = b.value("pmf_capacity", bf.pmf_capacity);
            bf.pmf_p_e = b.value("pmf_p_e", bf.pmf_p_e);
            bf.sensor = b.value("sensor", bf.sensor);
            bf.simulation_steps = b.value("simulation_steps", bf.simulation_steps);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    json sensors = json::array();
    for (const auto& s : c.network.sensors) {
        sensors.push_back({{"amplitude", s.amplitude}, {"samples", s.samples}, {"sigma_w2", s.sigma_w2}, {"gamma_g", s.gamma_g}});
    }
    json channels = json::array();
    for (const auto& ch : c.network.channels) {
        channels.push_back({{"gamma_h", ch.gamma_h}, {"sigma_n2", ch.sigma_n2}, {"lambda", ch.lambda}});
    }
    j["sensors"] = sensors;
    j["channels"] = channels;
    j["battery"] = {{"capacity", c.network.capacity}, {"p_e", c.network.p_e}};
    j["prior_h1"] = c.network.prior_h1;
    j["pav"] = c.network.pav_target;
    j["reference_thetas"] = c.network.reference_thetas.empty() ? json(nullptr) : json(c.network.reference_thetas);
    j["false_alarm"] = c.false_alarm;
    j["budgets"] = c.budgets;
    j["grid"] = {{"points", c.grid_points}, {"lower", c.grid_lower},
                 {"upper", c.grid_upper ? json(*c.grid_upper) : json(nullptr)}};
    j["channel_draws"] = c.channel_draws;
    j["seed"] = c.seed;
    j["trials"] = {{"validation", c.validation_trials}, {"sweep", c.sweep_trials}};
    j["kl_method"] = kl_method_name(c.kl_method);
    j["sweeps"] = {{"pav_db", c.pav_sweep_db},
                   {"capacity", c.capacity_sweep},
                   {"capacity_p_e", c.capacity_sweep_p_e ? json(*c.capacity_sweep_p_e) : json(nullptr)}};
    const auto& bf = c.battery_figure;
    j["battery_figure"] = {{"cdf_capacity", bf.cdf_capacity}, {"cdf_p_e", bf.cdf_p_e},
                           {"pmf_capacity", bf.pmf_capacity}, {"pmf_p_e", bf.pmf_p_e},
                           {"sensor", bf.sensor}, {"simulation_steps", bf.simulation_steps}};
    return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2); }

/// FNV-1a 64 of the canonical (key-sorted, compact) JSON form.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string canon = config_to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// The network parameters used in the published experiments (K = 3).
inline ExperimentConfig paper_config() {
    ExperimentConfig c;
    const double gamma_g[] = {1.3, 2.0, 0.9};
    const double gamma_h[] = {1.5, 0.8, 1.4};
    const double sigma_n2[] = {0.9, 1.2, 0.8};
    for (int k = 0; k < 3; ++k) {
        c.network.sensors.push_back(SensorParams{1.0, 100, 1.0, gamma_g[k], 0.0});
        c.network.channels.push_back(ChannelParams{gamma_h[k], sigma_n2[k], 1.0, 0.0});
    }
    c.network.capacity = 20;
    c.network.p_e = 0.75;
    c.network.prior_h1 = 0.5;
    c.network.pav_target = db_to_linear(1.0);
    c.seed = 20190601;
    return c;
}

}  // namespace ehwsn
