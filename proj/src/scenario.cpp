#include "hea/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace hea {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& ctx) {
    if (!j.is_object())
        throw ScenarioLoadError("scenario: " + ctx + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ScenarioLoadError("scenario: unknown key '" + it.key() +
                                    "' in " + ctx);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_params(const json& j, PowertrainParams& p) {
    check_keys(j,
               {"mtow", "g_accel", "wing_area", "air_density", "b0", "b1", "a0",
                "a1", "a2", "alpha_min", "alpha_max", "n_systems", "fuel_mass",
                "battery_mass", "battery_energy_density", "soc_min", "soc_max",
                "gt_power_min", "gt_power_max", "em_power_min", "em_power_max",
                "battery_voltage", "battery_resistance", "mission_time"},
               "params");
    read(j, "mtow", p.mtow);
    read(j, "g_accel", p.g_accel);
    read(j, "wing_area", p.wing_area);
    read(j, "air_density", p.air_density);
    read(j, "b0", p.b0);
    read(j, "b1", p.b1);
    read(j, "a0", p.a0);
    read(j, "a1", p.a1);
    read(j, "a2", p.a2);
    read(j, "alpha_min", p.alpha_min);
    read(j, "alpha_max", p.alpha_max);
    read(j, "n_systems", p.n_systems);
    read(j, "fuel_mass", p.fuel_mass);
    read(j, "battery_mass", p.battery_mass);
    read(j, "battery_energy_density", p.battery_energy_density);
    read(j, "soc_min", p.soc_min);
    read(j, "soc_max", p.soc_max);
    read(j, "gt_power_min", p.gt_power_min);
    read(j, "gt_power_max", p.gt_power_max);
    read(j, "em_power_min", p.em_power_min);
    read(j, "em_power_max", p.em_power_max);
    read(j, "battery_voltage", p.battery_voltage);
    read(j, "battery_resistance", p.battery_resistance);
    read(j, "mission_time", p.mission_time);
}

void read_solver(const json& j, SolverOptions& o) {
    check_keys(j,
               {"eps_rel", "eps_abs", "f_sigma", "max_iter", "mu", "tau_max",
                "parallel"},
               "solver");
    read(j, "eps_rel", o.eps_rel);
    read(j, "eps_abs", o.eps_abs);
    read(j, "f_sigma", o.f_sigma);
    read(j, "max_iter", o.max_iter);
    read(j, "mu", o.mu);
    read(j, "tau_max", o.tau_max);
    read(j, "parallel", o.parallel);
}

Scenario load_impl(const std::string& path, bool load_files) {
    std::ifstream in(path);
    if (!in) throw ScenarioLoadError("scenario: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioLoadError("scenario: " + path + ": " + e.what());
    }

    try {
        check_keys(j,
                   {"schema-version", "topology", "strategy", "delta", "profile",
                    "loss_table", "fan_map", "initial_mass", "initial_soc",
                    "windmilling", "gt_power_cap", "series_speed_ratio", "params",
                    "solver"},
                   "document root");
        if (!j.contains("schema-version"))
            throw ScenarioLoadError("scenario: missing schema-version");
        if (j.at("schema-version").get<int>() != kScenarioSchemaVersion)
            throw ScenarioLoadError("scenario: unsupported schema-version");
        if (!j.contains("profile"))
            throw ScenarioLoadError("scenario: missing profile path");

        Scenario sc;
        if (j.contains("params")) read_params(j.at("params"), sc.params);
        if (j.contains("topology"))
            sc.params.topology = topology_from_string(j.at("topology").get<std::string>());
        if (j.contains("strategy"))
            sc.strategy = strategy_from_string(j.at("strategy").get<std::string>());
        double delta = 60.0;
        read(j, "delta", delta);
        if (delta <= 0.0) throw ScenarioLoadError("scenario: delta must be > 0");
        read(j, "initial_mass", sc.m0);
        read(j, "initial_soc", sc.E0);
        read(j, "series_speed_ratio", sc.series_speed_ratio);
        if (j.contains("gt_power_cap"))
            sc.gt_power_cap_override = j.at("gt_power_cap").get<double>();
        if (j.contains("windmilling")) {
            const json& w = j.at("windmilling");
            check_keys(w, {"enabled", "eta_w"}, "windmilling");
            read(w, "enabled", sc.windmilling);
            read(w, "eta_w", sc.eta_w);
        }
        if (j.contains("solver")) read_solver(j.at("solver"), sc.solver);

        sc.params.validate();

        const auto base = std::filesystem::path(path).parent_path();
        auto resolve = [&](const std::string& rel) {
            std::filesystem::path p(rel);
            return (p.is_absolute() ? p : base / p).string();
        };

        if (load_files) {
            try {
                sc.profile =
                    load_flight_profile(resolve(j.at("profile").get<std::string>()),
                                        delta);
                sc.losses = j.contains("loss_table")
                                ? LossTable::load(
                                      resolve(j.at("loss_table").get<std::string>()))
                                : LossTable::synthetic_default();
                sc.fan_map = j.contains("fan_map")
                                 ? FanMapTable::load(
                                       resolve(j.at("fan_map").get<std::string>()))
                                 : FanMapTable::synthetic_default();
            } catch (const std::exception& e) {
                throw ScenarioLoadError(std::string("scenario: ") + e.what());
            }
            sc.validate();
        }
        return sc;
    } catch (const json::exception& e) {
        throw ScenarioLoadError("scenario: " + path + ": " + e.what());
    }
}

}  // namespace

Scenario load_scenario(const std::string& path) { return load_impl(path, true); }

void validate_scenario_file(const std::string& path) { load_impl(path, false); }

}  // namespace hea
