#pragma once

#include <stdexcept>
#include <string>

namespace hea {

enum class Topology { Parallel, Series };

inline std::string to_string(Topology t) {
    return t == Topology::Parallel ? "parallel" : "series";
}

inline Topology topology_from_string(const std::string& s) {
    if (s == "parallel") return Topology::Parallel;
    if (s == "series") return Topology::Series;
    throw std::invalid_argument("unknown topology: " + s);
}

/// Physical constants of the powertrain and airframe.
///
/// Unit system: power in MW, energy in MJ, mass in kg, time in s.
/// Aero coefficients are per-degree (a1 [1/deg], a2 [1/deg^2], b1 [1/deg]),
/// so the angle of attack is handled in degrees while the flight path angle
/// gamma enters trigonometric terms in radians.
struct PowertrainParams {
    double mtow = 42000.0;          // kg
    double g_accel = 9.81;          // m/s^2
    double wing_area = 77.3;        // m^2
    double air_density = 1.225;     // kg/m^3
    double b0 = 0.43;               // lift coeff, constant term
    double b1 = 0.11;               // lift coeff slope [1/deg]
    double a0 = 0.029;              // drag coeff, constant term
    double a1 = 0.004;              // drag coeff [1/deg]
    double a2 = 5.3e-4;             // drag coeff [1/deg^2]
    double alpha_min = -3.9;        // deg
    double alpha_max = 10.0;        // deg
    int n_systems = 4;
    double fuel_mass = 4000.0;      // kg, total
    double battery_mass = 8000.0;   // kg, total
    double battery_energy_density = 0.875;  // MJ/kg
    double soc_min = 350.0;         // MJ, per system
    double soc_max = 1487.0;        // MJ, per system
    double gt_power_min = 0.0;      // MW
    double gt_power_max = 5.0;      // MW
    double em_power_min = 0.0;      // MW
    double em_power_max = 5.0;      // MW
    double battery_voltage = 1500.0;    // V
    double battery_resistance = 0.035;  // ohm
    double mission_time = 3600.0;   // s
    Topology topology = Topology::Parallel;

    /// U^2/(4R) expressed in MW: the largest effective power the battery
    /// equivalent circuit can deliver.
    double battery_power_apex() const {
        return battery_voltage * battery_voltage / (4.0 * battery_resistance) * 1e-6;
    }

    void validate() const;
};

/// Throws std::invalid_argument on any violated invariant.
inline void PowertrainParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("PowertrainParams: ") + what);
    };
    require(air_density > 0, "air density must be > 0");
    require(wing_area > 0, "wing area must be > 0");
    require(battery_voltage > 0, "battery voltage must be > 0");
    require(battery_resistance > 0, "battery resistance must be > 0");
    require(b1 > 0, "lift slope b1 must be > 0");
    require(a2 > 0, "drag curvature a2 must be > 0");
    require(alpha_min <= alpha_max, "alpha range empty");
    require(soc_min <= soc_max, "SOC range empty");
    require(gt_power_min <= gt_power_max, "gas turbine power range empty");
    require(em_power_min <= em_power_max, "electric motor power range empty");
    require(n_systems >= 1, "need at least one propulsion system");
    require(soc_min >= 0.0, "SOC lower bound negative");
    require(soc_max <= battery_mass / n_systems * battery_energy_density + 1e-9,
            "SOC upper bound exceeds battery capacity");
    require(mission_time > 0, "mission time must be > 0");
}

}  // namespace hea
