#pragma once

#include <cmath>
#include <random>
#include <string>

#include "hea/convex.hpp"
#include "hea/powertrain.hpp"
#include "hea/scenario.hpp"

namespace test_helpers {

inline std::string data_path(const std::string& f) {
    return std::string(HEA_DATA_DIR) + "/" + f;
}

inline hea::Scenario default_scenario() {
    return hea::load_scenario(data_path("default_scenario.json"));
}

inline hea::CoefficientSchedule default_schedule(const hea::Scenario& sc) {
    return hea::build_schedule(sc.profile, sc.losses, sc.fan_map, sc.params,
                               sc.initial_mass(), sc.series_speed_ratio);
}

inline hea::ConvexProblem default_problem(const hea::Scenario& sc, size_t n = 0,
                                          bool constant_mass = false) {
    hea::CoefficientSchedule sched = default_schedule(sc);
    if (n == 0) n = sched.size();
    return hea::assemble(sched, sc.initial_mass(), sc.initial_soc(), sc.params, n,
                         0, constant_mass);
}

/// Independent drive-power oracle: solve the lift balance for alpha, evaluate
/// the drag polar, add the kinetic/potential terms. Output MW (total).
inline double force_balance_drive_power(double m, double v_now, double v_next,
                                        double gamma_now, double gamma_next,
                                        double delta,
                                        const hea::PowertrainParams& p) {
    const double dgamma_dt = (gamma_next - gamma_now) / delta;
    const double q = 0.5 * p.air_density * p.wing_area * v_now * v_now;
    const double cl = m * (v_now * dgamma_dt + p.g_accel * std::cos(gamma_now)) / q;
    const double alpha = (cl - p.b0) / p.b1;
    const double cd = p.a0 + p.a1 * alpha + p.a2 * alpha * alpha;
    const double drag = q * cd;
    const double dv2 = (v_next * v_next - v_now * v_now) / (2.0 * delta);
    const double power_w =
        drag * v_now + m * (dv2 + p.g_accel * std::sin(gamma_now) * v_now);
    return power_w * 1e-6;
}

}  // namespace test_helpers
