#pragma once

#include <vector>

#include "hea/params.hpp"
#include "hea/profile.hpp"
#include "hea/quad_map.hpp"
#include "hea/tables.hpp"

namespace hea {

struct InfeasibleBoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One prediction step's convexified coefficients and effective bounds.
struct ScheduleStep {
    QuadMap kappa;   // electric motor loss map h_i (MW -> MW)
    QuadMap nu;      // generator loss map h_gen,i (MW -> MW)
    QuadMap beta;    // fuel map f_i (MW -> kg/s), per system
    EtaCoeffs eta;   // total drive power quadratic in mass (MW)
    double omega_drv = 0.0;       // rad/s, fan shaft
    double p_drv_estimate = 0.0;  // MW, per system, constant-mass estimate
    double phi_lo = 0.0;          // kg/s
    double phi_hi = 0.0;          // kg/s
    double pb_lo = 0.0;           // MW
    double pb_hi = 0.0;           // MW
    bool pinned_pb = false;       // set by the windmilling hook
};

struct CoefficientSchedule {
    double delta = 60.0;
    Topology topology = Topology::Parallel;
    std::vector<ScheduleStep> steps;

    size_t size() const { return steps.size(); }
};

/// Standard-atmosphere temperature at altitude h [m]: linear lapse up to
/// 11 km, isothermal above.
double ambient_temperature(double h);

/// Fan shaft speed [rad/s] for a per-system drive power [MW] at altitude h
/// [m] and speed v [m/s]. Omega is interpolated from the fan map (clamped
/// at the grid hull) and scaled by the inlet-temperature law.
double shaft_speed(double p_drv, double h, double v, const FanMapTable& fan_map);

/// Per-system drive power estimates over the profile at frozen mass m0.
std::vector<double> estimate_drive_power_profile(const FlightProfile& profile,
                                                 double m0,
                                                 const PowertrainParams& params);

/// Build the per-step coefficient schedule for the profile, tying shaft
/// speeds per topology (series uses omega_gt = omega_gen =
/// series_speed_ratio * omega_drv) and filling the effective bounds.
CoefficientSchedule build_schedule(const FlightProfile& profile,
                                   const LossTable& losses,
                                   const FanMapTable& fan_map,
                                   const PowertrainParams& params, double m0,
                                   double series_speed_ratio = 1.0);

/// Fill phi/P_b bounds for every step from the loss maps and the power
/// limits in params. Throws InfeasibleBoundsError when any box is empty.
void compute_bounds(CoefficientSchedule& schedule, const PowertrainParams& params);

}  // namespace hea
