#pragma once

#include "hea/params.hpp"
#include "hea/quad_map.hpp"

namespace hea {

/// Battery equivalent circuit: chemical power drawn from the cells for a
/// requested effective (bus) power p_c, both in MW.
///   P_b = U^2/2R (1 - sqrt(1 - 4R P_c / U^2))
/// Throws MapDomainError when p_c exceeds the circuit apex U^2/4R.
double battery_chemical_power(double p_c, const PowertrainParams& params);

/// Inverse of battery_chemical_power, total on the reachable range:
///   P_c = P_b - (R/U^2) P_b^2.
double battery_effective_power(double p_b, const PowertrainParams& params);

/// Result of recovering the angle of attack from the lift balance.
struct AlphaResult {
    double alpha_deg = 0.0;
    bool in_range = true;
};

/// Angle of attack (deg) required to balance lift at mass m, speed v,
/// flight path angle gamma (rad) and path-angle rate dgamma_dt (rad/s).
AlphaResult recover_alpha(double m, double v, double gamma, double dgamma_dt,
                          const PowertrainParams& params);

/// Coefficients of the drive power as a quadratic in the aircraft mass for
/// one time step, obtained by eliminating the angle of attack from the lift
/// balance (thrust contribution along lift neglected). Speeds in m/s,
/// angles in rad, delta in s. Output power in MW (whole aircraft).
EtaCoeffs drive_power_coefficients(double v_now, double v_next,
                                   double gamma_now, double gamma_next,
                                   double delta, const PowertrainParams& params);

/// Total drive power (MW) at mass m.
double drive_power(const EtaCoeffs& eta, double m);

/// Per-system drive power (MW) at mass m.
double drive_power_per_system(const EtaCoeffs& eta, double m,
                              const PowertrainParams& params);

}  // namespace hea
