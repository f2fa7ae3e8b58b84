#include "hea/powertrain.hpp"

#include <cmath>

namespace hea {

double battery_chemical_power(double p_c, const PowertrainParams& params) {
    const double apex = params.battery_power_apex();  // U^2/4R in MW
    const double radicand = 1.0 - p_c / apex;
    if (radicand < -1e-12)
        throw MapDomainError("battery_chemical_power: effective power exceeds U^2/4R");
    return 2.0 * apex * (1.0 - std::sqrt(std::max(radicand, 0.0)));
}

double battery_effective_power(double p_b, const PowertrainParams& params) {
    const double apex = params.battery_power_apex();
    return p_b - p_b * p_b / (4.0 * apex);
}

AlphaResult recover_alpha(double m, double v, double gamma, double dgamma_dt,
                          const PowertrainParams& params) {
    const double q = 0.5 * params.air_density * params.wing_area * v * v;
    const double lift_load = m * (v * dgamma_dt + params.g_accel * std::cos(gamma));
    const double cl = lift_load / q;
    AlphaResult out;
    out.alpha_deg = (cl - params.b0) / params.b1;
    out.in_range = out.alpha_deg >= params.alpha_min - 1e-12 &&
                   out.alpha_deg <= params.alpha_max + 1e-12;
    return out;
}

EtaCoeffs drive_power_coefficients(double v_now, double v_next,
                                   double gamma_now, double gamma_next,
                                   double delta, const PowertrainParams& params) {
    const double g = params.g_accel;
    const double rho = params.air_density;
    const double S = params.wing_area;
    const double a0 = params.a0, a1 = params.a1, a2 = params.a2;
    const double b0 = params.b0, b1 = params.b1;
    const double v = v_now;

    const double dv2 = (v_next * v_next - v * v) / delta;
    const double dgamma = (gamma_next - gamma_now) / delta;
    // Load factor term v*dgamma + g*cos(gamma), common to all coefficients.
    const double load = v * dgamma + g * std::cos(gamma_now);

    EtaCoeffs eta;  // built in watts, converted to MW below
    eta.eta2 = 2.0 * a2 * load * load / (b1 * b1 * rho * S * v);
    eta.eta1 = 0.5 * dv2 + g * std::sin(gamma_now) * v
             - 2.0 * a2 * b0 * load * v / (b1 * b1)
             + (a1 / b1) * load * v;
    eta.eta0 = 0.5 * rho * S * v * v * v *
               (a2 * b0 * b0 / (b1 * b1) - a1 * b0 / b1 + a0);
    eta.eta2 *= 1e-6;
    eta.eta1 *= 1e-6;
    eta.eta0 *= 1e-6;
    return eta;
}

double drive_power(const EtaCoeffs& eta, double m) { return eta.eval(m); }

double drive_power_per_system(const EtaCoeffs& eta, double m,
                              const PowertrainParams& params) {
    return eta.eval(m) / params.n_systems;
}

}  // namespace hea
