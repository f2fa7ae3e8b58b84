#include "hea/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "hea/powertrain.hpp"

namespace hea {

double ambient_temperature(double h) {
    if (h <= 11000.0) return 288.15 - 0.0065 * h;
    return 216.65;
}

double shaft_speed(double p_drv, double h, double v, const FanMapTable& fan_map) {
    constexpr double c_p = 1005.0;  // J/(kg K)
    const double t_in = ambient_temperature(h) + v * v / (2.0 * c_p);
    const double omega_nd = fan_map.interpolate(h, p_drv).omega;
    return (156.7 / 100.0) * (M_PI / 30.0) * omega_nd * std::sqrt(t_in);
}

std::vector<double> estimate_drive_power_profile(const FlightProfile& profile,
                                                 double m0,
                                                 const PowertrainParams& params) {
    std::vector<double> out;
    if (profile.size() < 2) return out;
    out.reserve(profile.size() - 1);
    for (size_t i = 0; i + 1 < profile.size(); ++i) {
        const auto& a = profile.steps[i];
        const auto& b = profile.steps[i + 1];
        EtaCoeffs eta = drive_power_coefficients(a.v_tas, b.v_tas, a.gamma, b.gamma,
                                                 profile.delta, params);
        out.push_back(drive_power_per_system(eta, m0, params));
    }
    return out;
}

CoefficientSchedule build_schedule(const FlightProfile& profile,
                                   const LossTable& losses,
                                   const FanMapTable& fan_map,
                                   const PowertrainParams& params, double m0,
                                   double series_speed_ratio) {
    if (profile.size() < 2)
        throw std::invalid_argument("build_schedule: profile too short");
    CoefficientSchedule sched;
    sched.delta = profile.delta;
    sched.topology = params.topology;
    const size_t n = profile.size() - 1;
    sched.steps.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& a = profile.steps[i];
        const auto& b = profile.steps[i + 1];
        ScheduleStep& step = sched.steps[i];
        step.eta = drive_power_coefficients(a.v_tas, b.v_tas, a.gamma, b.gamma,
                                            profile.delta, params);
        step.p_drv_estimate = drive_power_per_system(step.eta, m0, params);
        step.omega_drv = shaft_speed(step.p_drv_estimate, a.h, a.v_tas, fan_map);

        const double omega_gt = params.topology == Topology::Series
                                    ? series_speed_ratio * step.omega_drv
                                    : step.omega_drv;
        auto check_coverage = [&](double omega) {
            const double tol = 1e-9 * (1.0 + losses.omega_max());
            if (omega < losses.omega_min() - tol || omega > losses.omega_max() + tol)
                throw std::runtime_error(
                    "build_schedule: shaft speed outside loss table range");
        };
        check_coverage(step.omega_drv);
        check_coverage(omega_gt);
        step.kappa = losses.motor_at(step.omega_drv);
        step.nu = losses.generator_at(omega_gt);
        step.beta = losses.fuel_at(omega_gt);
    }
    compute_bounds(sched, params);
    return sched;
}

void compute_bounds(CoefficientSchedule& schedule, const PowertrainParams& params) {
    const double apex = params.battery_power_apex();  // U^2/4R, MW
    auto battery = [&](double p_c) { return battery_chemical_power(p_c, params); };

    for (size_t i = 0; i < schedule.size(); ++i) {
        ScheduleStep& s = schedule.steps[i];
        const QuadMap& f = s.beta;
        const QuadMap& h = s.kappa;
        const QuadMap& h_gen = s.nu;

        s.phi_hi = f.eval(params.gt_power_max);
        if (schedule.topology == Topology::Parallel) {
            const double gt_lo = std::max(params.gt_power_min, f.vertex());
            s.phi_lo = f.eval(gt_lo);
            const double em_lo = std::max(params.em_power_min, h.vertex());
            // r_max is the largest motor power keeping the battery map real.
            const double em_hi = std::min(h.eval(params.em_power_max), apex);
            s.pb_lo = battery(h.eval(em_lo));
            s.pb_hi = battery(em_hi);
        } else {
            // Effective gas turbine floor shared by the fuel bound and the
            // battery ceiling: max over the plain bound and the loss-map
            // vertex images.
            const double gt_lo =
                std::max({params.gt_power_min, f.vertex(), h_gen.min_value()});
            s.phi_lo = f.eval(gt_lo);
            const double gen_hi = h_gen.invert(params.gt_power_max);
            const double gen_lo = h_gen.invert(gt_lo);
            const double em_lo = std::max(params.em_power_min, h.vertex());
            s.pb_lo = battery(std::min(h.eval(em_lo) - gen_hi, apex));
            s.pb_hi = battery(std::min(h.eval(params.em_power_max) - gen_lo, apex));
        }
        const double tol = 1e-12;
        if (s.phi_lo > s.phi_hi + tol || s.pb_lo > s.pb_hi + tol)
            throw InfeasibleBoundsError(
                "compute_bounds: empty box at step " + std::to_string(i));
    }
}

}  // namespace hea
