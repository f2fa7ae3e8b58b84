#include "hea/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hea/csv.hpp"
#include "hea/powertrain.hpp"

namespace hea {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::AdmmVariableMass: return "variable-mass";
        case Strategy::AdmmConstantMass: return "constant-mass";
        case Strategy::Cdcs: return "cdcs";
        case Strategy::GasTurbineOnly: return "gas-turbine-only";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "variable-mass") return Strategy::AdmmVariableMass;
    if (s == "constant-mass") return Strategy::AdmmConstantMass;
    if (s == "cdcs") return Strategy::Cdcs;
    if (s == "gas-turbine-only") return Strategy::GasTurbineOnly;
    throw std::invalid_argument("unknown strategy: " + s);
}

void Scenario::validate() const {
    params.validate();
    profile.validate();
    if (windmilling && (eta_w <= 0.0 || eta_w > 1.0))
        throw std::invalid_argument("scenario: eta_w must lie in (0, 1]");
    if (gt_power_cap_override &&
        (*gt_power_cap_override <= 0.0 ||
         *gt_power_cap_override > params.gt_power_max))
        throw std::invalid_argument(
            "scenario: gt power cap override outside (0, gt_power_max]");
    if (series_speed_ratio <= 0.0)
        throw std::invalid_argument("scenario: series speed ratio must be > 0");
    const double e0 = initial_soc();
    if (e0 < params.soc_min || e0 > params.soc_max)
        throw std::invalid_argument("scenario: initial SOC outside bounds");
    if (initial_mass() <= 0.0)
        throw std::invalid_argument("scenario: initial mass must be positive");
}

void apply_windmilling(CoefficientSchedule& schedule,
                       const PowertrainParams& params, double eta_w) {
    if (eta_w <= 0.0 || eta_w > 1.0)
        throw std::invalid_argument("apply_windmilling: eta_w outside (0, 1]");
    for (ScheduleStep& s : schedule.steps) {
        if (s.p_drv_estimate >= 0.0) continue;
        const double pinned = battery_chemical_power(
            s.kappa.eval(eta_w * s.p_drv_estimate), params);
        s.pb_lo = pinned;
        s.pb_hi = pinned;
        s.pinned_pb = true;
    }
}

void decompose_powers(MissionStep& rec, const ScheduleStep& sched,
                      Topology topology, const PowertrainParams& params) {
    const double p_c = battery_effective_power(rec.p_b, params);
    if (topology == Topology::Parallel) {
        rec.p_em = sched.kappa.invert(p_c);
        rec.p_gt = rec.p_drv - rec.p_em;
    } else {
        rec.p_el = sched.kappa.eval(rec.p_drv);
        rec.p_c = p_c;
        rec.p_gen = rec.p_el - p_c;
        rec.p_gt = sched.nu.eval(rec.p_gen);
    }
}

namespace {

/// Largest battery power not exceeding `p_cap` whose fuel rate stays at or
/// above the gas-turbine floor phi_lo; f_phi is decreasing in p.
double cdcs_power(const ConvexProblem& prob, double m, double p_cap) {
    const ScheduleStep& s = prob.step(0);
    double lo = s.pb_lo, hi = std::max(s.pb_lo, p_cap);
    const double f_hi = prob.f_phi(0, m, hi);
    if (f_hi >= s.phi_lo) return hi;
    if (prob.f_phi(0, m, lo) <= s.phi_lo) return lo;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (prob.f_phi(0, m, mid) >= s.phi_lo) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-12 * (1.0 + std::abs(hi))) break;
    }
    return lo;
}

}  // namespace

MissionResult run_closed_loop(const Scenario& scenario) {
    scenario.validate();
    const auto t_start = std::chrono::steady_clock::now();

    PowertrainParams params = scenario.params;
    if (scenario.gt_power_cap_override)
        params.gt_power_max = *scenario.gt_power_cap_override;

    const FlightProfile& full = scenario.profile;
    if (full.size() < 2)
        throw std::invalid_argument("run_closed_loop: profile too short");
    const size_t K = full.size() - 1;
    const double delta = full.delta;

    MissionResult result;
    result.delta = delta;
    result.topology = params.topology;
    result.strategy = scenario.strategy;
    result.steps.reserve(K);

    double m = scenario.initial_mass();
    double E = scenario.initial_soc();

    for (size_t k = 0; k < K; ++k) {
        FlightProfile sub;
        sub.delta = delta;
        sub.steps.assign(full.steps.begin() + k, full.steps.end());
        CoefficientSchedule schedule =
            build_schedule(sub, scenario.losses, scenario.fan_map, params, m,
                           scenario.series_speed_ratio);
        if (scenario.windmilling)
            apply_windmilling(schedule, params, scenario.eta_w);

        const size_t N = K - k;
        const bool const_mass = scenario.strategy == Strategy::AdmmConstantMass;
        ConvexProblem problem = assemble(schedule, m, E, params, N, 0, const_mass);

        double phi0 = 0.0, pb0 = 0.0;
        long iters = 0;
        bool fast = false;
        if (scenario.strategy == Strategy::AdmmVariableMass ||
            scenario.strategy == Strategy::AdmmConstantMass) {
            SolverOptions opts = scenario.solver;
            if (k > 0) opts.trace_path.clear();
            Solution sol;
            try {
                sol = solve(problem, opts);
            } catch (const IterationLimitError& e) {
                throw IterationLimitError(
                    std::string(e.what()) + " at mission step " + std::to_string(k),
                    e.best_iterate);
            }
            phi0 = sol.phi[0];
            pb0 = sol.p_b[0];
            iters = sol.stats.iterations;
            fast = sol.stats.fast_path;
        } else if (scenario.strategy == Strategy::Cdcs) {
            const double p_feas = (E - params.soc_min) / delta;
            const double p_cap =
                std::min(problem.step(0).pb_hi, p_feas);
            pb0 = cdcs_power(problem, m, p_cap);
            const double f = problem.f_phi(0, m, pb0);
            if (f > problem.step(0).phi_hi + 1e-9)
                throw std::runtime_error(
                    "cdcs: drive power demand exceeds combined capability at step " +
                    std::to_string(k));
            phi0 = std::max(f, problem.step(0).phi_lo);
        } else {  // GasTurbineOnly
            pb0 = std::clamp(0.0, problem.step(0).pb_lo, problem.step(0).pb_hi);
            const double f = problem.f_phi(0, m, pb0);
            if (f > problem.step(0).phi_hi + 1e-9)
                throw std::runtime_error(
                    "gas-turbine-only: demand exceeds capability at step " +
                    std::to_string(k));
            phi0 = std::max(f, problem.step(0).phi_lo);
        }

        // Plant-side SOC guard: the predictor leaves the terminal SOC free,
        // so clamp the applied battery power into the reachable band.
        const double p_min_E = (E - params.soc_max) / delta;
        const double p_max_E = (E - params.soc_min) / delta;
        const double pb_applied = std::clamp(pb0, p_min_E, p_max_E);
        const bool clamped = pb_applied != pb0;
        if (clamped) {
            const double f = problem.f_phi(0, m, pb_applied);
            if (f > problem.step(0).phi_hi + 1e-9)
                throw InvariantViolation(
                    "run_closed_loop: fuel-rate ceiling violated after SOC clamp "
                    "at step " + std::to_string(k));
            phi0 = std::max(f, problem.step(0).phi_lo);
        }
        if (phi0 < problem.step(0).phi_lo - 1e-9 ||
            phi0 > problem.step(0).phi_hi + 1e-9)
            throw InvariantViolation(
                "run_closed_loop: applied fuel rate outside its box at step " +
                std::to_string(k));

        MissionStep rec;
        rec.t = full.steps[k].t;
        rec.h = full.steps[k].h;
        rec.v = full.steps[k].v_tas;
        rec.m = m;
        rec.E = E;
        rec.phi = phi0;
        rec.p_b = pb_applied;
        rec.p_drv = drive_power_per_system(schedule.steps[0].eta, m, params);
        rec.alpha_deg =
            recover_alpha(m, full.steps[k].v_tas, full.steps[k].gamma,
                          (full.steps[k + 1].gamma - full.steps[k].gamma) / delta,
                          params)
                .alpha_deg;
        decompose_powers(rec, schedule.steps[0], params.topology, params);
        rec.iterations = iters;
        rec.fast_path = fast;
        rec.clamped = clamped;
        result.steps.push_back(rec);
        result.total_iterations += iters;

        m -= phi0 * delta;
        E -= pb_applied * delta;
        if (E < params.soc_min - 1e-9 || E > params.soc_max + 1e-9)
            throw InvariantViolation(
                "run_closed_loop: SOC left its box at step " + std::to_string(k));
        E = std::clamp(E, params.soc_min, params.soc_max);
        if (m <= 0.0)
            throw InvariantViolation(
                "run_closed_loop: nonpositive mass at step " + std::to_string(k));
    }

    result.final_mass = m;
    result.final_E = E;
    result.fuel_total = scenario.initial_mass() - m;
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return result;
}

MissionResult cdcs_strategy(const Scenario& scenario) {
    Scenario s = scenario;
    s.strategy = Strategy::Cdcs;
    return run_closed_loop(s);
}

void write_mission_csv(const MissionResult& result, const std::string& path) {
    CsvWriter out(path);
    out.header({"t", "h", "v", "m", "E", "phi", "p_b", "p_drv", "p_gt", "p_em",
                "p_el", "p_c", "p_gen", "alpha_deg", "iterations", "fast_path",
                "clamped"});
    for (const MissionStep& s : result.steps)
        out.row({s.t, s.h, s.v, s.m, s.E, s.phi, s.p_b, s.p_drv, s.p_gt, s.p_em,
                 s.p_el, s.p_c, s.p_gen, s.alpha_deg,
                 static_cast<double>(s.iterations),
                 static_cast<double>(s.fast_path),
                 static_cast<double>(s.clamped)});
}

}  // namespace hea
