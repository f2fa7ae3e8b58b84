#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hea/admm.hpp"
#include "hea/convex.hpp"
#include "hea/params.hpp"
#include "hea/profile.hpp"
#include "hea/schedule.hpp"
#include "hea/tables.hpp"

namespace hea {

/// Plant bookkeeping left its invariant envelope (SOC box, fuel-rate box).
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Strategy { AdmmVariableMass, AdmmConstantMass, Cdcs, GasTurbineOnly };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/// Everything needed to run one closed-loop mission.
struct Scenario {
    PowertrainParams params;
    FlightProfile profile;
    LossTable losses;
    FanMapTable fan_map;
    Strategy strategy = Strategy::AdmmVariableMass;
    double m0 = 0.0;  // initial mass; 0 means params.mtow
    double E0 = 0.0;  // initial SOC; 0 means params.soc_max
    bool windmilling = false;
    double eta_w = 0.15;                         // recovery efficiency
    std::optional<double> gt_power_cap_override; // MW, saturation studies
    double series_speed_ratio = 1.0;
    SolverOptions solver;

    double initial_mass() const { return m0 > 0.0 ? m0 : params.mtow; }
    double initial_soc() const { return E0 > 0.0 ? E0 : params.soc_max; }
    void validate() const;
};

struct MissionStep {
    double t = 0.0, h = 0.0, v = 0.0;
    double m = 0.0, E = 0.0;   // plant state at step start
    double phi = 0.0;          // applied fuel rate, kg/s per system
    double p_b = 0.0;          // applied battery chemical power, MW
    double p_drv = 0.0;        // per-system drive power at applied mass, MW
    // parallel decomposition
    double p_gt = 0.0, p_em = 0.0;
    // series decomposition
    double p_el = 0.0, p_c = 0.0, p_gen = 0.0;
    double alpha_deg = 0.0;
    long iterations = 0;
    bool fast_path = false;
    bool clamped = false;  // plant-side SOC clamp engaged
};

struct MissionResult {
    double delta = 60.0;
    Topology topology = Topology::Parallel;
    Strategy strategy = Strategy::AdmmVariableMass;
    std::vector<MissionStep> steps;
    double fuel_total = 0.0;  // kg per system, = sum phi * delta
    double final_mass = 0.0;
    double final_E = 0.0;
    long total_iterations = 0;
    double wall_time_s = 0.0;
};

/// Pin P_b to the windmilling recovery value g(h(eta_w * P_drv,i)) on every
/// step whose (constant-mass) drive-power estimate is negative.
void apply_windmilling(CoefficientSchedule& schedule,
                       const PowertrainParams& params, double eta_w);

/// Topology-specific power decomposition for one applied step; fills the
/// p_gt/p_em (parallel) or p_el/p_c/p_gen + p_gt (series) fields.
void decompose_powers(MissionStep& rec, const ScheduleStep& sched,
                      Topology topology, const PowertrainParams& params);

/// Shrinking-horizon closed loop: rebuild the schedule from the current
/// mass at every step, solve the remaining-horizon program (or apply the
/// heuristic policy), implement the first move, update the plant.
MissionResult run_closed_loop(const Scenario& scenario);

/// Charge-depleting / charge-sustaining baseline.
MissionResult cdcs_strategy(const Scenario& scenario);

/// One row per step (documented column order) followed by nothing; totals
/// go to the summary text file written by the CLI.
void write_mission_csv(const MissionResult& result, const std::string& path);

}  // namespace hea
