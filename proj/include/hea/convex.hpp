#pragma once

#include <optional>
#include <vector>

#include "hea/params.hpp"
#include "hea/schedule.hpp"

namespace hea {

struct SolverStats {
    long iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double wall_time_s = 0.0;
    bool fast_path = false;
    bool converged = true;
};

/// Optimal power split over a horizon: per-step fuel rate, battery chemical
/// power, and the implied mass/SOC trajectories.
struct Solution {
    std::vector<double> phi;  // kg/s
    std::vector<double> p_b;  // MW
    std::vector<double> m;    // kg, m[i] at start of step i
    std::vector<double> E;    // MJ, E[i] at start of step i
    double objective = 0.0;   // kg, sum phi_i * delta
    SolverStats stats;
};

/// First and second partial derivatives of f_phi at a point.
struct FphiDerivs {
    double value = 0.0;
    double d_m = 0.0;    // kg/s per kg
    double d_p = 0.0;    // kg/s per MW
    double d_mm = 0.0;
    double d_pp = 0.0;
    double d_mp = 0.0;
};

/// The assembled convex program over an N-step horizon: cumulative-form
/// mass/SOC recursions, per-step boxes, and the composed fuel-rate
/// evaluator family. Immutable after assembly.
class ConvexProblem {
public:
    ConvexProblem() = default;

    size_t horizon() const { return steps_.size(); }
    double delta() const { return delta_; }
    double m0() const { return m0_; }
    double E0() const { return E0_; }
    double soc_min() const { return soc_min_; }
    double soc_max() const { return soc_max_; }
    Topology topology() const { return topology_; }
    bool constant_mass() const { return constant_mass_; }
    const ScheduleStep& step(size_t i) const { return steps_[i]; }
    const PowertrainParams& params() const { return params_; }

    /// Per-system fuel rate at mass m and battery chemical power p_b.
    /// Throws MapDomainError when an inner inverse leaves its monotone
    /// branch (a bound-computation bug, not a runtime condition).
    double f_phi(size_t i, double m, double p_b) const;

    /// (d f_phi / dm, d f_phi / dp_b) at an interior point.
    std::pair<double, double> f_phi_partials(size_t i, double m, double p_b) const;

    /// Value plus full first/second derivative set.
    FphiDerivs f_phi_derivs(size_t i, double m, double p_b) const;

    /// Connected interval of masses, containing m0, on which f_phi(i, ., p_b)
    /// stays on every monotone branch. Either end may be infinite. The
    /// feasible mass set can split into two branches of the drive-power
    /// quadratic; the component around the operating mass is the relevant one.
    std::pair<double, double> f_phi_mass_domain(size_t i, double p_b) const;

    /// Lower end of f_phi_mass_domain; -inf when unconstrained.
    double f_phi_mass_floor(size_t i, double p_b) const;

    friend ConvexProblem assemble(const CoefficientSchedule& schedule, double m0,
                                  double E0, const PowertrainParams& params,
                                  size_t N, size_t offset, bool constant_mass);

private:
    std::vector<ScheduleStep> steps_;
    PowertrainParams params_;
    double delta_ = 60.0;
    double m0_ = 0.0;
    double E0_ = 0.0;
    double soc_min_ = 0.0;
    double soc_max_ = 0.0;
    Topology topology_ = Topology::Parallel;
    bool constant_mass_ = false;
};

/// Build the horizon-N problem from schedule steps [offset, offset+N).
/// Throws on dimension mismatch, SOC bound violation by E0, or when the
/// worst-case fuel burn could drive the mass nonpositive.
ConvexProblem assemble(const CoefficientSchedule& schedule, double m0, double E0,
                       const PowertrainParams& params, size_t N, size_t offset = 0,
                       bool constant_mass = false);

/// Fast path: when the SOC bounds never bind under maximum battery power,
/// the optimum is P_b = pb_hi at every step. Returns the full solution in
/// that case, nothing otherwise.
std::optional<Solution> trivial_solution(const ConvexProblem& problem);

}  // namespace hea
