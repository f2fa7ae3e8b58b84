#include "hea/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hea/powertrain.hpp"

namespace hea {

namespace {

// g^{-1}(p) = p - p^2/(4 apex) and its derivatives.
struct BatteryInverse {
    double value, d1, d2;
};

BatteryInverse battery_inverse(double p, double apex) {
    return {p - p * p / (4.0 * apex), 1.0 - p / (2.0 * apex), -1.0 / (2.0 * apex)};
}

}  // namespace

double ConvexProblem::f_phi(size_t i, double m, double p_b) const {
    return f_phi_derivs(i, m, p_b).value;
}

std::pair<double, double> ConvexProblem::f_phi_partials(size_t i, double m,
                                                        double p_b) const {
    FphiDerivs d = f_phi_derivs(i, m, p_b);
    return {d.d_m, d.d_p};
}

FphiDerivs ConvexProblem::f_phi_derivs(size_t i, double m, double p_b) const {
    const ScheduleStep& s = steps_[i];
    const double apex = params_.battery_power_apex();
    const int n = params_.n_systems;
    if (constant_mass_) m = m0_;

    // Per-system drive power and its mass derivatives.
    const double u = s.eta.eval(m) / n;
    const double u1 = constant_mass_ ? 0.0 : s.eta.slope(m) / n;
    const double u2 = constant_mass_ ? 0.0 : 2.0 * s.eta.eta2 / n;

    const BatteryInverse q = battery_inverse(p_b, apex);

    FphiDerivs out;
    if (topology_ == Topology::Parallel) {
        const double w = s.kappa.invert(q.value);
        const double hw = s.kappa.slope(w);
        if (hw <= 0.0)
            throw MapDomainError("f_phi: motor inverse left monotone branch");
        const double w1 = q.d1 / hw;
        const double w2 = q.d2 / hw - 2.0 * s.kappa.c2 * q.d1 * q.d1 / (hw * hw * hw);
        const double x = u - w;
        const double fx = s.beta.eval(x);
        const double f1 = s.beta.slope(x);
        if (f1 <= 0.0)
            throw MapDomainError("f_phi: fuel map left monotone branch");
        const double f2 = 2.0 * s.beta.c2;
        out.value = fx;
        out.d_m = f1 * u1;
        out.d_p = -f1 * w1;
        out.d_mm = f2 * u1 * u1 + f1 * u2;
        out.d_pp = f2 * w1 * w1 - f1 * w2;
        out.d_mp = -f2 * u1 * w1;
    } else {
        const double t = s.kappa.eval(u);
        const double ht = s.kappa.slope(u);
        if (ht <= 0.0)
            throw MapDomainError("f_phi: fan motor map left monotone branch");
        const double t1 = ht * u1;
        const double t2 = 2.0 * s.kappa.c2 * u1 * u1 + ht * u2;
        const double arg = t - q.value;
        const double y = s.nu.eval(arg);
        const double hg1 = s.nu.slope(arg);
        if (hg1 <= 0.0)
            throw MapDomainError("f_phi: generator map left monotone branch");
        const double hg2 = 2.0 * s.nu.c2;
        const double fy = s.beta.eval(y);
        const double f1 = s.beta.slope(y);
        if (f1 <= 0.0)
            throw MapDomainError("f_phi: fuel map left monotone branch");
        const double f2 = 2.0 * s.beta.c2;
        out.value = fy;
        out.d_m = f1 * hg1 * t1;
        out.d_p = -f1 * hg1 * q.d1;
        out.d_mm = f2 * hg1 * hg1 * t1 * t1 + f1 * (hg2 * t1 * t1 + hg1 * t2);
        out.d_pp = f2 * hg1 * hg1 * q.d1 * q.d1 +
                   f1 * (hg2 * q.d1 * q.d1 - hg1 * q.d2);
        out.d_mp = -(f2 * hg1 * hg1 + f1 * hg2) * t1 * q.d1;
    }
    return out;
}

std::pair<double, double> ConvexProblem::f_phi_mass_domain(size_t i,
                                                           double p_b) const {
    const ScheduleStep& s = steps_[i];
    const double apex = params_.battery_power_apex();
    const int n = params_.n_systems;
    const double inf = std::numeric_limits<double>::infinity();
    if (constant_mass_) return {-inf, inf};

    // Required minimum for the per-system drive power u(m); targets below a
    // map's minimum value impose no constraint through that map.
    double u_min = -inf;
    const double q = battery_inverse(p_b, apex).value;
    if (topology_ == Topology::Parallel) {
        if (std::isfinite(s.beta.vertex()) && q > s.kappa.min_value())
            u_min = s.beta.vertex() + s.kappa.invert(q);
    } else {
        u_min = std::max(u_min, s.kappa.vertex());
        double arg_min = s.nu.vertex();
        if (std::isfinite(s.beta.vertex()) && s.beta.vertex() > s.nu.min_value())
            arg_min = std::max(arg_min, s.nu.invert(s.beta.vertex()));
        if (std::isfinite(arg_min) && arg_min + q > s.kappa.min_value())
            u_min = std::max(u_min, s.kappa.invert(arg_min + q));
    }
    if (!std::isfinite(u_min)) return {-inf, inf};

    // Solve eta(m) >= n * u_min; the quadratic can admit two branches, so
    // keep the component containing the operating mass.
    const double a = s.eta.eta2, b = s.eta.eta1;
    const double c = s.eta.eta0 - u_min * n;
    if (a == 0.0) {
        if (b > 0.0) return {-c / b, inf};
        if (b < 0.0) return {-inf, -c / b};
        if (c >= 0.0) return {-inf, inf};
        throw MapDomainError("f_phi_mass_domain: drive power below requirement");
    }
    const double disc = b * b - 4.0 * a * c;
    if (a > 0.0) {
        if (disc <= 0.0) return {-inf, inf};
        const double half = std::sqrt(disc) / (2.0 * a);
        const double vtx = -b / (2.0 * a);
        if (m0_ <= vtx) return {-inf, vtx - half};
        return {vtx + half, inf};
    }
    if (disc < 0.0)
        throw MapDomainError("f_phi_mass_domain: drive power below requirement");
    const double half = std::sqrt(disc) / (2.0 * a);  // negative
    return {-b / (2.0 * a) + half, -b / (2.0 * a) - half};
}

double ConvexProblem::f_phi_mass_floor(size_t i, double p_b) const {
    return f_phi_mass_domain(i, p_b).first;
}

ConvexProblem assemble(const CoefficientSchedule& schedule, double m0, double E0,
                       const PowertrainParams& params, size_t N, size_t offset,
                       bool constant_mass) {
    if (N < 1) throw std::invalid_argument("assemble: horizon must be >= 1");
    if (offset + N > schedule.size())
        throw std::invalid_argument("assemble: horizon exceeds schedule length");
    if (E0 < params.soc_min - 1e-9 || E0 > params.soc_max + 1e-9)
        throw std::invalid_argument("assemble: initial SOC outside bounds");

    ConvexProblem p;
    p.steps_.assign(schedule.steps.begin() + offset,
                    schedule.steps.begin() + offset + N);
    p.params_ = params;
    p.delta_ = schedule.delta;
    p.m0_ = m0;
    p.E0_ = E0;
    p.soc_min_ = params.soc_min;
    p.soc_max_ = params.soc_max;
    p.topology_ = schedule.topology;
    p.constant_mass_ = constant_mass;

    double worst_burn = 0.0;
    for (const auto& s : p.steps_) worst_burn += s.phi_hi * p.delta_;
    if (m0 - worst_burn <= 0.0)
        throw std::invalid_argument("assemble: mass can reach zero at max burn");
    return p;
}

std::optional<Solution> trivial_solution(const ConvexProblem& problem) {
    const size_t N = problem.horizon();
    const double delta = problem.delta();
    // SOC must stay inside its box under full battery power at every step.
    double E = problem.E0();
    for (size_t i = 0; i < N; ++i) {
        E -= problem.step(i).pb_hi * delta;
        if (E < problem.soc_min() - 1e-12 || E > problem.soc_max() + 1e-12)
            return std::nullopt;
    }

    Solution sol;
    sol.phi.resize(N);
    sol.p_b.resize(N);
    sol.m.resize(N);
    sol.E.resize(N);
    double m = problem.m0();
    E = problem.E0();
    for (size_t i = 0; i < N; ++i) {
        const double pb = problem.step(i).pb_hi;
        double phi;
        try {
            phi = problem.f_phi(i, m, pb);
        } catch (const MapDomainError&) {
            return std::nullopt;
        }
        // phi rides the epigraph: a fuel rate below the box floor leaves
        // slack (phi pinned at the floor), above the ceiling is infeasible
        if (phi > problem.step(i).phi_hi + 1e-12) return std::nullopt;
        phi = std::max(phi, problem.step(i).phi_lo);
        sol.m[i] = m;
        sol.E[i] = E;
        sol.phi[i] = phi;
        sol.p_b[i] = pb;
        m -= phi * delta;
        E -= pb * delta;
        sol.objective += phi * delta;
    }
    sol.stats.fast_path = true;
    sol.stats.iterations = 0;
    return sol;
}

}  // namespace hea
