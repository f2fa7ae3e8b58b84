#include "hea/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hea {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BfBest {
    double obj = kInf;
    std::vector<double> phi, p_b;
};

// Depth-first enumeration from step i with current (m, E). Strict-improvement
// updates keep the lexicographically first optimum, so results do not depend
// on traversal interleaving.
void bf_dfs(const ConvexProblem& prob, const std::vector<std::vector<double>>& grids,
            size_t i, double m, double E, double obj, std::vector<double>& phi,
            std::vector<double>& p_b, BfBest& best) {
    const size_t N = prob.horizon();
    if (i == N) {
        if (obj < best.obj) {
            best.obj = obj;
            best.phi = phi;
            best.p_b = p_b;
        }
        return;
    }
    if (obj >= best.obj) return;
    const double delta = prob.delta();
    const ScheduleStep& s = prob.step(i);
    for (double p : grids[i]) {
        const double E_next = E - p * delta;
        if (i + 1 <= N - 1 &&
            (E_next < prob.soc_min() - 1e-12 || E_next > prob.soc_max() + 1e-12))
            continue;
        double f;
        try {
            f = prob.f_phi(i, m, p);
        } catch (const MapDomainError&) {
            continue;
        }
        // equality dynamics: the relaxation is tight at the optimum, so the
        // oracle sets phi = f_phi and discards box violations outright
        if (f > s.phi_hi + 1e-12 || f < s.phi_lo - 1e-12) continue;
        phi[i] = f;
        p_b[i] = p;
        bf_dfs(prob, grids, i + 1, m - f * delta, E_next, obj + f * delta, phi,
               p_b, best);
    }
}

}  // namespace

Solution brute_force_solve(const ConvexProblem& problem, int grid, bool parallel) {
    const size_t N = problem.horizon();
    if (grid < 1) throw std::invalid_argument("brute_force_solve: grid < 1");
    if (std::pow(static_cast<double>(grid), static_cast<double>(N)) > 1e7)
        throw std::invalid_argument("brute_force_solve: leaf budget exceeded");

    std::vector<std::vector<double>> grids(N);
    for (size_t i = 0; i < N; ++i) {
        const double lo = problem.step(i).pb_lo, hi = problem.step(i).pb_hi;
        if (grid == 1 || hi - lo <= 1e-12) {
            grids[i] = {lo};
            continue;
        }
        grids[i].resize(grid);
        for (int k = 0; k < grid; ++k)
            grids[i][k] = lo + (hi - lo) * k / (grid - 1);
    }

    const long first = static_cast<long>(grids[0].size());
    std::vector<BfBest> branch(first);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long k = 0; k < first; ++k) {
        std::vector<double> phi(N), p_b(N);
        const double p = grids[0][k];
        const double E_next = problem.E0() - p * problem.delta();
        if (N > 1 && (E_next < problem.soc_min() - 1e-12 ||
                      E_next > problem.soc_max() + 1e-12))
            continue;
        double f;
        try {
            f = problem.f_phi(0, problem.m0(), p);
        } catch (const MapDomainError&) {
            continue;
        }
        if (f > problem.step(0).phi_hi + 1e-12 ||
            f < problem.step(0).phi_lo - 1e-12)
            continue;
        phi[0] = f;
        p_b[0] = p;
        bf_dfs(problem, grids, 1, problem.m0() - f * problem.delta(), E_next,
               f * problem.delta(), phi, p_b, branch[k]);
    }

    const BfBest* best = nullptr;
    for (const BfBest& b : branch)
        if (b.obj < (best ? best->obj : kInf)) best = &b;
    if (!best) throw std::runtime_error("brute_force_solve: no feasible point");

    Solution sol;
    sol.phi = best->phi;
    sol.p_b = best->p_b;
    sol.m.resize(N);
    sol.E.resize(N);
    double m = problem.m0(), E = problem.E0();
    for (size_t i = 0; i < N; ++i) {
        sol.m[i] = m;
        sol.E[i] = E;
        m -= sol.phi[i] * problem.delta();
        E -= sol.p_b[i] * problem.delta();
    }
    sol.objective = best->obj;
    return sol;
}

namespace {

struct BarrierWork {
    const ConvexProblem* prob = nullptr;
    size_t N = 0;
    double delta = 0.0;
    std::vector<int> pvar;        // p variable index (or -1 when pinned)
    std::vector<double> p_fixed;  // value used when pinned
    size_t nv = 0;                // N + number of free p variables
    long m_c = 0;                 // number of log terms

    bool pinned(size_t i) const { return pvar[i] < 0; }
};

struct BarrierPoint {
    std::vector<double> phi, p, m, E;
    // per-step f_phi data at (m_i, p_i)
    std::vector<FphiDerivs> f;
    std::vector<double> c_epi;
    bool feasible = false;
    double value = kInf;  // t * objective - sum log
};

BarrierPoint evaluate(const BarrierWork& w, const Eigen::VectorXd& y, double t) {
    const ConvexProblem& prob = *w.prob;
    const size_t N = w.N;
    BarrierPoint pt;
    pt.phi.resize(N);
    pt.p.resize(N);
    pt.m.resize(N);
    pt.E.resize(N);
    pt.f.resize(N);
    pt.c_epi.resize(N);

    for (size_t i = 0; i < N; ++i) {
        pt.phi[i] = y[static_cast<long>(i)];
        pt.p[i] = w.pinned(i) ? w.p_fixed[i] : y[w.pvar[i]];
    }
    double m = prob.m0(), E = prob.E0(), obj = 0.0, logsum = 0.0;
    for (size_t i = 0; i < N; ++i) {
        pt.m[i] = m;
        pt.E[i] = E;
        if (i >= 1) {
            const double c1 = E - prob.soc_min(), c2 = prob.soc_max() - E;
            if (c1 <= 0.0 || c2 <= 0.0) return pt;
            logsum += std::log(c1) + std::log(c2);
        }
        const ScheduleStep& s = prob.step(i);
        const double b1 = pt.phi[i] - s.phi_lo, b2 = s.phi_hi - pt.phi[i];
        if (b1 <= 0.0 || b2 <= 0.0) return pt;
        logsum += std::log(b1) + std::log(b2);
        if (!w.pinned(i)) {
            const double p1 = pt.p[i] - s.pb_lo, p2 = s.pb_hi - pt.p[i];
            if (p1 <= 0.0 || p2 <= 0.0) return pt;
            logsum += std::log(p1) + std::log(p2);
        }
        try {
            pt.f[i] = prob.f_phi_derivs(i, m, pt.p[i]);
        } catch (const MapDomainError&) {
            return pt;
        }
        pt.c_epi[i] = pt.phi[i] - pt.f[i].value;
        if (pt.c_epi[i] <= 0.0) return pt;
        logsum += std::log(pt.c_epi[i]);
        obj += pt.phi[i] * w.delta;
        m -= pt.phi[i] * w.delta;
        E -= pt.p[i] * w.delta;
    }
    pt.feasible = true;
    pt.value = t * obj - logsum;
    return pt;
}

void assemble(const BarrierWork& w, const BarrierPoint& pt, double t,
              Eigen::VectorXd& g, Eigen::MatrixXd& H) {
    const ConvexProblem& prob = *w.prob;
    const size_t N = w.N;
    const double delta = w.delta;
    g.setZero(static_cast<long>(w.nv));
    H.setZero(static_cast<long>(w.nv), static_cast<long>(w.nv));

    // Objective.
    for (size_t i = 0; i < N; ++i) g[static_cast<long>(i)] += t * delta;

    // phi / p box barriers.
    for (size_t i = 0; i < N; ++i) {
        const ScheduleStep& s = prob.step(i);
        const long vi = static_cast<long>(i);
        const double b1 = pt.phi[i] - s.phi_lo, b2 = s.phi_hi - pt.phi[i];
        g[vi] += -1.0 / b1 + 1.0 / b2;
        H(vi, vi) += 1.0 / (b1 * b1) + 1.0 / (b2 * b2);
        if (!w.pinned(i)) {
            const long vp = w.pvar[i];
            const double p1 = pt.p[i] - s.pb_lo, p2 = s.pb_hi - pt.p[i];
            g[vp] += -1.0 / p1 + 1.0 / p2;
            H(vp, vp) += 1.0 / (p1 * p1) + 1.0 / (p2 * p2);
        }
    }

    // SOC barriers: E_i depends on p_l for l < i with dE/dp = -delta.
    // Suffix accumulation keeps this O(N^2).
    {
        std::vector<double> gs(N + 1, 0.0), hs(N + 1, 0.0);
        for (size_t j = N; j-- > 1;) {
            const double c1 = pt.E[j] - prob.soc_min(), c2 = prob.soc_max() - pt.E[j];
            gs[j] = gs[j + 1] + delta * (1.0 / c1 - 1.0 / c2);
            hs[j] = hs[j + 1] + delta * delta * (1.0 / (c1 * c1) + 1.0 / (c2 * c2));
        }
        gs[0] = gs[1];
        hs[0] = hs[1];
        for (size_t l = 0; l < N; ++l) {
            if (w.pinned(l)) continue;
            const long vl = w.pvar[l];
            g[vl] += gs[l + 1];
            for (size_t ll = l; ll < N; ++ll) {
                if (w.pinned(ll)) continue;
                const long vll = w.pvar[ll];
                const double v = hs[ll + 1];
                H(vl, vll) += v;
                if (vll != vl) H(vll, vl) += v;
            }
        }
    }

    // Epigraph barriers: c_i = phi_i - f_phi(m_i(phi), p_i).
    // grad c_i: +1 on phi_i, +delta*d_m on phi_l (l<i), -d_p on p_i.
    // Hessian contribution: s^2 grad c grad c^T + s * Hess f.
    {
        std::vector<double> gsuf(N + 1, 0.0);  // sum_j>=k  s_j delta d_m,j
        std::vector<double> asuf(N + 1, 0.0);  // pair coefficient suffix
        for (size_t j = N; j-- > 0;) {
            const double s = 1.0 / pt.c_epi[j];
            const double dm = pt.f[j].d_m;
            gsuf[j] = gsuf[j + 1] + s * delta * dm;
            asuf[j] = asuf[j + 1] + s * s * delta * delta * dm * dm +
                      s * delta * delta * pt.f[j].d_mm;
        }
        for (size_t l = 0; l < N; ++l) {
            const long vl = static_cast<long>(l);
            g[vl] -= gsuf[l + 1];  // from -s * (delta d_m) over j > l
            for (size_t ll = l; ll < N; ++ll) {
                const double v = asuf[std::max(l, ll) + 1];
                if (v == 0.0) break;  // suffix is nonincreasing in magnitude? keep safe
                H(vl, static_cast<long>(ll)) += v;
                if (ll != l) H(static_cast<long>(ll), vl) += v;
            }
        }
        for (size_t j = 0; j < N; ++j) {
            const double s = 1.0 / pt.c_epi[j];
            const long vj = static_cast<long>(j);
            g[vj] -= s;  // -s * dc/dphi_j
            H(vj, vj) += s * s;
            const double cphi = s * s * delta * pt.f[j].d_m;  // (phi_l, phi_j) pairs
            for (size_t l = 0; l < j; ++l) {
                H(static_cast<long>(l), vj) += cphi;
                H(vj, static_cast<long>(l)) += cphi;
            }
            if (!w.pinned(j)) {
                const long vp = w.pvar[j];
                g[vp] += s * pt.f[j].d_p;  // -s * (-d_p)
                H(vp, vp) += s * s * pt.f[j].d_p * pt.f[j].d_p + s * pt.f[j].d_pp;
                const double cxp = -s * s * pt.f[j].d_p;  // (phi_j, p_j)
                H(vj, vp) += cxp;
                H(vp, vj) += cxp;
                const double cmp = -s * s * delta * pt.f[j].d_m * pt.f[j].d_p -
                                   s * delta * pt.f[j].d_mp;  // (phi_l, p_j), l<j
                for (size_t l = 0; l < j; ++l) {
                    H(static_cast<long>(l), vp) += cmp;
                    H(vp, static_cast<long>(l)) += cmp;
                }
            }
        }
    }
}

Eigen::VectorXd feasible_start(const BarrierWork& w) {
    const ConvexProblem& prob = *w.prob;
    const size_t N = w.N;
    const double delta = w.delta;
    Eigen::VectorXd y(static_cast<long>(w.nv));

    const double soc_span = prob.soc_max() - prob.soc_min();
    const double pad_e = std::max(1e-9, 1e-6 * soc_span);
    const double center = 0.5 * (prob.soc_min() + prob.soc_max());

    std::vector<double> p(N);
    double E = prob.E0();
    double m = prob.m0();
    for (size_t i = 0; i < N; ++i) {
        const ScheduleStep& s = prob.step(i);
        const double span = s.phi_hi - s.phi_lo;
        const double pad = std::max(1e-12, 1e-3 * span);
        auto fuel = [&](double pp) {
            try {
                return prob.f_phi(i, m, pp);
            } catch (const MapDomainError&) {
                throw std::runtime_error(
                    "barrier_solve: start outside f_phi domain at step " +
                    std::to_string(i));
            }
        };
        if (w.pinned(i)) {
            p[i] = w.p_fixed[i];
        } else {
            const double pad_p = 1e-3 * (s.pb_hi - s.pb_lo);
            double lo = s.pb_lo + pad_p, hi = s.pb_hi - pad_p;
            if (i + 1 <= N - 1) {
                // keep E_{i+1} = E - p delta strictly inside the SOC box
                lo = std::max(lo, (E - (prob.soc_max() - pad_e)) / delta);
                hi = std::min(hi, (E - (prob.soc_min() + pad_e)) / delta);
            }
            if (lo > hi)
                throw std::runtime_error(
                    "barrier_solve: no strictly feasible battery power at step " +
                    std::to_string(i));
            p[i] = std::clamp((E - center) / delta, lo, hi);
            // f_phi decreases in p; push p up until the fuel epigraph has
            // strict interior room under the box ceiling
            const double need = s.phi_hi - 2.0 * pad;
            if (fuel(p[i]) >= need) {
                if (fuel(hi) >= need) {
                    p[i] = hi;
                } else {
                    double a = p[i], b = hi;  // fuel(a) >= need > fuel(b)
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (a + b);
                        (fuel(mid) >= need ? a : b) = mid;
                    }
                    p[i] = b;
                }
            }
        }
        E -= p[i] * delta;
        if (i + 1 <= N - 1 &&
            (E <= prob.soc_min() || E >= prob.soc_max()))
            throw std::runtime_error(
                "barrier_solve: pinned battery power leaves the SOC box");
        if (!w.pinned(i)) y[w.pvar[i]] = p[i];

        const double f = fuel(p[i]);
        const double phi = std::clamp(f + std::max(1e-7, 1e-4 * std::abs(f)),
                                      s.phi_lo + pad, s.phi_hi - pad);
        if (phi <= f)
            throw std::runtime_error(
                "barrier_solve: no strictly feasible fuel rate at step " +
                std::to_string(i));
        y[static_cast<long>(i)] = phi;
        m -= phi * delta;
    }
    return y;
}

}  // namespace

Solution barrier_solve(const ConvexProblem& problem, double gap_tol) {
    const auto t_start = std::chrono::steady_clock::now();
    const size_t N = problem.horizon();

    BarrierWork w;
    w.prob = &problem;
    w.N = N;
    w.delta = problem.delta();
    w.pvar.assign(N, -1);
    w.p_fixed.assign(N, 0.0);
    size_t nfree = 0;
    for (size_t i = 0; i < N; ++i) {
        const ScheduleStep& s = problem.step(i);
        if (s.pb_hi - s.pb_lo <= 1e-12) {
            w.p_fixed[i] = s.pb_lo;
        } else {
            w.pvar[i] = static_cast<int>(N + nfree);
            ++nfree;
        }
        if (s.phi_hi - s.phi_lo <= 1e-12)
            throw std::runtime_error("barrier_solve: degenerate fuel-rate box");
    }
    w.nv = N + nfree;
    w.m_c = static_cast<long>(3 * N + 2 * nfree + 2 * (N - 1));

    Eigen::VectorXd y = feasible_start(w);
    double t = 1.0;
    long newton_total = 0;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;

    BarrierPoint pt = evaluate(w, y, t);
    if (!pt.feasible)
        throw std::runtime_error("barrier_solve: constructed start infeasible");

    while (true) {
        // Centering at this t.
        for (int it = 0; it < 200; ++it) {
            assemble(w, pt, t, g, H);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            Eigen::VectorXd dy = ldlt.solve(-g);
            const double decrement = -g.dot(dy);
            ++newton_total;
            if (decrement <= 2e-10) break;
            double alpha = 1.0;
            const double slope = g.dot(dy);
            BarrierPoint cand;
            for (int ls = 0; ls < 60; ++ls) {
                cand = evaluate(w, y + alpha * dy, t);
                if (cand.feasible && cand.value <= pt.value + 0.3 * alpha * slope)
                    break;
                alpha *= 0.5;
            }
            if (!cand.feasible) break;
            y += alpha * dy;
            pt = cand;
        }
        if (static_cast<double>(w.m_c) / t <= gap_tol) break;
        t *= 10.0;
        pt = evaluate(w, y, t);
    }

    Solution sol;
    sol.phi = pt.phi;
    sol.p_b = pt.p;
    sol.m = pt.m;
    sol.E = pt.E;
    sol.objective = 0.0;
    for (size_t i = 0; i < N; ++i) sol.objective += pt.phi[i] * w.delta;
    sol.stats.iterations = newton_total;
    sol.stats.primal_residual = static_cast<double>(w.m_c) / t;
    sol.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return sol;
}

}  // namespace hea
