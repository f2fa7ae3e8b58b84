#include "hea/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "hea/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hea {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp(double x, double lo, double hi) {
    return std::max(lo, std::min(x, hi));
}

/// (Psi v)_i = delta * sum_{l<i} v_l
void prefix_scaled(const std::vector<double>& v, double delta,
                   std::vector<double>& out) {
    double acc = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = delta * acc;
        acc += v[i];
    }
}

/// (Psi^T v)_k = delta * sum_{i>k} v_i
void suffix_scaled(const std::vector<double>& v, double delta,
                   std::vector<double>& out) {
    double acc = 0.0;
    for (size_t k = v.size(); k-- > 0;) {
        out[k] = delta * acc;
        acc += v[k];
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void compute_f_phi_batch(const ConvexProblem& prob, const std::vector<double>& m,
                         const std::vector<double>& p_b, std::vector<double>& val,
                         std::vector<double>& dm, std::vector<double>& dp,
                         bool parallel) {
    const long n = static_cast<long>(m.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (long i = 0; i < n; ++i) {
        FphiDerivs d = prob.f_phi_derivs(static_cast<size_t>(i), m[i], p_b[i]);
        val[i] = d.value;
        dm[i] = d.d_m;
        dp[i] = d.d_p;
    }
}

// Scalar sub-minimizations: safeguarded Newton on the derivative with a
// bisection fallback, to 1e-10 relative stationarity.
constexpr int kInnerIters = 20;
constexpr double kInnerTol = 1e-10;

}  // namespace

void StepMatrixSolver::factor(double a, double b, size_t n) {
    a_ = a;
    b_ = b;
    n_ = n;
    diag_.assign(n, 0.0);
    lower_.assign(n, 0.0);
    if (n == 0) return;
    if (n == 1) {
        diag_[0] = a;
        return;
    }
    // Tridiagonal reduction of (aI + b W), W_kl = N-1-max(k,l):
    //   row 0:       (a+b) x0 - a x1            = r0 - r1
    //   row k:       -a x_{k-1} + (2a+b) x_k - a x_{k+1} = 2 r_k - r_{k-1} - r_{k+1}
    //   row n-1:     a x_{n-1}                  = r_{n-1}
    auto diag_of = [&](size_t k) {
        if (k == 0) return a + b;
        if (k == n - 1) return a;
        return 2.0 * a + b;
    };
    auto lower_of = [&](size_t k) { return k == n - 1 ? 0.0 : -a; };
    diag_[0] = diag_of(0);
    for (size_t k = 1; k < n; ++k) {
        const double w = lower_of(k) / diag_[k - 1];
        lower_[k] = w;
        diag_[k] = diag_of(k) - w * (-a);  // upper coefficient is -a everywhere
    }
}

bool StepMatrixSolver::matches(double a, double b, size_t n) const {
    return n_ == n && a_ == a && b_ == b && !diag_.empty();
}

void StepMatrixSolver::solve(const std::vector<double>& rhs,
                             std::vector<double>& x) const {
    const size_t n = n_;
    x.resize(n);
    if (n == 0) return;
    if (n == 1) {
        x[0] = rhs[0] / diag_[0];
        return;
    }
    // Differenced right-hand side.
    std::vector<double> rho(n);
    rho[0] = rhs[0] - rhs[1];
    for (size_t k = 1; k + 1 < n; ++k) rho[k] = 2.0 * rhs[k] - rhs[k - 1] - rhs[k + 1];
    rho[n - 1] = rhs[n - 1];
    // Forward sweep, then back substitution.
    for (size_t k = 1; k < n; ++k) rho[k] -= lower_[k] * rho[k - 1];
    x[n - 1] = rho[n - 1] / diag_[n - 1];
    for (size_t k = n - 1; k-- > 0;) x[k] = (rho[k] + a_ * x[k + 1]) / diag_[k];
}

AdmmState init_state(const ConvexProblem& problem) {
    const size_t n = problem.horizon();
    const double delta = problem.delta();
    AdmmState st;
    auto sized = [n]() { return std::vector<double>(n, 0.0); };
    st.chi = sized(); st.xi = sized(); st.zeta = sized(); st.E = sized();
    st.phi = sized(); st.m = sized(); st.p_b = sized();
    st.lam1 = sized(); st.lam2 = sized(); st.lam3 = sized();
    st.lam4 = sized(); st.lam5 = sized();
    st.f_phi_val = sized(); st.f_phi_dm = sized(); st.f_phi_dp = sized();

    for (size_t i = 0; i < n; ++i) {
        st.p_b[i] = problem.step(i).pb_hi;
        st.xi[i] = problem.step(i).phi_lo;
    }
    st.zeta = st.p_b;
    st.phi = st.xi;

    std::vector<double> tmp(n);
    prefix_scaled(st.zeta, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        st.E[i] = clamp(problem.E0() - tmp[i], problem.soc_min(), problem.soc_max());
    prefix_scaled(st.xi, delta, tmp);
    for (size_t i = 0; i < n; ++i) st.m[i] = problem.m0() - tmp[i];

    compute_f_phi_batch(problem, st.m, st.p_b, st.f_phi_val, st.f_phi_dm,
                        st.f_phi_dp, false);
    for (size_t i = 0; i < n; ++i)
        st.chi[i] = std::max(st.xi[i] - st.f_phi_val[i], 0.0);

    st.sigma = {50.0, 3.69e-7, 6.96e-7, 20.29, 0.83};

    st.chi_prev = st.chi; st.xi_prev = st.xi; st.zeta_prev = st.zeta;
    st.E_prev = st.E; st.phi_prev = st.phi;
    return st;
}

void step(AdmmState& st, const ConvexProblem& problem, const SolverOptions& opts) {
    const size_t n = problem.horizon();
    const double delta = problem.delta();
    const double s1 = st.sigma[0], s2 = st.sigma[1], s3 = st.sigma[2],
                 s4 = st.sigma[3], s5 = st.sigma[4];

    st.chi_prev = st.chi; st.xi_prev = st.xi; st.zeta_prev = st.zeta;
    st.E_prev = st.E; st.phi_prev = st.phi;

    // chi update: projection of xi^j - f_phi^j - lam1 onto [0, inf).
    for (size_t i = 0; i < n; ++i)
        st.chi[i] = std::max(st.xi[i] - st.f_phi_val[i] - st.lam1[i], 0.0);

    // xi update: ((s1+s4) I + s2 Psi^T Psi) xi = rhs.
    std::vector<double> tmp(n), rhs(n);
    for (size_t i = 0; i < n; ++i) tmp[i] = st.m[i] - problem.m0() + st.lam2[i];
    suffix_scaled(tmp, delta, rhs);  // Psi^T (m - m0 Phi + lam2), reused below
    for (size_t i = 0; i < n; ++i)
        rhs[i] = -delta + s1 * (st.chi[i] + st.f_phi_val[i] + st.lam1[i]) -
                 s2 * rhs[i] + s4 * (st.phi[i] - st.lam4[i]);
    if (!opts.use_factor_cache || !st.xi_solver.matches(s1 + s4, s2 * delta * delta, n))
        st.xi_solver.factor(s1 + s4, s2 * delta * delta, n);
    st.xi_solver.solve(rhs, st.xi);

    // zeta update: (s5 I + s3 Psi^T Psi) zeta = rhs.
    for (size_t i = 0; i < n; ++i) tmp[i] = st.E[i] - problem.E0() + st.lam3[i];
    suffix_scaled(tmp, delta, rhs);
    for (size_t i = 0; i < n; ++i)
        rhs[i] = -s3 * rhs[i] + s5 * (st.p_b[i] - st.lam5[i]);
    if (!opts.use_factor_cache || !st.zeta_solver.matches(s5, s3 * delta * delta, n))
        st.zeta_solver.factor(s5, s3 * delta * delta, n);
    st.zeta_solver.solve(rhs, st.zeta);

    // E update: projection of E0 Phi - Psi zeta - lam3 onto the SOC box.
    prefix_scaled(st.zeta, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        st.E[i] = clamp(problem.E0() - tmp[i] - st.lam3[i], problem.soc_min(),
                        problem.soc_max());

    // P_b update: per-step scalar minimisation, projected onto its box.
    {
        const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (long li = 0; li < nn; ++li) {
            const size_t i = static_cast<size_t>(li);
            const double lo = problem.step(i).pb_lo, hi = problem.step(i).pb_hi;
            if (hi - lo <= 0.0) { st.p_b[i] = lo; continue; }
            const double A = st.chi[i] - st.xi[i] + st.lam1[i];
            const double anchor = st.zeta[i] + st.lam5[i];
            const double m_old = st.m[i];
            auto grad = [&](double p, double* curv) {
                FphiDerivs d = problem.f_phi_derivs(i, m_old, p);
                const double q = A + d.value;
                if (curv) *curv = s1 * (d.d_p * d.d_p + q * d.d_pp) + s5;
                return s1 * q * d.d_p - s5 * (anchor - p);
            };
            double glo = grad(lo, nullptr);
            if (glo >= 0.0) { st.p_b[i] = lo; continue; }
            double ghi = grad(hi, nullptr);
            if (ghi <= 0.0) { st.p_b[i] = hi; continue; }
            double a = lo, b = hi;
            double x = clamp(st.p_b[i], lo, hi);
            for (int it = 0; it < kInnerIters; ++it) {
                double curv;
                const double g = grad(x, &curv);
                if (g < 0.0) a = x; else b = x;
                double xn = (curv > 0.0) ? x - g / curv : 0.5 * (a + b);
                if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
                if (std::abs(xn - x) <= kInnerTol * std::max(1.0, std::abs(x))) {
                    x = xn;
                    break;
                }
                x = xn;
            }
            st.p_b[i] = x;
        }
    }

    // phi update: projection of xi + lam4 onto the fuel-rate box.
    for (size_t i = 0; i < n; ++i)
        st.phi[i] = clamp(st.xi[i] + st.lam4[i], problem.step(i).phi_lo,
                          problem.step(i).phi_hi);

    // m update: per-step scalar minimisation (no projection).
    {
        prefix_scaled(st.xi, delta, tmp);  // Psi xi^{j+1}
        const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (long li = 0; li < nn; ++li) {
            const size_t i = static_cast<size_t>(li);
            const double A = st.chi[i] - st.xi[i] + st.lam1[i];
            const double target = problem.m0() - tmp[i] - st.lam2[i];
            const double pb = st.p_b[i];
            auto grad = [&](double m, double* curv) {
                FphiDerivs d = problem.f_phi_derivs(i, m, pb);
                const double q = A + d.value;
                if (curv) *curv = s1 * (d.d_m * d.d_m + q * d.d_mm) + s2;
                return s1 * q * d.d_m + s2 * (m - target);
            };
            const auto [floor, ceil] = problem.f_phi_mass_domain(i, pb);
            double a, b;
            if (std::isfinite(floor)) {
                a = floor + 1e-9 * (1.0 + std::abs(floor));
                if (grad(a, nullptr) >= 0.0) { st.m[i] = a; continue; }
            } else {
                a = std::min(st.m[i], target) - 1.0;
                double span = 1.0;
                while (grad(a, nullptr) > 0.0 && span < 1e12) {
                    span *= 4.0;
                    a -= span;
                }
            }
            if (std::isfinite(ceil)) {
                b = ceil - 1e-9 * (1.0 + std::abs(ceil));
                if (grad(b, nullptr) <= 0.0) { st.m[i] = b; continue; }
            } else {
                b = std::max(st.m[i], target) + 1.0;
                double span = 1.0;
                while (grad(b, nullptr) < 0.0 && span < 1e12) {
                    span *= 4.0;
                    b += span;
                }
            }
            double x = clamp(st.m[i], a, b);
            for (int it = 0; it < kInnerIters; ++it) {
                double curv;
                const double g = grad(x, &curv);
                if (g < 0.0) a = x; else b = x;
                double xn = (curv > 0.0) ? x - g / curv : 0.5 * (a + b);
                if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
                if (std::abs(xn - x) <= kInnerTol * std::max(1.0, std::abs(x))) {
                    x = xn;
                    break;
                }
                x = xn;
            }
            st.m[i] = x;
        }
    }

    // f_phi at the new (m, P_b); feeds the multiplier ascent, the residuals
    // and the next iteration's chi/xi updates.
    compute_f_phi_batch(problem, st.m, st.p_b, st.f_phi_val, st.f_phi_dm,
                        st.f_phi_dp, opts.parallel);

    // Multiplier ascent.
    for (size_t i = 0; i < n; ++i)
        st.lam1[i] += st.chi[i] - st.xi[i] + st.f_phi_val[i];
    prefix_scaled(st.xi, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        st.lam2[i] += st.m[i] - problem.m0() + tmp[i];
    prefix_scaled(st.zeta, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        st.lam3[i] += st.E[i] - problem.E0() + tmp[i];
    for (size_t i = 0; i < n; ++i) st.lam4[i] += st.xi[i] - st.phi[i];
    for (size_t i = 0; i < n; ++i) st.lam5[i] += st.zeta[i] - st.p_b[i];

    ++st.iter;
}

Residuals residuals(const AdmmState& st, const ConvexProblem& problem) {
    const size_t n = problem.horizon();
    const double delta = problem.delta();
    Residuals out;
    out.r.resize(5 * n);
    out.s.resize(2 * n);

    std::vector<double> tmp(n);
    // r1 = f_phi + chi - xi
    for (size_t i = 0; i < n; ++i)
        out.r[i] = st.f_phi_val[i] + st.chi[i] - st.xi[i];
    // r2 = m + Psi xi - m0 Phi
    prefix_scaled(st.xi, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        out.r[n + i] = st.m[i] + tmp[i] - problem.m0();
    // r3 = zeta - p_b
    for (size_t i = 0; i < n; ++i) out.r[2 * n + i] = st.zeta[i] - st.p_b[i];
    // r4 = E + Psi zeta - E0 Phi
    prefix_scaled(st.zeta, delta, tmp);
    for (size_t i = 0; i < n; ++i)
        out.r[3 * n + i] = st.E[i] + tmp[i] - problem.E0();
    // r5 = xi - phi
    for (size_t i = 0; i < n; ++i) out.r[4 * n + i] = st.xi[i] - st.phi[i];

    for (int blk = 0; blk < 5; ++blk) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double v = out.r[blk * n + i];
            s += v * v;
        }
        out.r_block_norms[blk] = std::sqrt(s);
        out.r_norm += s;
    }
    out.r_norm = std::sqrt(out.r_norm);

    // s = J_z(b)^T R B (x_prev - x)
    std::vector<double> w1(n), w2(n), w3(n), w4(n), w5(n), d(n);
    for (size_t i = 0; i < n; ++i) d[i] = st.xi_prev[i] - st.xi[i];
    prefix_scaled(d, delta, w2);
    for (size_t i = 0; i < n; ++i) {
        w1[i] = (st.chi_prev[i] - st.chi[i]) - d[i];
        w5[i] = d[i] - (st.phi_prev[i] - st.phi[i]);
    }
    for (size_t i = 0; i < n; ++i) d[i] = st.zeta_prev[i] - st.zeta[i];
    prefix_scaled(d, delta, w4);
    for (size_t i = 0; i < n; ++i) {
        w3[i] = d[i];
        w4[i] += st.E_prev[i] - st.E[i];
    }
    for (size_t i = 0; i < n; ++i) {
        const double v1 = st.sigma[0] * w1[i];
        const double v2 = st.sigma[1] * w2[i];
        const double v3 = st.sigma[2] * w3[i];
        out.s[i] = st.f_phi_dm[i] * v1 + v2;
        out.s[n + i] = st.f_phi_dp[i] * v1 - v3;
    }
    out.s_norm = norm2(out.s);

    // Scales for stopping thresholds and the penalty gate.
    double b_norm = 0.0, bx_norm = 0.0;
    for (size_t i = 0; i < n; ++i)
        b_norm += st.f_phi_val[i] * st.f_phi_val[i] + st.m[i] * st.m[i] +
                  st.p_b[i] * st.p_b[i];
    b_norm = std::sqrt(b_norm);
    {
        std::vector<double> bx(5 * n, 0.0);
        prefix_scaled(st.xi, delta, tmp);
        for (size_t i = 0; i < n; ++i) {
            bx[i] = st.chi[i] - st.xi[i];
            bx[n + i] = tmp[i];
            bx[2 * n + i] = st.zeta[i];
            bx[4 * n + i] = st.xi[i] - st.phi[i];
        }
        prefix_scaled(st.zeta, delta, tmp);
        for (size_t i = 0; i < n; ++i) bx[3 * n + i] = tmp[i] + st.E[i];
        bx_norm = norm2(bx);
    }
    const double c_norm = std::sqrt(
        static_cast<double>(n) *
        (problem.m0() * problem.m0() + problem.E0() * problem.E0()));
    out.scale_primal = std::max({b_norm, bx_norm, c_norm});

    double jl = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double sm = st.f_phi_dm[i] * st.lam1[i] + st.lam2[i];
        const double sp = st.f_phi_dp[i] * st.lam1[i] - st.lam3[i];
        jl += sm * sm + sp * sp;
    }
    out.scale_dual = std::sqrt(jl);
    return out;
}

void update_penalties(AdmmState& st, const Residuals& res,
                      const SolverOptions& opts) {
    if (opts.f_sigma < 1 || st.iter == 0 || st.iter % opts.f_sigma != 0) return;
    auto ratio = [](double num, double den) {
        if (den > 0.0) return num / den;
        return num > 0.0 ? kInf : 0.0;
    };
    const double rel = std::max(ratio(res.r_norm, res.scale_primal),
                                ratio(res.s_norm, res.scale_dual));
    if (!(rel > opts.gate)) return;

    const double gamma = std::sqrt(ratio(res.r_norm, res.s_norm));
    double tau;
    if (gamma >= 1.0 && gamma < opts.tau_max) tau = gamma;
    else if (gamma > 1.0 / opts.tau_max && gamma < 1.0) tau = 1.0 / gamma;
    else tau = opts.tau_max;

    for (int nblk = 0; nblk < 5; ++nblk) {
        const double rn = res.r_block_norms[nblk];
        if (rn > opts.mu * res.s_norm) st.sigma[nblk] *= tau;
        else if (res.s_norm > opts.mu * rn) st.sigma[nblk] /= tau;
    }
}

StopDecision check_stop(const Residuals& res, const AdmmState& st,
                        const SolverOptions& opts) {
    const double n5 = std::sqrt(5.0 * static_cast<double>(st.horizon()));
    const double n2 = std::sqrt(2.0 * static_cast<double>(st.horizon()));
    const double eps_p = n5 * opts.eps_abs + opts.eps_rel * res.scale_primal;
    const double eps_d = n2 * opts.eps_abs + opts.eps_rel * res.scale_dual;
    if (res.r_norm <= eps_p && res.s_norm <= eps_d) return StopDecision::Converged;
    if (st.iter > opts.max_iter) return StopDecision::IterationLimit;
    return StopDecision::Continue;
}

Solution extract_solution(const AdmmState& st, const ConvexProblem& problem) {
    const size_t n = problem.horizon();
    const double delta = problem.delta();
    Solution sol;
    sol.phi = st.phi;
    sol.p_b = st.p_b;
    sol.m.resize(n);
    sol.E.resize(n);
    double m = problem.m0(), E = problem.E0();
    for (size_t i = 0; i < n; ++i) {
        sol.m[i] = m;
        sol.E[i] = E;
        // Wherever the fuel-rate floor binds, any battery power beyond the
        // point where f_phi meets phi is optimal; return the least-discharge
        // representative so phi_i == f_phi holds and SOC is not overspent.
        const ScheduleStep& s = problem.step(i);
        const double lo = std::max(s.pb_lo, (E - problem.soc_max()) / delta);
        double pb = sol.p_b[i];
        if (lo < pb && problem.f_phi(i, m, pb) < sol.phi[i]) {
            if (problem.f_phi(i, m, lo) <= sol.phi[i]) {
                pb = lo;
            } else {
                double a = lo, b = pb;  // f(a) > phi_i >= f(b)
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (a + b);
                    (problem.f_phi(i, m, mid) > sol.phi[i] ? a : b) = mid;
                }
                pb = b;
            }
            sol.p_b[i] = pb;
        }
        m -= sol.phi[i] * delta;
        E -= sol.p_b[i] * delta;
        sol.objective += sol.phi[i] * delta;
    }
    return sol;
}

Solution solve(const ConvexProblem& problem, const SolverOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t_start)
            .count();
    };

    if (auto fast = trivial_solution(problem)) {
        fast->stats.wall_time_s = elapsed();
        return *fast;
    }

    AdmmState st = init_state(problem);
    std::unique_ptr<CsvWriter> trace;
    if (!opts.trace_path.empty()) {
        trace = std::make_unique<CsvWriter>(opts.trace_path);
        trace->header({"iteration", "r_norm", "s_norm", "sigma1", "sigma2",
                       "sigma3", "sigma4", "sigma5", "objective"});
    }

    while (true) {
        step(st, problem, opts);
        Residuals res = residuals(st, problem);
        if (trace) {
            double obj = 0.0;
            for (double p : st.phi) obj += p * problem.delta();
            trace->row({static_cast<double>(st.iter), res.r_norm, res.s_norm,
                        st.sigma[0], st.sigma[1], st.sigma[2], st.sigma[3],
                        st.sigma[4], obj});
        }
        update_penalties(st, res, opts);
        const StopDecision decision = check_stop(res, st, opts);
        if (decision == StopDecision::Continue) continue;

        Solution sol = extract_solution(st, problem);
        sol.stats.iterations = st.iter;
        sol.stats.primal_residual = res.r_norm;
        sol.stats.dual_residual = res.s_norm;
        sol.stats.wall_time_s = elapsed();
        sol.stats.converged = decision == StopDecision::Converged;
        if (decision == StopDecision::IterationLimit)
            throw IterationLimitError("ADMM iteration limit reached", sol);
        return sol;
    }
}

}  // namespace hea
