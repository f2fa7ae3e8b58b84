#include <doctest.h>

#include <cmath>
#include <random>

#include "hea/admm.hpp"
#include "hea/csv.hpp"
#include "helpers.hpp"

using namespace hea;

namespace {

// Dense Gaussian elimination with partial pivoting, for cross-checking the
// O(N) step-matrix solver on small systems.
std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                std::vector<double> b) {
    const size_t n = b.size();
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        for (size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
        std::swap(A[k], A[piv]);
        std::swap(b[k], b[piv]);
        for (size_t i = k + 1; i < n; ++i) {
            const double f = A[i][k] / A[k][k];
            for (size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (size_t k = n; k-- > 0;) {
        double acc = b[k];
        for (size_t j = k + 1; j < n; ++j) acc -= A[k][j] * x[j];
        x[k] = acc / A[k][k];
    }
    return x;
}

// Psi: strictly lower triangular with every sub-diagonal entry delta.
std::vector<std::vector<double>> psi_matrix(size_t n, double delta) {
    std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < i; ++l) P[i][l] = delta;
    return P;
}

std::vector<std::vector<double>> step_matrix(size_t n, double a, double b) {
    // a I + b W with W_kl = n - 1 - max(k, l); b already carries delta^2.
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
            M[k][l] = b * static_cast<double>(n - 1 - std::max(k, l));
            if (k == l) M[k][l] += a;
        }
    return M;
}

ConvexProblem short_problem(size_t n, double eps_scale = 1.0) {
    auto sc = test_helpers::default_scenario();
    (void)eps_scale;
    CoefficientSchedule sched = test_helpers::default_schedule(sc);
    return assemble(sched, sc.initial_mass(), sc.initial_soc(), sc.params, n);
}

}  // namespace

TEST_CASE("step matrix solver matches dense elimination") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ad(0.1, 50.0), bd(1e-6, 5.0),
        rd(-3.0, 3.0);
    for (size_t n = 1; n <= 8; ++n)
        for (int rep = 0; rep < 5; ++rep) {
            const double a = ad(rng), b = bd(rng);
            std::vector<double> rhs(n);
            for (auto& v : rhs) v = rd(rng);
            StepMatrixSolver solver;
            solver.factor(a, b, n);
            CHECK(solver.matches(a, b, n));
            std::vector<double> x;
            solver.solve(rhs, x);
            auto want = dense_solve(step_matrix(n, a, b), rhs);
            for (size_t i = 0; i < n; ++i)
                CHECK(x[i] == doctest::Approx(want[i]).epsilon(1e-10));
        }
}

TEST_CASE("Psi^T Psi equals delta^2 W") {
    const size_t n = 6;
    const double delta = 60.0;
    auto P = psi_matrix(n, delta);
    for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) acc += P[i][k] * P[i][l];
            const double want =
                delta * delta * static_cast<double>(n - 1 - std::max(k, l));
            CHECK(acc == doctest::Approx(want));
        }
}

TEST_CASE("initial iterate layout") {
    ConvexProblem prob = short_problem(12);
    AdmmState st = init_state(prob);
    REQUIRE(st.horizon() == 12);
    CHECK(st.sigma[0] == doctest::Approx(50.0));
    CHECK(st.sigma[1] == doctest::Approx(3.69e-7));
    CHECK(st.sigma[2] == doctest::Approx(6.96e-7));
    CHECK(st.sigma[3] == doctest::Approx(20.29));
    CHECK(st.sigma[4] == doctest::Approx(0.83));
    double m = prob.m0(), E = prob.E0();
    for (size_t i = 0; i < st.horizon(); ++i) {
        CHECK(st.p_b[i] == prob.step(i).pb_hi);
        CHECK(st.zeta[i] == st.p_b[i]);
        CHECK(st.xi[i] == prob.step(i).phi_lo);
        CHECK(st.phi[i] == st.xi[i]);
        CHECK(st.lam1[i] == 0.0);
        CHECK(st.lam5[i] == 0.0);
        CHECK(st.m[i] == doctest::Approx(m).epsilon(1e-14));
        const double e_clamped =
            std::max(prob.soc_min(), std::min(E, prob.soc_max()));
        CHECK(st.E[i] == doctest::Approx(e_clamped).epsilon(1e-14));
        CHECK(st.chi[i] ==
              doctest::Approx(std::max(st.xi[i] - prob.f_phi(i, st.m[i], st.p_b[i]),
                                       0.0)));
        m -= st.xi[i] * prob.delta();
        E -= st.zeta[i] * prob.delta();
    }
}

TEST_CASE("multiplier ascent equals the residual blocks on the first sweep") {
    ConvexProblem prob = short_problem(6);
    AdmmState st = init_state(prob);
    SolverOptions opts;
    step(st, prob, opts);
    Residuals res = residuals(st, prob);
    const size_t n = st.horizon();
    for (size_t i = 0; i < n; ++i) {
        // lambda started at zero, so after one ascent it equals each block
        // (up to summation-order roundoff against the large m0/E0 terms)
        CHECK(st.lam1[i] == doctest::Approx(res.r[i]).epsilon(1e-12).scale(1.0));
        CHECK(st.lam2[i] ==
              doctest::Approx(res.r[n + i]).epsilon(1e-12).scale(prob.m0()));
        CHECK(st.lam3[i] ==
              doctest::Approx(res.r[3 * n + i]).epsilon(1e-12).scale(prob.E0()));
        CHECK(st.lam4[i] == doctest::Approx(res.r[4 * n + i]).epsilon(1e-12).scale(1.0));
        CHECK(st.lam5[i] == doctest::Approx(res.r[2 * n + i]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("residuals match a dense reconstruction") {
    const size_t n = 4;
    ConvexProblem prob = short_problem(n);
    AdmmState st = init_state(prob);
    SolverOptions opts;
    for (int k = 0; k < 3; ++k) step(st, prob, opts);
    Residuals res = residuals(st, prob);
    auto P = psi_matrix(n, prob.delta());

    auto psi_apply = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t l = 0; l < n; ++l) out[i] += P[i][l] * v[l];
        return out;
    };
    auto pxi = psi_apply(st.xi);
    auto pzeta = psi_apply(st.zeta);
    double r2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f = prob.f_phi(i, st.m[i], st.p_b[i]);
        CHECK(res.r[i] == doctest::Approx(f + st.chi[i] - st.xi[i]).epsilon(1e-12));
        CHECK(res.r[n + i] == doctest::Approx(st.m[i] + pxi[i] - prob.m0())
                                  .epsilon(1e-12)
                                  .scale(prob.m0()));
        CHECK(res.r[2 * n + i] == doctest::Approx(st.zeta[i] - st.p_b[i]));
        CHECK(res.r[3 * n + i] == doctest::Approx(st.E[i] + pzeta[i] - prob.E0())
                                      .epsilon(1e-12)
                                      .scale(prob.E0()));
        CHECK(res.r[4 * n + i] == doctest::Approx(st.xi[i] - st.phi[i]));
    }
    for (double v : res.r) r2 += v * v;
    CHECK(res.r_norm == doctest::Approx(std::sqrt(r2)).epsilon(1e-12));

    // dual residual: J_z^T R B (x_prev - x) written out densely
    std::vector<double> dxi(n), dzeta(n), dchi(n);
    for (size_t i = 0; i < n; ++i) {
        dchi[i] = st.chi_prev[i] - st.chi[i];
        dxi[i] = st.xi_prev[i] - st.xi[i];
        dzeta[i] = st.zeta_prev[i] - st.zeta[i];
    }
    auto pdxi = psi_apply(dxi);
    for (size_t i = 0; i < n; ++i) {
        auto [dm, dp] = prob.f_phi_partials(i, st.m[i], st.p_b[i]);
        const double blk1 = st.sigma[0] * (dchi[i] - dxi[i]);
        const double want_m = dm * blk1 + st.sigma[1] * pdxi[i];
        const double want_p = dp * blk1 - st.sigma[2] * dzeta[i];
        CHECK(res.s[i] == doctest::Approx(want_m).epsilon(1e-10));
        CHECK(res.s[n + i] == doctest::Approx(want_p).epsilon(1e-10));
    }
}

TEST_CASE("penalty adaptation hand cases") {
    ConvexProblem prob = short_problem(4);
    SolverOptions opts;
    opts.f_sigma = 500;
    opts.mu = 2.0;

    Residuals res;
    res.r_norm = 4.0;
    res.s_norm = 1.0;
    res.scale_primal = 0.1;  // rel = 40 > gate
    res.scale_dual = 1.0;
    res.r_block_norms = {4.0, 0.0, 0.0, 0.0, 0.0};

    SUBCASE("gamma = 2 scales the unbalanced blocks") {
        AdmmState st = init_state(prob);
        st.iter = 500;
        const auto sig0 = st.sigma;
        update_penalties(st, res, opts);
        CHECK(st.sigma[0] == doctest::Approx(sig0[0] * 2.0));  // 4 > mu * 1
        for (int k = 1; k < 5; ++k)
            CHECK(st.sigma[k] == doctest::Approx(sig0[k] / 2.0));  // 1 > mu * 0
    }
    SUBCASE("off-cycle iterations are untouched") {
        AdmmState st = init_state(prob);
        st.iter = 499;
        const auto sig0 = st.sigma;
        update_penalties(st, res, opts);
        CHECK(st.sigma == sig0);
    }
    SUBCASE("below the gate nothing changes") {
        AdmmState st = init_state(prob);
        st.iter = 500;
        Residuals calm = res;
        calm.scale_primal = 1.0;
        calm.scale_dual = 1.0;  // rel = 4 <= gate 10
        const auto sig0 = st.sigma;
        update_penalties(st, calm, opts);
        CHECK(st.sigma == sig0);
    }
    SUBCASE("balanced norms leave tau at one") {
        AdmmState st = init_state(prob);
        st.iter = 500;
        Residuals bal = res;
        bal.r_norm = 1.0;
        bal.r_block_norms = {1.0, 1.0, 1.0, 1.0, 1.0};
        bal.scale_primal = 1e-3;  // keep the gate open
        const auto sig0 = st.sigma;
        update_penalties(st, bal, opts);
        // gamma = 1 -> tau = 1; scaling direction is irrelevant
        CHECK(st.sigma == sig0);
    }
    SUBCASE("zero dual scale counts as an infinite ratio") {
        AdmmState st = init_state(prob);
        st.iter = 500;
        Residuals inf = res;
        inf.scale_primal = 100.0;  // primal side calm
        inf.scale_dual = 0.0;      // dual side 1/0 -> gate opens
        const auto sig0 = st.sigma;
        update_penalties(st, inf, opts);
        CHECK(st.sigma[0] == doctest::Approx(sig0[0] * 2.0));
    }
}

TEST_CASE("stopping rule") {
    ConvexProblem prob = short_problem(4);
    AdmmState st = init_state(prob);
    SolverOptions opts;
    opts.eps_rel = 1e-6;
    opts.eps_abs = 0.0;
    Residuals res;
    res.scale_primal = 1.0;
    res.scale_dual = 1.0;
    res.r_norm = 5e-7;
    res.s_norm = 5e-7;
    st.iter = 10;
    CHECK(check_stop(res, st, opts) == StopDecision::Converged);
    res.r_norm = 5e-6;
    CHECK(check_stop(res, st, opts) == StopDecision::Continue);
    st.iter = opts.max_iter + 1;
    CHECK(check_stop(res, st, opts) == StopDecision::IterationLimit);
    // absolute floor: sqrt(5N) eps_abs
    opts.eps_rel = 0.0;
    opts.eps_abs = 1e-5;
    res.r_norm = std::sqrt(20.0) * 1e-5 * 0.99;
    res.s_norm = std::sqrt(8.0) * 1e-5 * 0.99;
    st.iter = 10;
    CHECK(check_stop(res, st, opts) == StopDecision::Converged);
}

TEST_CASE("factor cache and parallel kernels are bitwise neutral") {
    ConvexProblem prob = short_problem(16);
    SolverOptions base;
    SolverOptions no_cache = base;
    no_cache.use_factor_cache = false;
    SolverOptions par = base;
    par.parallel = true;

    AdmmState a = init_state(prob), b = init_state(prob), c = init_state(prob);
    for (int k = 0; k < 40; ++k) {
        step(a, prob, base);
        step(b, prob, no_cache);
        step(c, prob, par);
    }
    for (size_t i = 0; i < a.horizon(); ++i) {
        CHECK(a.xi[i] == b.xi[i]);
        CHECK(a.m[i] == b.m[i]);
        CHECK(a.p_b[i] == b.p_b[i]);
        CHECK(a.lam2[i] == b.lam2[i]);
        CHECK(a.xi[i] == c.xi[i]);
        CHECK(a.m[i] == c.m[i]);
        CHECK(a.p_b[i] == c.p_b[i]);
        CHECK(a.lam2[i] == c.lam2[i]);
    }
}

TEST_CASE("full solve on the one-hour horizon") {
    auto sc = test_helpers::default_scenario();
    ConvexProblem prob = test_helpers::default_problem(sc);
    SolverOptions opts;
    opts.trace_path = "/tmp/hea_admm_trace.csv";
    Solution sol = solve(prob, opts);
    CHECK(sol.stats.converged);
    CHECK_FALSE(sol.stats.fast_path);
    CHECK(sol.stats.iterations > 0);
    REQUIRE(sol.phi.size() == prob.horizon());
    CHECK(sol.objective > 0.0);

    // relaxation tightness and recursion bookkeeping at the returned point
    double m = prob.m0(), E = prob.E0(), worst = 0.0;
    for (size_t i = 0; i < prob.horizon(); ++i) {
        CHECK(sol.m[i] == doctest::Approx(m).epsilon(1e-12));
        CHECK(sol.E[i] == doctest::Approx(E).epsilon(1e-9).scale(1.0));
        worst = std::max(worst,
                         std::abs(sol.phi[i] - prob.f_phi(i, sol.m[i], sol.p_b[i])));
        CHECK(sol.p_b[i] >= prob.step(i).pb_lo - 1e-9);
        CHECK(sol.p_b[i] <= prob.step(i).pb_hi + 1e-9);
        // SOC can leak by roughly the scaled primal tolerance
        CHECK(sol.E[i] >= prob.soc_min() - 2.0);
        CHECK(sol.E[i] <= prob.soc_max() + 2.0);
        m -= sol.phi[i] * prob.delta();
        E -= sol.p_b[i] * prob.delta();
    }
    CHECK(worst <= 1e-3);

    CsvTable trace = read_csv("/tmp/hea_admm_trace.csv");
    REQUIRE(trace.column("iteration") == 0);
    CHECK(trace.column("objective") == 8);
    REQUIRE_FALSE(trace.rows.empty());
    CHECK(trace.rows.back()[0] == doctest::Approx(double(sol.stats.iterations)));
    CHECK(trace.rows.back()[1] == doctest::Approx(sol.stats.primal_residual));
}

TEST_CASE("iteration limit carries the best iterate") {
    ConvexProblem prob = short_problem(20);
    SolverOptions opts;
    opts.max_iter = 5;
    opts.eps_rel = 1e-12;
    try {
        solve(prob, opts);
        FAIL("expected IterationLimitError");
    } catch (const IterationLimitError& e) {
        CHECK(e.best_iterate.phi.size() == 20);
        CHECK_FALSE(e.best_iterate.stats.converged);
        CHECK(e.best_iterate.stats.iterations == 6);
    }
}
