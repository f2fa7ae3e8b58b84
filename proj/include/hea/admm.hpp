#pragma once

#include <array>
#include <string>
#include <vector>

#include "hea/convex.hpp"

namespace hea {

struct SolverOptions {
    double eps_rel = 5e-6;
    double eps_abs = 0.0;
    long f_sigma = 500;        // iterations between penalty updates
    long max_iter = 100000;
    double mu = 10.0;          // residual-balance ratio
    double tau_max = 100.0;    // largest penalty step
    double gate = 10.0;        // relative-residual gate for penalty updates
    bool use_factor_cache = true;
    bool parallel = false;     // OpenMP kernels for the per-step loops
    std::string trace_path;    // per-iteration CSV trace when non-empty
};

/// Cached O(N) solver for (a I + b Psi^T Psi) x = r, where Psi is the
/// strictly lower triangular step matrix with sub-diagonal entries delta.
/// Differencing the rows reduces the system to a tridiagonal one.
class StepMatrixSolver {
public:
    void factor(double a, double b_sigma_delta2, size_t n);
    void solve(const std::vector<double>& rhs, std::vector<double>& x) const;
    bool matches(double a, double b_sigma_delta2, size_t n) const;

private:
    double a_ = 0.0, b_ = 0.0;
    size_t n_ = 0;
    std::vector<double> diag_;   // eliminated diagonal
    std::vector<double> lower_;  // elimination multipliers
};

enum class StopDecision { Continue, Converged, IterationLimit };

struct AdmmState {
    // x blocks
    std::vector<double> chi, xi, zeta, E, phi;
    // z blocks
    std::vector<double> m, p_b;
    // multipliers
    std::vector<double> lam1, lam2, lam3, lam4, lam5;
    std::array<double, 5> sigma{};
    long iter = 0;

    // f_phi and its partials at the current (m, p_b)
    std::vector<double> f_phi_val, f_phi_dm, f_phi_dp;
    // previous-iteration x blocks, for the dual residual
    std::vector<double> chi_prev, xi_prev, zeta_prev, E_prev, phi_prev;

    StepMatrixSolver xi_solver, zeta_solver;

    size_t horizon() const { return xi.size(); }
};

struct Residuals {
    std::vector<double> r;  // 5N, stacked in constraint order
    std::vector<double> s;  // 2N, (m block, p_b block)
    double r_norm = 0.0;
    double s_norm = 0.0;
    // Scales entering the stopping thresholds and the penalty gate.
    double scale_primal = 0.0;  // max{ |b(z)|, |Bx|, |c| }
    double scale_dual = 0.0;    // |J_z^T lambda|
    std::array<double, 5> r_block_norms{};
};

AdmmState init_state(const ConvexProblem& problem);

/// One full Gauss-Seidel sweep: chi, xi, zeta, E, P_b, phi, m, then the
/// five multiplier ascent steps.
void step(AdmmState& state, const ConvexProblem& problem,
          const SolverOptions& opts);

Residuals residuals(const AdmmState& state, const ConvexProblem& problem);

/// Residual-balancing penalty adaptation; no-op unless state.iter is a
/// multiple of opts.f_sigma and the relative residuals exceed the gate.
void update_penalties(AdmmState& state, const Residuals& res,
                      const SolverOptions& opts);

StopDecision check_stop(const Residuals& res, const AdmmState& state,
                        const SolverOptions& opts);

struct IterationLimitError : std::runtime_error {
    IterationLimitError(const std::string& what, Solution best)
        : std::runtime_error(what), best_iterate(std::move(best)) {}
    Solution best_iterate;
};

/// Solve the convex program: trivial fast path when the SOC bounds never
/// bind, ADMM iteration otherwise. Throws IterationLimitError (carrying the
/// best iterate) when the iteration cap is reached.
Solution solve(const ConvexProblem& problem, const SolverOptions& opts = {});

/// Extract a Solution from the current iterate: phi and P_b from their
/// box-projected blocks, mass and SOC rebuilt by the exact recursions.
Solution extract_solution(const AdmmState& state, const ConvexProblem& problem);

}  // namespace hea
