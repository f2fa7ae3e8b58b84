// Compares the serial and OpenMP variants of the per-step solver kernels on
// a long-horizon problem: full solves and the batched f_phi evaluation.
#include <chrono>
#include <cstdio>
#include <vector>

#include "hea/admm.hpp"
#include "hea/oracle.hpp"
#include "hea/profile.hpp"
#include "hea/scenario.hpp"

using namespace hea;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

ConvexProblem make_problem(const Scenario& base, size_t n) {
    Scenario sc = base;
    std::vector<double> t, h, v;
    for (const auto& s : base.profile.steps) {
        t.push_back(s.t);
        h.push_back(s.h);
        v.push_back(s.v_tas);
    }
    const double delta = (t.back() - t.front()) / static_cast<double>(n);
    sc.profile = make_flight_profile(t, h, v, {}, delta);
    CoefficientSchedule schedule =
        build_schedule(sc.profile, sc.losses, sc.fan_map, sc.params,
                       sc.initial_mass());
    return assemble(schedule, sc.initial_mass(), sc.initial_soc(), sc.params,
                    schedule.size());
}

}  // namespace

int main() {
    const std::string data_dir = HEA_DATA_DIR;
    Scenario base = load_scenario(data_dir + "/default_scenario.json");

    std::printf("%8s %10s %12s %12s %8s\n", "N", "kernel", "serial [s]",
                "openmp [s]", "speedup");
    for (size_t n : {240, 960, 1920}) {
        ConvexProblem problem = make_problem(base, n);

        SolverOptions serial;
        SolverOptions parallel;
        parallel.parallel = true;

        double t0 = now_s();
        Solution a = solve(problem, serial);
        const double t_serial = now_s() - t0;
        t0 = now_s();
        Solution b = solve(problem, parallel);
        const double t_parallel = now_s() - t0;
        std::printf("%8zu %10s %12.3f %12.3f %8.2f   (obj %.6f / %.6f, iters %ld)\n",
                    n, "solve", t_serial, t_parallel, t_serial / t_parallel,
                    a.objective, b.objective, a.stats.iterations);

        // batched f_phi evaluation
        AdmmState st = init_state(problem);
        const int reps = 2000;
        t0 = now_s();
        for (int r = 0; r < reps; ++r) step(st, problem, serial);
        const double f_serial = now_s() - t0;
        AdmmState st2 = init_state(problem);
        t0 = now_s();
        for (int r = 0; r < reps; ++r) step(st2, problem, parallel);
        const double f_parallel = now_s() - t0;
        std::printf("%8zu %10s %12.3f %12.3f %8.2f\n", n, "step", f_serial,
                    f_parallel, f_serial / f_parallel);
    }
    return 0;
}
