#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hea/csv.hpp"
#include "hea/mpc.hpp"
#include "hea/oracle.hpp"
#include "hea/scenario.hpp"
#include "hea/svg.hpp"

namespace fs = std::filesystem;
using namespace hea;

namespace {

struct CommonFlags {
    std::string topology, strategy, out = ".";
    long seed = 0;
    int jobs = 1;
};

void apply_overrides(Scenario& sc, const CommonFlags& f) {
    if (!f.topology.empty()) sc.params.topology = topology_from_string(f.topology);
    if (!f.strategy.empty()) sc.strategy = strategy_from_string(f.strategy);
}

void write_summary(const MissionResult& r, const std::string& path) {
    std::ofstream out(path);
    out.precision(10);
    out << "strategy: " << to_string(r.strategy) << "\n"
        << "topology: " << to_string(r.topology) << "\n"
        << "steps: " << r.steps.size() << "\n"
        << "fuel_total_kg: " << r.fuel_total << "\n"
        << "final_mass_kg: " << r.final_mass << "\n"
        << "final_soc_mj: " << r.final_E << "\n"
        << "total_solver_iterations: " << r.total_iterations << "\n"
        << "wall_time_s: " << r.wall_time_s << "\n";
}

void write_mission_plots(const MissionResult& r, const fs::path& out_dir) {
    std::vector<double> t, p_gt, p_elec, p_b, E, fuel;
    double burned = 0.0;
    for (const auto& s : r.steps) {
        t.push_back(s.t);
        p_gt.push_back(s.p_gt);
        p_elec.push_back(r.topology == Topology::Parallel ? s.p_em : s.p_gen);
        p_b.push_back(s.p_b);
        E.push_back(s.E);
        fuel.push_back(burned);
        burned += s.phi * r.delta;
    }
    SvgPlot split("Power split (per system)", "time [s]", "power [MW]");
    split.add_series("P_gt", t, p_gt);
    split.add_series(r.topology == Topology::Parallel ? "P_em" : "P_gen", t,
                     p_elec);
    split.add_series("P_b", t, p_b);
    split.write((out_dir / "power_split.svg").string());

    SvgPlot soc("SOC and fuel burned", "time [s]", "E [MJ] / fuel [kg]");
    soc.add_series("SOC", t, E);
    soc.add_series("fuel burned", t, fuel);
    soc.write((out_dir / "soc_fuel.svg").string());
}

int cmd_run(const std::string& scenario_path, const CommonFlags& flags) {
    Scenario sc = load_scenario(scenario_path);
    apply_overrides(sc, flags);
    fs::create_directories(flags.out);
    sc.solver.trace_path = (fs::path(flags.out) / "solver_trace.csv").string();
    MissionResult r = run_closed_loop(sc);
    write_mission_csv(r, (fs::path(flags.out) / "mission.csv").string());
    write_summary(r, (fs::path(flags.out) / "summary.txt").string());
    write_mission_plots(r, fs::path(flags.out));
    std::cout << "fuel_total_kg " << r.fuel_total << "\n";
    return 0;
}

int cmd_compare(const std::string& scenario_path,
                const std::vector<std::string>& strategies,
                const CommonFlags& flags) {
    if (strategies.size() < 2)
        throw std::invalid_argument("compare: need at least two strategies");
    Scenario base = load_scenario(scenario_path);
    apply_overrides(base, flags);
    fs::create_directories(flags.out);

    std::vector<MissionResult> results;
    for (const std::string& name : strategies) {
        Scenario sc = base;
        sc.strategy = strategy_from_string(name);
        results.push_back(run_closed_loop(sc));
    }

    CsvWriter table((fs::path(flags.out) / "comparison.csv").string());
    table.header({"index", "fuel_total_kg", "savings_vs_baseline_pct"});
    std::ofstream txt(fs::path(flags.out) / "comparison.txt");
    txt.precision(10);
    const double baseline = results[0].fuel_total;
    for (size_t i = 0; i < results.size(); ++i) {
        const double save = (baseline - results[i].fuel_total) / baseline * 100.0;
        table.row({static_cast<double>(i), results[i].fuel_total, save});
        txt << strategies[i] << ": fuel " << results[i].fuel_total
            << " kg, savings vs " << strategies[0] << " " << save << " %\n";
    }

    SvgPlot overlay("Battery power by strategy", "time [s]", "P_b [MW]");
    for (size_t i = 0; i < results.size(); ++i) {
        std::vector<double> t, p;
        for (const auto& s : results[i].steps) {
            t.push_back(s.t);
            p.push_back(s.p_b);
        }
        overlay.add_series(strategies[i], t, p);
    }
    overlay.write((fs::path(flags.out) / "overlay.svg").string());
    return 0;
}

struct SweepPoint {
    double value = 0.0;
    double admm_obj = 0.0, barrier_obj = 0.0, gap_rel = 0.0;
    long admm_iters = 0;
    double admm_wall = 0.0, barrier_wall = 0.0;
};

Scenario scenario_for_value(const Scenario& base, const std::string& axis,
                            double v) {
    Scenario sc = base;
    if (axis == "battery_mass") {
        const double ratio = v / sc.params.battery_mass;
        sc.params.battery_mass = v;
        sc.params.soc_min *= ratio;
        sc.params.soc_max *= ratio;
    } else if (axis == "max_altitude" || axis == "max_tas" || axis == "N") {
        std::vector<double> t, h, vel;
        double hmax = 0.0;
        for (const auto& s : base.profile.steps) hmax = std::max(hmax, s.h);
        for (const auto& s : base.profile.steps) {
            t.push_back(s.t);
            h.push_back(axis == "max_altitude" ? s.h * v / hmax : s.h);
            vel.push_back(axis == "max_tas" ? v : s.v_tas);
        }
        const double delta = axis == "N"
                                 ? (t.back() - t.front()) / v
                                 : base.profile.delta;
        sc.profile = make_flight_profile(t, h, vel, {}, delta);
    } else if (axis == "eps_rel") {
        sc.solver.eps_rel = v;
    } else if (axis == "F_sigma") {
        sc.solver.f_sigma = static_cast<long>(v);
    } else if (axis == "R") {
        sc.params.battery_resistance = v;
    } else if (axis == "beta1_scale") {
        std::vector<LossTable::Row> rows = sc.losses.rows();
        for (auto& row : rows) row.fuel.c1 *= v;
        sc.losses = LossTable(std::move(rows));
    } else {
        throw std::invalid_argument("sweep: unknown axis " + axis);
    }
    return sc;
}

SweepPoint sweep_one(const Scenario& base, const std::string& axis, double v) {
    Scenario sc = scenario_for_value(base, axis, v);
    sc.params.validate();
    PowertrainParams params = sc.params;
    if (sc.gt_power_cap_override) params.gt_power_max = *sc.gt_power_cap_override;
    CoefficientSchedule schedule =
        build_schedule(sc.profile, sc.losses, sc.fan_map, params,
                       sc.initial_mass(), sc.series_speed_ratio);
    if (sc.windmilling) apply_windmilling(schedule, params, sc.eta_w);
    ConvexProblem problem =
        assemble(schedule, sc.initial_mass(), sc.initial_soc(), params,
                 schedule.size());

    SweepPoint pt;
    pt.value = v;
    Solution admm = solve(problem, sc.solver);
    Solution barrier = barrier_solve(problem, 1e-6);
    pt.admm_obj = admm.objective;
    pt.barrier_obj = barrier.objective;
    pt.gap_rel = std::abs(admm.objective - barrier.objective) /
                 std::max(1e-300, std::abs(barrier.objective));
    pt.admm_iters = admm.stats.iterations;
    pt.admm_wall = admm.stats.wall_time_s;
    pt.barrier_wall = barrier.stats.wall_time_s;
    return pt;
}

int cmd_sweep(const std::string& scenario_path, const std::string& axis,
              std::vector<double> values, const CommonFlags& flags) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");
    Scenario base = load_scenario(scenario_path);
    apply_overrides(base, flags);
    fs::create_directories(flags.out);
    std::sort(values.begin(), values.end());

    std::vector<SweepPoint> points(values.size());
    std::vector<std::string> errors(values.size());
    std::mutex next_mutex;
    size_t next = 0;
    auto worker = [&] {
        while (true) {
            size_t i;
            {
                std::lock_guard<std::mutex> lk(next_mutex);
                if (next >= values.size()) return;
                i = next++;
            }
            try {
                points[i] = sweep_one(base, axis, values[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int jobs = std::max(1, flags.jobs);
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs - 1; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (size_t i = 0; i < values.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("sweep point " + std::to_string(values[i]) +
                                     ": " + errors[i]);

    CsvWriter out((fs::path(flags.out) / "sweep.csv").string());
    out.header({"value", "admm_objective", "barrier_objective", "gap_rel",
                "admm_iterations", "admm_wall_s", "barrier_wall_s"});
    for (const SweepPoint& p : points)
        out.row({p.value, p.admm_obj, p.barrier_obj, p.gap_rel,
                 static_cast<double>(p.admm_iters), p.admm_wall, p.barrier_wall});

    if (axis == "N") {
        SvgPlot plot("Solver scaling", "N", "wall time [s]");
        std::vector<double> xs, admm_t, bar_t;
        for (const SweepPoint& p : points) {
            xs.push_back(p.value);
            admm_t.push_back(p.admm_wall);
            bar_t.push_back(p.barrier_wall);
        }
        plot.add_series("ADMM", xs, admm_t);
        plot.add_series("barrier", xs, bar_t);
        plot.write((fs::path(flags.out) / "scaling.svg").string());
    } else {
        SvgPlot plot("Sweep: " + axis, axis, "objective gap (rel)");
        std::vector<double> xs, gap;
        for (const SweepPoint& p : points) {
            xs.push_back(p.value);
            gap.push_back(p.gap_rel);
        }
        plot.add_series("gap", xs, gap);
        plot.write((fs::path(flags.out) / "sweep.svg").string());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid-electric aircraft energy management"};
    app.require_subcommand(1);

    CommonFlags flags;
    app.add_option("--topology", flags.topology, "Override topology")
        ->check(CLI::IsMember({"parallel", "series"}));
    app.add_option("--strategy", flags.strategy, "Override strategy");
    app.add_option("--out", flags.out, "Output directory");
    app.add_option("--seed", flags.seed, "RNG seed for randomized sweeps");
    app.add_option("--jobs", flags.jobs, "Worker threads for sweeps");

    std::string scenario_path, axis;
    std::vector<std::string> strategies;
    std::vector<double> values;

    auto* run = app.add_subcommand("run", "Run one closed-loop mission");
    run->add_option("scenario", scenario_path, "Scenario file")->required();

    auto* cmp = app.add_subcommand("compare", "Compare strategies");
    cmp->add_option("scenario", scenario_path, "Scenario file")->required();
    cmp->add_option("strategies", strategies, "Strategies (first is baseline)");

    auto* swp = app.add_subcommand("sweep", "Sweep a scenario axis");
    swp->add_option("scenario", scenario_path, "Scenario file")->required();
    swp->add_option("axis", axis, "Sweep axis")
        ->required()
        ->check(CLI::IsMember({"battery_mass", "max_altitude", "max_tas",
                               "eps_rel", "F_sigma", "N", "R", "beta1_scale"}));
    swp->add_option("values", values, "Axis values");

    auto* val = app.add_subcommand("validate", "Schema-check a scenario file");
    val->add_option("scenario", scenario_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(scenario_path, flags);
        if (app.got_subcommand(cmp)) return cmd_compare(scenario_path, strategies, flags);
        if (app.got_subcommand(swp)) return cmd_sweep(scenario_path, axis, values, flags);
        validate_scenario_file(scenario_path);
        std::cout << "ok\n";
        return 0;
    } catch (const ScenarioLoadError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const CsvParseError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "error: invariant: " << e.what() << "\n";
        return 4;
    } catch (const IterationLimitError& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    }
}
