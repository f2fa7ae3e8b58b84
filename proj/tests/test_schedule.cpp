#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hea/powertrain.hpp"
#include "hea/schedule.hpp"
#include "helpers.hpp"

using namespace hea;

namespace {

LossTable identity_losses() {
    LossTable::Row row;
    row.omega = 0.0;
    row.motor = {0.0, 1.0, 0.0};
    row.generator = {0.0, 1.0, 0.0};
    row.fuel = {0.0, 0.0821, 0.0327};
    LossTable::Row hi = row;
    hi.omega = 1000.0;
    return LossTable({row, hi});
}

FanMapTable constant_fan(double omega_nd) {
    return FanMapTable({0.0, 12000.0}, {-5.0, 10.0},
                       {{omega_nd, omega_nd}, {omega_nd, omega_nd}});
}

FlightProfile cruise_profile(size_t samples = 4, double v = 190.0) {
    std::vector<double> t, h, vel;
    for (size_t i = 0; i < samples; ++i) {
        t.push_back(60.0 * static_cast<double>(i));
        h.push_back(5000.0);
        vel.push_back(v);
    }
    return make_flight_profile(t, h, vel, {}, 60.0);
}

}  // namespace

TEST_CASE("standard atmosphere") {
    CHECK(ambient_temperature(0.0) == doctest::Approx(288.15));
    CHECK(ambient_temperature(11000.0) == doctest::Approx(216.65));
    CHECK(ambient_temperature(15000.0) == doctest::Approx(216.65));
}

TEST_CASE("shaft speed scaling formula") {
    FanMapTable fm = constant_fan(100.0);
    const double w = shaft_speed(2.0, 0.0, 0.0, fm);
    CHECK(w == doctest::Approx(1.567 * (M_PI / 30.0) * 100.0 * std::sqrt(288.15))
                   .epsilon(1e-6));
    CHECK(w == doctest::Approx(278.6).epsilon(1e-3));
    // with a constant table, omega depends only on the inlet temperature
    CHECK(shaft_speed(2.0, 0.0, 190.0, fm) ==
          doctest::Approx(1.567 * (M_PI / 30.0) * 100.0 *
                          std::sqrt(288.15 + 190.0 * 190.0 / 2010.0)));
    CHECK(288.15 + 190.0 * 190.0 / 2010.0 == doctest::Approx(306.11).epsilon(1e-4));
}

TEST_CASE("drive power estimates at frozen mass") {
    PowertrainParams p;
    FlightProfile prof = cruise_profile();
    auto est = estimate_drive_power_profile(prof, 42000.0, p);
    REQUIRE(est.size() == 3);
    CHECK(est[0] == doctest::Approx(1.9236).epsilon(2e-4));
    CHECK(estimate_drive_power_profile(FlightProfile{}, 42000.0, p).empty());
}

TEST_CASE("descent can give negative estimates") {
    PowertrainParams p;
    std::vector<double> t{0, 60, 120}, h{7560, 6300, 5040}, v{190, 190, 190};
    FlightProfile prof = make_flight_profile(t, h, v, {}, 60.0);
    auto est = estimate_drive_power_profile(prof, 42000.0, p);
    CHECK(est[0] < 0.0);
}

TEST_CASE("build_schedule constant tables and determinism") {
    PowertrainParams p;
    FlightProfile prof = cruise_profile();
    LossTable losses = identity_losses();
    FanMapTable fm = constant_fan(100.0);
    CoefficientSchedule a = build_schedule(prof, losses, fm, p, 42000.0);
    CoefficientSchedule b = build_schedule(prof, losses, fm, p, 42000.0);
    REQUIRE(a.size() == 3);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.steps[i].beta.c1 == doctest::Approx(0.0821));
        CHECK(a.steps[i].beta.c0 == doctest::Approx(0.0327));
        CHECK(std::memcmp(&a.steps[i], &b.steps[i], sizeof(ScheduleStep)) == 0);
    }
}

TEST_CASE("series with unit speed ratio ties generator speed to the fan") {
    PowertrainParams p;
    p.topology = Topology::Series;
    FlightProfile prof = cruise_profile();
    std::vector<LossTable::Row> rows = identity_losses().rows();
    rows[1].generator = {0.001, 1.2, 0.0};  // omega-dependent generator
    LossTable losses{rows};
    FanMapTable fm = constant_fan(100.0);
    CoefficientSchedule s1 = build_schedule(prof, losses, fm, p, 42000.0, 1.0);
    // generator map interpolated exactly at omega_drv
    const double w = s1.steps[0].omega_drv;
    QuadMap expect = losses.generator_at(w);
    CHECK(s1.steps[0].nu.c1 == doctest::Approx(expect.c1));
}

TEST_CASE("coverage error when shaft speed leaves the loss table") {
    PowertrainParams p;
    FlightProfile prof = cruise_profile();
    std::vector<LossTable::Row> rows = identity_losses().rows();
    rows[0].omega = 10.0;
    rows[1].omega = 20.0;  // schedule omega ~ 290 rad/s, outside
    CHECK_THROWS_AS(build_schedule(prof, LossTable{rows}, constant_fan(100.0), p,
                                   42000.0),
                    std::runtime_error);
}

TEST_CASE("parallel bounds with identity maps") {
    PowertrainParams p;
    FlightProfile prof = cruise_profile();
    CoefficientSchedule s =
        build_schedule(prof, identity_losses(), constant_fan(100.0), p, 42000.0);
    const auto& st = s.steps[0];
    CHECK(st.phi_lo == doctest::Approx(0.0327).epsilon(1e-12));
    CHECK(st.phi_hi == doctest::Approx(0.0327 + 0.0821 * 5.0).epsilon(1e-12));
    CHECK(st.pb_lo == doctest::Approx(0.0));
    // identity h: ceiling is g(min(em_max, apex)) = g(5)
    CHECK(st.pb_hi == doctest::Approx(battery_chemical_power(5.0, p)).epsilon(1e-12));
}

TEST_CASE("r_max saturates the battery ceiling under identity maps") {
    PowertrainParams p;
    p.em_power_max = 20.0;  // above the circuit apex
    FlightProfile prof = cruise_profile();
    CoefficientSchedule s =
        build_schedule(prof, identity_losses(), constant_fan(100.0), p, 42000.0);
    CHECK(s.steps[0].pb_hi == doctest::Approx(32.1429).epsilon(1e-4));
}

TEST_CASE("series ceiling clamps at U^2/2R") {
    PowertrainParams p;
    p.topology = Topology::Series;
    p.em_power_max = 40.0;
    p.soc_max = p.battery_mass / p.n_systems * p.battery_energy_density;
    FlightProfile prof = cruise_profile();
    CoefficientSchedule s =
        build_schedule(prof, identity_losses(), constant_fan(100.0), p, 42000.0);
    CHECK(s.steps[0].pb_hi == doctest::Approx(32.1429).epsilon(1e-4));
}

TEST_CASE("infeasible boxes are rejected") {
    PowertrainParams p;
    FlightProfile prof = cruise_profile();
    CoefficientSchedule s =
        build_schedule(prof, identity_losses(), constant_fan(100.0), p, 42000.0);
    PowertrainParams bad = p;
    bad.em_power_min = 6.0;
    bad.em_power_max = 5.0;  // empty motor range -> pb_lo > pb_hi
    CHECK_THROWS_AS(compute_bounds(s, bad), InfeasibleBoundsError);
}

TEST_CASE("f_phi stays real and convex across the scheduled boxes") {
    auto sc = test_helpers::default_scenario();
    for (Topology topo : {Topology::Parallel, Topology::Series}) {
        sc.params.topology = topo;
        CoefficientSchedule sched = test_helpers::default_schedule(sc);
        ConvexProblem prob = assemble(sched, sc.initial_mass(), sc.initial_soc(),
                                      sc.params, sched.size());
        for (size_t i = 0; i < prob.horizon(); i += 7) {
            const double lo = prob.step(i).pb_lo, hi = prob.step(i).pb_hi;
            for (int k = 0; k <= 8; ++k) {
                const double pb = lo + (hi - lo) * k / 8.0;
                for (double m : {40000.0, 42000.0}) {
                    CHECK_NOTHROW(prob.f_phi(i, m, pb));
                }
                // midpoint convexity in p_b
                if (k >= 2) {
                    const double pa = lo + (hi - lo) * (k - 2) / 8.0;
                    const double pm = 0.5 * (pa + pb);
                    CHECK(prob.f_phi(i, 42000.0, pm) <=
                          0.5 * (prob.f_phi(i, 42000.0, pa) +
                                 prob.f_phi(i, 42000.0, pb)) + 1e-12);
                }
            }
        }
    }
}
