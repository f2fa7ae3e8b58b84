#pragma once

#include <string>
#include <vector>

namespace hea {

struct ProfileStep {
    double t = 0.0;      // s
    double h = 0.0;      // m
    double v_tas = 0.0;  // m/s
    double gamma = 0.0;  // rad
};

/// Prescribed flight profile sampled at a uniform interval delta.
struct FlightProfile {
    double delta = 60.0;  // s
    std::vector<ProfileStep> steps;

    size_t size() const { return steps.size(); }
    void validate() const;
};

/// Load a `t,h,v[,gamma]` CSV (SI units), resample to uniform delta by
/// linear interpolation, and fill gamma from the height differences when
/// the column is absent. Throws CsvParseError / std::runtime_error on bad
/// input, including climbs steeper than the airspeed allows.
FlightProfile load_flight_profile(const std::string& path, double delta);

/// Same construction from in-memory columns, used by tests and synthetic
/// profile generation.
FlightProfile make_flight_profile(const std::vector<double>& t,
                                  const std::vector<double>& h,
                                  const std::vector<double>& v,
                                  const std::vector<double>& gamma,  // empty = derive
                                  double delta);

}  // namespace hea
