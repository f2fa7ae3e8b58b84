#include "hea/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hea/csv.hpp"

namespace hea {

void FlightProfile::validate() const {
    if (delta <= 0.0) throw std::invalid_argument("FlightProfile: delta must be > 0");
    for (size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].v_tas <= 0.0)
            throw std::invalid_argument("FlightProfile: v_tas must be > 0");
        if (std::abs(steps[i].gamma) >= M_PI / 2)
            throw std::invalid_argument("FlightProfile: |gamma| must be < pi/2");
        if (i > 0 && std::abs(steps[i].t - steps[i - 1].t - delta) > 1e-6 * delta)
            throw std::invalid_argument("FlightProfile: non-uniform time grid");
    }
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t j = static_cast<size_t>(it - xs.begin());
    double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace

FlightProfile make_flight_profile(const std::vector<double>& t,
                                  const std::vector<double>& h,
                                  const std::vector<double>& v,
                                  const std::vector<double>& gamma,
                                  double delta) {
    if (t.size() < 2) throw std::runtime_error("flight profile needs at least 2 samples");
    if (h.size() != t.size() || v.size() != t.size() ||
        (!gamma.empty() && gamma.size() != t.size()))
        throw std::runtime_error("flight profile column lengths differ");
    for (size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1])
            throw std::runtime_error("flight profile times must be strictly increasing");

    FlightProfile out;
    out.delta = delta;
    const double t0 = t.front(), t1 = t.back();
    const size_t n = static_cast<size_t>(std::floor((t1 - t0) / delta + 1e-9)) + 1;
    out.steps.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double ti = t0 + static_cast<double>(i) * delta;
        out.steps[i].t = ti;
        out.steps[i].h = interp(t, h, ti);
        out.steps[i].v_tas = interp(t, v, ti);
        if (!gamma.empty()) out.steps[i].gamma = interp(t, gamma, ti);
    }
    if (gamma.empty()) {
        for (size_t i = 0; i + 1 < n; ++i) {
            double ratio = (out.steps[i + 1].h - out.steps[i].h) /
                           (out.steps[i].v_tas * delta);
            if (std::abs(ratio) > 1.0)
                throw std::runtime_error(
                    "flight profile: climb rate exceeds airspeed (|dh| > v*delta)");
            out.steps[i].gamma = std::asin(ratio);
        }
        if (n >= 2) out.steps[n - 1].gamma = out.steps[n - 2].gamma;
    }
    out.validate();
    return out;
}

FlightProfile load_flight_profile(const std::string& path, double delta) {
    CsvTable table = read_csv(path);
    int ct = table.column("t"), ch = table.column("h"), cv = table.column("v");
    int cg = table.column("gamma");
    if (ct < 0 || ch < 0 || cv < 0)
        throw CsvParseError(path + ": required columns t,h,v not found");
    std::vector<double> t, h, v, gamma;
    for (const auto& row : table.rows) {
        t.push_back(row[ct]);
        h.push_back(row[ch]);
        v.push_back(row[cv]);
        if (cg >= 0) gamma.push_back(row[cg]);
    }
    return make_flight_profile(t, h, v, gamma, delta);
}

}  // namespace hea
