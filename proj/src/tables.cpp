#include "hea/tables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hea/csv.hpp"

namespace hea {

FanMapTable::FanMapTable(std::vector<double> altitudes, std::vector<double> powers,
                         std::vector<std::vector<double>> omega, double mach)
    : alt_(std::move(altitudes)), pow_(std::move(powers)), omega_(std::move(omega)),
      mach_(mach) {
    if (alt_.size() < 2 || pow_.size() < 2)
        throw std::invalid_argument("FanMapTable: need at least a 2x2 grid");
    if (omega_.size() != alt_.size())
        throw std::invalid_argument("FanMapTable: row count mismatch");
    for (const auto& row : omega_) {
        if (row.size() != pow_.size())
            throw std::invalid_argument("FanMapTable: column count mismatch");
        for (double w : row)
            if (!(w > 0.0))
                throw std::invalid_argument("FanMapTable: Omega must be > 0");
    }
    if (!std::is_sorted(alt_.begin(), alt_.end()) ||
        !std::is_sorted(pow_.begin(), pow_.end()))
        throw std::invalid_argument("FanMapTable: grid axes must be ascending");
}

FanMapTable FanMapTable::load(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() < 3)
        throw CsvParseError(path + ": fan map needs altitude plus >= 2 power columns");
    std::vector<double> powers;
    for (size_t j = 1; j < table.header.size(); ++j) {
        try {
            powers.push_back(std::stod(table.header[j]));
        } catch (const std::exception&) {
            throw CsvParseError(path + ": fan map power header not numeric: " +
                                table.header[j]);
        }
    }
    std::vector<double> altitudes;
    std::vector<std::vector<double>> omega;
    for (const auto& row : table.rows) {
        altitudes.push_back(row[0]);
        omega.emplace_back(row.begin() + 1, row.end());
    }
    return FanMapTable(std::move(altitudes), std::move(powers), std::move(omega));
}

FanMapTable::Sample FanMapTable::interpolate(double altitude, double power) const {
    Sample s;
    auto clamp_axis = [&](const std::vector<double>& axis, double x) {
        if (x < axis.front()) { s.clamped = true; return axis.front(); }
        if (x > axis.back()) { s.clamped = true; return axis.back(); }
        return x;
    };
    const double a = clamp_axis(alt_, altitude);
    const double p = clamp_axis(pow_, power);
    auto bracket = [](const std::vector<double>& axis, double x) {
        size_t j = static_cast<size_t>(
            std::upper_bound(axis.begin(), axis.end(), x) - axis.begin());
        if (j == 0) j = 1;
        if (j >= axis.size()) j = axis.size() - 1;
        return j;
    };
    const size_t ia = bracket(alt_, a), jp = bracket(pow_, p);
    const double wa = (a - alt_[ia - 1]) / (alt_[ia] - alt_[ia - 1]);
    const double wp = (p - pow_[jp - 1]) / (pow_[jp] - pow_[jp - 1]);
    const double o00 = omega_[ia - 1][jp - 1], o01 = omega_[ia - 1][jp];
    const double o10 = omega_[ia][jp - 1], o11 = omega_[ia][jp];
    s.omega = (1 - wa) * ((1 - wp) * o00 + wp * o01) +
              wa * ((1 - wp) * o10 + wp * o11);
    return s;
}

FanMapTable FanMapTable::synthetic_default() {
    std::vector<double> altitudes, powers;
    for (int i = 0; i <= 12; ++i) altitudes.push_back(1000.0 * i);
    for (int j = 0; j <= 16; ++j) powers.push_back(-2.0 + 0.75 * j);  // MW
    std::vector<std::vector<double>> omega(altitudes.size(),
                                           std::vector<double>(powers.size()));
    for (size_t i = 0; i < altitudes.size(); ++i) {
        for (size_t j = 0; j < powers.size(); ++j) {
            const double p = std::max(powers[j], 0.0);
            omega[i][j] = (60.0 + 22.0 * std::log1p(p)) *
                          (1.0 - 0.008 * altitudes[i] / 1000.0);
        }
    }
    return FanMapTable(std::move(altitudes), std::move(powers), std::move(omega));
}

LossTable::LossTable(std::vector<Row> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("LossTable: no rows");
    if (!std::is_sorted(rows_.begin(), rows_.end(),
                        [](const Row& a, const Row& b) { return a.omega < b.omega; }))
        throw std::invalid_argument("LossTable: rows must be sorted by omega");
    for (const auto& r : rows_) {
        if (!r.motor.valid() || !r.generator.valid() || !r.fuel.valid())
            throw std::invalid_argument(
                "LossTable: coefficients violate c2 >= 0, c1 > 0");
    }
}

LossTable LossTable::load(const std::string& path) {
    CsvTable table = read_csv(path);
    const char* names[] = {"omega", "kappa2", "kappa1", "kappa0", "nu2", "nu1",
                           "nu0", "beta2", "beta1", "beta0"};
    int cols[10];
    for (int j = 0; j < 10; ++j) {
        cols[j] = table.column(names[j]);
        if (cols[j] < 0)
            throw CsvParseError(path + ": loss table missing column " +
                                std::string(names[j]));
    }
    std::vector<Row> rows;
    for (const auto& r : table.rows) {
        Row row;
        row.omega = r[cols[0]];
        row.motor = {r[cols[1]], r[cols[2]], r[cols[3]]};
        row.generator = {r[cols[4]], r[cols[5]], r[cols[6]]};
        row.fuel = {r[cols[7]], r[cols[8]], r[cols[9]]};
        rows.push_back(row);
    }
    return LossTable(std::move(rows));
}

QuadMap LossTable::at(double omega, Kind kind) const {
    auto pick = [kind](const Row& r) -> const QuadMap& {
        switch (kind) {
            case Kind::Motor: return r.motor;
            case Kind::Generator: return r.generator;
            default: return r.fuel;
        }
    };
    if (rows_.size() == 1 || omega <= rows_.front().omega) return pick(rows_.front());
    if (omega >= rows_.back().omega) return pick(rows_.back());
    auto it = std::upper_bound(
        rows_.begin(), rows_.end(), omega,
        [](double w, const Row& r) { return w < r.omega; });
    const Row& hi = *it;
    const Row& lo = *(it - 1);
    const double w = (omega - lo.omega) / (hi.omega - lo.omega);
    const QuadMap& a = pick(lo);
    const QuadMap& b = pick(hi);
    return {a.c2 + w * (b.c2 - a.c2), a.c1 + w * (b.c1 - a.c1),
            a.c0 + w * (b.c0 - a.c0)};
}

QuadMap LossTable::motor_at(double omega) const { return at(omega, Kind::Motor); }
QuadMap LossTable::generator_at(double omega) const { return at(omega, Kind::Generator); }
QuadMap LossTable::fuel_at(double omega) const { return at(omega, Kind::Fuel); }

LossTable LossTable::synthetic_default() {
    // Electrical machines: h(P) = k2 P^2 + P, with k2 chosen so that
    // h(2 MW) = 2/0.95, i.e. ~95% efficiency at 2 MW and no no-load loss.
    const double k2 = (2.0 / 0.95 - 2.0) / 4.0;
    QuadMap machine{k2, 1.0, 0.0};
    QuadMap fuel{0.0, 0.0821, 0.0327};
    Row lo{0.0, machine, machine, fuel};
    Row hi{1000.0, machine, machine, fuel};
    return LossTable({lo, hi});
}

}  // namespace hea
