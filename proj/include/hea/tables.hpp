#pragma once

#include <string>
#include <vector>

#include "hea/quad_map.hpp"

namespace hea {

/// Rectangular-grid table mapping (altitude [m], drive power [MW]) to the
/// non-dimensional fan speed Omega at a fixed Mach number. Bilinear
/// interpolation; queries outside the hull are clamped (with a flag on the
/// result the caller may warn about).
class FanMapTable {
public:
    FanMapTable() = default;
    FanMapTable(std::vector<double> altitudes, std::vector<double> powers,
                std::vector<std::vector<double>> omega, double mach = 0.55);

    /// Load `alt,P0,P1,...` CSV: first column altitude, remaining columns
    /// Omega at each power grid value (named by header).
    static FanMapTable load(const std::string& path);

    struct Sample {
        double omega = 0.0;
        bool clamped = false;
    };
    Sample interpolate(double altitude, double power) const;

    double mach() const { return mach_; }
    const std::vector<double>& altitudes() const { return alt_; }
    const std::vector<double>& powers() const { return pow_; }

    /// Synthetic default map: Omega affine in log(1 + max(P,0)), mildly
    /// decreasing with altitude. Stands in for proprietary fan data.
    static FanMapTable synthetic_default();

private:
    std::vector<double> alt_;                 // ascending
    std::vector<double> pow_;                 // ascending, MW
    std::vector<std::vector<double>> omega_;  // omega_[i_alt][j_pow]
    double mach_ = 0.55;
};

/// Per-shaft-speed loss and fuel coefficients. Rows sorted by omega; each
/// coefficient is interpolated piecewise-linearly across omega and clamped
/// at the table ends.
class LossTable {
public:
    struct Row {
        double omega = 0.0;  // rad/s
        QuadMap motor;       // kappa
        QuadMap generator;   // nu
        QuadMap fuel;        // beta
    };

    LossTable() = default;
    explicit LossTable(std::vector<Row> rows);

    /// CSV columns: omega,kappa2,kappa1,kappa0,nu2,nu1,nu0,beta2,beta1,beta0
    static LossTable load(const std::string& path);

    QuadMap motor_at(double omega) const;
    QuadMap generator_at(double omega) const;
    QuadMap fuel_at(double omega) const;

    double omega_min() const { return rows_.front().omega; }
    double omega_max() const { return rows_.back().omega; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Speed-independent defaults: motor/generator quadratics sized for
    /// roughly 95% efficiency at 2 MW with zero no-load loss, and the
    /// default linear fuel map.
    static LossTable synthetic_default();

private:
    enum class Kind { Motor, Generator, Fuel };
    QuadMap at(double omega, Kind kind) const;
    std::vector<Row> rows_;
};

}  // namespace hea
