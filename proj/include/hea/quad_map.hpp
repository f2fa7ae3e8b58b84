#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hea {

struct MapDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Convex quadratic input-output map y = c2 x^2 + c1 x + c0 with c2 >= 0 and
/// c1 > 0, restricted to the non-decreasing branch x >= -c1/(2 c2).
/// Holds one time step's motor (kappa), generator (nu) or fuel (beta)
/// coefficients.
struct QuadMap {
    double c2 = 0.0;
    double c1 = 1.0;
    double c0 = 0.0;

    /// Left endpoint of the monotone branch; -inf when the map is linear.
    double vertex() const {
        if (c2 <= 0.0) return -std::numeric_limits<double>::infinity();
        return -c1 / (2.0 * c2);
    }

    /// Value at the vertex, the smallest attainable output.
    double min_value() const {
        if (c2 <= 0.0) return -std::numeric_limits<double>::infinity();
        return c0 - c1 * c1 / (4.0 * c2);
    }

    bool valid() const { return c2 >= 0.0 && c1 > 0.0; }

    /// Evaluate on the monotone branch. Throws MapDomainError when x lies
    /// left of the vertex beyond roundoff.
    double eval(double x) const {
        if (c2 > 0.0) {
            const double v = vertex();
            const double tol = 1e-9 * (1.0 + std::abs(v));
            if (x < v - tol)
                throw MapDomainError("QuadMap::eval: input left of monotone branch");
            if (x < v) x = v;
        }
        return (c2 * x + c1) * x + c0;
    }

    double slope(double x) const { return 2.0 * c2 * x + c1; }

    /// Unique preimage of y on the monotone branch. Throws MapDomainError
    /// when y is below the map minimum.
    double invert(double y) const {
        if (c2 <= 0.0) return (y - c0) / c1;
        const double disc = c1 * c1 - 4.0 * c2 * (c0 - y);
        const double tol = 1e-9 * (c1 * c1 + std::abs(4.0 * c2 * (c0 - y)));
        if (disc < -tol)
            throw MapDomainError("QuadMap::invert: target below map minimum");
        const double d = std::sqrt(std::max(disc, 0.0));
        // Stable quadratic root on the x >= -c1/2c2 branch.
        if (c0 - y <= 0.0)
            return (-c1 + d) / (2.0 * c2);
        return -2.0 * (c0 - y) / (c1 + d);
    }
};

/// Drive power as a convex quadratic in the aircraft mass,
/// P_drv = eta2 m^2 + eta1 m + eta0 (total, MW).
struct EtaCoeffs {
    double eta2 = 0.0;  // MW/kg^2
    double eta1 = 0.0;  // MW/kg
    double eta0 = 0.0;  // MW

    double eval(double m) const { return (eta2 * m + eta1) * m + eta0; }
    double slope(double m) const { return 2.0 * eta2 * m + eta1; }
    double vertex() const {
        if (eta2 <= 0.0) return -std::numeric_limits<double>::infinity();
        return -eta1 / (2.0 * eta2);
    }
};

}  // namespace hea
