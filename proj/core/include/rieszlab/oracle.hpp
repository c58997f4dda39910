#ifndef RIESZLAB_ORACLE_HPP
#define RIESZLAB_ORACLE_HPP

#include <span>
#include <string>
#include <vector>

#include "rieszlab/measure.hpp"

namespace rieszlab {

inline constexpr const char* kOracleVersion = "oracle-v1";

/// Refinement ladder for the brute-force reference quadrature.
struct QuadratureSpec {
    std::vector<double> spacings;   // strictly decreasing, at least 2
    int richardson_order = 2;

    static QuadratureSpec dyadic(double h0, int levels);
};

struct OracleValue {
    Vec2 value;              // Richardson-extrapolated
    double error_estimate;   // |finest - previous|
    std::vector<Vec2> ladder;
};

/// Reference s-Riesz transform at one point: refined midpoint sums with the
/// odd-kernel singular-cell rule, Richardson-extrapolated over the ladder.
/// Atomic measures are summed exactly (error 0).
OracleValue quad_transform(const Measure& mu, double s, Point2 x, const QuadratureSpec& spec);

/// Same ladder for the Newton potential (scalar; returned in value.x).
OracleValue quad_newton(const Measure& mu, double s, Point2 x, const QuadratureSpec& spec);

/// pass iff |fast - oracle| <= tol * max(|oracle|, 1e-12); also returns the
/// achieved ratio.
struct RefineCheck {
    bool pass;
    double ratio;
};
RefineCheck refine_check(double fast, double oracle, double tolerance);

} // namespace rieszlab

#endif
