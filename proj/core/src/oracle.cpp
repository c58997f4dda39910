#include "rieszlab/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "rieszlab/riesz.hpp"

namespace rieszlab {

QuadratureSpec QuadratureSpec::dyadic(double h0, int levels) {
    QuadratureSpec spec;
    for (int i = 0; i < levels; ++i) spec.spacings.push_back(h0 * std::ldexp(1.0, -i));
    return spec;
}

namespace {

struct DensityView {
    Point2 lo, hi;
    std::function<double(Point2)> density;
};

// Continuum object integrated by the oracle: caps evaluate their analytic
// profile; gridded data is read as its bilinear interpolant.
DensityView density_view(const Measure& mu) {
    if (std::holds_alternative<CapSumMeasure>(mu)) {
        const auto& m = std::get<CapSumMeasure>(mu);
        Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Cap& c : m.caps) {
            lo.x = std::min(lo.x, c.support.center.x - c.support.radius);
            lo.y = std::min(lo.y, c.support.center.y - c.support.radius);
            hi.x = std::max(hi.x, c.support.center.x + c.support.radius);
            hi.y = std::max(hi.y, c.support.center.y + c.support.radius);
        }
        return {lo, hi, [&m](Point2 p) { return capsum_density(m, p); }};
    }
    const auto& m = std::get<GriddedMeasure>(mu);
    const double L = m.density.spec().half_extent;
    return {{-L, -L}, {L, L}, [&m, L](Point2 p) {
                if (std::abs(p.x) >= L || std::abs(p.y) >= L) return 0.0;
                return m.density.sample(0, p);
            }};
}

// Midpoint lattice anchored at the evaluation point, so the singular cell
// is always centered on x and the odd part of the kernel cancels cleanly.
template <typename KernelAcc>
void midpoint_sweep(const DensityView& view, Point2 x, double h, KernelAcc&& acc) {
    const int kx0 = static_cast<int>(std::floor((view.lo.x - x.x) / h - 0.5));
    const int kx1 = static_cast<int>(std::ceil((view.hi.x - x.x) / h + 0.5));
    const int ky0 = static_cast<int>(std::floor((view.lo.y - x.y) / h - 0.5));
    const int ky1 = static_cast<int>(std::ceil((view.hi.y - x.y) / h + 0.5));
    for (int ky = ky0; ky <= ky1; ++ky) {
        for (int kx = kx0; kx <= kx1; ++kx) {
            const Point2 c{x.x + kx * h, x.y + ky * h};
            const double rho = view.density(c);
            if (rho == 0.0) continue;
            acc(c, rho * h * h, kx == 0 && ky == 0, h);
        }
    }
}

OracleValue assemble(const std::vector<Vec2>& ladder, int order) {
    OracleValue out;
    out.ladder = ladder;
    const std::size_t n = ladder.size();
    if (n == 1) {
        out.value = ladder[0];
        out.error_estimate = 0.0;
        return out;
    }
    const Vec2 fine = ladder[n - 1];
    const Vec2 prev = ladder[n - 2];
    const double denom = std::pow(2.0, order) - 1.0;
    out.value = fine + (fine - prev) / denom;
    out.error_estimate = (fine - prev).norm();
    return out;
}

} // namespace

OracleValue quad_transform(const Measure& mu, double s, Point2 x, const QuadratureSpec& spec) {
    if (std::holds_alternative<AtomicMeasure>(mu)) {
        const auto& m = std::get<AtomicMeasure>(mu);
        Vec2 sum{0.0, 0.0};
        for (std::size_t j = 0; j < m.size(); ++j)
            sum += m.weights[j] * RieszEngine::kernel(s, x - m.points[j]);
        return {sum, 0.0, {sum}};
    }
    if (spec.spacings.size() < 2)
        throw std::invalid_argument("quad_transform: at least 2 refinement levels required");
    const DensityView view = density_view(mu);
    std::vector<Vec2> ladder;
    for (double h : spec.spacings) {
        Vec2 sum{0.0, 0.0};
        midpoint_sweep(view, x, h, [&](Point2 c, double w, bool singular, double) {
            if (singular) return; // odd kernel against the cell-constant part
            sum += w * RieszEngine::kernel(s, x - c);
        });
        ladder.push_back(sum);
    }
    return assemble(ladder, spec.richardson_order);
}

OracleValue quad_newton(const Measure& mu, double s, Point2 x, const QuadratureSpec& spec) {
    const double c0 = -1.0 / (s - 1.0);
    if (std::holds_alternative<AtomicMeasure>(mu)) {
        const auto& m = std::get<AtomicMeasure>(mu);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            sum += c0 * m.weights[j] * std::pow(dist(x, m.points[j]), 1.0 - s);
        return {{sum, 0.0}, 0.0, {{sum, 0.0}}};
    }
    if (spec.spacings.size() < 2)
        throw std::invalid_argument("quad_newton: at least 2 refinement levels required");
    const DensityView view = density_view(mu);
    std::vector<Vec2> ladder;
    for (double h : spec.spacings) {
        double sum = 0.0;
        midpoint_sweep(view, x, h, [&](Point2 c, double w, bool singular, double cell_h) {
            if (singular) {
                const double re = cell_h / std::sqrt(M_PI);
                sum += c0 * w / (cell_h * cell_h) * 2.0 * M_PI * std::pow(re, 3.0 - s) / (3.0 - s);
                return;
            }
            sum += c0 * w * std::pow(dist(x, c), 1.0 - s);
        });
        ladder.push_back({sum, 0.0});
    }
    return assemble(ladder, spec.richardson_order);
}

RefineCheck refine_check(double fast, double oracle, double tolerance) {
    const double floor = 1e-12;
    const double scale = std::max(std::abs(oracle), floor);
    const double ratio = std::abs(fast - oracle) / scale;
    return {ratio <= tolerance, ratio};
}

} // namespace rieszlab
