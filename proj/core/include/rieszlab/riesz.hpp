#ifndef RIESZLAB_RIESZ_HPP
#define RIESZLAB_RIESZ_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rieszlab/grid.hpp"
#include "rieszlab/measure.hpp"

namespace rieszlab {

/// Vector measure: weighted vector point masses or a 2-component density.
struct VectorAtoms {
    std::vector<Point2> points;
    std::vector<Vec2> weights;
};
using VectorMeasure = std::variant<VectorAtoms, GridField>;

/// Result of a spectral evaluation together with the boundary-mass warning.
struct SpectralResult {
    GridField field;
    double boundary_fraction = 0.0;
    bool boundary_warning = false; // > 1% of mass in the outer 10% frame
};

/// Per-point exclusion predicate: true when source point y is excluded from
/// the integral defining the transform at evaluation point #i.
using ExclusionFn = std::function<bool(std::size_t eval_index, Point2 y)>;

/// Evaluation engine for the s-Riesz transform and its relatives.
/// Fourier convention: F f(xi) = ∫ f(x) e^{-2 pi i <x,xi>} dm2(x), under
/// which R_j(f m2) has multiplier i sigma xi_j / |xi|^{3-s} with
/// sigma = -2 pi / ((s-1) A(2, 3-s)).
class RieszEngine {
public:
    explicit RieszEngine(double s);

    double s() const { return s_; }
    double sigma() const { return sigma_; }

    /// K(x) = x / |x|^{s+1}. Throws on x = 0.
    static Vec2 kernel(double s, Vec2 x);
    /// |x|-homogeneous scalar kernel |x|^{-s} magnitude helper.
    static double kernel_magnitude(double s, double r);

    /// Direct evaluation of (R mu)(x) at each point. Gridded variants use
    /// the sampled-kernel midpoint rule with the singular cell handled by
    /// odd symmetry (subdivided when the point is off-center).
    std::vector<Vec2> transform_direct(const Measure& mu, std::span<const Point2> points,
                                       const ExclusionFn& exclusion = {}) const;

    /// Spectral multiplier route on a 2x zero-padded grid, cropped back.
    /// Multiplier is 0 at xi = 0 and cell-averaged near the origin.
    SpectralResult transform_fft(const GridField& density) const;

    /// R applied to a gridded density via real-space kernel convolution
    /// (identical quadrature to transform_direct, evaluated at every cell).
    GridField transform_grid(const GridField& density) const;

    /// R* eta = -sum_j R_j eta_j, evaluated directly at points.
    std::vector<double> adjoint_direct(const VectorMeasure& eta, std::span<const Point2> points) const;
    /// R* eta on the whole grid via real-space kernel convolution.
    GridField adjoint_grid(const GridField& eta2) const;

    /// U nu = -(s-1)^{-1} ∫ |x-y|^{1-s} dnu(y), direct at points.
    std::vector<double> newton_potential(const Measure& nu, std::span<const Point2> points) const;
    /// Same quadrature on the whole grid via convolution.
    GridField newton_potential_grid(const GridField& density) const;

    /// sup over the family of | ∫_{R^2 \ 2D} K d nu |; every disk must
    /// contain x. Throws on an empty family.
    double maximal_transform(const Measure& nu, Point2 x, std::span<const Disk> family) const;

    /// Dyadic disk family centered at x: radii r0 * 2^k, k = 0..count-1.
    static std::vector<Disk> dyadic_family(Point2 x, double r0, int count);

private:
    double s_;
    double sigma_;
};

} // namespace rieszlab

#endif
