#ifndef RIESZLAB_GRID_HPP
#define RIESZLAB_GRID_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rieszlab/geometry.hpp"

namespace rieszlab {

/// Uniform square grid covering [-L, L]^2 with n cells per side.
/// Samples live at cell centers: x_i = -L + (i + 1/2) h, h = 2L/n.
struct GridSpec {
    double half_extent = 1.0; // L
    int resolution = 8;       // n, power of two, >= 8

    GridSpec() = default;
    GridSpec(double L, int n) : half_extent(L), resolution(n) {
        if (!(L > 0.0)) throw std::invalid_argument("GridSpec: half_extent must be positive");
        if (n < 8 || (n & (n - 1)) != 0)
            throw std::invalid_argument("GridSpec: resolution must be a power of two >= 8");
    }

    double spacing() const { return 2.0 * half_extent / resolution; }
    Point2 cell_center(int ix, int iy) const {
        const double h = spacing();
        return {-half_extent + (ix + 0.5) * h, -half_extent + (iy + 0.5) * h};
    }
    /// Index of the cell containing p along one axis; may fall outside [0, n).
    int cell_index(double coord) const {
        return static_cast<int>(std::floor((coord + half_extent) / spacing()));
    }
    bool in_grid(Point2 p) const {
        return p.x >= -half_extent && p.x < half_extent && p.y >= -half_extent && p.y < half_extent;
    }
    bool operator==(const GridSpec& o) const {
        return half_extent == o.half_extent && resolution == o.resolution;
    }
};

/// Scalar or 2-vector samples on a GridSpec, component-planar, row-major
/// within each component (index = iy * n + ix).
class GridField {
public:
    GridField() = default;
    GridField(const GridSpec& spec, int components)
        : spec_(spec), components_(components),
          data_(static_cast<std::size_t>(components) * spec.resolution * spec.resolution, 0.0) {
        if (components != 1 && components != 2)
            throw std::invalid_argument("GridField: components must be 1 or 2");
    }

    const GridSpec& spec() const { return spec_; }
    int components() const { return components_; }
    int n() const { return spec_.resolution; }

    double& at(int c, int ix, int iy) { return data_[plane(c) + idx(ix, iy)]; }
    double at(int c, int ix, int iy) const { return data_[plane(c) + idx(ix, iy)]; }

    std::span<double> component(int c) { return {data_.data() + plane(c), cells()}; }
    std::span<const double> component(int c) const { return {data_.data() + plane(c), cells()}; }
    std::span<const double> raw() const { return data_; }
    std::span<double> raw() { return data_; }

    std::size_t cells() const { return static_cast<std::size_t>(n()) * n(); }

    /// h^2 * sum of samples of one component.
    double integral(int c = 0) const;
    /// sqrt( h^2 * sum of |field|^2 ), all components.
    double l2_norm() const;
    double max_abs(int c) const;

    /// Bilinear interpolation clamped to the sample hull.
    double sample(int c, Point2 p) const;
    Vec2 sample_vec(Point2 p) const {
        return {sample(0, p), components_ == 2 ? sample(1, p) : 0.0};
    }

    bool all_finite() const;

private:
    std::size_t idx(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * n() + ix;
    }
    std::size_t plane(int c) const { return static_cast<std::size_t>(c) * cells(); }

    GridSpec spec_;
    int components_ = 1;
    std::vector<double> data_;
};

/// Sample a callable f(Point2)->double at all cell centers.
template <typename F>
GridField sample_scalar(const GridSpec& spec, F&& f) {
    GridField out(spec, 1);
    for (int iy = 0; iy < spec.resolution; ++iy)
        for (int ix = 0; ix < spec.resolution; ++ix)
            out.at(0, ix, iy) = f(spec.cell_center(ix, iy));
    return out;
}

/// Fraction of one component's mass (in absolute value) lying in the outer
/// 10% frame of the grid.
double boundary_mass_fraction(const GridField& f, int c = 0);

} // namespace rieszlab

#endif
