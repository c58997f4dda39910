#include "rieszlab/riesz.hpp"

#include <cmath>
#include <stdexcept>

#include "rieszlab/fft.hpp"
#include "rieszlab/parallel.hpp"
#include "rieszlab/profiles.hpp"

namespace rieszlab {

RieszEngine::RieszEngine(double s) : s_(s) {
    if (!(s > 0.0 && s < 2.0) || s == 1.0)
        throw std::invalid_argument("RieszEngine: s must lie in (0,2) with s != 1");
    sigma_ = riesz_sigma(s);
}

Vec2 RieszEngine::kernel(double s, Vec2 x) {
    const double r = x.norm();
    if (r == 0.0) throw std::domain_error("riesz kernel: singular at the origin");
    const double scale = std::pow(r, -(s + 1.0));
    return {x.x * scale, x.y * scale};
}

double RieszEngine::kernel_magnitude(double s, double r) {
    return std::pow(r, -s);
}

namespace {

// Transform of one constant-density grid cell evaluated at a point inside
// it: subdivide, use odd symmetry for the sub-cell containing the point.
Vec2 singular_cell_value(double s, Point2 x, Point2 cell_center, double h, double density) {
    const int k = 16;
    const double hs = h / k;
    Vec2 sum{0.0, 0.0};
    for (int iy = 0; iy < k; ++iy) {
        for (int ix = 0; ix < k; ++ix) {
            const Point2 c{cell_center.x - h / 2 + (ix + 0.5) * hs,
                           cell_center.y - h / 2 + (iy + 0.5) * hs};
            if (std::abs(c.x - x.x) <= hs / 2 && std::abs(c.y - x.y) <= hs / 2)
                continue; // odd kernel against the locally constant density
            sum += RieszEngine::kernel(s, x - c);
        }
    }
    return sum * (hs * hs * density);
}

// Newton kernel over the sub-cell containing x: equal-area disk value.
double newton_singular_self(double s, double cell_h) {
    const double re = cell_h / std::sqrt(M_PI);
    return -1.0 / (s - 1.0) * 2.0 * M_PI * std::pow(re, 3.0 - s) / (3.0 - s) / (cell_h * cell_h);
}

double newton_singular_cell(double s, Point2 x, Point2 cell_center, double h, double density) {
    const int k = 16;
    const double hs = h / k;
    double sum = 0.0;
    for (int iy = 0; iy < k; ++iy) {
        for (int ix = 0; ix < k; ++ix) {
            const Point2 c{cell_center.x - h / 2 + (ix + 0.5) * hs,
                           cell_center.y - h / 2 + (iy + 0.5) * hs};
            if (std::abs(c.x - x.x) <= hs / 2 && std::abs(c.y - x.y) <= hs / 2) {
                sum += newton_singular_self(s, hs) * hs * hs;
                continue;
            }
            sum += -1.0 / (s - 1.0) * std::pow(dist(x, c), 1.0 - s) * hs * hs;
        }
    }
    return sum * density;
}

// Midpoint quadrature of one cap against a kernel functional. The lattice
// is anchored at the evaluation point so the singular cell (flagged to the
// callback) is always centered on it.
template <typename Acc>
void cap_quadrature(const Cap& cap, Point2 x, double /*s*/, Acc&& acc) {
    const double r = cap.support.radius;
    const Point2 c = cap.support.center;
    const double d = dist(x, c);
    const int k = (d < 3.0 * r) ? 96 : 24;
    const double hs = 2.0 * r / k;
    const int kx0 = static_cast<int>(std::floor((c.x - r - x.x) / hs - 0.5));
    const int kx1 = static_cast<int>(std::ceil((c.x + r - x.x) / hs + 0.5));
    const int ky0 = static_cast<int>(std::floor((c.y - r - x.y) / hs - 0.5));
    const int ky1 = static_cast<int>(std::ceil((c.y + r - x.y) / hs + 0.5));
    for (int ky = ky0; ky <= ky1; ++ky) {
        for (int kx = kx0; kx <= kx1; ++kx) {
            const Point2 p{x.x + kx * hs, x.y + ky * hs};
            const double rho = cap_density(cap, p);
            if (rho == 0.0) continue;
            acc(p, rho * hs * hs, kx == 0 && ky == 0, hs);
        }
    }
}

} // namespace

std::vector<Vec2> RieszEngine::transform_direct(const Measure& mu, std::span<const Point2> points,
                                                const ExclusionFn& exclusion) const {
    std::vector<Vec2> out(points.size());
    const double s = s_;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                parallel_for(points.size(), [&](std::size_t i) {
                    Vec2 sum{0.0, 0.0};
                    for (std::size_t j = 0; j < m.size(); ++j) {
                        if (exclusion && exclusion(i, m.points[j])) continue;
                        sum += m.weights[j] * kernel(s, points[i] - m.points[j]);
                    }
                    out[i] = sum;
                });
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                parallel_for(points.size(), [&](std::size_t i) {
                    Vec2 sum{0.0, 0.0};
                    for (const Cap& cap : m.caps) {
                        if (exclusion && exclusion(i, cap.support.center)) continue;
                        cap_quadrature(cap, points[i], s,
                                       [&](Point2 p, double w, bool singular, double) {
                                           if (singular) return; // odd kernel, centered cell
                                           sum += w * kernel(s, points[i] - p);
                                       });
                    }
                    out[i] = sum;
                });
            } else {
                const GridSpec& spec = m.density.spec();
                const double h = spec.spacing();
                const int n = spec.resolution;
                parallel_for(points.size(), [&](std::size_t i) {
                    const Point2 x = points[i];
                    Vec2 sum{0.0, 0.0};
                    for (int iy = 0; iy < n; ++iy) {
                        for (int ix = 0; ix < n; ++ix) {
                            const double rho = m.density.at(0, ix, iy);
                            if (rho == 0.0) continue;
                            const Point2 c = spec.cell_center(ix, iy);
                            if (exclusion && exclusion(i, c)) continue;
                            if (std::abs(c.x - x.x) <= h / 2 && std::abs(c.y - x.y) <= h / 2) {
                                sum += singular_cell_value(s, x, c, h, rho);
                                continue;
                            }
                            sum += (rho * h * h) * kernel(s, x - c);
                        }
                    }
                    out[i] = sum;
                });
            }
        },
        mu);
    return out;
}

GridField RieszEngine::transform_grid(const GridField& density) const {
    const double s = s_;
    GridField out(density.spec(), 2);
    for (int comp = 0; comp < 2; ++comp) {
        GridField conv = convolve_kernel(
            density,
            [s, comp](Vec2 z) {
                const double r = z.norm();
                const double scale = std::pow(r, -(s + 1.0));
                return (comp == 0 ? z.x : z.y) * scale;
            },
            0.0 /* odd kernel: centered cell cancels */);
        for (std::size_t i = 0; i < conv.cells(); ++i)
            out.component(comp)[i] = conv.component(0)[i];
    }
    return out;
}

SpectralResult RieszEngine::transform_fft(const GridField& density) const {
    if (density.components() != 1)
        throw std::invalid_argument("transform_fft: scalar density expected");
    const int n = density.n();
    const int big = 2 * n;
    const double L = density.spec().half_extent;
    const double period = 4.0 * L;

    SpectralResult result{GridField(density.spec(), 2), boundary_mass_fraction(density), false};
    result.boundary_warning = result.boundary_fraction > 0.01;

    ComplexGrid spec_f(big);
    // Center the field in the padded window.
    const int off = n / 2;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            spec_f.at(ix + off, iy + off) = density.at(0, ix, iy);
    spec_f.forward();

    const double dxi = 1.0 / period;
    const double s = s_;
    auto mult_scalar = [s](double xi_j, double rho) {
        return xi_j * std::pow(rho, s - 3.0);
    };

    for (int comp = 0; comp < 2; ++comp) {
        ComplexGrid work(big);
        for (int ky = 0; ky < big; ++ky) {
            const double xi_y = dft_freq(ky, big, period);
            const int my = (ky <= big / 2) ? ky : ky - big;
            for (int kx = 0; kx < big; ++kx) {
                const double xi_x = dft_freq(kx, big, period);
                const int mx = (kx <= big / 2) ? kx : kx - big;
                double mval;
                if (mx == 0 && my == 0) {
                    mval = 0.0; // principal-value convention at xi = 0
                } else if (std::abs(mx) <= 4 && std::abs(my) <= 4) {
                    // Cell-average the steep multiplier near the origin.
                    const int sub = 9;
                    double acc = 0.0;
                    for (int sy = 0; sy < sub; ++sy) {
                        for (int sx = 0; sx < sub; ++sx) {
                            const double ux = xi_x + ((sx + 0.5) / sub - 0.5) * dxi;
                            const double uy = xi_y + ((sy + 0.5) / sub - 0.5) * dxi;
                            const double rho = std::hypot(ux, uy);
                            if (rho == 0.0) continue;
                            acc += mult_scalar(comp == 0 ? ux : uy, rho);
                        }
                    }
                    mval = acc / (sub * sub);
                } else {
                    const double rho = std::hypot(xi_x, xi_y);
                    mval = mult_scalar(comp == 0 ? xi_x : xi_y, rho);
                }
                // i * sigma * mval
                work.at(kx, ky) = spec_f.at(kx, ky) * std::complex<double>(0.0, sigma_ * mval);
            }
        }
        work.inverse();
        const double scale = 1.0 / (static_cast<double>(big) * big);
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                result.field.at(comp, ix, iy) = work.at(ix + off, iy + off).real() * scale;
    }
    return result;
}

std::vector<double> RieszEngine::adjoint_direct(const VectorMeasure& eta,
                                                std::span<const Point2> points) const {
    std::vector<double> out(points.size(), 0.0);
    const double s = s_;
    if (std::holds_alternative<VectorAtoms>(eta)) {
        const auto& m = std::get<VectorAtoms>(eta);
        parallel_for(points.size(), [&](std::size_t i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < m.points.size(); ++j)
                sum -= dot(kernel(s, points[i] - m.points[j]), m.weights[j]);
            out[i] = sum;
        });
    } else {
        const auto& f = std::get<GridField>(eta);
        if (f.components() != 2)
            throw std::invalid_argument("adjoint_direct: 2-component density expected");
        const GridSpec& spec = f.spec();
        const double h = spec.spacing();
        const int n = spec.resolution;
        parallel_for(points.size(), [&](std::size_t i) {
            const Point2 x = points[i];
            double sum = 0.0;
            for (int iy = 0; iy < n; ++iy) {
                for (int ix = 0; ix < n; ++ix) {
                    const Vec2 w{f.at(0, ix, iy), f.at(1, ix, iy)};
                    if (w.x == 0.0 && w.y == 0.0) continue;
                    const Point2 c = spec.cell_center(ix, iy);
                    // Exact singularity (evaluation at the cell center):
                    // subdivide with bilinear density; the odd kernel kills
                    // the constant part. Off-center points keep the plain
                    // term, which preserves the discrete duality pairing.
                    if (std::abs(c.x - x.x) <= 1e-9 * h && std::abs(c.y - x.y) <= 1e-9 * h) {
                        const int k = 8;
                        const double hs = h / k;
                        for (int sy = 0; sy < k; ++sy) {
                            for (int sx = 0; sx < k; ++sx) {
                                const Point2 p{c.x - h / 2 + (sx + 0.5) * hs,
                                               c.y - h / 2 + (sy + 0.5) * hs};
                                if (std::abs(p.x - x.x) <= hs / 2 && std::abs(p.y - x.y) <= hs / 2)
                                    continue;
                                const Vec2 wv{f.sample(0, p), f.sample(1, p)};
                                sum -= dot(kernel(s, x - p), wv) * hs * hs;
                            }
                        }
                        continue;
                    }
                    sum -= dot(kernel(s, x - c), w) * h * h;
                }
            }
            out[i] = sum;
        });
    }
    return out;
}

GridField RieszEngine::adjoint_grid(const GridField& eta2) const {
    if (eta2.components() != 2)
        throw std::invalid_argument("adjoint_grid: 2-component density expected");
    const double s = s_;
    GridField out(eta2.spec(), 1);
    for (int comp = 0; comp < 2; ++comp) {
        GridField one(eta2.spec(), 1);
        for (std::size_t i = 0; i < one.cells(); ++i)
            one.component(0)[i] = eta2.component(comp)[i];
        GridField conv = convolve_kernel(
            one,
            [s, comp](Vec2 z) {
                const double r = z.norm();
                const double scale = std::pow(r, -(s + 1.0));
                return (comp == 0 ? z.x : z.y) * scale;
            },
            0.0);
        for (std::size_t i = 0; i < out.cells(); ++i)
            out.component(0)[i] -= conv.component(0)[i];
    }
    return out;
}

std::vector<double> RieszEngine::newton_potential(const Measure& nu,
                                                  std::span<const Point2> points) const {
    std::vector<double> out(points.size(), 0.0);
    const double s = s_;
    const double c0 = -1.0 / (s - 1.0);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                parallel_for(points.size(), [&](std::size_t i) {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < m.size(); ++j) {
                        const double r = dist(points[i], m.points[j]);
                        if (r == 0.0) throw std::domain_error("newton_potential: point atop an atom");
                        sum += c0 * m.weights[j] * std::pow(r, 1.0 - s);
                    }
                    out[i] = sum;
                });
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                parallel_for(points.size(), [&](std::size_t i) {
                    double sum = 0.0;
                    for (const Cap& cap : m.caps) {
                        cap_quadrature(cap, points[i], s,
                                       [&](Point2 p, double w, bool singular, double cell_h) {
                                           if (singular) {
                                               const double re = cell_h / std::sqrt(M_PI);
                                               sum += c0 * w * 2.0 * M_PI *
                                                      std::pow(re, 3.0 - s) /
                                                      ((3.0 - s) * cell_h * cell_h);
                                               return;
                                           }
                                           sum += c0 * w * std::pow(dist(points[i], p), 1.0 - s);
                                       });
                    }
                    out[i] = sum;
                });
            } else {
                const GridSpec& spec = m.density.spec();
                const double h = spec.spacing();
                const int n = spec.resolution;
                parallel_for(points.size(), [&](std::size_t i) {
                    const Point2 x = points[i];
                    double sum = 0.0;
                    for (int iy = 0; iy < n; ++iy) {
                        for (int ix = 0; ix < n; ++ix) {
                            const double rho = m.density.at(0, ix, iy);
                            if (rho == 0.0) continue;
                            const Point2 c = spec.cell_center(ix, iy);
                            if (std::abs(c.x - x.x) <= h / 2 && std::abs(c.y - x.y) <= h / 2) {
                                sum += newton_singular_cell(s, x, c, h, rho);
                                continue;
                            }
                            sum += c0 * rho * h * h * std::pow(dist(x, c), 1.0 - s);
                        }
                    }
                    out[i] = sum;
                });
            }
        },
        nu);
    return out;
}

GridField RieszEngine::newton_potential_grid(const GridField& density) const {
    const double s = s_;
    const double c0 = -1.0 / (s - 1.0);
    return convolve_kernel(
        density,
        [s, c0](Vec2 z) { return c0 * std::pow(z.norm(), 1.0 - s); },
        c0 * 2.0 * M_PI * std::pow(density.spec().spacing() / std::sqrt(M_PI), 3.0 - s) /
            ((3.0 - s) * density.spec().spacing() * density.spec().spacing()));
}

double RieszEngine::maximal_transform(const Measure& nu, Point2 x,
                                      std::span<const Disk> family) const {
    if (family.empty()) throw std::invalid_argument("maximal_transform: empty disk family");
    double best = 0.0;
    for (const Disk& d : family) {
        if (!d.contains(x))
            throw std::invalid_argument("maximal_transform: family disk does not contain x");
        const Disk dd = d.scaled(2.0);
        const ExclusionFn excl = [&dd](std::size_t, Point2 y) { return dd.contains(y); };
        const Point2 pts[1] = {x};
        const Vec2 v = transform_direct(nu, pts, excl)[0];
        best = std::max(best, v.norm());
    }
    return best;
}

std::vector<Disk> RieszEngine::dyadic_family(Point2 x, double r0, int count) {
    std::vector<Disk> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) out.emplace_back(x, r0 * std::ldexp(1.0, k));
    return out;
}

} // namespace rieszlab
