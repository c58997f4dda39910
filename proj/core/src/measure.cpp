#include "rieszlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rieszlab/random.hpp"

namespace rieszlab {

double bump_profile(double radial) {
    if (radial >= 1.0) return 0.0;
    const double u2 = radial * radial;
    return std::exp(1.0 - 1.0 / (1.0 - u2));
}

double bump_unit_mass() {
    // pi * ∫_0^1 exp(1 - 1/(1-w)) dw, integrand smooth and flat at w = 1.
    static const double value = [] {
        const int n = 1 << 14;
        const double h = 1.0 / n;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = (i + 0.5) * h;
            sum += std::exp(1.0 - 1.0 / (1.0 - w));
        }
        return M_PI * sum * h;
    }();
    return value;
}

double cap_density(const Cap& cap, Point2 p) {
    const double r = cap.support.radius;
    const double u = dist(p, cap.support.center) / r;
    if (u >= 1.0) return 0.0;
    return cap.mass * bump_profile(u) / (r * r * bump_unit_mass());
}

double capsum_density(const CapSumMeasure& m, Point2 p) {
    double sum = 0.0;
    for (const Cap& c : m.caps) sum += cap_density(c, p);
    return sum;
}

double total_mass(const Measure& mu) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                double sum = 0.0;
                for (double w : m.weights) sum += w;
                return sum;
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                double sum = 0.0;
                for (const Cap& c : m.caps) sum += c.mass;
                return sum;
            } else {
                return m.density.integral(0);
            }
        },
        mu);
}

namespace {

// Mass of one cap inside a disk: polar midpoint quadrature of the radial
// profile against the disk indicator; exact shortcuts when the cap is
// entirely inside or outside.
double cap_mass_in_disk(const Cap& cap, const Disk& d) {
    const double cc = dist(cap.support.center, d.center);
    if (cc + cap.support.radius <= d.radius) return cap.mass;
    if (cc >= cap.support.radius + d.radius) return 0.0;
    const int nr = 96, na = 128;
    const double r = cap.support.radius;
    double sum = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double rho = (i + 0.5) / nr; // relative radius
        const double w = bump_profile(rho) * rho;
        int inside = 0;
        for (int j = 0; j < na; ++j) {
            const double ang = 2.0 * M_PI * (j + 0.5) / na;
            const Point2 p = cap.support.center + Vec2{rho * r * std::cos(ang), rho * r * std::sin(ang)};
            if (d.contains(p)) ++inside;
        }
        sum += w * inside;
    }
    const double total = [&] {
        double t = 0.0;
        for (int i = 0; i < nr; ++i) {
            const double rho = (i + 0.5) / nr;
            t += bump_profile(rho) * rho * na;
        }
        return t;
    }();
    return cap.mass * (total > 0.0 ? sum / total : 0.0);
}

} // namespace

double ball_mass(const Measure& mu, const Disk& d) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                double sum = 0.0;
                for (std::size_t i = 0; i < m.size(); ++i)
                    if (d.contains(m.points[i])) sum += m.weights[i];
                return sum;
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                double sum = 0.0;
                for (const Cap& c : m.caps) sum += cap_mass_in_disk(c, d);
                return sum;
            } else {
                const GridSpec& spec = m.density.spec();
                const double h = spec.spacing();
                // Only sweep the bounding rows/cols of the disk.
                const int lo_x = std::max(0, spec.cell_index(d.center.x - d.radius) - 1);
                const int hi_x = std::min(spec.resolution - 1, spec.cell_index(d.center.x + d.radius) + 1);
                const int lo_y = std::max(0, spec.cell_index(d.center.y - d.radius) - 1);
                const int hi_y = std::min(spec.resolution - 1, spec.cell_index(d.center.y + d.radius) + 1);
                double sum = 0.0;
                for (int iy = lo_y; iy <= hi_y; ++iy)
                    for (int ix = lo_x; ix <= hi_x; ++ix)
                        if (d.contains(spec.cell_center(ix, iy))) sum += m.density.at(0, ix, iy);
                return sum * h * h;
            }
        },
        mu);
}

double growth_constant(const Measure& mu, double s, std::span<const Disk> disks) {
    if (disks.empty()) throw std::invalid_argument("growth_constant: empty disk list");
    double best = 0.0;
    for (const Disk& d : disks)
        best = std::max(best, ball_mass(mu, d) / std::pow(d.radius, s));
    return best;
}

namespace {

void measure_bbox(const Measure& mu, Point2& lo, Point2& hi) {
    lo = {1e300, 1e300};
    hi = {-1e300, -1e300};
    auto extend = [&](Point2 p, double pad) {
        lo.x = std::min(lo.x, p.x - pad);
        lo.y = std::min(lo.y, p.y - pad);
        hi.x = std::max(hi.x, p.x + pad);
        hi.y = std::max(hi.y, p.y + pad);
    };
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                for (const Point2& p : m.points) extend(p, 0.0);
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                for (const Cap& c : m.caps) extend(c.support.center, c.support.radius);
            } else {
                const double L = m.density.spec().half_extent;
                extend({-L, -L}, 0.0);
                extend({L, L}, 0.0);
            }
        },
        mu);
}

} // namespace

std::vector<Disk> growth_disk_family(const Measure& mu, int halton_count,
                                     std::span<const Disk> cell_aligned) {
    Point2 lo, hi;
    measure_bbox(mu, lo, hi);
    const double span = std::max(hi.x - lo.x, hi.y - lo.y);
    const double diam = std::max(span, 1e-9);
    std::vector<Disk> out(cell_aligned.begin(), cell_aligned.end());
    for (int i = 0; i < halton_count; ++i) {
        const Point2 c{lo.x + halton(i + 1, 2) * (hi.x - lo.x),
                       lo.y + halton(i + 1, 3) * (hi.y - lo.y)};
        // Dyadic radii from diam/64 to 2*diam.
        for (int k = 0; k <= 7; ++k) out.emplace_back(c, diam * std::ldexp(2.0, -k));
    }
    return out;
}

int CantorSquare::cell_of_atom(int atom, int generation) const {
    int node = 0; // root
    for (int g = 0; g < generation; ++g) {
        bool found = false;
        for (int ch : cells[node].children) {
            if (ch >= 0 && atom >= cells[ch].atom_begin && atom < cells[ch].atom_end) {
                node = ch;
                found = true;
                break;
            }
        }
        if (!found) throw std::logic_error("cell_of_atom: atom outside tree range");
    }
    return node;
}

CantorSquare make_cantor_square(double s, int generations, double kappa, double mass) {
    if (!(s > 0.0 && s <= 2.0)) throw std::invalid_argument("make_cantor_square: s must lie in (0, 2]");
    if (generations < 0) throw std::invalid_argument("make_cantor_square: generations must be >= 0");
    if (!(kappa >= 1.0)) throw std::invalid_argument("make_cantor_square: kappa must be >= 1");
    const double theta = std::pow(4.0, -1.0 / s) / kappa;
    if (theta > 0.5)
        throw std::invalid_argument("make_cantor_square: theta >= 1/2 would overlap cells");

    CantorSquare out;
    out.theta = theta;
    out.generations = generations;
    const int atom_count = 1 << (2 * generations);
    out.measure.points.reserve(atom_count);
    out.measure.weights.assign(atom_count, mass / atom_count);

    // Depth-first build; atoms appear in leaf order so every cell owns a
    // contiguous atom range.
    out.cells.push_back({0, {0.0, 0.0}, 1.0, -1, {-1, -1, -1, -1}, 0, 0});
    std::function<void(int)> build = [&](int ci) {
        CantorCellNode& me = out.cells[ci];
        const int level = me.level;
        me.atom_begin = static_cast<int>(out.measure.points.size());
        if (level == generations) {
            out.measure.points.push_back(me.center);
            out.cells[ci].atom_end = static_cast<int>(out.measure.points.size());
            return;
        }
        const double off = me.side * (1.0 - theta) / 2.0;
        const double child_side = me.side * theta;
        const Point2 c = me.center;
        const Point2 centers[4] = {{c.x - off, c.y - off},
                                   {c.x + off, c.y - off},
                                   {c.x - off, c.y + off},
                                   {c.x + off, c.y + off}};
        for (int k = 0; k < 4; ++k) {
            const int child = static_cast<int>(out.cells.size());
            out.cells.push_back({level + 1, centers[k], child_side, ci, {-1, -1, -1, -1}, 0, 0});
            out.cells[ci].children[k] = child;
            build(child);
        }
        out.cells[ci].atom_end = static_cast<int>(out.measure.points.size());
    };
    build(0);
    return out;
}

CapSumMeasure mollify(std::span<const MollifyCell> cells) {
    CapSumMeasure out;
    for (const MollifyCell& cell : cells) {
        if (cell.region_mass <= 0.0) continue; // zero-mass cell skipped
        Cap cap{cell.omega_tilde, cell.region_mass};
        const double r = cap.support.radius;
        const double sup = cap.mass / (r * r * bump_unit_mass());
        if (sup > cell.region_mass / (r * r) * (1.0 + 1e-12))
            throw std::runtime_error("mollify: cap profile violates the sup-density bound");
        out.caps.push_back(cap);
    }
    return out;
}

AtomicMeasure restrict_atoms(const AtomicMeasure& mu, const std::function<bool(Point2)>& keep) {
    AtomicMeasure out;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (keep(mu.points[i])) {
            out.points.push_back(mu.points[i]);
            out.weights.push_back(mu.weights[i]);
        }
    }
    return out;
}

} // namespace rieszlab
