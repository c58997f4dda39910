#include "rieszlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace rieszlab {

namespace {

// Antiderivative of sqrt(r^2 - t^2).
double circ_antideriv(double t, double r) {
    t = std::clamp(t, -r, r);
    return 0.5 * (t * std::sqrt(std::max(0.0, r * r - t * t)) + r * r * std::asin(t / r));
}

} // namespace

double disk_rect_intersection_area(const Disk& d, double x0, double x1, double y0, double y1) {
    // Shift so the disk sits at the origin.
    x0 -= d.center.x; x1 -= d.center.x;
    y0 -= d.center.y; y1 -= d.center.y;
    const double r = d.radius;
    double a = std::max(x0, -r), b = std::min(x1, r);
    if (a >= b) return 0.0;

    // Split [a, b] where the clipped chord length changes branch.
    double cuts[10];
    int ncuts = 0;
    cuts[ncuts++] = a;
    cuts[ncuts++] = b;
    for (double yy : {y0, y1}) {
        if (std::abs(yy) < r) {
            const double xc = std::sqrt(r * r - yy * yy);
            if (-xc > a && -xc < b) cuts[ncuts++] = -xc;
            if (xc > a && xc < b) cuts[ncuts++] = xc;
        }
    }
    std::sort(cuts, cuts + ncuts);

    double area = 0.0;
    for (int i = 0; i + 1 < ncuts; ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        if (hi - lo <= 0.0) continue;
        const double xm = 0.5 * (lo + hi);
        const double c = std::sqrt(std::max(0.0, r * r - xm * xm));
        const double top = std::min(y1, c);
        const double bot = std::max(y0, -c);
        if (top <= bot) continue;
        // Integrate the active branch of (top - bot) in closed form.
        double seg = 0.0;
        if (top == y1) seg += y1 * (hi - lo);
        else seg += circ_antideriv(hi, r) - circ_antideriv(lo, r);
        if (bot == y0) seg -= y0 * (hi - lo);
        else seg += circ_antideriv(hi, r) - circ_antideriv(lo, r);
        area += seg;
    }
    return area;
}

double GridField::integral(int c) const {
    const double h = spec_.spacing();
    double sum = 0.0;
    for (double v : component(c)) sum += v;
    return sum * h * h;
}

double GridField::l2_norm() const {
    const double h = spec_.spacing();
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum * h * h);
}

double GridField::max_abs(int c) const {
    double m = 0.0;
    for (double v : component(c)) m = std::max(m, std::abs(v));
    return m;
}

double GridField::sample(int c, Point2 p) const {
    const int nn = n();
    const double h = spec_.spacing();
    // Continuous sample coordinates (cell centers at integer + 0.5).
    double fx = (p.x + spec_.half_extent) / h - 0.5;
    double fy = (p.y + spec_.half_extent) / h - 0.5;
    fx = std::clamp(fx, 0.0, static_cast<double>(nn - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(nn - 1));
    const int ix = std::min(nn - 2, static_cast<int>(fx));
    const int iy = std::min(nn - 2, static_cast<int>(fy));
    const double tx = fx - ix, ty = fy - iy;
    return (1 - tx) * (1 - ty) * at(c, ix, iy) + tx * (1 - ty) * at(c, ix + 1, iy) +
           (1 - tx) * ty * at(c, ix, iy + 1) + tx * ty * at(c, ix + 1, iy + 1);
}

bool GridField::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double boundary_mass_fraction(const GridField& f, int c) {
    const int nn = f.n();
    const int frame = std::max(1, nn / 10);
    double total = 0.0, outer = 0.0;
    for (int iy = 0; iy < nn; ++iy) {
        for (int ix = 0; ix < nn; ++ix) {
            const double v = std::abs(f.at(c, ix, iy));
            total += v;
            if (ix < frame || iy < frame || ix >= nn - frame || iy >= nn - frame) outer += v;
        }
    }
    return total > 0.0 ? outer / total : 0.0;
}

} // namespace rieszlab
