#include "rieszlab/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace rieszlab {

namespace {

// Endpoint-flat bump generating the smoothstep transition.
double step_bump(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

// Cumulative integral on a uniform grid with third-order end rules.
std::vector<double> cumulative(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double inc;
        if (i + 2 < n)
            inc = h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        else
            inc = h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
        out[i + 1] = out[i] + inc;
    }
    return out;
}

double hermite(double t0, double h, double y0, double y1, double d0, double d1, double t) {
    const double u = (t - t0) / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 +
           (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
}

} // namespace

VProfile::VProfile() {
    const int n = 8192;
    table_h_ = 1.0 / n;
    std::vector<double> bump(n + 1), ib;
    for (int i = 0; i <= n; ++i) bump[i] = step_bump(i * table_h_);
    ib = cumulative(bump, table_h_);
    const double total = ib.back();

    std::vector<double> smoothstep(n + 1);
    for (int i = 0; i <= n; ++i) smoothstep[i] = 1.0 - ib[i] / total;
    const std::vector<double> cs = cumulative(smoothstep, table_h_);
    const std::vector<double> ccs = cumulative(cs, table_h_);

    ddv_table_.resize(n + 1);
    dv_table_.resize(n + 1);
    v_table_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double u = i * table_h_;
        ddv_table_[i] = 2.0 * smoothstep[i];
        dv_table_[i] = 2.0 + 2.0 * cs[i];
        v_table_[i] = 1.0 + 2.0 * u + 2.0 * ccs[i];
    }
}

double VProfile::v(double t) const {
    if (t < 0.0) throw std::invalid_argument("v: negative argument");
    if (t <= 1.0) return t * t;
    if (t >= 2.0) return v_table_.back() + dv_table_.back() * (t - 2.0);
    const double u = t - 1.0;
    const std::size_t i = std::min(v_table_.size() - 2, static_cast<std::size_t>(u / table_h_));
    return hermite(i * table_h_, table_h_, v_table_[i], v_table_[i + 1], dv_table_[i],
                   dv_table_[i + 1], u);
}

double VProfile::dv(double t) const {
    if (t < 0.0) throw std::invalid_argument("v': negative argument");
    if (t <= 1.0) return 2.0 * t;
    if (t >= 2.0) return dv_table_.back();
    const double u = t - 1.0;
    const std::size_t i = std::min(dv_table_.size() - 2, static_cast<std::size_t>(u / table_h_));
    return hermite(i * table_h_, table_h_, dv_table_[i], dv_table_[i + 1], ddv_table_[i],
                   ddv_table_[i + 1], u);
}

double VProfile::ddv(double t) const {
    if (t < 0.0) throw std::invalid_argument("v'': negative argument");
    if (t <= 1.0) return 2.0;
    if (t >= 2.0) return 0.0;
    const double u = t - 1.0;
    const std::size_t i = std::min(ddv_table_.size() - 2, static_cast<std::size_t>(u / table_h_));
    const double w = (u - i * table_h_) / table_h_;
    return (1.0 - w) * ddv_table_[i] + w * ddv_table_[i + 1];
}

Vec2 VProfile::gradV(Vec2 x) const {
    const double r = x.norm();
    if (r == 0.0) return {0.0, 0.0};
    const double slope = dv(r);
    return x * (slope / r);
}

double VProfile::legendre(double tau) const {
    const double taumax = slope_max();
    if (tau < 0.0 || tau > taumax * (1.0 + 1e-12))
        throw std::invalid_argument("legendre: tau outside the slope range [0, v'(2)]");
    if (tau <= 2.0) return tau * tau / 4.0; // optimum in the quadratic zone
    // Monotone root-find for v'(t) = tau on [1, 2].
    double lo = 1.0, hi = 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dv(mid) < tau) lo = mid;
        else hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    return tau * t - v(t);
}

double VProfile::biconjugate(double t) const {
    // Concave in tau; ternary search over the slope range.
    double lo = 0.0, hi = slope_max();
    auto f = [&](double tau) { return t * tau - legendre(tau); };
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) < f(m2)) lo = m1;
        else hi = m2;
    }
    return f(0.5 * (lo + hi));
}

const VProfile& v_profile() {
    static const VProfile instance;
    return instance;
}

} // namespace rieszlab
