#ifndef RIESZLAB_PROFILES_HPP
#define RIESZLAB_PROFILES_HPP

#include <vector>

#include "rieszlab/geometry.hpp"
#include "rieszlab/grid.hpp"

namespace rieszlab {

/// The smooth convex profile v: v(0) = v'(0) = 0, v'' non-increasing,
/// v'' = 2 on [0,1], 0 on [2,inf), with the fixed bump-integral smoothstep
/// transition on [1,2]. Exact formulas on [0,1] and [2,inf); dense cubic
/// Hermite tables on [1,2]. By symmetry of the smoothstep, v'(2) = 3.
class VProfile {
public:
    VProfile();

    double v(double t) const;
    double dv(double t) const;   // v'
    double ddv(double t) const;  // v''

    double V(Vec2 x) const { return v(x.norm()); }
    Vec2 gradV(Vec2 x) const;

    /// Legendre transform v*(tau) = sup_t (tau t - v(t)), tau in [0, v'(2)].
    double legendre(double tau) const;
    /// (v*)*(t) computed by ternary search over the slope range.
    double biconjugate(double t) const;

    double slope_max() const { return dv_table_.back(); } // v'(2)

private:
    double transition(double u) const; // smoothstep q(1+u), u in [0,1]
    std::vector<double> v_table_, dv_table_, ddv_table_; // nodes on [1,2]
    double table_h_ = 0.0;
};

/// Shared immutable instance (the profile is fixed by construction).
const VProfile& v_profile();

/// A(d, alpha) = pi^{alpha - d/2} Gamma((d-alpha)/2) / Gamma(alpha/2).
/// Throws on poles of the Gamma quotient.
double riesz_constant_A(int d, double alpha);

/// The multiplier constant sigma(s) = -2 pi / ((s-1) A(2, 3-s)).
double riesz_sigma(double s);

/// phi_o(x) = e^{1 - |x|^2}, the standard Schwartz majorant of the unit
/// disk indicator.
inline double phi_standard(Point2 x) { return std::exp(1.0 - x.norm2()); }

/// Standard cap pair: psi_o synthesized from the analytic spectrum
/// i sigma^{-1} xi |xi|^{1-s} phi_o^(xi) on a 4x-extended period (to push
/// periodization images far away), cropped to `spec`. The field is exactly
/// radial-directional: psi_o(x) = p(|x|) x/|x|; the radial table p is the
/// angular average of the synthesized grid plus a power-law tail model.
struct StandardCap {
    double s = 1.5;
    GridField psi;                 // 2-vector field on the requested spec
    std::vector<double> radial_r;  // radial table abscissae
    std::vector<double> radial_p;  // p(r)
    double tail_coeff = 0.0;       // p(r) ~ tail_coeff * r^{-(4-s)} beyond table
    double decay_constant = 0.0;   // measured sup |psi(x)| (1+|x|)^{4-s}
    double tail_slope = 0.0;       // least-squares log-log slope on [4,16]

    /// p(|x|) via table + tail model.
    double radial(double r) const;
    /// psi_o at an arbitrary point.
    Vec2 eval(Point2 x) const;
};

/// Requires spec.half_extent >= 16 so the decay window [4,16] fits.
StandardCap build_standard_cap(double s, const GridSpec& spec);

struct FracIntegralOptions {
    /// Difference-form truncation radius for alpha < 0 (default L/2).
    double diff_radius = 0.0;
    /// Far-field monopole coefficient of the *input* field, i.e. c with
    /// field(x) ~ c |x|^{-p_far} beyond the grid; enables tail corrections.
    double far_coeff = 0.0;
    double far_power = 0.0;
};

/// K_alpha phi = A(2, alpha) phi * |x|^{alpha-2} for alpha in (0,2);
/// for alpha in (-2,0) the difference form
///   A(2,alpha) ∫ (phi(x+y) - phi(x)) / |y|^{2-alpha} dy
/// with paired symmetric cells, an exact analytic tail weight, and an
/// optional monopole far-field correction.
GridField frac_integral(const GridField& phi, double alpha,
                        const FracIntegralOptions& opts = {});

/// Radial table of T(|x|) = ∫_{|z|>R} |z|^{-p} |x-z|^{-q} dm2(z) evaluated
/// by polar quadrature; used for far-field corrections of compositions.
class FarPowerCorrection {
public:
    FarPowerCorrection(double p, double q, double cutoff_radius, double max_x);
    double operator()(double r) const;

private:
    std::vector<double> radii_, values_;
};

} // namespace rieszlab

#endif
