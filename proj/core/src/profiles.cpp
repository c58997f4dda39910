#include "rieszlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rieszlab/fft.hpp"

namespace rieszlab {

namespace {

bool near_nonpositive_integer(double z) {
    if (z > 1e-9) return false;
    return std::abs(z - std::round(z)) < 1e-9;
}

} // namespace

double riesz_constant_A(int d, double alpha) {
    const double a1 = (d - alpha) / 2.0;
    const double a2 = alpha / 2.0;
    if (near_nonpositive_integer(a1) || near_nonpositive_integer(a2))
        throw std::invalid_argument("riesz_constant_A: Gamma-quotient pole");
    return std::pow(M_PI, alpha - d / 2.0) * std::tgamma(a1) / std::tgamma(a2);
}

double riesz_sigma(double s) {
    if (!(s > 0.0 && s < 2.0) || s == 1.0)
        throw std::invalid_argument("riesz_sigma: s must lie in (0,2), s != 1");
    return -2.0 * M_PI / ((s - 1.0) * riesz_constant_A(2, 3.0 - s));
}

double StandardCap::radial(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= radial_r.back())
        return tail_coeff * std::pow(r, -(4.0 - s));
    const double h = radial_r[1] - radial_r[0];
    const std::size_t i = std::min(radial_r.size() - 2, static_cast<std::size_t>(r / h));
    const double w = (r - radial_r[i]) / h;
    return (1.0 - w) * radial_p[i] + w * radial_p[i + 1];
}

Vec2 StandardCap::eval(Point2 x) const {
    const double r = x.norm();
    if (r == 0.0) return {0.0, 0.0};
    const double p = radial(r);
    return x * (p / r);
}

StandardCap build_standard_cap(double s, const GridSpec& spec) {
    if (spec.half_extent < 16.0)
        throw std::invalid_argument("build_standard_cap: half_extent >= 16 required for the decay window");
    const double sigma = riesz_sigma(s);
    const int n = spec.resolution;
    const int big = 4 * n;                 // 4x-extended synthesis period
    const double period = 8.0 * spec.half_extent;
    const double dxi = 1.0 / period;

    StandardCap cap;
    cap.s = s;
    cap.psi = GridField(spec, 2);

    auto spectrum = [&](double xi_x, double xi_y, int comp) -> double {
        const double rho = std::hypot(xi_x, xi_y);
        if (rho == 0.0) return 0.0;
        const double phi_hat = M_E * M_PI * std::exp(-M_PI * M_PI * rho * rho);
        const double xi_j = (comp == 0) ? xi_x : xi_y;
        return xi_j * std::pow(rho, 1.0 - s) * phi_hat / sigma;
    };

    const int off = (big - n) / 2;
    for (int comp = 0; comp < 2; ++comp) {
        ComplexGrid work(big);
        const double cshift = 0.5 - big / 2.0;
        for (int ky = 0; ky < big; ++ky) {
            const double xi_y = dft_freq(ky, big, period);
            const int my = (ky <= big / 2) ? ky : ky - big;
            for (int kx = 0; kx < big; ++kx) {
                const double xi_x = dft_freq(kx, big, period);
                const int mx = (kx <= big / 2) ? kx : kx - big;
                double val;
                if (mx == 0 && my == 0) {
                    val = 0.0;
                } else if (std::abs(mx) <= 4 && std::abs(my) <= 4) {
                    const int sub = 9;
                    double acc = 0.0;
                    for (int sy = 0; sy < sub; ++sy)
                        for (int sx = 0; sx < sub; ++sx)
                            acc += spectrum(xi_x + ((sx + 0.5) / sub - 0.5) * dxi,
                                            xi_y + ((sy + 0.5) / sub - 0.5) * dxi, comp);
                    val = acc / (sub * sub);
                } else {
                    val = spectrum(xi_x, xi_y, comp);
                }
                // i * val, with the half-cell lattice phase folded in.
                const double phase = 2.0 * M_PI * (mx + my) * cshift / big;
                work.at(kx, ky) = std::complex<double>(0.0, val) *
                                  std::complex<double>(std::cos(phase), std::sin(phase));
            }
        }
        work.inverse();
        const double scale = dxi * dxi;
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                cap.psi.at(comp, ix, iy) = work.at(ix + off, iy + off).real() * scale;
    }

    // Radial profile by angular averaging of <psi, x_hat>.
    const double h = spec.spacing();
    const double rmax = 0.95 * spec.half_extent;
    const int nr = static_cast<int>(rmax / (h / 2.0));
    cap.radial_r.resize(nr + 1);
    cap.radial_p.resize(nr + 1);
    for (int k = 0; k <= nr; ++k) {
        const double r = k * (h / 2.0);
        cap.radial_r[k] = r;
        if (k == 0) {
            cap.radial_p[k] = 0.0;
            continue;
        }
        double acc = 0.0;
        const int na = 64;
        for (int j = 0; j < na; ++j) {
            const double ang = 2.0 * M_PI * (j + 0.5) / na;
            const Vec2 dir{std::cos(ang), std::sin(ang)};
            const Vec2 val = cap.psi.sample_vec(dir * r);
            acc += dot(val, dir);
        }
        cap.radial_p[k] = acc / na;
    }
    const double r_ref = cap.radial_r.back();
    cap.tail_coeff = cap.radial_p.back() * std::pow(r_ref, 4.0 - s);

    double dc = 0.0;
    for (int k = 1; k <= nr; ++k)
        dc = std::max(dc, std::abs(cap.radial_p[k]) * std::pow(1.0 + cap.radial_r[k], 4.0 - s));
    cap.decay_constant = dc;

    // Least-squares log-log slope on the window [4, 16].
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = 1; k <= nr; ++k) {
        const double r = cap.radial_r[k];
        if (r < 4.0 || r > 16.0) continue;
        const double p = std::abs(cap.radial_p[k]);
        if (p <= 0.0) continue;
        const double lx = std::log(r), ly = std::log(p);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    cap.tail_slope = (m >= 2) ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return cap;
}

GridField frac_integral(const GridField& phi, double alpha, const FracIntegralOptions& opts) {
    if (phi.components() != 1)
        throw std::invalid_argument("frac_integral: scalar field expected");
    if (!(alpha > -2.0 && alpha < 2.0) || alpha == 0.0)
        throw std::invalid_argument("frac_integral: alpha must lie in (-2,0) or (0,2)");
    const double A = riesz_constant_A(2, alpha);
    const double h = phi.spec().spacing();
    const double L = phi.spec().half_extent;

    if (alpha > 0.0) {
        const double re = h / std::sqrt(M_PI);
        const double self = A * 2.0 * M_PI * std::pow(re, alpha) / (alpha * h * h);
        return convolve_kernel(
            phi, [alpha, A](Vec2 z) { return A * std::pow(z.norm(), alpha - 2.0); }, self);
    }

    // Difference form. Truncated kernel within radius Y; the symmetric
    // lattice pairs opposite cells, which realizes the principal value.
    const double Y = opts.diff_radius > 0.0 ? opts.diff_radius : L / 2.0;
    auto trunc_kernel = [alpha, Y](Vec2 z) {
        const double r = z.norm();
        return (r <= Y) ? std::pow(r, alpha - 2.0) : 0.0;
    };
    GridField conv = convolve_kernel(phi, trunc_kernel, 0.0);

    // Discrete in-window weight sum and the |y|^2 moment of the truncated
    // kernel (same truncation), for the -phi(x) term and the quadratic
    // Taylor correction below.
    double w_in = 0.0, moment_in = 0.0;
    {
        const int reach = static_cast<int>(std::ceil(Y / h)) + 1;
        for (int iy = -reach; iy <= reach; ++iy) {
            for (int ix = -reach; ix <= reach; ++ix) {
                if (ix == 0 && iy == 0) continue;
                const double r = std::hypot(ix * h, iy * h);
                if (r <= Y) {
                    w_in += std::pow(r, alpha - 2.0) * h * h;
                    moment_in += std::pow(r, alpha) * h * h;
                }
            }
        }
    }
    const double w_tail = -2.0 * M_PI * std::pow(Y, alpha) / alpha; // exact, alpha < 0
    // Lattice defect of the |y|^2 moment: the paired difference rule only
    // converges like h^{2+alpha} against the quadratic Taylor term, so the
    // defect times Laplacian/4 restores second-order accuracy.
    const double moment_defect = 2.0 * M_PI * std::pow(Y, alpha + 2.0) / (alpha + 2.0) - moment_in;

    std::unique_ptr<FarPowerCorrection> mono;
    if (opts.far_coeff != 0.0)
        mono = std::make_unique<FarPowerCorrection>(2.0 - alpha, opts.far_power, Y,
                                                    1.5 * L * std::sqrt(2.0));

    GridField out(phi.spec(), 1);
    const int n = phi.n();
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Point2 x = phi.spec().cell_center(ix, iy);
            double val = conv.at(0, ix, iy) - phi.at(0, ix, iy) * (w_in + w_tail);
            if (ix > 0 && ix + 1 < n && iy > 0 && iy + 1 < n) {
                const double lap =
                    (phi.at(0, ix + 1, iy) + phi.at(0, ix - 1, iy) + phi.at(0, ix, iy + 1) +
                     phi.at(0, ix, iy - 1) - 4.0 * phi.at(0, ix, iy)) /
                    (h * h);
                val += 0.25 * lap * moment_defect;
            }
            if (mono) val += opts.far_coeff * (*mono)(x.norm());
            out.at(0, ix, iy) = A * val;
        }
    }
    return out;
}

FarPowerCorrection::FarPowerCorrection(double p, double q, double cutoff_radius, double max_x) {
    // T(|x|) = ∫_{|y|>R} |y|^{-p} |x-y|^{-q} dm2(y), tabulated in |x|.
    const int nx = 128;
    const int nr = 400, na = 256;
    const double R = cutoff_radius;
    const double r_far = 200.0 * R;
    radii_.resize(nx + 1);
    values_.resize(nx + 1);
    // Log-spaced radial quadrature from R to r_far.
    const double lr0 = std::log(R), lr1 = std::log(r_far);
    std::vector<double> rmid(nr), rw(nr);
    for (int i = 0; i < nr; ++i) {
        const double la = lr0 + (lr1 - lr0) * i / nr;
        const double lb = lr0 + (lr1 - lr0) * (i + 1) / nr;
        rmid[i] = std::exp(0.5 * (la + lb));
        rw[i] = std::exp(lb) - std::exp(la);
    }
    for (int k = 0; k <= nx; ++k) {
        const double x = max_x * k / nx;
        radii_[k] = x;
        double acc = 0.0;
        for (int i = 0; i < nr; ++i) {
            const double r = rmid[i];
            double ang = 0.0;
            for (int j = 0; j < na; ++j) {
                const double th = 2.0 * M_PI * (j + 0.5) / na;
                const double d2 = r * r + x * x - 2.0 * r * x * std::cos(th);
                ang += std::pow(d2, -q / 2.0);
            }
            acc += std::pow(r, 1.0 - p) * (ang * 2.0 * M_PI / na) * rw[i];
        }
        // Analytic remainder beyond r_far where |x-y| ~ |y|.
        if (p + q > 2.0) acc += 2.0 * M_PI * std::pow(r_far, 2.0 - p - q) / (p + q - 2.0);
        values_[k] = acc;
    }
}

double FarPowerCorrection::operator()(double r) const {
    const double h = radii_[1] - radii_[0];
    if (r >= radii_.back()) return values_.back();
    const std::size_t i = std::min(values_.size() - 2, static_cast<std::size_t>(r / h));
    const double w = (r - radii_[i]) / h;
    return (1.0 - w) * values_[i] + w * values_[i + 1];
}

} // namespace rieszlab
