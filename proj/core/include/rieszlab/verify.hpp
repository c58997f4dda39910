#ifndef RIESZLAB_VERIFY_HPP
#define RIESZLAB_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rieszlab/cantor.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/profiles.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/riesz.hpp"

namespace rieszlab {

/// Kernel-smoothness constant for the oscillation bound, measured once on
/// a deterministic calibration sweep: the least C with
///   |K(x'-y) - K(x''-y)| <= C |x'-x''| / |x_B - y|^{s+1}
/// over the sweep geometries (|y - x_B| >= M/3 rho, x', x'' in B).
double calibrate_c11(double s);

/// Oscillation of R nu over the sampled Omega points against
///   2 (eps rho)^{-s} |nu|(M/3 B) + (C11 / M) sup_r |nu|(D(x_B, r)) / r^s.
/// Requires every sample to be eps*rho-separated from supp nu.
EstimateReport oscillation_bound(const Measure& nu, std::span<const Point2> omega_samples,
                                 const Disk& B, double eps, double M, double s, double c11);

/// Dual form: eta = eta_plus - eta_minus supported inside B with
/// eta(Omega) = 0; bound on ∫ |R eta| d nu with the same bracket times
/// |eta|(Omega).
EstimateReport oscillation_dual(const Measure& eta_plus, const Measure& eta_minus,
                                const AtomicMeasure& nu, const Disk& B, double eps, double M,
                                double s, double c11);

/// Claim 1: |sum_n R^(n) mu'| <= R# mu' + 1 on supp mu', with the
/// inner-disk integral report (bounded by 2 M^s delta / eps^s < 1).
EstimateReport claim1_check(const CantorStructure& st);

struct GramResult {
    std::vector<std::vector<double>> gram;          // G_{nk}
    double max_cancellation_residual = 0.0;         // per-cell, must vanish
    std::vector<EstimateReport> claim2_per_level;   // one per n = 0..N-2
    EstimateReport summary;
};

/// G_{nk} = ∫ <R^(n) mu', R^(k) mu'> d mu', the per-cell cancellation
/// residuals, and the cross-term (Claim 2) checks via measured per-cell
/// oscillations.
GramResult gram_matrix(const CantorStructure& st);

struct Claim3Options {
    double lambda_hat = 1.0;            // lambda = lambda_hat (m_j/H_j)^4
    std::optional<double> lambda_abs;   // absolute override
    int minimize_iters = 600;
    std::uint64_t seed = 1;
    int cap_grid_n = 0;                 // >0: spectral cap transforms on an n-grid
};

/// Claim 3 harness for level n: measured ∫|R^(n) mu'|^2 d mu' against the
/// lower bound assembled from the mollified comparison (three steps), the
/// equilibrium certificate lambda m - beta m, and the Hoelder step, all
/// with measured quantities. Each intermediate lands in the metadata.
EstimateReport claim3_lower(const CantorStructure& st, int n, const Claim3Options& opts);

/// Maximum principle for R* eta with smooth compactly supported eta
/// (2-component grid density): a positive global max must be attained on
/// the one-cell dilation of supp eta, tolerance 1e-3 * field scale.
EstimateReport max_principle_check(const GridField& eta, double s);

/// V-version: the field V(R nu) + R*(g nu) for a smooth positive density
/// nu and smooth vector field g.
EstimateReport max_principle_check_v(const GridField& nu_density, const GridField& g, double s);

/// Density reproduction from the potential: the difference-form integral
/// applied to u = U(p m2) recovers p; relative L2 error over the inner
/// quarter window.
EstimateReport reproduction_check(const GridField& p, double s);

/// (sum a^5/b^4, (sum a)^5/(sum b)^4); first >= second. Throws on
/// nonpositive entries.
std::pair<double, double> holder_check(std::span<const double> a, std::span<const double> b);

} // namespace rieszlab

#endif
