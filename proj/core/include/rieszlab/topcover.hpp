#ifndef RIESZLAB_TOPCOVER_HPP
#define RIESZLAB_TOPCOVER_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "rieszlab/measure.hpp"
#include "rieszlab/profiles.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/riesz.hpp"

namespace rieszlab {

struct BudgetExceeded : std::runtime_error {
    double achieved;
    explicit BudgetExceeded(double got, double budget)
        : std::runtime_error("top cover budget exceeded: sum r^s = " + std::to_string(got) +
                             " > H = " + std::to_string(budget)),
          achieved(got) {}
};

struct PreconditionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TopCoverEntry {
    Disk disk;
    double tilde_mass = 0.0; // mu(T~_j) = mu(T_j \ union of earlier T_i)
};

/// Finite disk cover at scale <= r_star with sum r^s <= H. Built by the
/// quadtree-greedy rule, so every support point is covered (uncovered mass
/// is zero up to the ulp-level boundary jitter).
struct TopCover {
    std::vector<TopCoverEntry> entries;
    double s = 1.5;
    double r_star = 0.0;
    double budget = 0.0;       // H
    double budget_used = 0.0;  // sum r_j^s
    double uncovered_mass = 0.0;
    double total_mass = 0.0;

    /// First entry whose (jittered) disk contains p, or -1.
    int first_containing(Point2 p) const;
};

TopCover build_top_cover(const Measure& mu, double s, double r_star, double H, double eps);

/// psi, Psi_A and Psi fields on a common grid. Psi_A indicator terms are
/// rasterized with exact disk/cell coverage fractions, so the grid sum of
/// Psi_A reproduces sum_j mu(T~_j) to rounding.
struct PsiBundle {
    GridSpec spec{1.0, 8};
    double s = 1.5;
    int a_max = 8;
    std::vector<int> a_values;      // 2, 4, ..., a_max
    GridField psi;                  // 2-vector
    std::vector<GridField> psi_A;   // scalar per A
    GridField big_psi;              // Psi = sum A^{s-2} Psi_A
    double c5 = 0.0;                // sup |psi| / Psi over Psi > 0
    double c6 = 0.0;                // truncated sum of A^{s-2}
};

/// Requires the grid to resolve the smallest cover disk (h <= r_min / 4)
/// and every dilated disk A_max T_j to fit inside the grid window.
PsiBundle build_psi_bundle(const TopCover& cover, const StandardCap& cap, const GridSpec& spec,
                           int a_max);

/// The lower-bound chain: C5 ∫|R nu| Psi dm2 >= m^2 / (2H) for admissible
/// nu. Throws PreconditionViolation naming the offending T~_j.
EstimateReport check_psi_lower(const Measure& nu, const TopCover& cover, const PsiBundle& bundle,
                               const RieszEngine& engine, double m, double H);

/// Jensen step: ∫ V(R nu) Psi dm2 >= I v(I^{-1} ∫ |R nu| Psi dm2).
EstimateReport jensen_lower(const Measure& nu, const PsiBundle& bundle, const VProfile& prof,
                            const RieszEngine& engine);

/// Marcinkiewicz g-function value at x.
double g_function(const TopCover& cover, int A, Point2 x);
/// ||g_A||^2_{L^2(mu)}.
double g_l2_norm(const TopCover& cover, int A, const Measure& mu);

/// Non-homogeneous Hardy-Littlewood maximal function of f (given on the
/// atoms of an atomic mu) over the disk family; terms with mu(3D) = 0 are
/// skipped.
double hl_maximal(const AtomicMeasure& mu, std::span<const double> f_on_atoms, Point2 x,
                  std::span<const Disk> family);

/// ∫ |R(Psi m2)|^2 dmu with the achieved constant C9 = lhs / m, the per-A
/// comparison fields and the g-function discrepancy bound constant.
EstimateReport l2_psi_transform_check(const AtomicMeasure& mu, const TopCover& cover,
                                      const PsiBundle& bundle, const RieszEngine& engine,
                                      double m);

} // namespace rieszlab

#endif
