#ifndef RIESZLAB_MEASURE_HPP
#define RIESZLAB_MEASURE_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rieszlab/geometry.hpp"
#include "rieszlab/grid.hpp"

namespace rieszlab {

/// Weighted point masses. Weights are positive unless the measure is used
/// as a signed component of an adjoint input.
struct AtomicMeasure {
    std::vector<Point2> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

/// One smooth cap: the fixed compactly supported bump
///   b(u) = exp(1 - 1/(1 - |u|^2)) on |u| < 1,
/// rescaled to the support disk and normalized so the cap integrates to
/// `mass`. sup density = mass / (r^2 * bump_unit_mass()).
struct Cap {
    Disk support;
    double mass = 0.0;
};

struct CapSumMeasure {
    std::vector<Cap> caps;
};

/// Nonnegative density samples on a grid; the measure of a cell is
/// density * h^2 (cell-center rule everywhere).
struct GriddedMeasure {
    GridField density; // 1 component
};

using Measure = std::variant<AtomicMeasure, CapSumMeasure, GriddedMeasure>;

/// ∫ b dm2 over the unit disk for the standard bump (computed once).
double bump_unit_mass();
/// The standard bump profile b(u), |u| the radial argument in [0, 1).
double bump_profile(double radial);
/// Density of a cap at point p.
double cap_density(const Cap& cap, Point2 p);
/// Evaluate a cap-sum density at p.
double capsum_density(const CapSumMeasure& m, Point2 p);

double total_mass(const Measure& mu);
double ball_mass(const Measure& mu, const Disk& d);

/// Empirical growth constant: max over `disks` of ball_mass / r^s.
double growth_constant(const Measure& mu, double s, std::span<const Disk> disks);

/// Deterministic default disk family for growth_constant: Halton centers in
/// the measure's bounding box crossed with dyadic radii, plus the supplied
/// cell-aligned disks.
std::vector<Disk> growth_disk_family(const Measure& mu, int halton_count,
                                     std::span<const Disk> cell_aligned);

/// Cell of the corner-pattern Cantor tree.
struct CantorCellNode {
    int level = 0;
    Point2 center;        // cell square center
    double side = 1.0;    // cell square side
    int parent = -1;
    std::array<int, 4> children{-1, -1, -1, -1};
    int atom_begin = 0;   // contiguous atom range [begin, end) in the measure
    int atom_end = 0;
};

struct CantorSquare {
    AtomicMeasure measure;
    std::vector<CantorCellNode> cells; // breadth-first, root first
    double theta = 0.0;
    int generations = 0;

    /// Index of the generation-n cell containing atom `atom` (O(g) walk).
    int cell_of_atom(int atom, int generation) const;
};

/// Corner-pattern Cantor square on the unit square centered at the origin.
/// Per-generation scale theta = 4^{-1/s} / kappa; 4^g atoms of weight
/// mass/4^g at leaf-cell centers. Rejects theta >= 1/2.
CantorSquare make_cantor_square(double s, int generations, double kappa, double mass);

/// One mollification cell: the region mass and the disk receiving the cap.
struct MollifyCell {
    double region_mass = 0.0; // mu'(Omega_j)
    Disk omega_tilde;         // radius eps * rho_j
};

/// Replace each positive-mass cell by a smooth cap supported in its
/// omega_tilde disk, preserving the cell mass. Throws if the fixed profile
/// would violate sup density <= mass / radius^2 (it cannot, but the
/// contract is checked).
CapSumMeasure mollify(std::span<const MollifyCell> cells);

/// Restriction view helpers for atomic measures.
AtomicMeasure restrict_atoms(const AtomicMeasure& mu, const std::function<bool(Point2)>& keep);

} // namespace rieszlab

#endif
