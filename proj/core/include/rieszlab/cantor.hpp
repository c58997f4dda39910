#ifndef RIESZLAB_CANTOR_HPP
#define RIESZLAB_CANTOR_HPP

#include <memory>
#include <span>
#include <vector>

#include "rieszlab/measure.hpp"
#include "rieszlab/params.hpp"
#include "rieszlab/riesz.hpp"
#include "rieszlab/topcover.hpp"

namespace rieszlab {

struct NoSparseScale : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Result of the rho(x) selection: rho = t_k with t_j = (1-3eps)^j t_0,
/// k the least annulus-light index, plus the M-growth verification
/// mu(D(x, M rho)) <= 2 M^s delta rho^s.
struct RhoSelection {
    double rho = 0.0;
    double t0 = 0.0;
    int k = 0;
    bool growth_ok = false;
    double growth_lhs = 0.0;
    double growth_rhs = 0.0;
};

/// Scans t_0 over rho_star * 2^{-i} (largest first) for the delta-sparse
/// scale mu(D(x, M t_0)) <= delta t_0^s, then walks the annulus condition.
/// Throws NoSparseScale when the scan or the annulus walk exhausts.
RhoSelection select_rho(const Measure& mu, Point2 x, const ConstructionParams& p,
                        double rho_star_local, int scan_depth = 60, int max_k = 200000);

struct BesicovitchResult {
    std::vector<int> kept;    // indices into the candidate list, radius-descending
    int covering_number = 0;  // measured over candidate centers
    double covered_mass = 0.0;
};

/// Greedy largest-radius-first selection keeping disks whose centers are
/// not covered by an earlier kept disk. Every candidate center ends up
/// covered. `center_mass` weights the covered-mass report.
BesicovitchResult besicovitch_select(std::span<const Disk> candidates,
                                     std::span<const double> center_mass);

struct ExceptionalLedger {
    double boundary_strip = 0.0; // atoms within rho* of a top-cover boundary
    double no_sparse_scale = 0.0;
    double ring_loss = 0.0;      // mass in B_j minus (1-3eps)B_j
    double uncovered = 0.0;
    double total() const { return boundary_strip + no_sparse_scale + ring_loss + uncovered; }
};

/// One first-generation cell: B~_j = (1-3eps)B_j \ union_{i<j} B_i,
/// Omega_j its eps rho_j-neighborhood, Omega~_j the cap disk inside it.
struct BottomCell {
    Disk b;                // selected disk B_j
    double rho = 0.0;
    Disk omega_tilde{Point2{0, 0}, 1.0};
    double mass = 0.0;     // mu(B~_j)
    std::vector<int> atoms; // indices into the source atomic measure
};

class BottomCover {
public:
    std::vector<BottomCell> cells; // rho non-increasing
    double eps = 0.0;
    int covering_number = 0;
    ExceptionalLedger ledger;

    /// Membership in B~_j (exact).
    bool in_btilde(std::size_t j, Point2 p) const;
    /// Membership in Omega_j: conservative eps rho_j-neighborhood test.
    bool in_omega(std::size_t j, Point2 p) const;
    /// Index of the Omega cell containing p, or -1.
    int omega_of(Point2 p) const;

    /// All selected disks in kept order (includes cells later dropped as
    /// empty; membership carving references this list).
    std::vector<Disk> kept_disks;
    std::vector<int> cell_disk; // cells[i] <-> kept_disks[cell_disk[i]]
};

/// Bottom cover of an atomic measure. `boundary_disks` are the local top
/// cover disks whose rho*-collars are discarded into the ledger.
BottomCover build_bottom_cover(const AtomicMeasure& mu, const ConstructionParams& p,
                               double rho_star_local, std::span<const Disk> boundary_disks);

struct CantorCell {
    int id = 0;
    int level = 0;
    int parent = -1;
    std::vector<int> children;
    std::vector<int> atoms;      // atoms alive when the cell was formed
    std::vector<int> survivors;  // atoms of mu' inside this cell
    double m_j = 0.0;            // half of the cell mass at formation
    double h_j = 0.0;            // measured covering cost sum r^s of the cell's top cover
    double rho = 0.0;            // birth disk radius (level >= 1)
    Disk birth_disk{Point2{0, 0}, 1.0};
    Disk omega_tilde{Point2{0, 0}, 1.0};
    std::shared_ptr<TopCover> top;       // set for processed cells (level < N)
    std::shared_ptr<BottomCover> bottom; // set for processed cells (level < N)
};

/// N-level Cantor structure over an atomic measure; mu' is the restriction
/// of mu to the atoms surviving at level N.
struct CantorStructure {
    AtomicMeasure mu0;
    ConstructionParams params;
    std::vector<CantorCell> cells;          // cells[0] is the root
    std::vector<std::vector<int>> levels;   // cell ids per level 0..N
    std::vector<int> atom_cell;             // flattened [atom * (N+1) + level] cell id or -1
    std::vector<ExceptionalLedger> level_ledgers; // one per built level 1..N

    int cell_at(int atom, int level) const {
        return atom_cell[static_cast<std::size_t>(atom) * (params.levels + 1) + level];
    }
    AtomicMeasure mu_prime() const;
    double mu_prime_mass() const;
    /// Atom index of the mu0 atom at p (exact match), or -1.
    int find_atom(Point2 p) const;
};

/// Accepts atomic and gridded measures (gridded converts to cell atoms).
CantorStructure build_structure(const Measure& mu, const ConstructionParams& p);

/// R^{(n)} mu'(x) for an atom of mu': the kernel summed over survivors in
/// Q^{(n)}(x) \ Q^{(n+1)}(x). Exact telescoping by construction.
Vec2 partial_potential(const CantorStructure& st, int n, int atom);
Vec2 partial_potential(const CantorStructure& st, int n, Point2 x);

/// R applied to nu restricted outside the Omega cell containing x.
/// Requires x inside some cell of the cover.
Vec2 tilde_R(const Measure& nu, const BottomCover& cover, double s, Point2 x);

} // namespace rieszlab

#endif
