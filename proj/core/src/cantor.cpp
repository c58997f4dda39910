#include "rieszlab/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rieszlab {

RhoSelection select_rho(const Measure& mu, Point2 x, const ConstructionParams& p,
                        double rho_star_local, int scan_depth, int max_k) {
    const double s = p.s, eps = p.eps, M = p.big_m, delta = p.delta;
    double t0 = -1.0;
    for (int i = 0; i <= scan_depth; ++i) {
        const double t = rho_star_local * std::ldexp(1.0, -i);
        if (ball_mass(mu, Disk(x, M * t)) <= delta * std::pow(t, s)) {
            t0 = t;
            break;
        }
    }
    if (t0 < 0.0)
        throw NoSparseScale("select_rho: no t0 < rho* with mu(D(x,M t0)) <= delta t0^s");

    RhoSelection sel;
    sel.t0 = t0;
    const double shrink = 1.0 - 3.0 * eps;
    double tk = t0;
    int k = 0;
    for (; k <= max_k; ++k) {
        const double tk1 = tk * shrink;
        const double annulus = ball_mass(mu, Disk(x, tk)) - ball_mass(mu, Disk(x, tk1));
        if (annulus <= 6.0 * eps * ball_mass(mu, Disk(x, tk))) break;
        tk = tk1;
    }
    if (k > max_k) throw NoSparseScale("select_rho: annulus walk exhausted the depth budget");
    sel.k = k;
    sel.rho = tk;
    sel.growth_lhs = ball_mass(mu, Disk(x, M * sel.rho));
    sel.growth_rhs = 2.0 * std::pow(M, s) * delta * std::pow(sel.rho, s);
    sel.growth_ok = sel.growth_lhs <= sel.growth_rhs * (1.0 + 1e-12);
    return sel;
}

BesicovitchResult besicovitch_select(std::span<const Disk> candidates,
                                     std::span<const double> center_mass) {
    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return candidates[a].radius > candidates[b].radius;
    });

    BesicovitchResult out;
    for (int i : order) {
        bool covered = false;
        for (int j : out.kept) {
            if (candidates[j].contains(candidates[i].center)) {
                covered = true;
                break;
            }
        }
        if (!covered) out.kept.push_back(i);
    }
    // Covering number and covered mass measured over candidate centers.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        int multiplicity = 0;
        for (int j : out.kept)
            if (candidates[j].contains(candidates[i].center)) ++multiplicity;
        out.covering_number = std::max(out.covering_number, multiplicity);
        if (multiplicity > 0 && !center_mass.empty()) out.covered_mass += center_mass[i];
    }
    return out;
}

bool BottomCover::in_btilde(std::size_t j, Point2 p) const {
    const int dj = cell_disk[j];
    const Disk& b = kept_disks[dj];
    if (dist(p, b.center) > (1.0 - 3.0 * eps) * b.radius) return false;
    for (int i = 0; i < dj; ++i)
        if (kept_disks[i].contains(p)) return false;
    return true;
}

bool BottomCover::in_omega(std::size_t j, Point2 p) const {
    if (in_btilde(j, p)) return true;
    const int dj = cell_disk[j];
    const Disk& b = kept_disks[dj];
    const double margin = eps * b.radius;
    const double shrunk = (1.0 - 3.0 * eps) * b.radius;
    const double d0 = dist(p, b.center);
    if (d0 > shrunk + margin) return false;
    // Nearest point of the shrunk disk; accept when it survives the carving.
    Point2 z = p;
    if (d0 > shrunk) z = b.center + (p - b.center) * (shrunk / d0);
    for (int i = 0; i < dj; ++i)
        if (kept_disks[i].contains(z)) return false;
    return true;
}

int BottomCover::omega_of(Point2 p) const {
    for (std::size_t j = 0; j < cells.size(); ++j)
        if (in_omega(j, p)) return static_cast<int>(j);
    return -1;
}

namespace {

// Deepest-point heuristic: the Omega~ disk center maximizes depth inside
// B~_j over a grid sweep (the disk itself only needs its center in B~_j).
Disk place_omega_tilde(const BottomCover& cover, std::size_t j) {
    const Disk& b = cover.kept_disks[cover.cell_disk[j]];
    const double shrunk = (1.0 - 3.0 * cover.eps) * b.radius;
    const double cap_r = cover.eps * b.radius;
    Point2 best = b.center;
    double best_depth = -1e300;
    const int k = 32;
    for (int iy = 0; iy < k; ++iy) {
        for (int ix = 0; ix < k; ++ix) {
            const Point2 p{b.center.x - shrunk + (ix + 0.5) * 2 * shrunk / k,
                           b.center.y - shrunk + (iy + 0.5) * 2 * shrunk / k};
            if (!cover.in_btilde(j, p)) continue;
            double depth = shrunk - dist(p, b.center);
            for (int i = 0; i < cover.cell_disk[j]; ++i)
                depth = std::min(depth, dist(p, cover.kept_disks[i].center) -
                                            cover.kept_disks[i].radius);
            if (depth > best_depth) {
                best_depth = depth;
                best = p;
            }
        }
    }
    return Disk(best, cap_r);
}

} // namespace

BottomCover build_bottom_cover(const AtomicMeasure& mu, const ConstructionParams& p,
                               double rho_star_local, std::span<const Disk> boundary_disks) {
    BottomCover cover;
    cover.eps = p.eps;

    // Boundary collar width: starts at rho* and shrinks until the strip
    // around the top-disk boundaries carries at most eps * mass (the
    // boundaries-have-measure-zero reduction). The collar is a separate
    // knob from the t0 scan start: desk-scale measures pin the selection
    // scales from below, while the collar must be free to shrink.
    double total = 0.0;
    for (double w : mu.weights) total += w;
    double collar = rho_star_local;
    for (int attempt = 0; attempt < 60; ++attempt) {
        double strip = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            for (const Disk& t : boundary_disks)
                if (std::abs(dist(mu.points[i], t.center) - t.radius) <= collar) {
                    strip += mu.weights[i];
                    break;
                }
        if (strip <= p.eps * total) break;
        collar /= 2.0;
    }

    std::vector<Disk> candidates;
    std::vector<double> cand_mass;
    std::vector<int> cand_atom;
    const Measure mview = mu;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const Point2 x = mu.points[i];
        bool near_boundary = false;
        for (const Disk& t : boundary_disks) {
            if (std::abs(dist(x, t.center) - t.radius) <= collar) {
                near_boundary = true;
                break;
            }
        }
        if (near_boundary) {
            cover.ledger.boundary_strip += mu.weights[i];
            continue;
        }
        try {
            const RhoSelection sel = select_rho(mview, x, p, rho_star_local);
            candidates.emplace_back(x, sel.rho);
            cand_mass.push_back(mu.weights[i]);
            cand_atom.push_back(static_cast<int>(i));
        } catch (const NoSparseScale&) {
            cover.ledger.no_sparse_scale += mu.weights[i];
        }
    }
    if (candidates.empty()) return cover;

    const BesicovitchResult bes = besicovitch_select(candidates, cand_mass);
    cover.covering_number = bes.covering_number;
    for (int idx : bes.kept) cover.kept_disks.push_back(candidates[idx]);

    // Cells in kept (radius-descending) order; assign atoms to the first
    // B~_j containing them.
    cover.cells.resize(cover.kept_disks.size());
    cover.cell_disk.resize(cover.kept_disks.size());
    for (std::size_t j = 0; j < cover.kept_disks.size(); ++j) {
        cover.cells[j].b = cover.kept_disks[j];
        cover.cells[j].rho = cover.kept_disks[j].radius;
        cover.cell_disk[j] = static_cast<int>(j);
    }
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const Point2 x = mu.points[i];
        int home = -1;
        for (std::size_t j = 0; j < cover.cells.size(); ++j) {
            if (cover.in_btilde(j, x)) {
                home = static_cast<int>(j);
                break;
            }
        }
        if (home >= 0) {
            cover.cells[home].atoms.push_back(static_cast<int>(i));
            cover.cells[home].mass += mu.weights[i];
        } else {
            // Covered by some B_j but lost to the (1-3eps) ring, or in an
            // excluded category counted above.
            bool in_any = false;
            for (const Disk& d : cover.kept_disks)
                if (d.contains(x)) { in_any = true; break; }
            bool counted = false;
            for (const Disk& t : boundary_disks)
                if (std::abs(dist(x, t.center) - t.radius) <= collar) { counted = true; break; }
            if (!counted) {
                if (in_any) cover.ledger.ring_loss += mu.weights[i];
                else if (std::find(cand_atom.begin(), cand_atom.end(), static_cast<int>(i)) !=
                         cand_atom.end())
                    cover.ledger.uncovered += mu.weights[i];
            }
        }
    }

    // Drop empty cells (keep the disk list intact for membership carving).
    std::vector<BottomCell> nonempty;
    std::vector<int> nonempty_disk;
    for (std::size_t j = 0; j < cover.cells.size(); ++j) {
        if (cover.cells[j].mass > 0.0) {
            nonempty.push_back(std::move(cover.cells[j]));
            nonempty_disk.push_back(cover.cell_disk[j]);
        }
    }
    cover.cells = std::move(nonempty);
    cover.cell_disk = std::move(nonempty_disk);

    for (std::size_t j = 0; j < cover.cells.size(); ++j)
        cover.cells[j].omega_tilde = place_omega_tilde(cover, j);
    return cover;
}

AtomicMeasure CantorStructure::mu_prime() const {
    AtomicMeasure out;
    const int n = params.levels;
    for (std::size_t i = 0; i < mu0.size(); ++i) {
        if (cell_at(static_cast<int>(i), n) >= 0) {
            out.points.push_back(mu0.points[i]);
            out.weights.push_back(mu0.weights[i]);
        }
    }
    return out;
}

double CantorStructure::mu_prime_mass() const {
    double m = 0.0;
    const int n = params.levels;
    for (std::size_t i = 0; i < mu0.size(); ++i)
        if (cell_at(static_cast<int>(i), n) >= 0) m += mu0.weights[i];
    return m;
}

int CantorStructure::find_atom(Point2 p) const {
    for (std::size_t i = 0; i < mu0.size(); ++i) {
        if (dist(mu0.points[i], p) <= 1e-12 * (1.0 + mu0.points[i].norm())) return static_cast<int>(i);
    }
    return -1;
}

namespace {

AtomicMeasure to_atoms(const Measure& mu) {
    if (std::holds_alternative<AtomicMeasure>(mu)) return std::get<AtomicMeasure>(mu);
    if (std::holds_alternative<GriddedMeasure>(mu)) {
        const auto& g = std::get<GriddedMeasure>(mu);
        const GridSpec& spec = g.density.spec();
        const double h2 = spec.spacing() * spec.spacing();
        AtomicMeasure out;
        for (int iy = 0; iy < spec.resolution; ++iy)
            for (int ix = 0; ix < spec.resolution; ++ix)
                if (g.density.at(0, ix, iy) > 0.0) {
                    out.points.push_back(spec.cell_center(ix, iy));
                    out.weights.push_back(g.density.at(0, ix, iy) * h2);
                }
        return out;
    }
    throw std::invalid_argument("build_structure: atomic or gridded measure expected");
}

double support_diameter(const AtomicMeasure& mu, std::span<const int> atoms) {
    double d = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t b = a + 1; b < atoms.size(); ++b)
            d = std::max(d, dist(mu.points[atoms[a]], mu.points[atoms[b]]));
    return d;
}

} // namespace

CantorStructure build_structure(const Measure& mu, const ConstructionParams& p) {
    CantorStructure st;
    st.mu0 = to_atoms(mu);
    st.params = p;
    const int N = p.levels;
    const std::size_t natoms = st.mu0.size();
    st.atom_cell.assign(natoms * (N + 1), -1);
    st.levels.assign(N + 1, {});

    CantorCell root;
    root.id = 0;
    root.level = 0;
    root.atoms.resize(natoms);
    std::iota(root.atoms.begin(), root.atoms.end(), 0);
    double root_mass = 0.0;
    for (double w : st.mu0.weights) root_mass += w;
    root.m_j = root_mass / 2.0;
    root.h_j = p.cover_budget;
    st.cells.push_back(std::move(root));
    st.levels[0].push_back(0);
    for (std::size_t i = 0; i < natoms; ++i) st.atom_cell[i * (N + 1) + 0] = 0;

    const double root_diam = std::max(support_diameter(st.mu0, st.cells[0].atoms), 1e-300);
    const double min_retained_fraction = 0.25;

    for (int level = 0; level < N; ++level) {
        st.level_ledgers.push_back({});
        for (int cid : st.levels[level]) {
            // Copy out what we need: st.cells may reallocate below.
            const std::vector<int> cell_atoms = st.cells[cid].atoms;
            AtomicMeasure local;
            for (int a : cell_atoms) {
                local.points.push_back(st.mu0.points[a]);
                local.weights.push_back(st.mu0.weights[a]);
            }
            const double cell_mass = std::accumulate(local.weights.begin(), local.weights.end(), 0.0);
            const double diam = std::max(support_diameter(st.mu0, cell_atoms), 1e-300);
            const double scale_ratio = diam / root_diam;

            // Cell-local top cover: measured covering cost becomes H_j.
            const double r_star_local = std::max(p.r_star * scale_ratio, 1e-13 * root_diam);
            auto top = std::make_shared<TopCover>(
                build_top_cover(local, p.s, r_star_local,
                                level == 0 ? p.cover_budget : 1e300, p.eps));
            st.cells[cid].top = top;
            st.cells[cid].h_j = top->budget_used;

            // Sibling distance cap: M rho* < half the distance to other
            // cells of this level.
            double sibling_gap = 1e300;
            for (int other : st.levels[level]) {
                if (other == cid) continue;
                for (int a : st.cells[cid].atoms)
                    for (int b : st.cells[other].atoms)
                        sibling_gap = std::min(sibling_gap, dist(st.mu0.points[a], st.mu0.points[b]));
            }
            double rho_star_local = p.rho_star * scale_ratio;
            if (sibling_gap < 1e300)
                rho_star_local = std::min(rho_star_local, sibling_gap / (2.0 * p.big_m));
            rho_star_local = std::max(rho_star_local, 1e-13 * root_diam);

            std::vector<Disk> top_disks;
            for (const auto& e : top->entries) top_disks.push_back(e.disk);
            auto bottom = std::make_shared<BottomCover>(
                build_bottom_cover(local, p, rho_star_local, top_disks));
            st.cells[cid].bottom = bottom;

            double retained = 0.0;
            for (const BottomCell& bc : bottom->cells) {
                CantorCell child;
                child.id = static_cast<int>(st.cells.size());
                child.level = level + 1;
                child.parent = cid;
                child.rho = bc.rho;
                child.birth_disk = bc.b;
                child.omega_tilde = bc.omega_tilde;
                child.m_j = bc.mass / 2.0;
                for (int la : bc.atoms) child.atoms.push_back(cell_atoms[la]);
                retained += bc.mass;
                for (int a : child.atoms)
                    st.atom_cell[static_cast<std::size_t>(a) * (N + 1) + level + 1] = child.id;
                st.levels[level + 1].push_back(child.id);
                st.cells[cid].children.push_back(child.id);
                st.cells.push_back(std::move(child));
            }
            st.level_ledgers.back().boundary_strip += bottom->ledger.boundary_strip;
            st.level_ledgers.back().no_sparse_scale += bottom->ledger.no_sparse_scale;
            st.level_ledgers.back().ring_loss += bottom->ledger.ring_loss;
            st.level_ledgers.back().uncovered += bottom->ledger.uncovered;

            if (retained < min_retained_fraction * cell_mass)
                throw std::runtime_error(
                    "build_structure: recursion degenerate, cell retained mass fraction " +
                    std::to_string(retained / cell_mass));
        }
    }

    // Survivor lists: atoms alive at level N, recorded up the chain.
    for (std::size_t i = 0; i < natoms; ++i) {
        if (st.atom_cell[i * (N + 1) + N] < 0) continue;
        for (int level = 0; level <= N; ++level) {
            const int cid = st.atom_cell[i * (N + 1) + level];
            if (cid >= 0) st.cells[cid].survivors.push_back(static_cast<int>(i));
        }
    }
    return st;
}

Vec2 partial_potential(const CantorStructure& st, int n, int atom) {
    const int N = st.params.levels;
    if (n < 0 || n >= N) throw std::invalid_argument("partial_potential: n must lie in [0, N)");
    const int qn = st.cell_at(atom, n);
    const int qn1 = st.cell_at(atom, n + 1);
    if (qn < 0 || qn1 < 0)
        throw std::invalid_argument("partial_potential: atom not in supp mu'");
    const Point2 x = st.mu0.points[atom];
    Vec2 sum{0.0, 0.0};
    for (int y : st.cells[qn].survivors) {
        if (st.cell_at(y, n + 1) == qn1) continue; // inside Q^{(n+1)}(x)
        sum += st.mu0.weights[y] * RieszEngine::kernel(st.params.s, x - st.mu0.points[y]);
    }
    return sum;
}

Vec2 partial_potential(const CantorStructure& st, int n, Point2 x) {
    const int atom = st.find_atom(x);
    if (atom < 0 || st.cell_at(atom, st.params.levels) < 0)
        throw std::invalid_argument("partial_potential: x is not an atom of mu'");
    return partial_potential(st, n, atom);
}

Vec2 tilde_R(const Measure& nu, const BottomCover& cover, double s, Point2 x) {
    const int home = cover.omega_of(x);
    if (home < 0) throw std::invalid_argument("tilde_R: x lies in no Omega cell");
    RieszEngine eng(s);
    const ExclusionFn excl = [&cover, home](std::size_t, Point2 y) {
        return cover.in_omega(static_cast<std::size_t>(home), y);
    };
    const Point2 pts[1] = {x};
    return eng.transform_direct(nu, pts, excl)[0];
}

} // namespace rieszlab
