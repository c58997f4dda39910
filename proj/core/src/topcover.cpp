#include "rieszlab/topcover.hpp"

#include <algorithm>
#include <cmath>

#include "rieszlab/parallel.hpp"

namespace rieszlab {

namespace {

constexpr double kJitter = 1.0 + 1e-12; // boundary rule: inflate by one ulp-scale

struct SupportPoint {
    Point2 p;
    double w;
};

std::vector<SupportPoint> support_points(const Measure& mu) {
    std::vector<SupportPoint> pts;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                for (std::size_t i = 0; i < m.size(); ++i) pts.push_back({m.points[i], m.weights[i]});
            } else if constexpr (std::is_same_v<T, CapSumMeasure>) {
                for (const Cap& c : m.caps) pts.push_back({c.support.center, c.mass});
            } else {
                const GridSpec& spec = m.density.spec();
                const double h2 = spec.spacing() * spec.spacing();
                for (int iy = 0; iy < spec.resolution; ++iy)
                    for (int ix = 0; ix < spec.resolution; ++ix)
                        if (m.density.at(0, ix, iy) > 0.0)
                            pts.push_back({spec.cell_center(ix, iy), m.density.at(0, ix, iy) * h2});
            }
        },
        mu);
    return pts;
}

} // namespace

int TopCover::first_containing(Point2 p) const {
    for (std::size_t j = 0; j < entries.size(); ++j)
        if (dist(p, entries[j].disk.center) <= entries[j].disk.radius * kJitter)
            return static_cast<int>(j);
    return -1;
}

TopCover build_top_cover(const Measure& mu, double s, double r_star, double H, double eps) {
    if (!(r_star > 0.0)) throw std::invalid_argument("build_top_cover: r_star must be positive");
    const std::vector<SupportPoint> pts = support_points(mu);
    if (pts.empty()) throw std::invalid_argument("build_top_cover: empty measure");

    TopCover cover;
    cover.s = s;
    cover.r_star = r_star;
    cover.budget = H;
    for (const SupportPoint& sp : pts) cover.total_mass += sp.w;

    // Quadtree-greedy: descend until the circumscribed disk fits r_star,
    // emit disks of mass-carrying cells in depth-first order.
    Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const SupportPoint& sp : pts) {
        lo.x = std::min(lo.x, sp.p.x);
        lo.y = std::min(lo.y, sp.p.y);
        hi.x = std::max(hi.x, sp.p.x);
        hi.y = std::max(hi.y, sp.p.y);
    }
    const double side0 = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300});
    const Point2 c0{(lo.x + hi.x) / 2, (lo.y + hi.y) / 2};

    // Coincident support: one disk at the requested scale.
    if (side0 <= 1e-12 * (1.0 + c0.norm())) {
        cover.entries.push_back({Disk(c0, r_star), cover.total_mass});
        cover.budget_used = std::pow(r_star, s);
        if (cover.budget_used > H) throw BudgetExceeded(cover.budget_used, H);
        return cover;
    }

    struct Node {
        Point2 c;
        double side;
        std::vector<int> idx;
    };
    std::vector<Node> stack;
    {
        Node root{c0, side0 * (1.0 + 1e-9), {}};
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) root.idx.push_back(i);
        stack.push_back(std::move(root));
    }
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.idx.empty()) continue;
        const double circ = node.side * std::sqrt(2.0) / 2.0;
        if (circ <= r_star || node.side <= 1e-14 * side0) {
            cover.entries.push_back({Disk(node.c, std::max(circ, 1e-14 * side0)), 0.0});
            continue;
        }
        // Children pushed in reverse so depth-first order is deterministic
        // (--, +-, -+, ++).
        const double q = node.side / 4.0;
        const Point2 cc[4] = {{node.c.x - q, node.c.y - q},
                              {node.c.x + q, node.c.y - q},
                              {node.c.x - q, node.c.y + q},
                              {node.c.x + q, node.c.y + q}};
        std::vector<int> parts[4];
        for (int i : node.idx) {
            const Point2 p = pts[i].p;
            const int k = (p.x > node.c.x ? 1 : 0) + (p.y > node.c.y ? 2 : 0);
            parts[k].push_back(i);
        }
        for (int k = 3; k >= 0; --k)
            if (!parts[k].empty()) stack.push_back({cc[k], node.side / 2.0, std::move(parts[k])});
    }

    for (const TopCoverEntry& e : cover.entries) cover.budget_used += std::pow(e.disk.radius, s);
    if (cover.budget_used > H) throw BudgetExceeded(cover.budget_used, H);

    // Tilde masses: each support point charged to the first covering disk.
    double covered = 0.0;
    for (const SupportPoint& sp : pts) {
        const int j = cover.first_containing(sp.p);
        if (j >= 0) {
            cover.entries[j].tilde_mass += sp.w;
            covered += sp.w;
        }
    }
    cover.uncovered_mass = cover.total_mass - covered;
    if (cover.uncovered_mass > eps * cover.total_mass / 2.0 + 1e-15)
        throw std::runtime_error("build_top_cover: uncovered mass exceeds eps*m");
    return cover;
}

PsiBundle build_psi_bundle(const TopCover& cover, const StandardCap& cap, const GridSpec& spec,
                           int a_max) {
    if (a_max < 2 || (a_max & (a_max - 1)) != 0)
        throw std::invalid_argument("build_psi_bundle: A_max must be a power of two >= 2");
    double r_min = 1e300;
    for (const TopCoverEntry& e : cover.entries) r_min = std::min(r_min, e.disk.radius);
    if (spec.spacing() > r_min / 4.0)
        throw std::invalid_argument("build_psi_bundle: grid does not resolve the smallest disk (h > r_min/4)");

    PsiBundle bundle;
    bundle.spec = spec;
    bundle.s = cover.s;
    bundle.a_max = a_max;
    for (int A = 2; A <= a_max; A *= 2) bundle.a_values.push_back(A);

    const int n = spec.resolution;
    const double h = spec.spacing();
    const double s = cover.s;

    // psi = sum_j mass_j r_j^{-2} psi_o((x - c_j)/r_j) via the radial table.
    bundle.psi = GridField(spec, 2);
    parallel_for(static_cast<std::size_t>(n) * n, [&](std::size_t cell) {
        const int ix = static_cast<int>(cell % n), iy = static_cast<int>(cell / n);
        const Point2 x = spec.cell_center(ix, iy);
        Vec2 acc{0.0, 0.0};
        for (const TopCoverEntry& e : cover.entries) {
            if (e.tilde_mass == 0.0) continue;
            const double r = e.disk.radius;
            acc += (e.tilde_mass / (r * r)) * cap.eval((x - e.disk.center) / r);
        }
        bundle.psi.at(0, ix, iy) = acc.x;
        bundle.psi.at(1, ix, iy) = acc.y;
    });

    // Psi_A with exact coverage fractions.
    for (int A : bundle.a_values) {
        GridField fa(spec, 1);
        for (const TopCoverEntry& e : cover.entries) {
            if (e.tilde_mass == 0.0) continue;
            const Disk dd = e.disk.scaled(A);
            const double weight = e.tilde_mass / (M_PI * dd.radius * dd.radius);
            const int lo_x = std::max(0, spec.cell_index(dd.center.x - dd.radius) - 1);
            const int hi_x = std::min(n - 1, spec.cell_index(dd.center.x + dd.radius) + 1);
            const int lo_y = std::max(0, spec.cell_index(dd.center.y - dd.radius) - 1);
            const int hi_y = std::min(n - 1, spec.cell_index(dd.center.y + dd.radius) + 1);
            for (int iy = lo_y; iy <= hi_y; ++iy) {
                for (int ix = lo_x; ix <= hi_x; ++ix) {
                    const Point2 c = spec.cell_center(ix, iy);
                    const double frac =
                        disk_rect_intersection_area(dd, c.x - h / 2, c.x + h / 2, c.y - h / 2,
                                                    c.y + h / 2) /
                        (h * h);
                    if (frac > 0.0) fa.at(0, ix, iy) += weight * frac;
                }
            }
        }
        bundle.psi_A.push_back(std::move(fa));
    }

    bundle.big_psi = GridField(spec, 1);
    bundle.c6 = 0.0;
    for (std::size_t k = 0; k < bundle.a_values.size(); ++k) {
        const double wA = std::pow(static_cast<double>(bundle.a_values[k]), s - 2.0);
        bundle.c6 += wA;
        const auto src = bundle.psi_A[k].component(0);
        auto dst = bundle.big_psi.component(0);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wA * src[i];
    }

    // C5 from the literal indicator form of Psi at cell centers: the
    // coverage-weighted field is kept for integrals, but its fractional
    // boundary cells would send the ratio to infinity under refinement.
    double c5 = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Point2 x = spec.cell_center(ix, iy);
            double big = 0.0;
            for (int A : bundle.a_values) {
                const double wA = std::pow(static_cast<double>(A), s - 2.0);
                for (const TopCoverEntry& e : cover.entries) {
                    if (e.tilde_mass == 0.0) continue;
                    if (dist(x, e.disk.center) <= A * e.disk.radius)
                        big += wA * e.tilde_mass / (M_PI * A * A * e.disk.radius * e.disk.radius);
                }
            }
            if (big <= 0.0) continue;
            const double mag = std::hypot(bundle.psi.at(0, ix, iy), bundle.psi.at(1, ix, iy));
            c5 = std::max(c5, mag / big);
        }
    }
    bundle.c5 = c5;
    return bundle;
}

namespace {

// Grid integrals of |R nu| Psi and V(R nu) Psi, skipping Psi = 0 cells.
struct PsiIntegrals {
    double abs_integral = 0.0;
    double v_integral = 0.0;
    double psi_integral = 0.0;
};

PsiIntegrals psi_integrals(const Measure& nu, const PsiBundle& bundle, const RieszEngine& engine,
                           const VProfile* prof) {
    const GridSpec& spec = bundle.spec;
    const int n = spec.resolution;
    std::vector<Point2> pts;
    std::vector<double> psi_vals;
    pts.reserve(1024);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double w = bundle.big_psi.at(0, ix, iy);
            if (w <= 0.0) continue;
            pts.push_back(spec.cell_center(ix, iy));
            psi_vals.push_back(w);
        }
    }
    const std::vector<Vec2> field = engine.transform_direct(nu, pts);
    PsiIntegrals out;
    const double h2 = spec.spacing() * spec.spacing();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double mag = field[i].norm();
        out.abs_integral += mag * psi_vals[i] * h2;
        if (prof) out.v_integral += prof->v(mag) * psi_vals[i] * h2;
        out.psi_integral += psi_vals[i] * h2;
    }
    return out;
}

} // namespace

EstimateReport check_psi_lower(const Measure& nu, const TopCover& cover, const PsiBundle& bundle,
                               const RieszEngine& engine, double m, double H) {
    // Admissibility: supported on the cover, nu(T~_j) <= 2 mu(T~_j),
    // nu(R^2) >= m.
    const double nu_total = total_mass(nu);
    if (nu_total < m * (1.0 - 1e-12))
        throw PreconditionViolation("check_psi_lower: nu(R^2) < m");
    std::vector<double> nu_tilde(cover.entries.size(), 0.0);
    for (const auto& sp : [&] {
             std::vector<std::pair<Point2, double>> v;
             if (std::holds_alternative<AtomicMeasure>(nu)) {
                 const auto& a = std::get<AtomicMeasure>(nu);
                 for (std::size_t i = 0; i < a.size(); ++i) v.push_back({a.points[i], a.weights[i]});
             } else if (std::holds_alternative<CapSumMeasure>(nu)) {
                 for (const Cap& c : std::get<CapSumMeasure>(nu).caps)
                     v.push_back({c.support.center, c.mass});
             } else {
                 const auto& g = std::get<GriddedMeasure>(nu);
                 const GridSpec& sp2 = g.density.spec();
                 const double h2 = sp2.spacing() * sp2.spacing();
                 for (int iy = 0; iy < sp2.resolution; ++iy)
                     for (int ix = 0; ix < sp2.resolution; ++ix)
                         if (g.density.at(0, ix, iy) > 0.0)
                             v.push_back({sp2.cell_center(ix, iy), g.density.at(0, ix, iy) * h2});
             }
             return v;
         }()) {
        const int j = cover.first_containing(sp.first);
        if (j < 0)
            throw PreconditionViolation("check_psi_lower: nu has mass outside the cover disks");
        nu_tilde[j] += sp.second;
    }
    for (std::size_t j = 0; j < nu_tilde.size(); ++j) {
        if (nu_tilde[j] > 2.0 * cover.entries[j].tilde_mass * (1.0 + 1e-12))
            throw PreconditionViolation("check_psi_lower: nu(T~_j) > 2 mu(T~_j) at entry " +
                                        std::to_string(j));
    }

    const PsiIntegrals ints = psi_integrals(nu, bundle, engine, nullptr);
    EstimateReport rep;
    rep.name = "psi_lower_chain";
    rep.measured_lhs = ints.abs_integral;
    rep.bound_rhs = m * m / (2.0 * bundle.c5 * H);
    rep.empirical_constant = bundle.c5;
    rep.pass = rep.measured_lhs >= rep.bound_rhs;
    rep.metadata["nu_total"] = nu_total;
    rep.metadata["psi_integral"] = ints.psi_integral;
    // Middle link of the chain: sum_j mu(T~_j) r_j^{-s} nu(T~_j).
    double middle = 0.0;
    for (std::size_t j = 0; j < nu_tilde.size(); ++j)
        middle += cover.entries[j].tilde_mass * nu_tilde[j] /
                  std::pow(cover.entries[j].disk.radius, cover.s);
    rep.metadata["pairing_sum"] = middle;
    return rep;
}

EstimateReport jensen_lower(const Measure& nu, const PsiBundle& bundle, const VProfile& prof,
                            const RieszEngine& engine) {
    const PsiIntegrals ints = psi_integrals(nu, bundle, engine, &prof);
    EstimateReport rep;
    rep.name = "jensen_lower";
    const double I = ints.psi_integral;
    rep.measured_lhs = ints.v_integral;
    rep.bound_rhs = I > 0.0 ? I * prof.v(ints.abs_integral / I) : 0.0;
    rep.empirical_constant = I;
    rep.pass = rep.measured_lhs >= rep.bound_rhs * (1.0 - 0.01) - 1e-300;
    rep.metadata["abs_integral"] = ints.abs_integral;
    rep.metadata["psi_integral"] = I;
    return rep;
}

double g_function(const TopCover& cover, int A, Point2 x) {
    const double s = cover.s;
    double sum = 0.0;
    for (const TopCoverEntry& e : cover.entries) {
        if (e.tilde_mass == 0.0) continue;
        if (dist(x, e.disk.center) <= A * e.disk.radius * kJitter)
            sum += e.tilde_mass / std::pow(e.disk.radius, s);
    }
    return std::pow(static_cast<double>(A), -s) * sum;
}

double g_l2_norm(const TopCover& cover, int A, const Measure& mu) {
    double sum = 0.0;
    if (std::holds_alternative<AtomicMeasure>(mu)) {
        const auto& m = std::get<AtomicMeasure>(mu);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = g_function(cover, A, m.points[i]);
            sum += m.weights[i] * g * g;
        }
        return sum;
    }
    if (std::holds_alternative<GriddedMeasure>(mu)) {
        const auto& g = std::get<GriddedMeasure>(mu);
        const GridSpec& spec = g.density.spec();
        const double h2 = spec.spacing() * spec.spacing();
        for (int iy = 0; iy < spec.resolution; ++iy)
            for (int ix = 0; ix < spec.resolution; ++ix) {
                const double rho = g.density.at(0, ix, iy);
                if (rho == 0.0) continue;
                const double gv = g_function(cover, A, spec.cell_center(ix, iy));
                sum += rho * h2 * gv * gv;
            }
        return sum;
    }
    throw std::invalid_argument("g_l2_norm: atomic or gridded measure expected");
}

double hl_maximal(const AtomicMeasure& mu, std::span<const double> f_on_atoms, Point2 x,
                  std::span<const Disk> family) {
    double best = 0.0;
    for (const Disk& d : family) {
        if (!d.contains(x)) continue;
        const Disk d3 = d.scaled(3.0);
        double denom = 0.0, numer = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (d3.contains(mu.points[i])) denom += mu.weights[i];
            if (d.contains(mu.points[i])) numer += mu.weights[i] * f_on_atoms[i];
        }
        if (denom == 0.0) continue;
        best = std::max(best, numer / denom);
    }
    return best;
}

EstimateReport l2_psi_transform_check(const AtomicMeasure& mu, const TopCover& cover,
                                      const PsiBundle& bundle, const RieszEngine& engine,
                                      double m) {
    // R(Psi m2) by real-space convolution, sampled at the atoms.
    const GridField rpsi = engine.transform_grid(bundle.big_psi);
    double lhs = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const Vec2 v = rpsi.sample_vec(mu.points[i]);
        lhs += mu.weights[i] * v.norm2();
    }

    EstimateReport rep;
    rep.name = "l2_psi_transform";
    rep.measured_lhs = lhs;
    rep.empirical_constant = lhs / m;
    rep.bound_rhs = rep.empirical_constant * m;
    rep.pass = true;

    // Per-A comparison field sum_j chi_{outside 2A T_j} R(chi_{T~_j} mu)
    // against R(Psi_A m2), bounded by C * sum_{A' >= A} (A/A') g_{A'}.
    std::vector<int> atom_entry(mu.size(), -1);
    for (std::size_t i = 0; i < mu.size(); ++i) atom_entry[i] = cover.first_containing(mu.points[i]);

    double worst_c = 0.0;
    for (std::size_t k = 0; k < bundle.a_values.size(); ++k) {
        const int A = bundle.a_values[k];
        const GridField ra = engine.transform_grid(bundle.psi_A[k]);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const Point2 x = mu.points[i];
            Vec2 comparison{0.0, 0.0};
            for (std::size_t j = 0; j < cover.entries.size(); ++j) {
                const TopCoverEntry& e = cover.entries[j];
                if (e.tilde_mass == 0.0) continue;
                if (dist(x, e.disk.center) <= 2.0 * A * e.disk.radius) continue;
                for (std::size_t a2 = 0; a2 < mu.size(); ++a2)
                    if (atom_entry[a2] == static_cast<int>(j))
                        comparison += mu.weights[a2] * RieszEngine::kernel(cover.s, x - mu.points[a2]);
            }
            const Vec2 ra_val = ra.sample_vec(x);
            const double disc = (ra_val - comparison).norm();
            double gsum = 0.0;
            for (int A2 = A; A2 <= 4 * bundle.a_max; A2 *= 2)
                gsum += (static_cast<double>(A) / A2) * g_function(cover, A2, x);
            if (gsum > 0.0) worst_c = std::max(worst_c, disc / gsum);
        }
    }
    rep.metadata["discrepancy_constant"] = worst_c;
    rep.metadata["c9"] = rep.empirical_constant;
    return rep;
}

} // namespace rieszlab
