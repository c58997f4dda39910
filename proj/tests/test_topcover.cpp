#include <doctest.h>

#include <cmath>

#include "rieszlab/random.hpp"
#include "rieszlab/topcover.hpp"

using namespace rieszlab;

namespace {

const StandardCap& shared_cap(double s = 1.5) {
    static const StandardCap cap = build_standard_cap(s, GridSpec(16.0, 256));
    (void)s;
    return cap;
}

} // namespace

TEST_CASE("top cover of a single atom") {
    AtomicMeasure m;
    m.points = {{0.2, 0.3}};
    m.weights = {1.0};
    const TopCover cover = build_top_cover(m, 1.5, 0.1, 10.0, 0.01);
    REQUIRE(cover.entries.size() == 1);
    CHECK(cover.entries[0].tilde_mass == doctest::Approx(1.0));
    CHECK(cover.budget_used == doctest::Approx(std::pow(cover.entries[0].disk.radius, 1.5)));
    CHECK(cover.uncovered_mass == doctest::Approx(0.0));
}

TEST_CASE("top cover of a generation-2 Cantor square") {
    const CantorSquare sq = make_cantor_square(1.5, 2, 1.0, 1.0);
    const double theta = sq.theta;
    const double cell = theta * theta; // generation-2 cell side
    const TopCover cover = build_top_cover(sq.measure, 1.5, cell, 10.0, 0.01);
    // One disk per occupied quadtree leaf at the cell scale: 16 cells.
    CHECK(cover.entries.size() >= 16);
    double tilde_sum = 0.0;
    for (const auto& e : cover.entries) {
        CHECK(e.disk.radius <= cell);
        tilde_sum += e.tilde_mass;
    }
    CHECK(tilde_sum == doctest::Approx(1.0));
    // Direct cell enumeration bound: sum r^s <= count * (max radius)^s.
    CHECK(cover.budget_used <=
          cover.entries.size() * std::pow(cell, 1.5) + 1e-12);
}

TEST_CASE("top cover budget failure") {
    GridSpec spec(1.0, 32);
    GridField f(spec, 1);
    for (double& v : f.component(0)) v = 1.0;
    CHECK_THROWS_AS(build_top_cover(GriddedMeasure{f}, 1.5, 0.05, 1e-3, 0.01), BudgetExceeded);
}

TEST_CASE("psi bundle identities on a one-disk cover") {
    const double s = 1.5;
    TopCover cover;
    cover.s = s;
    cover.r_star = 1.0;
    cover.budget = 10.0;
    cover.entries.push_back({Disk({0, 0}, 1.0), 1.0});
    cover.budget_used = 1.0;
    cover.total_mass = 1.0;

    const GridSpec spec(20.0, 512);
    const PsiBundle bundle = build_psi_bundle(cover, shared_cap(), spec, 8);

    // Psi_2 at the center: mass / (pi A^2 r^2) with A = 2.
    CHECK(bundle.psi_A[0].at(0, 256, 256) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-9));

    // ∫Psi_A = tilde mass for every A, to rounding.
    for (const GridField& fa : bundle.psi_A)
        CHECK(fa.integral(0) == doctest::Approx(1.0).epsilon(1e-9));

    // ∫Psi equals the truncated geometric sum Sum A^{s-2}.
    double want = 0.0;
    for (int A = 2; A <= 8; A *= 2) want += std::pow(static_cast<double>(A), s - 2.0);
    CHECK(bundle.big_psi.integral(0) == doctest::Approx(want).epsilon(1e-9));
    CHECK(bundle.c6 == doctest::Approx(want));

    // C5 finite and stable under grid refinement within 10%.
    const PsiBundle fine = build_psi_bundle(cover, shared_cap(), GridSpec(20.0, 1024), 8);
    CHECK(std::isfinite(bundle.c5));
    CHECK(bundle.c5 > 0.0);
    CHECK(std::abs(bundle.c5 - fine.c5) <= 0.10 * std::max(bundle.c5, fine.c5));

    CHECK_THROWS(build_psi_bundle(cover, shared_cap(), GridSpec(20.0, 64), 8)); // h > r/4
}

namespace {

struct CoverFixture {
    CantorSquare sq = make_cantor_square(1.5, 2, 1.0, 1.0);
    TopCover cover;
    GridSpec spec{2.0, 256};
    PsiBundle bundle;
    RieszEngine eng{1.5};

    CoverFixture() {
        const double cell = sq.theta * sq.theta;
        cover = build_top_cover(sq.measure, 1.5, cell * 1.01, 10.0, 0.01);
        bundle = build_psi_bundle(cover, shared_cap(), spec, 2);
    }
};

} // namespace

TEST_CASE("psi lower chain holds for admissible nu") {
    CoverFixture fx;
    const double m = 0.5, H = 10.0;
    SUBCASE("nu = mu itself") {
        const EstimateReport rep =
            check_psi_lower(fx.sq.measure, fx.cover, fx.bundle, fx.eng, m, H);
        CHECK(rep.pass);
        CHECK(rep.measured_lhs >= rep.bound_rhs);
    }
    SUBCASE("half mass on two cells") {
        AtomicMeasure nu = fx.sq.measure;
        for (std::size_t i = 0; i < nu.size(); ++i) {
            const int in = fx.cover.first_containing(nu.points[i]);
            nu.weights[i] = (in % 2 == 0) ? nu.weights[i] * 2.0 : 0.0;
        }
        // Strip zero weights.
        AtomicMeasure nz;
        for (std::size_t i = 0; i < nu.size(); ++i)
            if (nu.weights[i] > 0) {
                nz.points.push_back(nu.points[i]);
                nz.weights.push_back(nu.weights[i]);
            }
        const EstimateReport rep = check_psi_lower(nz, fx.cover, fx.bundle, fx.eng, m, H);
        CHECK(rep.measured_lhs > 0.0);
    }
    SUBCASE("violating nu(T~_j) <= 2 mu(T~_j) is rejected") {
        AtomicMeasure nu = fx.sq.measure;
        for (double& w : nu.weights) w *= 3.0;
        CHECK_THROWS_AS(check_psi_lower(nu, fx.cover, fx.bundle, fx.eng, m, H),
                        PreconditionViolation);
    }
}

TEST_CASE("jensen lower bound") {
    CoverFixture fx;
    const VProfile& prof = v_profile();
    SUBCASE("cantor measure passes within quadrature tolerance") {
        const EstimateReport rep = jensen_lower(fx.sq.measure, fx.bundle, prof, fx.eng);
        CHECK(rep.pass);
        // I recomputation matches ∫Psi.
        CHECK(rep.metadata.at("psi_integral") ==
              doctest::Approx(fx.bundle.big_psi.integral(0)).epsilon(1e-10));
    }
    SUBCASE("symmetric toy with vanishing transform on supp Psi") {
        // Point-symmetric pair about the grid center: R nu = 0 at the
        // symmetry center; both sides of the Jensen report stay finite and
        // ordered.
        AtomicMeasure nu;
        nu.points = {{0.31, 0.0}, {-0.31, 0.0}};
        nu.weights = {0.5, 0.5};
        TopCover cover = build_top_cover(nu, 1.5, 0.15, 10.0, 0.01);
        const PsiBundle bundle = build_psi_bundle(cover, shared_cap(), GridSpec(2.0, 256), 2);
        const EstimateReport rep = jensen_lower(nu, bundle, prof, fx.eng);
        CHECK(rep.pass);
    }
}

TEST_CASE("g-function pointwise values") {
    const double s = 1.5;
    TopCover cover;
    cover.s = s;
    cover.entries.push_back({Disk({0, 0}, 1.0), 1.0});
    CHECK(g_function(cover, 2, {0, 0}) == doctest::Approx(std::pow(2.0, -s)));
    CHECK(g_function(cover, 2, {5, 0}) == 0.0); // outside 2 T_1
}

TEST_CASE("g l2 norms against a direct atom sum") {
    CoverFixture fx;
    for (int A : {2, 4, 8}) {
        const double got = g_l2_norm(fx.cover, A, fx.sq.measure);
        double oracle = 0.0;
        for (std::size_t i = 0; i < fx.sq.measure.size(); ++i) {
            double sum = 0.0;
            for (const auto& e : fx.cover.entries)
                if (dist(fx.sq.measure.points[i], e.disk.center) <= A * e.disk.radius * (1 + 1e-12))
                    sum += e.tilde_mass / std::pow(e.disk.radius, 1.5);
            sum *= std::pow(static_cast<double>(A), -1.5);
            oracle += fx.sq.measure.weights[i] * sum * sum;
        }
        CHECK(got == doctest::Approx(oracle));
        CHECK(std::isfinite(got));
    }
}

TEST_CASE("non-homogeneous maximal function") {
    CoverFixture fx;
    const AtomicMeasure& mu = fx.sq.measure;
    std::vector<double> ones(mu.size(), 1.0);
    std::vector<Disk> family = RieszEngine::dyadic_family(mu.points[0], 0.01, 10);

    // f == 1 -> value <= 1 since mu(D) <= mu(3D).
    CHECK(hl_maximal(mu, ones, mu.points[0], family) <= 1.0 + 1e-12);

    // Indicator of a far cell seen over small local disks -> 0.
    std::vector<double> far(mu.size(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.points[i].x > 0.3) far[i] = 1.0;
    const auto small = RieszEngine::dyadic_family(Point2{-0.45, -0.45}, 0.01, 3);
    CHECK(hl_maximal(mu, far, {-0.45, -0.45}, small) == 0.0);

    // Random f against the exhaustive-family oracle (all centers at atoms,
    // all pairwise-distance radii).
    Rng rng(23);
    std::vector<double> f(mu.size());
    for (double& v : f) v = rng.uniform(0.0, 1.0);
    const Point2 x = mu.points[3];
    std::vector<Disk> exhaustive;
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) {
            const double r = dist(mu.points[i], mu.points[j]) + 1e-9;
            if (dist(x, mu.points[i]) <= r) exhaustive.emplace_back(mu.points[i], r);
        }
    const double over_family = hl_maximal(mu, f, x, exhaustive);
    const double over_dyadic = hl_maximal(mu, f, x, RieszEngine::dyadic_family(x, 0.005, 12));
    CHECK(over_dyadic <= over_family * (1.0 + 1e-9) + 1e-12);
    CHECK(over_family > 0.0);
}

TEST_CASE("maximal operator norm stays bounded over a random corpus") {
    CoverFixture fx;
    const AtomicMeasure& mu = fx.sq.measure;
    Rng rng(31);
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<double> f(mu.size());
        for (double& v : f) v = rng.uniform(-1.0, 1.0);
        double norm_f = 0.0, norm_mf = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            norm_f += mu.weights[i] * f[i] * f[i];
            std::vector<double> absf(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) absf[k] = std::abs(f[k]);
            const double m =
                hl_maximal(mu, absf, mu.points[i], RieszEngine::dyadic_family(mu.points[i], 0.005, 12));
            norm_mf += mu.weights[i] * m * m;
        }
        worst_ratio = std::max(worst_ratio, std::sqrt(norm_mf / norm_f));
    }
    // Reported, not asserted against a theory constant; sanity cap only.
    CHECK(worst_ratio < 50.0);
    MESSAGE("empirical maximal-operator norm over corpus: ", worst_ratio);
}

TEST_CASE("l2 bound for the transform of Psi") {
    CoverFixture fx;
    const EstimateReport rep =
        l2_psi_transform_check(fx.sq.measure, fx.cover, fx.bundle, fx.eng, 0.5);
    CHECK(std::isfinite(rep.measured_lhs));
    CHECK(rep.measured_lhs > 0.0);
    CHECK(rep.metadata.count("discrepancy_constant") == 1);

    // Single atom: finite report.
    AtomicMeasure one;
    one.points = {{0.0, 0.0}};
    one.weights = {1.0};
    TopCover cover1 = build_top_cover(one, 1.5, 0.2, 10.0, 0.01);
    const PsiBundle b1 = build_psi_bundle(cover1, shared_cap(), GridSpec(4.0, 256), 2);
    const EstimateReport r1 = l2_psi_transform_check(one, cover1, b1, fx.eng, 0.5);
    CHECK(std::isfinite(r1.measured_lhs));
}

TEST_CASE("l2 Psi ratio is stable under grid refinement") {
    CoverFixture fx;
    const EstimateReport coarse =
        l2_psi_transform_check(fx.sq.measure, fx.cover, fx.bundle, fx.eng, 0.5);
    const PsiBundle fine = build_psi_bundle(fx.cover, shared_cap(), GridSpec(2.0, 512), 2);
    const EstimateReport refined =
        l2_psi_transform_check(fx.sq.measure, fx.cover, fine, fx.eng, 0.5);
    const double a = coarse.empirical_constant, b = refined.empirical_constant;
    CHECK(std::abs(a - b) <= 0.25 * std::max(a, b));
}
