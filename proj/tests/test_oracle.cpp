#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rieszlab/oracle.hpp"
#include "rieszlab/riesz.hpp"

using namespace rieszlab;

TEST_CASE("refine_check thresholds") {
    CHECK(refine_check(1.0, 1.0, 0.02).pass);
    CHECK(refine_check(1.0, 1.0, 0.02).ratio == 0.0);
    CHECK(refine_check(1.01, 1.0, 0.02).pass);  // 1% apart at 2%
    CHECK_FALSE(refine_check(1.05, 1.0, 0.02).pass); // 5% apart at 2%
}

TEST_CASE("atomic measures are summed exactly") {
    AtomicMeasure m;
    m.points = {{1.0, 1.0}};
    m.weights = {2.0};
    const OracleValue v = quad_transform(m, 1.5, {0, 0}, QuadratureSpec::dyadic(0.1, 2));
    const Vec2 want = 2.0 * RieszEngine::kernel(1.5, {-1.0, -1.0});
    CHECK(v.value.x == doctest::Approx(want.x));
    CHECK(v.error_estimate == 0.0);
}

TEST_CASE("uniform disk density vanishes at its center") {
    GridSpec spec(1.0, 64);
    GridField f = sample_scalar(spec, [](Point2 p) { return p.norm() < 0.9 ? 1.0 : 0.0; });
    const Measure mu = GriddedMeasure{f};
    const OracleValue v = quad_transform(mu, 1.5, {0, 0}, QuadratureSpec::dyadic(0.05, 3));
    CHECK(std::abs(v.value.x) <= std::max(v.error_estimate, 1e-10));
    CHECK(std::abs(v.value.y) <= std::max(v.error_estimate, 1e-10));
}

TEST_CASE("ladder errors decrease for smooth densities") {
    const GridSpec spec(5.0, 128);
    const GridField g = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    const Measure mu = GriddedMeasure{g};
    const QuadratureSpec qs = QuadratureSpec::dyadic(0.4, 4);
    const OracleValue v = quad_transform(mu, 1.5, {1.0, 0.0}, qs);
    REQUIRE(v.ladder.size() == 4);
    double prev = 1e300;
    for (std::size_t i = 1; i < v.ladder.size(); ++i) {
        const double step = (v.ladder[i] - v.ladder[i - 1]).norm();
        CHECK(step <= prev * (1.0 + 1e-9));
        prev = step;
    }
    CHECK(v.error_estimate <= 1e-2 * v.value.norm());
}

TEST_CASE("newton oracle agrees with the engine") {
    RieszEngine eng(1.5);
    const GridSpec spec(5.0, 128);
    const GridField g = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    const Measure mu = GriddedMeasure{g};
    const Point2 x{0.7, -0.3};
    const OracleValue v = quad_newton(mu, 1.5, x, QuadratureSpec::dyadic(0.1, 3));
    const double fast = eng.newton_potential(mu, std::vector<Point2>{x})[0];
    CHECK(refine_check(fast, v.value.x, 0.01).pass);
}

TEST_CASE("frozen fixtures reproduce and the fast paths match them") {
    std::ifstream in(std::string(RIESZLAB_FIXTURES_DIR) + "/derived_values.json");
    REQUIRE_MESSAGE(in.good(), "fixtures file missing; run gen_fixtures");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto doc = nlohmann::json::parse(ss.str());
    CHECK(doc.at("oracle_version").get<std::string>() == kOracleVersion);

    RieszEngine eng(1.5);
    int checked = 0;
    for (const auto& fx : doc.at("fixtures")) {
        const std::string op = fx.at("op");
        if (op == "transform_gaussian") {
            const GridSpec spec(fx.at("L").get<double>(), fx.at("n").get<int>());
            const GridField g =
                sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
            const Measure mu = GriddedMeasure{g};
            const Point2 x{fx.at("x").get<double>(), fx.at("y").get<double>()};
            // The oracle still reproduces its stored value.
            const OracleValue v =
                quad_transform(mu, 1.5, x, QuadratureSpec::dyadic(spec.spacing() * 4.0, 4));
            CHECK(v.value.x == doctest::Approx(fx.at("value").at(0).get<double>())
                                   .epsilon(1e-10));
            CHECK(v.value.y == doctest::Approx(fx.at("value").at(1).get<double>())
                                   .epsilon(1e-10));
            // And the fast path stays within the frozen tolerance.
            const Vec2 fast = eng.transform_direct(mu, std::vector<Point2>{x})[0];
            CHECK(refine_check(fast.x, fx.at("value").at(0).get<double>(), 0.01).pass);
            CHECK(refine_check(fast.y, fx.at("value").at(1).get<double>(), 0.01).pass);
            ++checked;
        } else if (op == "newton_gaussian") {
            const GridSpec spec(fx.at("L").get<double>(), fx.at("n").get<int>());
            const GridField g =
                sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
            const Measure mu = GriddedMeasure{g};
            const Point2 x{fx.at("x").get<double>(), fx.at("y").get<double>()};
            const double fast = eng.newton_potential(mu, std::vector<Point2>{x})[0];
            CHECK(refine_check(fast, fx.at("value").at(0).get<double>(), 0.01).pass);
            ++checked;
        }
    }
    CHECK(checked >= 4);
}
