// Regenerates tests/fixtures/derived_values.json from the oracle module.
// Run manually after oracle changes; the file is versioned with the suite.

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rieszlab/oracle.hpp"

using namespace rieszlab;

int main() {
    nlohmann::ordered_json doc;
    doc["oracle_version"] = kOracleVersion;
    nlohmann::ordered_json fixtures = nlohmann::ordered_json::array();

    const GridSpec spec(6.0, 256);
    const GridField g = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    const Measure mu = GriddedMeasure{g};

    // Evaluation points on the cell-center lattice, where the fast path's
    // singular-cell rule is symmetric.
    const Point2 points[] = {spec.cell_center(149, 127), spec.cell_center(138, 138),
                             spec.cell_center(170, 106), spec.cell_center(133, 127)};
    for (const Point2& x : points) {
        const OracleValue v =
            quad_transform(mu, 1.5, x, QuadratureSpec::dyadic(spec.spacing() * 4.0, 4));
        fixtures.push_back({{"op", "transform_gaussian"},
                            {"L", spec.half_extent},
                            {"n", spec.resolution},
                            {"x", x.x},
                            {"y", x.y},
                            {"value", {v.value.x, v.value.y}},
                            {"error", v.error_estimate},
                            {"oracle_version", kOracleVersion}});
    }
    for (const Point2& x : {spec.cell_center(149, 127), spec.cell_center(128, 160)}) {
        const OracleValue v =
            quad_newton(mu, 1.5, x, QuadratureSpec::dyadic(spec.spacing() * 4.0, 4));
        fixtures.push_back({{"op", "newton_gaussian"},
                            {"L", spec.half_extent},
                            {"n", spec.resolution},
                            {"x", x.x},
                            {"y", x.y},
                            {"value", {v.value.x, v.value.y}},
                            {"error", v.error_estimate},
                            {"oracle_version", kOracleVersion}});
    }
    doc["fixtures"] = fixtures;

    std::ofstream out(std::string(RIESZLAB_FIXTURES_DIR) + "/derived_values.json",
                      std::ios::binary);
    out << doc.dump(2) << "\n";
    std::printf("wrote %zu fixtures\n", fixtures.size());
    return 0;
}
