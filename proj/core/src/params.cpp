#include "rieszlab/params.hpp"

#include <cmath>
#include <cstdio>

namespace rieszlab {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

} // namespace

std::vector<std::string> ConstructionParams::validate() const {
    std::vector<std::string> bad;
    // Checked in the declaration order N, eps, M, delta.
    if (levels < 0) bad.push_back("N must be a nonnegative integer");
    if (!(s > 1.0 && s < 2.0)) bad.push_back(fmt("s must lie in (1, 2) (got %.17g)", s));
    if (!(eps > 0.0 && eps <= 0.01)) bad.push_back(fmt("epsilon must lie in (0, 0.01] (got %.17g)", eps));
    else if (loss_constant * eps < 1.0 &&
             std::pow(1.0 - loss_constant * eps, levels) < 0.5)
        bad.push_back(fmt("(1 - C*eps)^N >= 1/2 fails for loss constant C = %.17g at eps = %.17g",
                          loss_constant, eps));
    else if (loss_constant * eps >= 1.0)
        bad.push_back(fmt("loss constant times epsilon must stay below 1 (C*eps = %.17g)",
                          loss_constant * eps));
    if (!(big_m >= 6.0)) bad.push_back(fmt("M must be >= 6 (got %.17g)", big_m));
    if (!(delta > 0.0)) bad.push_back(fmt("delta must be positive (got %.17g)", delta));
    if (eps > 0.0 && delta > 0.0 && big_m > 0.0) {
        const double inner = 2.0 * std::pow(big_m, s) * delta / std::pow(eps, s);
        if (!(inner < 1.0))
            bad.push_back(fmt("2*M^s*delta/eps^s = %.17g must be < 1", inner));
        const double moll = 2.0 * M_PI * std::pow(big_m, s) * delta / (eps * eps);
        if (!(moll < 1.0))
            bad.push_back(fmt("2*pi*M^s*delta/eps^2 = %.17g must be < 1", moll));
    }
    if (!(half_mass > 0.0)) bad.push_back(fmt("m must be positive (got %.17g)", half_mass));
    if (!(cover_budget > 0.0)) bad.push_back(fmt("H must be positive (got %.17g)", cover_budget));
    if (!(r_star > 0.0)) bad.push_back(fmt("r* must be positive (got %.17g)", r_star));
    if (!(rho_star > 0.0)) bad.push_back(fmt("rho* must be positive (got %.17g)", rho_star));
    return bad;
}

} // namespace rieszlab
