#ifndef RIESZLAB_PARAMS_HPP
#define RIESZLAB_PARAMS_HPP

#include <string>
#include <vector>

namespace rieszlab {

/// Construction parameters, to be chosen in the order N, eps, M, delta.
/// The closing constraints couple M and delta to eps:
///   2 M^s delta / eps^s < 1       (inner-disk bound)
///   2 pi M^s delta / eps^2 < 1    (mollified growth bound)
///   (1 - loss_constant * eps)^N >= 1/2
struct ConstructionParams {
    double s = 1.5;        // dimension parameter, canonical range (1,2)
    int levels = 1;        // N
    double eps = 0.01;     // in (0, 0.01]
    double big_m = 8.0;    // M >= 6
    double delta = 1e-7;
    double half_mass = 0.5;    // m
    double cover_budget = 1.0; // H
    double r_star = 0.1;
    double rho_star = 0.1;
    double loss_constant = 10.0;

    /// Empty when valid; otherwise one message per violated constraint,
    /// checked in the N, eps, M, delta order.
    std::vector<std::string> validate() const;
    bool valid() const { return validate().empty(); }
};

} // namespace rieszlab

#endif
