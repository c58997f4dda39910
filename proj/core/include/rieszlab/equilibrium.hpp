#ifndef RIESZLAB_EQUILIBRIUM_HPP
#define RIESZLAB_EQUILIBRIUM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rieszlab/measure.hpp"
#include "rieszlab/profiles.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/riesz.hpp"

namespace rieszlab {

/// Precomputed cap quadrature nodes and per-cap transform samples. All
/// Phi evaluations and first-order integrals reduce to weighted sums over
/// these nodes, so the optimizer never recomputes a transform.
class CapSystem {
public:
    /// `spectral` selects the grid multiplier route for the per-cap
    /// transforms (caps must be resolved: r >= 4h); otherwise the direct
    /// per-cap quadrature route is used.
    CapSystem(const CapSumMeasure& mu, double s, const GridSpec* spectral = nullptr);

    const CapSumMeasure& caps() const { return mu_; }
    double s() const { return s_; }
    double cap_mass(int j) const { return mu_.caps[j].mass; }
    double total_mass() const { return total_mass_; }
    std::size_t size() const { return mu_.caps.size(); }

    /// ∫ V(R mu^alpha) d mu^alpha for mu^alpha = sum alpha_j mu~_j.
    double energy(std::span<const double> alpha, const VProfile& prof) const;
    /// The first-order integral I_j at weights alpha:
    ///   ∫ V(R mu^a) d mu~_j + ∫ <grad V(R mu^a), R mu~_j> d mu^a.
    double first_order(std::span<const double> alpha, int j, const VProfile& prof) const;

    /// R mu^alpha at node i.
    Vec2 field_at(std::span<const double> alpha, std::size_t i) const;
    std::size_t nodes() const { return node_pos_.size(); }
    Point2 node_position(std::size_t i) const { return node_pos_[i]; }
    int node_cap(std::size_t i) const { return node_cap_[i]; }
    double node_weight(std::size_t i) const { return node_w_[i]; }
    Vec2 cap_field_at(int j, std::size_t i) const { return r_matrix_[j * nodes() + i]; }

    /// max_j ||R mu~_j||_inf over the nodes (Step-3 bound ingredient).
    double max_single_cap_field() const;

private:
    CapSumMeasure mu_;
    double s_;
    double total_mass_ = 0.0;
    std::vector<Point2> node_pos_;
    std::vector<double> node_w_;
    std::vector<int> node_cap_;
    std::vector<Vec2> r_matrix_; // [cap * nodes + node]
};

double phi_eval(std::span<const double> alpha, double lambda, double m, const CapSystem& sys,
                const VProfile& prof);

struct Weights {
    std::vector<double> alpha;
    double lambda = 0.0;
    double constraint_mass = 0.0;
};

struct TraceRow {
    int iter;
    double phi;
    double max_alpha;
    double constraint_residual;
};

struct MinimizeResult {
    Weights a;
    double phi = 0.0;
    std::vector<TraceRow> trace;
    bool converged = false;
    bool weight_bound_applicable = false; // ∫V(R mu~)d mu~ <= lambda m
    bool weight_bound_ok = false;         // then max a_j <= 2 + 1e-2
};

/// Projected coordinate descent with multiplicative renormalization onto
/// the mass constraint; non-argmax coordinates perturbed first, argmax
/// ties broken by lowest index; three seeded starts.
MinimizeResult minimize_phi(double lambda, double m, const CapSystem& sys, const VProfile& prof,
                            int max_iters, std::uint64_t seed);

/// First-order condition report: I_j vs 6 lambda mu~_j(R^2). Caps with
/// a_j = 0 yield a skipped (vacuous) report.
EstimateReport first_order_residual(const Weights& a, double lambda, int j, double m,
                                    const CapSystem& sys, const VProfile& prof);

} // namespace rieszlab

#endif
