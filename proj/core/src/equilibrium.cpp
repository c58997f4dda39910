#include "rieszlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rieszlab/random.hpp"

namespace rieszlab {

CapSystem::CapSystem(const CapSumMeasure& mu, double s, const GridSpec* spectral)
    : mu_(mu), s_(s) {
    for (const Cap& c : mu_.caps) total_mass_ += c.mass;
    const int nr = 8, na = 16;
    for (std::size_t j = 0; j < mu_.caps.size(); ++j) {
        const Cap& cap = mu_.caps[j];
        const double r = cap.support.radius;
        std::vector<double> raw_w;
        std::vector<Point2> raw_p;
        for (int i = 0; i < nr; ++i) {
            const double rho = (i + 0.5) / nr;
            for (int k = 0; k < na; ++k) {
                const double ang = 2.0 * M_PI * (k + 0.5) / na;
                const Point2 p = cap.support.center +
                                 Vec2{rho * r * std::cos(ang), rho * r * std::sin(ang)};
                const double area = (r * r) * rho * (1.0 / nr) * (2.0 * M_PI / na);
                raw_p.push_back(p);
                raw_w.push_back(cap_density(cap, p) * area);
            }
        }
        // Normalize so the node weights sum exactly to the cap mass.
        double sum = 0.0;
        for (double w : raw_w) sum += w;
        const double fix = cap.mass / sum;
        for (std::size_t i = 0; i < raw_w.size(); ++i) {
            node_pos_.push_back(raw_p[i]);
            node_w_.push_back(raw_w[i] * fix);
            node_cap_.push_back(static_cast<int>(j));
        }
    }

    // Per-cap transforms at every node.
    RieszEngine eng(s);
    const std::size_t nn = node_pos_.size();
    r_matrix_.resize(mu_.caps.size() * nn);
    for (std::size_t j = 0; j < mu_.caps.size(); ++j) {
        CapSumMeasure single;
        single.caps.push_back(mu_.caps[j]);
        std::vector<Vec2> vals;
        bool resolved = spectral && mu_.caps[j].support.radius >= 4.0 * spectral->spacing();
        if (resolved) {
            GridField density = sample_scalar(*spectral, [&](Point2 p) {
                return cap_density(mu_.caps[j], p);
            });
            const SpectralResult res = eng.transform_fft(density);
            vals.resize(nn);
            for (std::size_t i = 0; i < nn; ++i) vals[i] = res.field.sample_vec(node_pos_[i]);
        } else {
            const Measure m = single;
            vals = eng.transform_direct(m, node_pos_);
        }
        for (std::size_t i = 0; i < nn; ++i) r_matrix_[j * nn + i] = vals[i];
    }
}

Vec2 CapSystem::field_at(std::span<const double> alpha, std::size_t i) const {
    Vec2 sum{0.0, 0.0};
    const std::size_t nn = nodes();
    for (std::size_t j = 0; j < alpha.size(); ++j)
        if (alpha[j] != 0.0) sum += alpha[j] * r_matrix_[j * nn + i];
    return sum;
}

double CapSystem::energy(std::span<const double> alpha, const VProfile& prof) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes(); ++i) {
        const double a_here = alpha[node_cap_[i]];
        if (a_here == 0.0) continue;
        acc += a_here * node_w_[i] * prof.V(field_at(alpha, i));
    }
    return acc;
}

double CapSystem::first_order(std::span<const double> alpha, int j, const VProfile& prof) const {
    double acc = 0.0;
    const std::size_t nn = nodes();
    for (std::size_t i = 0; i < nn; ++i) {
        const Vec2 field = field_at(alpha, i);
        if (node_cap_[i] == j) acc += node_w_[i] * prof.V(field);
        const double a_here = alpha[node_cap_[i]];
        if (a_here != 0.0)
            acc += a_here * node_w_[i] * dot(prof.gradV(field), r_matrix_[j * nn + i]);
    }
    return acc;
}

double CapSystem::max_single_cap_field() const {
    double m = 0.0;
    const std::size_t nn = nodes();
    for (std::size_t j = 0; j < size(); ++j)
        for (std::size_t i = 0; i < nn; ++i) m = std::max(m, r_matrix_[j * nn + i].norm());
    return m;
}

double phi_eval(std::span<const double> alpha, double lambda, double m, const CapSystem& sys,
                const VProfile& prof) {
    if (alpha.size() != sys.size())
        throw std::invalid_argument("phi_eval: weight count mismatch");
    double amax = 0.0;
    for (double a : alpha) {
        if (a < 0.0) throw std::invalid_argument("phi_eval: negative weight");
        amax = std::max(amax, a);
    }
    return lambda * m * amax + sys.energy(alpha, prof);
}

namespace {

double constraint_mass(std::span<const double> alpha, const CapSystem& sys) {
    double m = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) m += alpha[j] * sys.cap_mass(j);
    return m;
}

void renormalize(std::vector<double>& alpha, const CapSystem& sys, double target) {
    const double cur = constraint_mass(alpha, sys);
    if (cur <= 0.0) return;
    const double f = target / cur;
    for (double& a : alpha) a *= f;
}

} // namespace

MinimizeResult minimize_phi(double lambda, double m, const CapSystem& sys, const VProfile& prof,
                            int max_iters, std::uint64_t seed) {
    const std::size_t J = sys.size();
    if (J == 0) throw std::invalid_argument("minimize_phi: no caps");
    const double target = sys.total_mass();

    auto run_descent = [&](std::vector<double> alpha, std::vector<TraceRow>* trace,
                           bool* converged) {
        renormalize(alpha, sys, target);
        double phi = phi_eval(alpha, lambda, m, sys, prof);
        double step = 0.5;
        int iter = 0;
        if (trace) trace->push_back({0, phi, *std::max_element(alpha.begin(), alpha.end()),
                                     std::abs(constraint_mass(alpha, sys) - target)});
        while (iter < max_iters && step > 1e-7) {
            bool improved = false;
            // Argmax coordinate (lowest index on ties) is perturbed last.
            std::size_t arg = 0;
            for (std::size_t j = 1; j < J; ++j)
                if (alpha[j] > alpha[arg]) arg = j;
            std::vector<std::size_t> order;
            for (std::size_t j = 0; j < J; ++j)
                if (j != arg) order.push_back(j);
            order.push_back(arg);
            for (std::size_t j : order) {
                for (double dir : {-1.0, 1.0}) {
                    std::vector<double> trial = alpha;
                    trial[j] = std::max(0.0, alpha[j] * (1.0 + dir * step));
                    if (trial[j] == alpha[j] && dir > 0.0) trial[j] = step; // leave zero
                    renormalize(trial, sys, target);
                    const double phi_t = phi_eval(trial, lambda, m, sys, prof);
                    if (phi_t < phi - 1e-15 * (1.0 + std::abs(phi))) {
                        alpha = std::move(trial);
                        phi = phi_t;
                        improved = true;
                        break;
                    }
                }
                ++iter;
                if (iter >= max_iters) break;
            }
            if (trace) trace->push_back({iter, phi, *std::max_element(alpha.begin(), alpha.end()),
                                         std::abs(constraint_mass(alpha, sys) - target)});
            if (!improved) step /= 2.0;
        }
        if (converged) *converged = step <= 1e-7;
        return std::make_pair(alpha, phi);
    };

    // Three seeded starts: uniform plus two random profiles.
    Rng rng(seed);
    std::vector<std::vector<double>> starts;
    starts.emplace_back(J, 1.0);
    for (int r = 0; r < 2; ++r) {
        std::vector<double> a(J);
        for (double& v : a) v = rng.uniform(0.25, 4.0);
        starts.push_back(std::move(a));
    }

    MinimizeResult best;
    bool first = true;
    for (const auto& start : starts) {
        std::vector<TraceRow> trace;
        bool conv = false;
        auto [alpha, phi] = run_descent(start, &trace, &conv);
        if (first || phi < best.phi) {
            best.a.alpha = alpha;
            best.phi = phi;
            best.trace = std::move(trace);
            best.converged = conv;
            first = false;
        }
    }
    best.a.lambda = lambda;
    best.a.constraint_mass = target;

    // Weight bound: if ∫V(R mu~)d mu~ <= lambda m then all a_j <= 2.
    std::vector<double> ones(J, 1.0);
    const double base_energy = sys.energy(ones, prof);
    best.weight_bound_applicable = base_energy <= lambda * m;
    if (best.weight_bound_applicable) {
        const double amax = *std::max_element(best.a.alpha.begin(), best.a.alpha.end());
        best.weight_bound_ok = amax <= 2.0 + 1e-2;
    }
    return best;
}

EstimateReport first_order_residual(const Weights& a, double lambda, int j, double m,
                                    const CapSystem& sys, const VProfile& prof) {
    EstimateReport rep;
    rep.name = "first_order_residual_cap" + std::to_string(j);
    if (a.alpha[j] <= 0.0) {
        rep.pass = true;
        rep.note = "skipped: a_j = 0, condition inapplicable";
        return rep;
    }
    const double I = sys.first_order(a.alpha, j, prof);
    rep.measured_lhs = I;
    rep.bound_rhs = 6.0 * lambda * sys.cap_mass(j);
    rep.empirical_constant = rep.bound_rhs != 0.0 ? I / rep.bound_rhs : 0.0;
    const double tol = 1e-9 * (1.0 + std::abs(rep.bound_rhs));
    rep.pass = I <= rep.bound_rhs + tol;
    rep.metadata["m"] = m;
    rep.metadata["lambda"] = lambda;
    return rep;
}

} // namespace rieszlab
