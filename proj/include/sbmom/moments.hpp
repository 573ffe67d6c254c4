#ifndef SBMOM_MOMENTS_HPP
#define SBMOM_MOMENTS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbmom/gaussian.hpp"
#include "sbmom/indexing.hpp"
#include "sbmom/parallel.hpp"
#include "sbmom/quadrature.hpp"

// Assembly of E[u_t(x)^n]: the sum over n' and over every index triple
// of the head factors times the simplex integral of the spatially
// reduced summand.

namespace sbmom {

struct MomentRequest {
    int n = 1;
    double t = 1.0;
    double x = 0.0;
    InitialCondition u0 = InitialCondition::constant_density(1.0);
    QuadratureOptions quad;
    int cap = 7;      // largest admissible n; |J_{n,n'}| growth is steep
    int threads = 0;  // 0 = hardware concurrency
};

struct PerOrderContribution {
    int n_prime = 0;
    double sum = 0.0;
    double std_error = 0.0;
};

struct MomentResult {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t triples_evaluated = 0;
    std::vector<PerOrderContribution> per_nprime;
};

// One summand: head factors times the quadrature of the reduced
// integrand. Deterministic given the quadrature seed.
inline std::pair<double, double> moment_term(const IndexTriple& triple, double t,
                                             double x, const InitialCondition& u0,
                                             const QuadratureOptions& quad) {
    SummandPlan plan(triple, u0);
    if (plan.n_prime() == 0) {
        const double pot = initial_potential(u0, t, x);
        return {std::pow(pot, triple.pair.n), 0.0};
    }
    auto f = [&](const std::vector<double>& s) {
        return plan.evaluate(std::span<const double>(s.data(), s.size()), t, x);
    };
    const QuadratureResult r = integrate_ordered_simplex(f, plan.n_prime(), t, quad);
    return {r.value, r.std_error};
}

inline MomentResult moment(const MomentRequest& req) {
    if (req.n < 1) throw std::invalid_argument("moment: n must be positive");
    if (!(req.t > 0.0)) throw std::invalid_argument("moment: t must be positive");
    if (req.n > req.cap)
        throw std::invalid_argument("moment: n exceeds the configured cap");

    const auto triples = enumerate_all_triples(req.n);
    std::vector<double> values(triples.size(), 0.0);
    std::vector<double> errors(triples.size(), 0.0);

    // One independent stream per triple, derived from (seed, index):
    // the result does not depend on the thread count.
    parallel_for(static_cast<std::int64_t>(triples.size()), req.threads,
                 [&](std::int64_t i) {
                     QuadratureOptions q = req.quad;
                     q.seed = derive_seed(req.quad.seed, 0x7a3f9b2c,
                                          static_cast<std::uint64_t>(i));
                     auto [v, e] = moment_term(triples[i], req.t, req.x, req.u0, q);
                     values[i] = v;
                     errors[i] = e;
                 });

    MomentResult res;
    res.per_nprime.resize(req.n);
    for (int np = 0; np < req.n; ++np) res.per_nprime[np].n_prime = np;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        auto& slot = res.per_nprime[triples[i].pair.n_prime];
        slot.sum += values[i];
        slot.std_error = std::hypot(slot.std_error, errors[i]);
    }
    for (const auto& slot : res.per_nprime) {
        res.value += slot.sum;
        res.std_error = std::hypot(res.std_error, slot.std_error);
    }
    res.triples_evaluated = static_cast<std::int64_t>(triples.size());
    return res;
}

// Analytic values for the small orders used as oracles.
//   n = 1:                    (p_t * u0)(x)
//   n = 2, constant K:        K^2 + K sqrt(t/pi)
//   n = 2, one atom (c, w):   c^2 p_t(x-w)^2 + c * I(t, x-w)  with
//     I(t,d) = Int_0^t (4 pi (t-s))^{-1/2} p_{(t+s)/2}(d) ds, which at
//     d = 0 collapses to the arcsine value 1/4 (independent of t after
//     the 1/(2 pi t) head term). The integral is evaluated by
//     Gauss-Legendre after the substitution s = t - v^2.
inline double closed_form_moment(int n, double t, double x, const InitialCondition& u0) {
    if (!(t > 0.0)) throw std::invalid_argument("closed_form_moment: t must be positive");
    if (n == 1) return initial_potential(u0, t, x);
    if (n != 2) throw std::invalid_argument("closed_form_moment: only n in {1,2}");

    if (u0.kind() == InitialCondition::Kind::ConstantDensity) {
        const double k = u0.level();
        return k * k + k * std::sqrt(t / std::numbers::pi);
    }
    if (u0.atoms().size() != 1)
        throw std::invalid_argument("closed_form_moment: single-atom measures only");
    const double c = u0.atoms()[0].weight;
    const double d = x - u0.atoms()[0].location;
    const double head = c * heat_kernel(t, d);
    if (d == 0.0) return head * head + 0.25 * c;

    // 64-point Gauss-Legendre on v in (0, sqrt(t)); integrand
    // (1/sqrt(pi)) p_{t - v^2/2}(d) is smooth after the substitution.
    static constexpr int m = 64;
    static const std::vector<std::pair<double, double>> gl = [] {
        // Nodes/weights for Legendre polynomials via Newton iteration.
        std::vector<std::pair<double, double>> nw(m);
        for (int i = 0; i < m; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < m; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = m * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            nw[i] = {z, 2.0 / ((1.0 - z * z) * pp * pp)};
        }
        return nw;
    }();
    const double half = 0.5 * std::sqrt(t);
    double integral = 0.0;
    for (const auto& [z, w] : gl) {
        const double v = half * (z + 1.0);
        integral += w * heat_kernel(t - 0.5 * v * v, d);
    }
    integral *= half / std::sqrt(std::numbers::pi);
    return head * head + c * integral;
}

} // namespace sbmom

#endif
