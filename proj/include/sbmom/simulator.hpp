#ifndef SBMOM_SIMULATOR_HPP
#define SBMOM_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmom/gaussian.hpp"
#include "sbmom/parallel.hpp"
#include "sbmom/rng.hpp"

// Branching-particle Monte Carlo for the super-Brownian motion: N
// particles of mass 1/N perform independent Brownian motions and carry
// exponential clocks of rate N; at each ring a particle dies or splits
// in two with equal probability (critical binary). The smoothed density
// at (t, x) is read off with a Gaussian kernel, whose low moments admit
// exact closed forms (the kernel fattens time arguments by h).
//
// Two samplers of the *same* law are provided.
//   direct:  every clock of every particle is simulated. Cost is
//            ~ N * mass * t events per replicate, which is prohibitive
//            for large N but serves as the ground-truth reference.
//   pruned:  subtrees with no descendants alive at t are integrated out
//            analytically. A family seeded s before the horizon survives
//            with probability q(s) = 2/(2+Ns); conditioned on survival,
//            its genealogy is a binary tree in which a lineage with
//            time-to-go s branches visibly (both sides surviving) with
//            survival function (2+Nv)/(2+Ns) down to time-to-go v, and
//            positions are Brownian along every edge. Splits whose other
//            side dies out do not affect surviving positions and are
//            marginalised away. Cost is ~ number of survivors, which
//            makes large-N runs tractable; equality in law with the
//            direct sampler is covered by tests.

namespace sbmom {

enum class SimAlgorithm { Pruned, Direct };

inline SimAlgorithm parse_sim_algorithm(const std::string& name) {
    if (name == "pruned") return SimAlgorithm::Pruned;
    if (name == "direct") return SimAlgorithm::Direct;
    throw std::invalid_argument("unknown simulator algorithm: " + name);
}

struct SimulationConfig {
    std::int64_t particles_n = 10000;      // mass granularity 1/N
    double t_end = 1.0;
    double center_x = 0.0;                 // window centre for constant data
    std::vector<double> bandwidths = {0.08, 0.04, 0.02, 0.01};
    int replicates = 1000;
    std::uint64_t seed = 1;
    double window = -1.0;                  // half-width; <0 = max(8 sqrt(t), 8)
    double pop_cap_factor = 50.0;          // abort when atoms exceed cap * N
    SimAlgorithm algorithm = SimAlgorithm::Pruned;
    int threads = 0;

    double resolved_window() const {
        return window > 0.0 ? window : std::max(8.0 * std::sqrt(t_end), 8.0);
    }
};

struct ParticleSystem {
    std::vector<double> positions;
    double mass = 1.0;  // common atom mass 1/N
    double time = 0.0;

    double total_mass() const { return mass * static_cast<double>(positions.size()); }
};

class ReplicateAborted : public std::runtime_error {
  public:
    ReplicateAborted() : std::runtime_error("population cap exceeded") {}
};

namespace detail {

// Survival probability of one ancestor's family over a span s at
// branching rate lambda: q = 2 / (2 + lambda s).
inline double family_survival(double lambda, double s) {
    return 2.0 / (2.0 + lambda * s);
}

struct PendingNode {
    double position;
    double time_to_go;
};

// Conditioned-on-survival family, survivors appended to out.
inline void pruned_family(double y, double span, double lambda, Rng& rng,
                          std::vector<double>& out, std::int64_t cap,
                          std::vector<PendingNode>& stack) {
    stack.clear();
    stack.push_back({y, span});
    while (!stack.empty()) {
        const PendingNode node = stack.back();
        stack.pop_back();
        const double u = rng.uniform_open();
        const double denom = 2.0 + lambda * node.time_to_go;
        if (u * denom <= 2.0) {
            // No visible split: a single survivor diffuses to the horizon.
            out.push_back(node.position + rng.normal() * std::sqrt(node.time_to_go));
            if (static_cast<std::int64_t>(out.size()) > cap) throw ReplicateAborted();
            continue;
        }
        const double v = (u * denom - 2.0) / lambda;  // time-to-go at the split
        const double pos = node.position + rng.normal() * std::sqrt(node.time_to_go - v);
        stack.push_back({pos, v});
        stack.push_back({pos, v});
        if (static_cast<std::int64_t>(stack.size() + out.size()) > cap)
            throw ReplicateAborted();
    }
}

// Full event-driven family: every exponential clock is simulated.
inline void direct_family(double y, double span, double lambda, Rng& rng,
                          std::vector<double>& out, std::int64_t cap,
                          std::vector<PendingNode>& stack) {
    stack.clear();
    stack.push_back({y, span});
    while (!stack.empty()) {
        PendingNode node = stack.back();
        stack.pop_back();
        for (;;) {
            const double wait = rng.exponential() / lambda;
            if (wait >= node.time_to_go) {
                out.push_back(node.position + rng.normal() * std::sqrt(node.time_to_go));
                if (static_cast<std::int64_t>(out.size()) > cap) throw ReplicateAborted();
                break;
            }
            node.position += rng.normal() * std::sqrt(wait);
            node.time_to_go -= wait;
            if (!rng.coin()) break;  // death
            stack.push_back(node);
            if (static_cast<std::int64_t>(stack.size() + out.size()) > cap)
                throw ReplicateAborted();
        }
    }
}

// Number of initial particles for each source point of the initial
// condition. Constant density K on [x-W, x+W] carries mass 2WK.
struct Seeding {
    std::int64_t uniform_count = 0;  // particles uniform on the window
    std::vector<std::pair<std::int64_t, double>> at;  // (count, location)
};

inline Seeding seeding_for(const SimulationConfig& cfg, const InitialCondition& u0) {
    Seeding s;
    const double n = static_cast<double>(cfg.particles_n);
    if (u0.kind() == InitialCondition::Kind::ConstantDensity) {
        const double w = cfg.resolved_window();
        s.uniform_count = std::llround(u0.level() * 2.0 * w * n);
    } else {
        for (const auto& a : u0.atoms())
            s.at.emplace_back(std::llround(a.weight * n), a.location);
    }
    return s;
}

} // namespace detail

// Evolve one replicate to t_end and return the surviving atoms.
inline ParticleSystem simulate_path(const SimulationConfig& cfg,
                                    const InitialCondition& u0, Rng& rng) {
    if (cfg.particles_n < 1) throw std::invalid_argument("simulate_path: N >= 1");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("simulate_path: t_end > 0");

    const double lambda = static_cast<double>(cfg.particles_n);
    const double t = cfg.t_end;
    const std::int64_t cap =
        static_cast<std::int64_t>(cfg.pop_cap_factor * static_cast<double>(cfg.particles_n));
    const auto seeding = detail::seeding_for(cfg, u0);
    const double w = cfg.resolved_window();

    ParticleSystem sys;
    sys.mass = 1.0 / lambda;
    sys.time = t;
    std::vector<detail::PendingNode> stack;

    if (cfg.algorithm == SimAlgorithm::Direct) {
        for (std::int64_t i = 0; i < seeding.uniform_count; ++i) {
            const double y = cfg.center_x + w * (2.0 * rng.uniform() - 1.0);
            detail::direct_family(y, t, lambda, rng, sys.positions, cap, stack);
        }
        for (const auto& [count, loc] : seeding.at)
            for (std::int64_t i = 0; i < count; ++i)
                detail::direct_family(loc, t, lambda, rng, sys.positions, cap, stack);
        return sys;
    }

    // Pruned sampler: thin ancestors by the survival probability first
    // (geometric skips), then grow only the surviving genealogies.
    const double q = detail::family_survival(lambda, t);
    const double log1mq = std::log1p(-q);
    auto sample_survivors = [&](std::int64_t count, auto position_of) {
        std::int64_t i = -1;
        for (;;) {
            const double u = rng.uniform_open();
            const double skip = std::floor(std::log(u) / log1mq);
            if (skip > static_cast<double>(count)) return;  // beyond the block
            i += 1 + static_cast<std::int64_t>(skip);
            if (i >= count) return;
            detail::pruned_family(position_of(), t, lambda, rng, sys.positions, cap, stack);
        }
    };
    sample_survivors(seeding.uniform_count, [&] {
        return cfg.center_x + w * (2.0 * rng.uniform() - 1.0);
    });
    for (const auto& [count, loc] : seeding.at)
        sample_survivors(count, [&] { return loc; });
    return sys;
}

// Kernel-smoothed density estimate at x with bandwidth h.
inline double estimate_density(const ParticleSystem& sys, double x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("estimate_density: h > 0");
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * h);
    const double inv2h = 1.0 / (2.0 * h);
    double acc = 0.0;
    for (double p : sys.positions) {
        const double d = x - p;
        acc += std::exp(-d * d * inv2h);
    }
    return acc * norm * sys.mass;
}

// One row per replicate: smoothed density at every bandwidth plus the
// total mass (for the criticality diagnostic). Aborted replicates are
// excluded and counted.
struct UhatSamples {
    std::vector<double> bandwidths;
    std::vector<std::vector<double>> uhat;  // [replicate][bandwidth]
    std::vector<double> total_mass;         // per replicate
    int aborted = 0;
    std::int64_t requested = 0;
};

inline UhatSamples run_replicates(const SimulationConfig& cfg, const InitialCondition& u0,
                                  double x) {
    if (cfg.replicates < 1) throw std::invalid_argument("run_replicates: replicates >= 1");
    UhatSamples out;
    out.bandwidths = cfg.bandwidths;
    out.requested = cfg.replicates;
    const std::size_t nh = cfg.bandwidths.size();
    std::vector<std::vector<double>> rows(cfg.replicates);
    std::vector<double> mass(cfg.replicates, -1.0);

    parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t r) {
        Rng rng(derive_seed(cfg.seed, 0xb5297a4d, static_cast<std::uint64_t>(r)));
        try {
            const ParticleSystem sys = simulate_path(cfg, u0, rng);
            std::vector<double> row(nh);
            for (std::size_t j = 0; j < nh; ++j)
                row[j] = estimate_density(sys, x, cfg.bandwidths[j]);
            rows[r] = std::move(row);
            mass[r] = sys.total_mass();
        } catch (const ReplicateAborted&) {
            // leave the slot empty; collected below
        }
    });

    for (std::int64_t r = 0; r < cfg.replicates; ++r) {
        if (mass[r] < 0.0) {
            ++out.aborted;
            continue;
        }
        out.uhat.push_back(std::move(rows[r]));
        out.total_mass.push_back(mass[r]);
    }
    return out;
}

struct MomentEstimate {
    int order = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

struct EmpiricalMoments {
    std::vector<double> bandwidths;
    std::vector<std::vector<MomentEstimate>> per_bandwidth;  // [bandwidth][order]
    std::vector<MomentEstimate> extrapolated;                // h -> 0, per order
    std::int64_t replicates = 0;
    int aborted = 0;
};

namespace detail {

inline MomentEstimate mean_and_error(const std::vector<double>& v, int order) {
    double mean = 0.0, m2 = 0.0;
    std::int64_t k = 0;
    for (double y : v) {
        ++k;
        const double d = y - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (y - mean);
    }
    MomentEstimate e;
    e.order = order;
    e.mean = mean;
    e.std_error = k > 1 ? std::sqrt(m2 / (static_cast<double>(k) * (k - 1))) : 0.0;
    return e;
}

// Ordinary-least-squares weights for extrapolating a + b sqrt(h) to
// h = 0 over the bandwidth ladder. Applying the weights per replicate
// keeps the cross-bandwidth correlation in the error estimate.
inline std::vector<double> extrapolation_weights(const std::vector<double>& h) {
    const std::size_t m = h.size();
    std::vector<double> sq(m);
    double xbar = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sq[i] = std::sqrt(h[i]);
        xbar += sq[i];
    }
    xbar /= static_cast<double>(m);
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) sxx += (sq[i] - xbar) * (sq[i] - xbar);
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i)
        w[i] = 1.0 / static_cast<double>(m) + xbar * (xbar - sq[i]) / sxx;
    return w;
}

} // namespace detail

inline EmpiricalMoments empirical_moments(const UhatSamples& samples,
                                          const std::vector<int>& orders) {
    if (samples.requested < 30)
        throw std::invalid_argument("empirical_moments: need at least 30 replicates");
    if (samples.aborted * 100 > samples.requested)
        throw std::runtime_error("empirical_moments: aborted replicate fraction above 1%");

    EmpiricalMoments out;
    out.bandwidths = samples.bandwidths;
    out.replicates = static_cast<std::int64_t>(samples.uhat.size());
    out.aborted = samples.aborted;

    const std::size_t nh = samples.bandwidths.size();
    std::vector<double> column(samples.uhat.size());
    out.per_bandwidth.resize(nh);
    for (std::size_t j = 0; j < nh; ++j) {
        for (int n : orders) {
            for (std::size_t r = 0; r < samples.uhat.size(); ++r)
                column[r] = std::pow(samples.uhat[r][j], n);
            out.per_bandwidth[j].push_back(detail::mean_and_error(column, n));
        }
    }

    if (nh >= 3) {
        const auto w = detail::extrapolation_weights(samples.bandwidths);
        for (int n : orders) {
            for (std::size_t r = 0; r < samples.uhat.size(); ++r) {
                double y = 0.0;
                for (std::size_t j = 0; j < nh; ++j)
                    y += w[j] * std::pow(samples.uhat[r][j], n);
                column[r] = y;
            }
            out.extrapolated.push_back(detail::mean_and_error(column, n));
        }
    }
    return out;
}

struct TailPoint {
    double threshold = 0.0;
    double frequency = 0.0;
    double std_error = 0.0;
    std::int64_t exceedances = 0;
};

// Empirical exceedance frequencies of the smallest-bandwidth estimate.
inline std::vector<TailPoint> empirical_tail(const UhatSamples& samples,
                                             const std::vector<double>& thresholds) {
    std::vector<TailPoint> out;
    if (samples.uhat.empty()) return out;
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < samples.bandwidths.size(); ++j)
        if (samples.bandwidths[j] < samples.bandwidths[jmin]) jmin = j;
    const double r = static_cast<double>(samples.uhat.size());
    for (double z : thresholds) {
        TailPoint p;
        p.threshold = z;
        for (const auto& row : samples.uhat)
            if (row[jmin] > z) ++p.exceedances;
        p.frequency = static_cast<double>(p.exceedances) / r;
        p.std_error = std::sqrt(std::max(p.frequency * (1.0 - p.frequency), 0.0) / r);
        out.push_back(p);
    }
    return out;
}

} // namespace sbmom

#endif
