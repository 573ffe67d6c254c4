#ifndef SBMOM_GAUSSIAN_HPP
#define SBMOM_GAUSSIAN_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbmom/indexing.hpp"

// Exact Gaussian calculus for one summand of the moment expansion: the
// integral over R^{n'} of a product of heat kernels is evaluated in
// closed form by assembling the quadratic exponent in the branch
// variables and eliminating it with a dense Cholesky factorisation.

namespace sbmom {

inline constexpr double min_variance = 1e-300;

// Gaussian transition density with variance t.
inline double heat_kernel(double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

struct Atom {
    double weight = 1.0;
    double location = 0.0;
};

// Initial datum of the process: either a constant density (bounded above
// and below by the same constant) or a finite atomic measure. A Dirac
// mass is the one-atom case with unit weight.
class InitialCondition {
  public:
    enum class Kind { ConstantDensity, AtomicMeasure };

    static InitialCondition constant_density(double level) {
        if (!(level > 0.0))
            throw std::invalid_argument("InitialCondition: level must be positive");
        InitialCondition u0;
        u0.kind_ = Kind::ConstantDensity;
        u0.level_ = level;
        return u0;
    }

    static InitialCondition atomic(std::vector<Atom> atoms) {
        if (atoms.empty())
            throw std::invalid_argument("InitialCondition: need at least one atom");
        for (const auto& a : atoms)
            if (!(a.weight > 0.0))
                throw std::invalid_argument("InitialCondition: atom weights must be positive");
        InitialCondition u0;
        u0.kind_ = Kind::AtomicMeasure;
        u0.atoms_ = std::move(atoms);
        return u0;
    }

    static InitialCondition dirac(double location) {
        return atomic({Atom{1.0, location}});
    }

    Kind kind() const { return kind_; }
    double level() const { return level_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double total_mass() const {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.weight;
        return m;
    }

    // Heat-potential decay parameters: t^gamma * (p_t * u0)(x) -> L.
    // Finite measures decay with gamma = 1/2 and L = mass / sqrt(2 pi).
    double hyp2_gamma() const { return 0.5; }
    double hyp2_L() const {
        return total_mass() / std::sqrt(2.0 * std::numbers::pi);
    }

  private:
    Kind kind_ = Kind::ConstantDensity;
    double level_ = 1.0;
    std::vector<Atom> atoms_;
};

// (p_t * u0)(x): exactly K for a constant density, and the weighted sum
// of kernels for an atomic measure.
inline double initial_potential(const InitialCondition& u0, double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("initial_potential: t must be positive");
    if (u0.kind() == InitialCondition::Kind::ConstantDensity) return u0.level();
    double v = 0.0;
    for (const auto& a : u0.atoms()) v += a.weight * heat_kernel(t, x - a.location);
    return v;
}

// One heat-kernel factor p_variance(left - right); each endpoint is
// either a fixed spatial location or one of the integration variables.
struct Endpoint {
    bool is_var = false;
    double loc = 0.0;  // when fixed
    int var = -1;      // when variable, 0-based index

    static Endpoint fixed(double x) { return {false, x, -1}; }
    static Endpoint variable(int k) { return {true, 0.0, k}; }
};

struct HeatKernelFactor {
    double variance = 0.0;
    Endpoint left;
    Endpoint right;
};

// A product of heat-kernel factors over variables z_0..z_{n_vars-1},
// times a positive constant kept in the log domain. The integral over
// all variables is finite iff every variable is linked (possibly through
// other variables) to at least one fixed endpoint; this is checked at
// construction.
class KernelGraph {
  public:
    KernelGraph(int n_vars, std::vector<HeatKernelFactor> factors, double log_prefactor)
        : n_vars_(n_vars), factors_(std::move(factors)), log_prefactor_(log_prefactor) {
        if (n_vars_ < 0) throw std::invalid_argument("KernelGraph: negative n_vars");
        validate();
    }

    int n_vars() const { return n_vars_; }
    const std::vector<HeatKernelFactor>& factors() const { return factors_; }
    double log_prefactor() const { return log_prefactor_; }
    double prefactor() const { return std::exp(log_prefactor_); }

  private:
    void validate() const {
        // Union-find with the fixed "root" as node n_vars_.
        std::vector<int> parent(n_vars_ + 1);
        for (int i = 0; i <= n_vars_; ++i) parent[i] = i;
        auto find = [&](int a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        auto link = [&](int a, int b) { parent[find(a)] = find(b); };

        for (const auto& f : factors_) {
            if (!(f.variance >= min_variance) || !std::isfinite(f.variance))
                throw std::invalid_argument("KernelGraph: factor variance too small");
            const int a = f.left.is_var ? f.left.var : n_vars_;
            const int b = f.right.is_var ? f.right.var : n_vars_;
            if (f.left.is_var && (f.left.var < 0 || f.left.var >= n_vars_))
                throw std::invalid_argument("KernelGraph: variable index out of range");
            if (f.right.is_var && (f.right.var < 0 || f.right.var >= n_vars_))
                throw std::invalid_argument("KernelGraph: variable index out of range");
            if (f.left.is_var && f.right.is_var && f.left.var == f.right.var)
                throw std::invalid_argument("KernelGraph: kernel between a variable and itself");
            link(a, b);
        }
        for (int k = 0; k < n_vars_; ++k)
            if (find(k) != find(n_vars_))
                throw std::invalid_argument(
                    "KernelGraph: variable not anchored to a fixed endpoint (divergent)");
    }

    int n_vars_;
    std::vector<HeatKernelFactor> factors_;
    double log_prefactor_;
};

namespace detail {

inline constexpr int max_vars = 16;

// Cholesky of a small SPD matrix stored row-major in a flat array.
// Returns false if a pivot is not strictly positive.
inline bool cholesky(double* q, int n) {
    for (int j = 0; j < n; ++j) {
        double d = q[j * n + j];
        for (int k = 0; k < j; ++k) d -= q[j * n + k] * q[j * n + k];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        q[j * n + j] = l;
        for (int i = j + 1; i < n; ++i) {
            double s = q[i * n + j];
            for (int k = 0; k < j; ++k) s -= q[i * n + k] * q[j * n + k];
            q[i * n + j] = s / l;
        }
    }
    return true;
}

} // namespace detail

// Closed-form value of  prefactor * Integral_{R^{n'}} prod_e p_{v_e}(d_e) dz.
// Writing the exponent as -(z'Qz - 2b'z + c0)/2, the result is
//   prefactor * prod_e (2 pi v_e)^{-1/2} * (2 pi)^{n'/2} det(Q)^{-1/2}
//            * exp((b'Q^{-1}b - c0)/2),
// accumulated in the log domain.
inline double spatial_integral(const KernelGraph& graph) {
    const int n = graph.n_vars();
    if (n > detail::max_vars)
        throw std::invalid_argument("spatial_integral: too many variables");

    double log_value = graph.log_prefactor();
    if (n == 0 && graph.factors().empty()) return std::exp(log_value);

    std::array<double, detail::max_vars * detail::max_vars> q{};
    std::array<double, detail::max_vars> b{};
    double c0 = 0.0;

    for (const auto& f : graph.factors()) {
        const double v = f.variance;
        log_value -= 0.5 * std::log(2.0 * std::numbers::pi * v);
        const double iv = 1.0 / v;
        if (f.left.is_var && f.right.is_var) {
            const int i = f.left.var, j = f.right.var;
            q[i * n + i] += iv;
            q[j * n + j] += iv;
            q[i * n + j] -= iv;
            q[j * n + i] -= iv;
        } else if (!f.left.is_var && !f.right.is_var) {
            const double gap = f.left.loc - f.right.loc;
            c0 += gap * gap * iv;
        } else {
            const int k = f.left.is_var ? f.left.var : f.right.var;
            const double loc = f.left.is_var ? f.right.loc : f.left.loc;
            q[k * n + k] += iv;
            b[k] += loc * iv;
            c0 += loc * loc * iv;
        }
    }

    if (n > 0) {
        if (!detail::cholesky(q.data(), n))
            throw std::domain_error("spatial_integral: singular precision matrix");
        // Solve L y = b, then accumulate |y|^2 = b' Q^{-1} b.
        std::array<double, detail::max_vars> y{};
        double quad = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = b[i];
            for (int k = 0; k < i; ++k) s -= q[i * n + k] * y[k];
            y[i] = s / q[i * n + i];
            quad += y[i] * y[i];
        }
        for (int i = 0; i < n; ++i) log_value -= std::log(q[i * n + i]);
        log_value += 0.5 * n * std::log(2.0 * std::numbers::pi);
        log_value += 0.5 * (quad - c0);
    } else {
        log_value -= 0.5 * c0;
    }
    return std::exp(log_value);
}

// Weighted list of kernel graphs. Constant densities produce a single
// graph; an atomic initial measure expands into one graph per assignment
// of atoms to the variables that carry an initial factor.
struct GraphExpansion {
    std::vector<KernelGraph> terms;

    double value() const {
        double v = 0.0;
        for (const auto& g : terms) v += spatial_integral(g);
        return v;
    }
};

// Precompiled structure of one summand, reusable across quadrature
// points: endpoints and prefactor bookkeeping are fixed, only the
// variances depend on the branch-time vector s.
class SummandPlan {
  public:
    SummandPlan(const IndexTriple& triple, const InitialCondition& u0)
        : n_(triple.pair.n), n_prime_(triple.pair.n_prime), u0_(u0) {
        if (!triple.pair.valid())
            throw std::invalid_argument("SummandPlan: invalid index triple");
        const auto& tau = triple.pairing.tau;
        const int wa = weight(triple.pair.alpha);
        if (static_cast<int>(tau.size()) != 2 * n_prime_)
            throw std::invalid_argument("SummandPlan: pairing length mismatch");
        const auto ib = iota_map(triple.pair.beta);
        for (int i = 0; i < wa; ++i) root_edges_.push_back(tau[i]);
        for (int i = wa; i < 2 * n_prime_; ++i) {
            const int j = ib[i - wa];
            if (tau[i] <= j)
                throw std::invalid_argument("SummandPlan: pairing violates ordering");
            var_edges_.push_back({j, tau[i]});
        }
        head_exponent_ = n_ - wa;
        for (int k = 0; k < n_prime_; ++k)
            if (!triple.pair.beta[k]) initial_vars_.push_back(k);
    }

    int n_prime() const { return n_prime_; }

    // Build the expansion at branch times s (strictly decreasing, inside
    // (0, t)), observation point (t, x).
    GraphExpansion build(std::span<const double> s, double t, double x) const {
        if (static_cast<int>(s.size()) != n_prime_)
            throw std::invalid_argument("SummandPlan: wrong time-vector length");
        double prev = t;
        for (double si : s) {
            if (!(si < prev) || !(si > 0.0))
                throw std::invalid_argument("SummandPlan: times must satisfy t > s1 > ... > 0");
            prev = si;
        }

        double log_pref = 0.0;
        if (head_exponent_ > 0)
            log_pref += head_exponent_ * std::log(initial_potential(u0_, t, x));

        std::vector<HeatKernelFactor> base;
        base.reserve(root_edges_.size() + var_edges_.size() + initial_vars_.size());
        for (int k : root_edges_)
            base.push_back({t - s[k], Endpoint::fixed(x), Endpoint::variable(k)});
        for (auto [j, k] : var_edges_)
            base.push_back({s[j] - s[k], Endpoint::variable(j), Endpoint::variable(k)});

        GraphExpansion expansion;
        if (u0_.kind() == InitialCondition::Kind::ConstantDensity) {
            log_pref += static_cast<double>(initial_vars_.size()) * std::log(u0_.level());
            expansion.terms.emplace_back(n_prime_, std::move(base), log_pref);
            return expansion;
        }

        // Atomic measure: cartesian product of atom choices over the
        // variables with an initial factor.
        const auto& atoms = u0_.atoms();
        const std::size_t m = initial_vars_.size();
        std::vector<std::size_t> choice(m, 0);
        for (;;) {
            auto factors = base;
            double lp = log_pref;
            for (std::size_t i = 0; i < m; ++i) {
                const int k = initial_vars_[i];
                const auto& a = atoms[choice[i]];
                factors.push_back({s[k], Endpoint::fixed(a.location), Endpoint::variable(k)});
                lp += std::log(a.weight);
            }
            expansion.terms.emplace_back(n_prime_, std::move(factors), lp);
            std::size_t i = 0;
            while (i < m && ++choice[i] == atoms.size()) choice[i++] = 0;
            if (i == m) break;
        }
        return expansion;
    }

    // Summand value at s: the spatially reduced integrand of the time
    // integral over the ordered simplex.
    double evaluate(std::span<const double> s, double t, double x) const {
        return build(s, t, x).value();
    }

  private:
    int n_;
    int n_prime_;
    InitialCondition u0_;
    std::vector<int> root_edges_;                // tau values of the first |alpha| slots
    std::vector<std::pair<int, int>> var_edges_; // (iota_beta(j), tau value)
    int head_exponent_ = 0;                      // n - |alpha|
    std::vector<int> initial_vars_;              // variables k with beta_k = 0
};

// Convenience wrapper matching the one-shot use.
inline GraphExpansion build_kernel_graphs(const IndexTriple& triple,
                                          std::span<const double> s, double t, double x,
                                          const InitialCondition& u0) {
    return SummandPlan(triple, u0).build(s, t, x);
}

} // namespace sbmom

#endif
