#ifndef SBMOM_QUADRATURE_HPP
#define SBMOM_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmom/rng.hpp"

// Quadrature over the ordered time simplex T^t_{n'} = {0 < s_{n'} < ...
// < s_1 < t}. Integrands may blow up like prod (t - s_i)^{-1/2} at the
// upper boundary; both methods below absorb that singularity exactly.

namespace sbmom {

enum class QuadMethod { ImportanceMc, QmcSubstituted };

inline QuadMethod parse_quad_method(const std::string& name) {
    if (name == "importance-mc") return QuadMethod::ImportanceMc;
    if (name == "qmc-substituted") return QuadMethod::QmcSubstituted;
    throw std::invalid_argument("unknown quadrature method: " + name);
}

inline std::string to_string(QuadMethod m) {
    return m == QuadMethod::ImportanceMc ? "importance-mc" : "qmc-substituted";
}

struct QuadratureOptions {
    QuadMethod method = QuadMethod::ImportanceMc;
    std::int64_t budget = 200000;
    std::uint64_t seed = 1;
    int qmc_replicates = 16;
};

struct QuadratureResult {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t evaluations = 0;
    QuadMethod method = QuadMethod::ImportanceMc;
};

// Integral of prod_i (t - s_i)^{-1/2} over the ordered simplex:
// (2 sqrt(t))^{n'} / n'!  by symmetry of the weight.
inline double reference_weight_integral(int n_prime, double t) {
    if (n_prime < 0) throw std::invalid_argument("reference_weight_integral: n' >= 0");
    if (!(t > 0.0)) throw std::invalid_argument("reference_weight_integral: t > 0");
    double v = 1.0;
    for (int k = 1; k <= n_prime; ++k) v *= 2.0 * std::sqrt(t) / k;
    return v;
}

// One draw from the importance density proportional to the weight
// prod (t - s_i)^{-1/2}: coordinates are sampled i.i.d. by the inverse
// CDF s = t (1 - U^2) and sorted into decreasing order. The returned
// weight is 1/density, so that f(s) * weight is an unbiased estimator
// of the simplex integral of f. Draws that tie or touch the boundary
// after rounding (an event of probability zero in exact arithmetic)
// are redrawn.
inline double sample_singular_importance(int n_prime, double t, Rng& rng,
                                         std::vector<double>& s) {
    s.resize(n_prime);
    for (;;) {
        for (int i = 0; i < n_prime; ++i) {
            const double u = rng.uniform_open();
            s[i] = t * (1.0 - u * u);
        }
        std::sort(s.begin(), s.end(), std::greater<>());
        bool interior = s.front() < t && s.back() > 0.0;
        for (int i = 0; interior && i + 1 < n_prime; ++i)
            interior = s[i] > s[i + 1];
        if (interior) break;
    }
    double w = reference_weight_integral(n_prime, t);
    for (int i = 0; i < n_prime; ++i) w *= std::sqrt(t - s[i]);
    return w;
}

namespace detail {

// 32-bit Sobol sequence, dimensions 1..8 (Joe-Kuo direction numbers).
// Each instance applies an independent linear matrix scramble plus a
// digital shift, so replicate averages are unbiased and the replicate
// spread is a valid error estimate.
class Sobol {
  public:
    Sobol(int dim, std::uint64_t scramble_seed) : dim_(dim), index_(0) {
        if (dim < 1 || dim > 8) throw std::invalid_argument("Sobol: 1 <= dim <= 8");
        static constexpr int s_deg[8] = {0, 1, 2, 3, 3, 4, 4, 5};
        static constexpr int s_a[8] = {0, 0, 1, 1, 2, 1, 4, 2};
        static constexpr std::uint32_t s_minit[8][5] = {
            {0, 0, 0, 0, 0},  {1, 0, 0, 0, 0}, {1, 3, 0, 0, 0},  {1, 3, 1, 0, 0},
            {1, 1, 1, 0, 0},  {1, 1, 3, 3, 0}, {1, 3, 5, 13, 0}, {1, 1, 5, 5, 17}};

        std::uint64_t sm = scramble_seed;
        for (int d = 0; d < dim_; ++d) {
            std::array<std::uint32_t, 32> m{};
            if (d == 0) {
                for (int k = 0; k < 32; ++k) m[k] = 1;
            } else {
                const int deg = s_deg[d];
                const int a = s_a[d];
                for (int k = 0; k < deg; ++k) m[k] = s_minit[d][k];
                for (int k = deg; k < 32; ++k) {
                    std::uint32_t v = m[k - deg] ^ (m[k - deg] << deg);
                    for (int j = 1; j < deg; ++j)
                        if ((a >> (deg - 1 - j)) & 1U) v ^= m[k - j] << j;
                    m[k] = v;
                }
            }
            // Random lower-triangular bit matrix with unit diagonal
            // (digit 0 is the most significant bit).
            std::array<std::uint32_t, 32> rows;
            for (int i = 0; i < 32; ++i) {
                const std::uint32_t upper =
                    i == 0 ? 0U
                           : static_cast<std::uint32_t>(splitmix64(sm) >> 32) &
                                 (~0U << (32 - i));
                rows[i] = (1U << (31 - i)) | upper;
            }
            for (int k = 0; k < 32; ++k) {
                const std::uint32_t v = m[k] << (31 - k);
                std::uint32_t w = 0;
                for (int i = 0; i < 32; ++i)
                    w |= static_cast<std::uint32_t>(__builtin_parity(rows[i] & v))
                         << (31 - i);
                dir_[d][k] = w;
            }
            state_[d] = 0;
        }
        for (int d = 0; d < dim_; ++d)
            shift_[d] = static_cast<std::uint32_t>(splitmix64(sm) >> 32);
    }

    // Next point, coordinates strictly inside (0,1).
    void next(double* u) {
        // Gray-code update: flip the direction of the lowest zero bit.
        const std::uint64_t i = index_++;
        int c = 0;
        std::uint64_t v = i;
        while (v & 1U) {
            ++c;
            v >>= 1;
        }
        for (int d = 0; d < dim_; ++d) {
            state_[d] ^= dir_[d][c];
            const std::uint32_t bits = state_[d] ^ shift_[d];
            u[d] = (static_cast<double>(bits) + 0.5) * 0x1.0p-32;
        }
    }

  private:
    int dim_;
    std::uint64_t index_;
    std::uint32_t dir_[8][32];
    std::uint32_t state_[8];
    std::uint32_t shift_[8];
};

} // namespace detail

// Map a point of the unit cube onto the ordered simplex so that uniform
// points follow the normalised weight density prod (t-s_i)^{-1/2} / Z.
// In the gap-ratio coordinates t - s_k = t * prod_{j>=k} w_j the weight
// density factorises into independent Beta laws w_j ~ u_j^{2/j}, so the
// boundary singularity is absorbed exactly per coordinate. Returns the
// estimator multiplier Z * prod_k sqrt(t - s_k): the cube integral of
// f(s(u)) times this multiplier equals the simplex integral of f.
inline double cube_to_simplex(const double* u, int n_prime, double t,
                              std::vector<double>& s) {
    s.resize(n_prime);
    double q = 1.0;
    double mult = reference_weight_integral(n_prime, t);
    for (int k = n_prime - 1; k >= 0; --k) {
        q *= std::pow(u[k], 2.0 / (k + 1));
        s[k] = t * (1.0 - q);
        mult *= std::sqrt(t * q);
    }
    // guard against rounding collisions at the upper boundary
    double upper = t;
    for (int k = 0; k < n_prime; ++k) {
        const double cap = upper * (1.0 - 1e-14);
        if (!(s[k] < cap)) s[k] = cap;
        upper = s[k];
    }
    return mult;
}

// Integrate f over the ordered simplex. The integrand is called with a
// strictly decreasing interior time vector. Results are deterministic
// functions of (seed, budget, method).
template <class F>
QuadratureResult integrate_ordered_simplex(F&& f, int n_prime, double t,
                                           const QuadratureOptions& opt) {
    if (!(t > 0.0)) throw std::invalid_argument("integrate_ordered_simplex: t > 0");
    if (n_prime < 1)
        throw std::invalid_argument("integrate_ordered_simplex: n' >= 1 (empty integral upstream)");
    if (opt.budget < 2) throw std::invalid_argument("integrate_ordered_simplex: budget too small");

    QuadratureResult res;
    res.method = opt.method;
    std::vector<double> s;

    auto check_finite = [&](double y) {
        if (!std::isfinite(y)) {
            std::string msg = "integrate_ordered_simplex: non-finite integrand at s = (";
            for (std::size_t i = 0; i < s.size(); ++i)
                msg += (i ? "," : "") + std::to_string(s[i]);
            throw std::runtime_error(msg + ")");
        }
    };

    if (opt.method == QuadMethod::ImportanceMc) {
        Rng rng(opt.seed);
        double mean = 0.0, m2 = 0.0;
        for (std::int64_t b = 0; b < opt.budget; ++b) {
            const double w = sample_singular_importance(n_prime, t, rng, s);
            const double y = f(s) * w;
            check_finite(y);
            const double delta = y - mean;
            mean += delta / static_cast<double>(b + 1);
            m2 += delta * (y - mean);
        }
        res.value = mean;
        res.std_error = std::sqrt(std::max(0.0, m2) /
                                  (static_cast<double>(opt.budget) *
                                   static_cast<double>(opt.budget - 1)));
        res.evaluations = opt.budget;
        return res;
    }

    // Randomised QMC: independent digital shifts of one Sobol stream,
    // error estimated from the spread of the replicate means.
    const int reps = std::max(2, opt.qmc_replicates);
    const std::int64_t per = std::max<std::int64_t>(1, opt.budget / reps);
    std::vector<double> means(reps, 0.0);
    std::array<double, 8> u{};
    for (int r = 0; r < reps; ++r) {
        detail::Sobol sobol(n_prime, derive_seed(opt.seed, 0x51bce2d1, r));
        double mean = 0.0;
        for (std::int64_t b = 0; b < per; ++b) {
            sobol.next(u.data());
            const double mult = cube_to_simplex(u.data(), n_prime, t, s);
            const double y = f(s) * mult;
            check_finite(y);
            mean += (y - mean) / static_cast<double>(b + 1);
        }
        means[r] = mean;
    }
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += means[r];
    mean /= reps;
    double var = 0.0;
    for (int r = 0; r < reps; ++r) var += (means[r] - mean) * (means[r] - mean);
    var /= static_cast<double>(reps - 1);
    res.value = mean;
    res.std_error = std::sqrt(var / reps);
    res.evaluations = per * reps;
    return res;
}

} // namespace sbmom

#endif
