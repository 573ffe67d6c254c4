#ifndef SBMOM_ANALYSIS_HPP
#define SBMOM_ANALYSIS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmom/gaussian.hpp"
#include "sbmom/moments.hpp"

// Numerical verification layer for the headline asymptotics of the
// super-Brownian motion: two-sided polynomial moment envelopes, log-log
// slopes, high-order moment ratios, and tail-probability brackets built
// from exponential-moment (Markov) and Paley-Zygmund arguments.

namespace sbmom {

enum class Hypothesis { H1, H2 };

struct HypothesisParams {
    Hypothesis kind = Hypothesis::H1;
    // H1: constant density bounded between k1 and k2 (equal here).
    double k1 = 1.0, k2 = 1.0;
    // H2: heat-potential decay t^{-gamma} with limit constant L, valid
    // from time c_x on.
    double gamma = 0.5, L = 0.0, c_x = 0.0;
};

inline double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

// Time from which the heat potential of an atomic measure is pinned to
// within a factor two of its limit: smallest t with
// t^gamma (p_t * u0)(x) >= L/2 (the potential is increasing in t, and
// bounded above by L, so the two-sided condition reduces to this).
inline double hyp2_time_floor(const InitialCondition& u0, double x) {
    if (u0.kind() != InitialCondition::Kind::AtomicMeasure)
        throw std::invalid_argument("hyp2_time_floor: atomic measures only");
    const double gamma = u0.hyp2_gamma();
    const double half_l = 0.5 * u0.hyp2_L();
    auto value = [&](double t) { return std::pow(t, gamma) * initial_potential(u0, t, x); };

    double lo = 1e-12;
    if (value(lo) >= half_l) return 0.0;
    double hi = 1.0;
    while (value(hi) < half_l) {
        hi *= 2.0;
        if (hi > 1e18) throw std::runtime_error("hyp2_time_floor: no crossing found");
    }
    if (hi > 1.0) lo = hi / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) >= half_l ? hi : lo) = mid;
    }
    return hi;
}

inline HypothesisParams params_for(const InitialCondition& u0, double x) {
    HypothesisParams p;
    if (u0.kind() == InitialCondition::Kind::ConstantDensity) {
        p.kind = Hypothesis::H1;
        p.k1 = p.k2 = u0.level();
    } else {
        p.kind = Hypothesis::H2;
        p.gamma = u0.hyp2_gamma();
        p.L = u0.hyp2_L();
        p.c_x = hyp2_time_floor(u0, x);
    }
    return p;
}

struct EnvelopeShape {
    double lower = 0.0;      // shape with unit constant
    double upper = 0.0;
    bool lower_valid = true; // domain restriction satisfied
    bool upper_valid = true;
};

// Bracketing shapes with unit constants. H1: 1 + n! t^{(n-1)/2} on both
// sides. H2: n! t^{(n-1)/2 - gamma}, the upper branch valid for
// t >= c_x and the lower for t >= max(n c_x, 1).
inline EnvelopeShape theorem1_envelope(int n, double t, const HypothesisParams& p) {
    if (n < 1 || !(t > 0.0)) throw std::invalid_argument("theorem1_envelope: n >= 1, t > 0");
    EnvelopeShape e;
    if (p.kind == Hypothesis::H1) {
        const double shape = 1.0 + factorial(n) * std::pow(t, 0.5 * (n - 1));
        e.lower = e.upper = shape;
    } else {
        const double shape = factorial(n) * std::pow(t, 0.5 * (n - 1) - p.gamma);
        e.lower = e.upper = shape;
        e.upper_valid = t >= p.c_x;
        e.lower_valid = t >= std::max(static_cast<double>(n) * p.c_x, 1.0);
    }
    return e;
}

// Normalised log-ratio rho(n, t) = (1/n) log(m_n / shape). Its range
// over a grid measures the fitted envelope constants.
inline double normalized_log_ratio(int n, double t, double m_n,
                                   const HypothesisParams& p) {
    const auto e = theorem1_envelope(n, t, p);
    if (!(m_n > 0.0)) throw std::invalid_argument("normalized_log_ratio: moment must be positive");
    return std::log(m_n / e.upper) / static_cast<double>(n);
}

struct SlopePoint {
    double t = 0.0;
    double m = 0.0;
    double err = 0.0;
};

struct SlopeEstimate {
    int n = 0;
    double slope = 0.0;
    double half_width = 0.0;  // two standard errors of the fitted slope
    double target = 0.0;
};

// Least squares on (log t, log m); weighted by the relative moment
// errors when use_weights is set. Requires at least four points
// spanning two decades of t.
inline SlopeEstimate fit_log_slope(const std::vector<SlopePoint>& pts,
                                   bool use_weights = false) {
    if (pts.size() < 4)
        throw std::invalid_argument("fit_log_slope: need at least 4 points");
    double tmin = pts.front().t, tmax = pts.front().t;
    for (const auto& p : pts) {
        tmin = std::min(tmin, p.t);
        tmax = std::max(tmax, p.t);
    }
    if (!(tmax >= 100.0 * tmin - 1e-9 * tmax))
        throw std::invalid_argument("fit_log_slope: t must span at least two decades");

    double sw = 0.0, sx = 0.0, sy = 0.0;
    auto wgt = [&](const SlopePoint& p) {
        if (!use_weights || !(p.err > 0.0)) return 1.0;
        const double rel = p.err / p.m;
        return 1.0 / (rel * rel);
    };
    for (const auto& p : pts) {
        if (!(p.m > 0.0) || !(p.t > 0.0))
            throw std::invalid_argument("fit_log_slope: positive moments and times required");
        const double w = wgt(p);
        sw += w;
        sx += w * std::log(p.t);
        sy += w * std::log(p.m);
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        const double w = wgt(p);
        const double dx = std::log(p.t) - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (std::log(p.m) - ybar);
    }
    SlopeEstimate est;
    est.slope = sxy / sxx;
    double rss = 0.0;
    for (const auto& p : pts) {
        const double w = wgt(p);
        const double r = std::log(p.m) - ybar - est.slope * (std::log(p.t) - xbar);
        rss += w * r * r;
    }
    const double dof = static_cast<double>(pts.size()) - 2.0;
    est.half_width = 2.0 * std::sqrt(std::max(rss, 0.0) / dof / sxx);
    return est;
}

// log m_n / (n log n) for trend inspection toward the limit value 1.
inline std::vector<std::pair<int, double>> high_moment_ratio(
    const std::vector<std::pair<int, double>>& moments) {
    std::vector<std::pair<int, double>> out;
    for (const auto& [n, m] : moments) {
        if (n < 2) throw std::invalid_argument("high_moment_ratio: n >= 2");
        if (!(m > 0.0)) throw std::invalid_argument("high_moment_ratio: positive moments");
        out.emplace_back(n, std::log(m) / (n * std::log(static_cast<double>(n))));
    }
    return out;
}

// Envelope-constant fit at a working time: the largest per-order root
// of the moment over the unit-constant shape.
inline double fit_k_star(const std::vector<std::pair<int, double>>& moments, double t) {
    double k = 0.0;
    for (const auto& [n, m] : moments) {
        const double shape = 1.0 + factorial(n) * std::pow(t, 0.5 * (n - 1));
        k = std::max(k, std::pow(m / shape, 1.0 / n));
    }
    if (!(k > 0.0)) throw std::invalid_argument("fit_k_star: no usable moments");
    return k;
}

// Exponential-moment Markov bound on P(u_t(x) > z):
//   e^{-a z} [ e^{a K*} + (sqrt(t) (1 - a K* sqrt(t)))^{-1} ],
// with the default a = 1/(2 K* sqrt(t)) keeping a K* sqrt(t) = 1/2 so
// the geometric series behind the bracket always converges.
inline double tail_upper_bound(double z, double t, double k_star,
                               std::optional<double> alpha_override = std::nullopt) {
    if (!(t > 0.0) || !(k_star > 0.0))
        throw std::invalid_argument("tail_upper_bound: t, K* must be positive");
    const double alpha = alpha_override.value_or(1.0 / (2.0 * k_star * std::sqrt(t)));
    if (!(alpha > 0.0) || !(alpha * k_star * std::sqrt(t) < 1.0))
        throw std::invalid_argument("tail_upper_bound: need 0 < alpha K* sqrt(t) < 1");
    const double bracket =
        std::exp(alpha * k_star) + 1.0 / (std::sqrt(t) * (1.0 - alpha * k_star * std::sqrt(t)));
    return std::exp(-alpha * z) * bracket;
}

struct PaleyZygmundPoint {
    double threshold = 0.0;
    double lower_bound = 0.0;
};

// P(u > theta m_n^{1/n}) >= (1 - theta^n)^2 m_n^2 / m_{2n}.
inline PaleyZygmundPoint paley_zygmund_lower(double m_n, double m_2n, int n, double theta) {
    if (!(m_2n > 0.0)) throw std::invalid_argument("paley_zygmund_lower: m_2n > 0");
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("paley_zygmund_lower: theta in (0,1)");
    PaleyZygmundPoint p;
    p.threshold = theta * std::pow(m_n, 1.0 / n);
    const double c = 1.0 - std::pow(theta, n);
    p.lower_bound = c * c * m_n * m_n / m_2n;
    return p;
}

struct ProbePoint {
    double t = 0.0;
    double threshold = 0.0;   // t^sigma
    double normalized = 0.0;  // t^{1/2 - sigma} log P
    bool censored = false;    // probability was zero; value uses 1/replicates
};

// Normalised large-deviation sequence t^{1/2 - sigma} log P(u > t^sigma)
// from tail probabilities supplied as (t, probability, replicates).
// Zero frequencies are censored at 1/replicates rather than -infinity.
inline std::vector<ProbePoint> large_deviation_probe(
    const std::vector<std::tuple<double, double, std::int64_t>>& tail_probs,
    double sigma) {
    if (!(sigma > 0.5))
        throw std::invalid_argument("large_deviation_probe: sigma > 1/2 required");
    std::vector<ProbePoint> out;
    for (const auto& [t, prob, reps] : tail_probs) {
        if (!(t > 0.0)) throw std::invalid_argument("large_deviation_probe: t > 0");
        ProbePoint p;
        p.t = t;
        p.threshold = std::pow(t, sigma);
        double q = prob;
        if (!(q > 0.0)) {
            if (reps <= 0)
                throw std::invalid_argument("large_deviation_probe: zero probability needs replicates");
            q = 1.0 / static_cast<double>(reps);
            p.censored = true;
        }
        p.normalized = std::pow(t, 0.5 - sigma) * std::log(q);
        out.push_back(p);
    }
    return out;
}

// Analytic branch of the probe: plug z = t^sigma into the Markov bound.
inline std::vector<ProbePoint> large_deviation_probe_bound(const std::vector<double>& t_grid,
                                                           double sigma, double k_star) {
    if (!(sigma > 0.5))
        throw std::invalid_argument("large_deviation_probe_bound: sigma > 1/2 required");
    std::vector<ProbePoint> out;
    for (double t : t_grid) {
        ProbePoint p;
        p.t = t;
        p.threshold = std::pow(t, sigma);
        p.normalized = std::pow(t, 0.5 - sigma) * std::log(tail_upper_bound(p.threshold, t, k_star));
        out.push_back(p);
    }
    return out;
}

} // namespace sbmom

#endif
