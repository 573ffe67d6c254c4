#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include "sbmom/analysis.hpp"

using namespace sbmom;

TEST_CASE("envelope shapes") {
    HypothesisParams h1;
    h1.kind = Hypothesis::H1;
    CHECK(theorem1_envelope(1, 7.0, h1).upper == Catch::Approx(2.0));
    CHECK(theorem1_envelope(3, 100.0, h1).upper == Catch::Approx(601.0));

    HypothesisParams h2;
    h2.kind = Hypothesis::H2;
    h2.gamma = 0.5;
    h2.c_x = 0.3;
    const auto e = theorem1_envelope(2, 5.0, h2);
    CHECK(e.upper == Catch::Approx(2.0));  // 2! t^0, constant in t
    CHECK(e.upper_valid);
    CHECK(theorem1_envelope(2, 5.0, h2).lower_valid);        // t >= max(2 c_x, 1)
    CHECK_FALSE(theorem1_envelope(4, 0.9, h2).lower_valid);  // t < 1
    CHECK_FALSE(theorem1_envelope(2, 0.2, h2).upper_valid);  // t < c_x
    CHECK_THROWS_AS(theorem1_envelope(0, 1.0, h1), std::invalid_argument);
}

TEST_CASE("hypothesis parameters from the initial condition") {
    const auto flat = params_for(InitialCondition::constant_density(2.5), 0.0);
    CHECK(flat.kind == Hypothesis::H1);
    CHECK(flat.k1 == 2.5);
    CHECK(flat.k2 == 2.5);

    const auto dirac = params_for(InitialCondition::dirac(0.0), 0.0);
    CHECK(dirac.kind == Hypothesis::H2);
    CHECK(dirac.gamma == 0.5);
    CHECK(dirac.L == Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-13));
    // the potential sits at its limit for every t when x is the atom
    CHECK(dirac.c_x == 0.0);
}

TEST_CASE("time floor for a shifted Dirac mass has the closed form d^2/(2 log 2)") {
    // sqrt(t) p_t(d) >= L/2  <=>  exp(-d^2/(2t)) >= 1/2.
    for (double d : {0.5, 1.0, 3.0}) {
        const double c = hyp2_time_floor(InitialCondition::dirac(0.0), d);
        CHECK(c == Catch::Approx(d * d / (2.0 * std::log(2.0))).epsilon(1e-9));
    }
    CHECK_THROWS_AS(hyp2_time_floor(InitialCondition::constant_density(1.0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("log-log slope recovery on synthetic power laws") {
    std::vector<SlopePoint> pts;
    for (double t : {100.0, 1000.0, 10000.0, 100000.0})
        pts.push_back({t, 3.7 * t, 0.0});
    const auto est = fit_log_slope(pts);
    CHECK(est.slope == Catch::Approx(1.0).margin(1e-12));
    CHECK(est.half_width < 1e-10);

    // weighting changes nothing for an exact law
    std::vector<SlopePoint> noisy = pts;
    for (auto& p : noisy) p.err = 0.05 * p.m;
    CHECK(fit_log_slope(noisy, true).slope == Catch::Approx(1.0).margin(1e-12));

    std::vector<SlopePoint> short_span = {{1.0, 1.0, 0}, {2.0, 2.0, 0}, {3.0, 3.0, 0}, {4.0, 4.0, 0}};
    CHECK_THROWS_AS(fit_log_slope(short_span), std::invalid_argument);
    std::vector<SlopePoint> few = {{1.0, 1.0, 0}, {1000.0, 2.0, 0}};
    CHECK_THROWS_AS(fit_log_slope(few), std::invalid_argument);
}

TEST_CASE("high moment ratios") {
    // m_n = n! gives log m_n / (n log n) -> 1 by Stirling
    std::vector<std::pair<int, double>> moments;
    for (int n = 2; n <= 12; ++n) moments.emplace_back(n, factorial(n));
    const auto ratios = high_moment_ratio(moments);
    CHECK(ratios.front().second == Catch::Approx(std::log(2.0) / (2.0 * std::log(2.0))));
    for (std::size_t i = 1; i < ratios.size(); ++i)
        CHECK(ratios[i].second > ratios[i - 1].second);
    CHECK(ratios.back().second < 1.0);
    CHECK(ratios.back().second > 0.6);
    CHECK_THROWS_AS(high_moment_ratio({{1, 2.0}}), std::invalid_argument);
}

TEST_CASE("tail upper bound") {
    const double t = 1.0, k_star = 0.8;
    // vacuous but finite at z = 0
    CHECK(tail_upper_bound(0.0, t, k_star) >= 1.0);
    // strictly decreasing in z
    double prev = tail_upper_bound(0.0, t, k_star);
    for (double z = 0.5; z < 20.0; z += 0.5) {
        const double b = tail_upper_bound(z, t, k_star);
        CHECK(b < prev);
        prev = b;
    }
    // log-slope equals -alpha = -1/(2 K* sqrt(t))
    const double alpha = 1.0 / (2.0 * k_star * std::sqrt(t));
    const double slope =
        std::log(tail_upper_bound(10.0, t, k_star) / tail_upper_bound(9.0, t, k_star));
    CHECK(slope == Catch::Approx(-alpha).epsilon(1e-12));
    // default alpha keeps the bracket geometric for any K*
    CHECK_NOTHROW(tail_upper_bound(1.0, 4.0, 25.0));
    // overriding alpha beyond the convergence region is rejected
    CHECK_THROWS_AS(tail_upper_bound(1.0, 1.0, 2.0, 0.6), std::invalid_argument);
}

TEST_CASE("Paley-Zygmund lower bound") {
    // theta -> 1 kills the bound
    CHECK(paley_zygmund_lower(1.0, 2.0, 1, 0.999).lower_bound < 1e-5);
    // worked value: theta = 1/2, n = 1, constant data at t = 1
    const double m1 = 1.0, m2 = 1.0 + 1.0 / std::sqrt(std::numbers::pi);
    const auto p = paley_zygmund_lower(m1, m2, 1, 0.5);
    CHECK(p.threshold == Catch::Approx(0.5));
    CHECK(p.lower_bound == Catch::Approx(0.25 / m2).epsilon(1e-12));
    CHECK(p.lower_bound == Catch::Approx(0.1598).epsilon(1e-3));
    // Cauchy-Schwarz keeps every admissible bound below one
    for (double theta : {0.1, 0.5, 0.9}) {
        for (double m : {0.5, 1.0, 4.0}) {
            const double m2n = m * m * 1.7;  // any m_2n >= m_n^2
            CHECK(paley_zygmund_lower(m, m2n, 2, theta).lower_bound <= 1.0);
        }
    }
    CHECK_THROWS_AS(paley_zygmund_lower(1.0, 0.0, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(paley_zygmund_lower(1.0, 1.0, 1, 1.0), std::invalid_argument);
}

TEST_CASE("large-deviation probe") {
    // synthetic exponential tail P = exp(-z / sqrt(t)) gives exactly -1
    std::vector<std::tuple<double, double, std::int64_t>> probs;
    const double sigma = 1.0;
    for (double t : {4.0, 16.0, 64.0}) {
        const double z = std::pow(t, sigma);
        probs.emplace_back(t, std::exp(-z / std::sqrt(t)), 0);
    }
    const auto pts = large_deviation_probe(probs, sigma);
    REQUIRE(pts.size() == 3);
    CHECK(pts[1].threshold == Catch::Approx(16.0));
    for (const auto& p : pts) {
        CHECK_FALSE(p.censored);
        CHECK(p.normalized == Catch::Approx(-1.0).epsilon(1e-12));
    }

    // zero frequencies are censored with the 1/replicates convention
    const auto cens = large_deviation_probe({{4.0, 0.0, 1000}}, 1.0);
    REQUIRE(cens.size() == 1);
    CHECK(cens[0].censored);
    CHECK(cens[0].normalized ==
          Catch::Approx(std::pow(4.0, -0.5) * std::log(1.0 / 1000.0)).epsilon(1e-12));

    // the analytic branch is bounded by a t-independent constant
    const double k_star = 0.8;
    const auto bound_pts = large_deviation_probe_bound({4.0, 100.0, 10000.0}, 1.0, k_star);
    for (const auto& p : bound_pts) {
        CHECK(p.normalized < 0.0);
        CHECK(p.normalized > -2.0 / (2.0 * k_star) - 1.0);
    }
    CHECK_THROWS_AS(large_deviation_probe(probs, 0.4), std::invalid_argument);
}

TEST_CASE("fitted envelope constant") {
    // moments exactly on the unit-constant shape give K* = 1
    std::vector<std::pair<int, double>> m;
    for (int n = 1; n <= 5; ++n)
        m.emplace_back(n, 1.0 + factorial(n) * std::pow(2.0, 0.5 * (n - 1)));
    CHECK(fit_k_star(m, 2.0) == Catch::Approx(1.0).epsilon(1e-12));
    // scaling the moments by c^n scales the fit by c
    for (auto& [n, v] : m) v *= std::pow(1.3, n);
    CHECK(fit_k_star(m, 2.0) == Catch::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("normalized log ratio matches its definition") {
    HypothesisParams h1;
    const double rho = normalized_log_ratio(3, 4.0, 50.0, h1);
    CHECK(rho == Catch::Approx(std::log(50.0 / (1.0 + 6.0 * 4.0)) / 3.0).epsilon(1e-12));
}
