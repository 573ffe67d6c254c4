#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sbmom/quadrature.hpp"
#include "sbmom/rng.hpp"

using namespace sbmom;

namespace {

double weight_product(const std::vector<double>& s, double t) {
    double v = 1.0;
    for (double si : s) v /= std::sqrt(t - si);
    return v;
}

} // namespace

TEST_CASE("reference weight integral") {
    CHECK(reference_weight_integral(0, 3.0) == 1.0);
    CHECK(reference_weight_integral(1, 1.0) == Catch::Approx(2.0));
    CHECK(reference_weight_integral(3, 4.0) == Catch::Approx(64.0 / 6.0));
    CHECK_THROWS_AS(reference_weight_integral(-1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(reference_weight_integral(2, 0.0), std::invalid_argument);
}

TEST_CASE("importance sampler lands inside the ordered simplex") {
    Rng rng(5);
    std::vector<double> s;
    for (int np : {1, 3, 6}) {
        for (double t : {0.5, 4.0}) {
            for (int i = 0; i < 500; ++i) {
                const double w = sample_singular_importance(np, t, rng, s);
                REQUIRE(static_cast<int>(s.size()) == np);
                CHECK(w > 0.0);
                double prev = t;
                for (double si : s) {
                    CHECK(si > 0.0);
                    CHECK(si < prev);
                    prev = si;
                }
            }
        }
    }
}

TEST_CASE("importance coordinate law matches the inverse CDF") {
    // One coordinate: s = t (1 - U^2), so P(s < a) = 1 - sqrt(1 - a/t).
    Rng rng(9);
    const double t = 2.0;
    const double a = 0.75;
    std::vector<double> s;
    int hits = 0;
    const int reps = 200000;
    for (int i = 0; i < reps; ++i) {
        sample_singular_importance(1, t, rng, s);
        if (s[0] < a) ++hits;
    }
    const double expect = 1.0 - std::sqrt(1.0 - a / t);
    const double freq = static_cast<double>(hits) / reps;
    const double se = std::sqrt(expect * (1.0 - expect) / reps);
    CHECK(std::abs(freq - expect) < 4.0 * se);
}

TEST_CASE("volume of the ordered simplex") {
    for (int np = 1; np <= 6; ++np) {
        for (double t : {0.5, 1.0, 4.0}) {
            double vol = 1.0;
            for (int k = 1; k <= np; ++k) vol *= t / k;

            QuadratureOptions mc;
            mc.method = QuadMethod::ImportanceMc;
            mc.budget = 200000;
            mc.seed = 42 + np;
            auto rmc = integrate_ordered_simplex(
                [](const std::vector<double>&) { return 1.0; }, np, t, mc);
            CHECK(std::abs(rmc.value - vol) <
                  std::max(3.0 * rmc.std_error, 1e-3 * vol));

            QuadratureOptions qmc;
            qmc.method = QuadMethod::QmcSubstituted;
            qmc.budget = 200000;
            qmc.seed = 17 + np;
            auto rq = integrate_ordered_simplex(
                [](const std::vector<double>&) { return 1.0; }, np, t, qmc);
            CHECK(std::abs(rq.value - vol) < std::max(4.0 * rq.std_error, 1e-3 * vol));
        }
    }
}

TEST_CASE("singular weight is reproduced by both methods") {
    for (int np = 1; np <= 6; ++np) {
        for (double t : {0.5, 1.0, 4.0}) {
            const double ref = reference_weight_integral(np, t);
            auto f = [t](const std::vector<double>& s) { return weight_product(s, t); };

            QuadratureOptions mc;
            mc.budget = 100000;
            mc.seed = 1000 + np;
            auto rmc = integrate_ordered_simplex(f, np, t, mc);
            // the importance density cancels the weight exactly
            CHECK(rmc.value == Catch::Approx(ref).epsilon(1e-12));
            CHECK(rmc.std_error < 1e-12 * ref);

            QuadratureOptions qmc;
            qmc.method = QuadMethod::QmcSubstituted;
            qmc.budget = 400000;
            qmc.seed = 2000 + np;
            auto rq = integrate_ordered_simplex(f, np, t, qmc);
            CHECK(rq.value == Catch::Approx(ref).epsilon(1e-4));
        }
    }
}

TEST_CASE("cube-to-simplex map lands inside and samples the weight exactly") {
    Rng rng(33);
    std::vector<double> s;
    const double t = 2.5;
    const double ref = reference_weight_integral(4, t);
    for (int i = 0; i < 2000; ++i) {
        double u[4];
        for (double& c : u) c = rng.uniform_open();
        const double mult = cube_to_simplex(u, 4, t, s);
        CHECK(mult > 0.0);
        double prev = t;
        for (double si : s) {
            CHECK(si > 0.0);
            CHECK(si < prev);
            prev = si;
        }
        // the multiplier times the weight integrand is the constant Z
        // (up to cancellation in recomputing t - s near the boundary)
        CHECK(mult * weight_product(s, t) == Catch::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("doubling the budget stays statistically consistent") {
    auto f = [](const std::vector<double>& s) {
        double v = 1.0;
        for (double si : s) v += si * si;
        return v / std::sqrt(1.0 - s[0] + 1e-12);
    };
    QuadratureOptions a;
    a.budget = 50000;
    a.seed = 7;
    auto ra = integrate_ordered_simplex(f, 3, 1.0, a);
    QuadratureOptions b = a;
    b.budget = 100000;
    b.seed = 8;
    auto rb = integrate_ordered_simplex(f, 3, 1.0, b);
    const double combined = std::hypot(ra.std_error, rb.std_error);
    CHECK(std::abs(ra.value - rb.value) < 4.0 * combined);
}

TEST_CASE("seeded determinism of both methods") {
    auto f = [](const std::vector<double>& s) { return s[0] + 0.5 * s[1]; };
    for (auto method : {QuadMethod::ImportanceMc, QuadMethod::QmcSubstituted}) {
        QuadratureOptions opt;
        opt.method = method;
        opt.budget = 20000;
        opt.seed = 99;
        auto r1 = integrate_ordered_simplex(f, 2, 1.0, opt);
        auto r2 = integrate_ordered_simplex(f, 2, 1.0, opt);
        CHECK(r1.value == r2.value);
        CHECK(r1.std_error == r2.std_error);
        CHECK(r1.evaluations == r2.evaluations);
    }
}

TEST_CASE("non-finite integrands abort with a diagnostic") {
    auto f = [](const std::vector<double>&) {
        return std::numeric_limits<double>::infinity();
    };
    QuadratureOptions opt;
    opt.budget = 100;
    CHECK_THROWS_AS(integrate_ordered_simplex(f, 2, 1.0, opt), std::runtime_error);
}

TEST_CASE("precondition violations are rejected") {
    auto f = [](const std::vector<double>&) { return 1.0; };
    QuadratureOptions opt;
    CHECK_THROWS_AS(integrate_ordered_simplex(f, 0, 1.0, opt), std::invalid_argument);
    CHECK_THROWS_AS(integrate_ordered_simplex(f, 2, -1.0, opt), std::invalid_argument);
    CHECK_THROWS_AS(parse_quad_method("simpson"), std::invalid_argument);
}
