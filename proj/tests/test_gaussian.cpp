#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sbmom/gaussian.hpp"
#include "sbmom/indexing.hpp"
#include "sbmom/rng.hpp"

using namespace sbmom;

namespace {

// Brute-force oracle: tensor-product Gauss-Legendre quadrature of the
// raw kernel product over a window wide enough that the truncated tails
// are negligible. Independent of the closed-form path under test.

struct GaussLegendre {
    std::vector<double> nodes, weights;

    explicit GaussLegendre(int m) : nodes(m), weights(m) {
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
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};

double raw_product(const KernelGraph& g, const std::vector<double>& z) {
    double v = g.prefactor();
    for (const auto& f : g.factors()) {
        const double a = f.left.is_var ? z[f.left.var] : f.left.loc;
        const double b = f.right.is_var ? z[f.right.var] : f.right.loc;
        v *= heat_kernel(f.variance, a - b);
    }
    return v;
}

// Composite Gauss-Legendre over [-half, half]^dim with `panels` panels
// of `order` nodes per axis.
double brute_force_integral(const KernelGraph& g, double half, int panels, int order) {
    const GaussLegendre gl(order);
    const int dim = g.n_vars();
    REQUIRE(dim >= 1);
    REQUIRE(dim <= 2);
    const double pw = 2.0 * half / panels;

    std::vector<double> pts, wts;
    for (int p = 0; p < panels; ++p) {
        const double lo = -half + p * pw;
        for (int i = 0; i < order; ++i) {
            pts.push_back(lo + 0.5 * pw * (gl.nodes[i] + 1.0));
            wts.push_back(0.5 * pw * gl.weights[i]);
        }
    }
    double acc = 0.0;
    std::vector<double> z(dim);
    if (dim == 1) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            z[0] = pts[i];
            acc += wts[i] * raw_product(g, z);
        }
    } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            z[0] = pts[i];
            double inner = 0.0;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                z[1] = pts[j];
                inner += wts[j] * raw_product(g, z);
            }
            acc += wts[i] * inner;
        }
    }
    return acc;
}

} // namespace

TEST_CASE("heat kernel point values") {
    CHECK(heat_kernel(1.0, 0.0) == Catch::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(heat_kernel(0.5, 0.0) == Catch::Approx(0.5641895835477563).epsilon(1e-12));
    CHECK(heat_kernel(2.0, 2.0) == Catch::Approx(0.1037768743551487).epsilon(1e-9));
    CHECK_THROWS_AS(heat_kernel(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(heat_kernel(-1.0, 1.0), std::invalid_argument);
    // squared-kernel identity p(t,x)^2 = (4 pi t)^{-1/2} p(t/2, x)
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const double t = 0.1 + 3.0 * rng.uniform();
        const double x = 4.0 * rng.uniform() - 2.0;
        const double lhs = heat_kernel(t, x) * heat_kernel(t, x);
        const double rhs = heat_kernel(t / 2.0, x) / std::sqrt(4.0 * std::numbers::pi * t);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("initial potentials") {
    const auto flat = InitialCondition::constant_density(1.0);
    CHECK(initial_potential(flat, 0.3, -5.0) == 1.0);
    CHECK(initial_potential(flat, 40.0, 2.0) == 1.0);

    const auto dirac = InitialCondition::dirac(0.0);
    CHECK(initial_potential(dirac, 1.0, 0.0) ==
          Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-13));
    CHECK(initial_potential(dirac, 4.0, 0.0) ==
          Catch::Approx(0.19947114020071635).epsilon(1e-12));

    const auto two = InitialCondition::atomic({{0.5, -1.0}, {1.5, 2.0}});
    CHECK(initial_potential(two, 2.0, 0.0) ==
          Catch::Approx(0.5 * heat_kernel(2.0, 1.0) + 1.5 * heat_kernel(2.0, -2.0))
              .epsilon(1e-13));
    CHECK(two.total_mass() == Catch::Approx(2.0));
    CHECK_THROWS_AS(initial_potential(dirac, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("kernel graph construction rejects divergent inputs") {
    // unanchored variable
    CHECK_THROWS_AS(KernelGraph(1, {}, 0.0), std::invalid_argument);
    // self-loop
    CHECK_THROWS_AS(
        KernelGraph(1, {{1.0, Endpoint::variable(0), Endpoint::variable(0)}}, 0.0),
        std::invalid_argument);
    // vanishing variance
    CHECK_THROWS_AS(KernelGraph(1, {{0.0, Endpoint::fixed(0.0), Endpoint::variable(0)}}, 0.0),
                    std::invalid_argument);
    // two variables linked to each other but not to any fixed point
    CHECK_THROWS_AS(
        KernelGraph(2, {{1.0, Endpoint::variable(0), Endpoint::variable(1)}}, 0.0),
        std::invalid_argument);
}

TEST_CASE("semigroup chain: one intermediate variable") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double a = 0.05 + 2.0 * rng.uniform();
        const double b = 0.05 + 2.0 * rng.uniform();
        const double x = 3.0 * rng.uniform() - 1.5;
        const double y = 3.0 * rng.uniform() - 1.5;
        KernelGraph g(1,
                      {{a, Endpoint::fixed(x), Endpoint::variable(0)},
                       {b, Endpoint::variable(0), Endpoint::fixed(y)}},
                      0.0);
        CHECK(spatial_integral(g) == Catch::Approx(heat_kernel(a + b, x - y)).epsilon(1e-12));
    }
}

TEST_CASE("semigroup chain of random length") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const int len = 2 + static_cast<int>(rng.uniform() * 5.0);
        double total = 0.0;
        std::vector<HeatKernelFactor> factors;
        for (int e = 0; e < len; ++e) {
            const double v = 0.05 + 1.5 * rng.uniform();
            total += v;
            Endpoint l = e == 0 ? Endpoint::fixed(0.7) : Endpoint::variable(e - 1);
            Endpoint r = e == len - 1 ? Endpoint::fixed(-0.4) : Endpoint::variable(e);
            factors.push_back({v, l, r});
        }
        KernelGraph g(len - 1, std::move(factors), 0.0);
        CHECK(spatial_integral(g) == Catch::Approx(heat_kernel(total, 1.1)).epsilon(1e-12));
    }
}

TEST_CASE("product identity for two kernels on the same gap") {
    // p_s(x) p_t(x) = (2 pi (s+t))^{-1/2} p(st/(s+t), x)
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const double s = 0.05 + 2.0 * rng.uniform();
        const double t = 0.05 + 2.0 * rng.uniform();
        const double gap = 3.0 * rng.uniform() - 1.5;
        const double lhs = heat_kernel(s, gap) * heat_kernel(t, gap);
        const double rhs = heat_kernel(s * t / (s + t), gap) /
                           std::sqrt(2.0 * std::numbers::pi * (s + t));
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));

        // and integrated against one variable between the same fixed pair:
        KernelGraph g(1,
                      {{s, Endpoint::fixed(gap), Endpoint::variable(0)},
                       {t, Endpoint::fixed(gap), Endpoint::variable(0)}},
                      0.0);
        const double integrated = spatial_integral(g);
        CHECK(integrated ==
              Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * (s + t))).epsilon(1e-12));
    }
}

TEST_CASE("squared kernel integrates to (4 pi v)^{-1/2}") {
    for (double v : {0.25, 1.0, 3.5}) {
        KernelGraph g(1,
                      {{v, Endpoint::fixed(0.3), Endpoint::variable(0)},
                       {v, Endpoint::fixed(0.3), Endpoint::variable(0)}},
                      0.0);
        CHECK(spatial_integral(g) ==
              Catch::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi * v)).epsilon(1e-12));
    }
}

TEST_CASE("translation invariance of the closed form") {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const double v1 = 0.1 + rng.uniform();
        const double v2 = 0.1 + rng.uniform();
        const double v3 = 0.1 + rng.uniform();
        const double x = rng.uniform();
        const double y = rng.uniform() - 1.0;
        const double shift = 10.0 * rng.uniform() - 5.0;
        auto make = [&](double off) {
            return KernelGraph(2,
                               {{v1, Endpoint::fixed(x + off), Endpoint::variable(0)},
                                {v2, Endpoint::variable(0), Endpoint::variable(1)},
                                {v3, Endpoint::variable(1), Endpoint::fixed(y + off)}},
                               0.25);
        };
        CHECK(spatial_integral(make(0.0)) ==
              Catch::Approx(spatial_integral(make(shift))).epsilon(1e-12));
    }
}

TEST_CASE("closed form matches brute-force quadrature on random graphs") {
    Rng rng(23);
    int checked = 0;
    while (checked < 200) {
        const int dim = 1 + (rng.next_u64() % 2);
        std::vector<HeatKernelFactor> factors;
        // anchor every variable first, then sprinkle extra edges
        for (int k = 0; k < dim; ++k)
            factors.push_back({0.1 + 2.0 * rng.uniform(),
                               Endpoint::fixed(4.0 * rng.uniform() - 2.0),
                               Endpoint::variable(k)});
        const int extra = static_cast<int>(rng.next_u64() % 3);
        for (int e = 0; e < extra; ++e) {
            const double v = 0.1 + 2.0 * rng.uniform();
            if (dim == 2 && rng.coin())
                factors.push_back({v, Endpoint::variable(0), Endpoint::variable(1)});
            else
                factors.push_back({v, Endpoint::fixed(4.0 * rng.uniform() - 2.0),
                                   Endpoint::variable(static_cast<int>(rng.next_u64() % dim))});
        }
        const double logpref = std::log(0.5 + rng.uniform());
        KernelGraph g(dim, std::move(factors), logpref);
        const double exact = spatial_integral(g);
        // Window: centres within [-2,2], total variance along any chain
        // at most ~6, so +-14 covers more than 12 standard deviations.
        const double brute =
            brute_force_integral(g, 14.0, dim == 1 ? 16 : 10, dim == 1 ? 48 : 32);
        CHECK(exact == Catch::Approx(brute).epsilon(1e-6));
        ++checked;
    }
}

TEST_CASE("summand plans transcribe triples into graphs") {
    const auto flat = InitialCondition::constant_density(2.0);

    SECTION("n'=0 gives the pure head factor") {
        IndexTriple triple{{1, 0, {0}, {}}, {}};
        const auto expansion = build_kernel_graphs(triple, {}, 1.0, 0.3, flat);
        REQUIRE(expansion.terms.size() == 1);
        CHECK(expansion.terms[0].factors().empty());
        CHECK(expansion.value() == Catch::Approx(2.0));
    }

    SECTION("the (n=2, n'=1) summand") {
        IndexTriple triple{{2, 1, {1, 1}, {0}}, {{0, 0}}};
        const std::vector<double> s{0.4};
        const auto expansion = build_kernel_graphs(triple, s, 1.0, 0.0, flat);
        REQUIRE(expansion.terms.size() == 1);
        const auto& g = expansion.terms[0];
        REQUIRE(g.factors().size() == 2);
        for (const auto& f : g.factors()) CHECK(f.variance == Catch::Approx(0.6));
        CHECK(g.prefactor() == Catch::Approx(2.0));  // initial factor K
        // value = K (4 pi (t-s))^{-1/2}
        CHECK(expansion.value() ==
              Catch::Approx(2.0 / std::sqrt(4.0 * std::numbers::pi * 0.6)).epsilon(1e-12));
    }

    SECTION("the (n=3, n'=2) summand against brute force") {
        IndexTriple triple{{3, 2, {1, 1, 1}, {1, 0}}, {{0, 0, 1, 1}}};
        const std::vector<double> s{0.6, 0.2};
        const auto flat1 = InitialCondition::constant_density(1.0);
        const auto expansion = build_kernel_graphs(triple, s, 1.0, 0.0, flat1);
        REQUIRE(expansion.terms.size() == 1);
        REQUIRE(expansion.terms[0].factors().size() == 4);
        const double brute = brute_force_integral(expansion.terms[0], 14.0, 10, 32);
        CHECK(expansion.value() == Catch::Approx(brute).epsilon(1e-6));
    }

    SECTION("atomic measures expand over atom assignments") {
        const auto two = InitialCondition::atomic({{0.5, -1.0}, {1.5, 2.0}});
        IndexTriple triple{{4, 2, {1, 1, 1, 1}, {0, 0}}, {{0, 0, 1, 1}}};
        REQUIRE(triple.pair.valid());
        const std::vector<double> s{0.7, 0.3};
        const auto expansion = build_kernel_graphs(triple, s, 1.0, 0.5, two);
        // two initial variables times two atoms each
        CHECK(expansion.terms.size() == 4);
        double direct = 0.0;
        for (const auto& g : expansion.terms) direct += spatial_integral(g);
        CHECK(expansion.value() == Catch::Approx(direct));
    }

    SECTION("interior time vectors are enforced") {
        IndexTriple triple{{2, 1, {1, 1}, {0}}, {{0, 0}}};
        const std::vector<double> bad{1.0};  // s must be < t
        CHECK_THROWS_AS(build_kernel_graphs(triple, bad, 1.0, 0.0, flat),
                        std::invalid_argument);
    }
}
