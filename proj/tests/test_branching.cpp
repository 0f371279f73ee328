#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccsim/branching.hpp"
#include "ccsim/errors.hpp"

using namespace ccsim;

namespace {

// Smaller root of p0 + p1 s + p2 s^2 = s.
double quadratic_root(const OffspringDistribution& d) {
    const double b = 1.0 - d[1];
    return (b - std::sqrt(b * b - 4.0 * d[0] * d[2])) / (2.0 * d[2]);
}

double binom(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

}  // namespace

TEST_CASE("extinction probability") {
    const GWModel sub{offspring_pmf(2, ModelParams(1.0, 0.5))};
    CHECK(gw_extinction_prob(sub) == 1.0);
    CHECK(gw_extinction_prob(GWModel{OffspringDistribution({1.0, 0.0})}) == 1.0);
    CHECK(gw_extinction_prob(GWModel{OffspringDistribution({0.0, 1.0})}) == 0.0);
    CHECK(gw_extinction_prob(GWModel{OffspringDistribution({0.25, 0.25, 0.5})}) == doctest::Approx(0.5).epsilon(1e-12));

    // p = 1: every collapse lands at least one colony.
    CHECK(gw_extinction_prob(GWModel{offspring_pmf(2, ModelParams(10.0, 1.0))}) == 0.0);

    const GWModel super{offspring_pmf(2, ModelParams(10.0, 0.9))};
    const double q = gw_extinction_prob(super);
    CHECK(q > 0.0);
    CHECK(q < 1.0);
    CHECK(std::fabs(q - quadratic_root(super.offspring)) < 1e-11);
    CHECK(std::fabs(offspring_pgf(q, super.offspring) - q) < 1e-12);

    const GWModel three{offspring_pmf(3, ModelParams(2.0, 0.7))};
    const double q3 = gw_extinction_prob(three);
    CHECK(std::fabs(offspring_pgf(q3, three.offspring) - q3) < 1e-12);
}

TEST_CASE("extinction is certain exactly when the mean is at most one") {
    for (double lambda : {0.2, 0.7, 1.0, 1.5, 3.0, 8.0}) {
        for (double p : {0.2, 0.5, 0.8, 0.95}) {
            for (int m : {2, 4}) {
                const GWModel model{offspring_pmf(m, ModelParams(lambda, p))};
                const double q = gw_extinction_prob(model);
                CAPTURE(lambda);
                CAPTURE(p);
                CAPTURE(m);
                if (model.offspring.mean() <= 1.0) {
                    CHECK(q == 1.0);
                } else {
                    CHECK(q < 1.0);
                }
            }
        }
    }
}

TEST_CASE("simulation agrees with the fixed point") {
    for (double p : {1.0, 0.9, 0.6}) {
        const GWModel super{offspring_pmf(2, ModelParams(10.0, p))};
        const auto sim = gw_simulate(super, 200, 100000, 3);
        CAPTURE(p);
        CHECK(sim.replicas == 100000);
        CHECK(std::fabs(sim.extinction_frequency - gw_extinction_prob(super)) < 0.01);
    }

    const GWModel sub{offspring_pmf(2, ModelParams(1.0, 0.5))};
    const auto dies = gw_simulate(sub, 1000, 10000, 4);
    CHECK(dies.extinction_frequency >= 0.999);

    const auto flat = gw_simulate(GWModel{OffspringDistribution({0.0, 1.0})}, 500, 100, 5);
    CHECK(flat.extinct == 0);
    CHECK(flat.hit_cap == 0);

    const auto boom = gw_simulate(GWModel{OffspringDistribution({0.0, 0.0, 1.0})}, 100, 10, 6);
    CHECK(boom.hit_cap == 10);
    CHECK(boom.extinction_frequency == 0.0);
}

TEST_CASE("simulation is deterministic across worker counts") {
    const GWModel model{offspring_pmf(3, ModelParams(1.5, 0.6))};
    const auto a = gw_simulate(model, 300, 2000, 9, 1);
    const auto b = gw_simulate(model, 300, 2000, 9, 4);
    CHECK(a.extinct == b.extinct);
    CHECK(a.hit_cap == b.hit_cap);
}

TEST_CASE("expected reachers") {
    CHECK(expected_reachers(RegularFamily::Lattice, 2, 0.5) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(expected_reachers(RegularFamily::Tree, 2, 0.25) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_THROWS_AS(expected_reachers(RegularFamily::Lattice, 1, 1.0), DivergenceError);
    CHECK_THROWS_AS(expected_reachers(RegularFamily::Tree, 2, 0.5), DivergenceError);
    CHECK_THROWS_AS(expected_reachers(RegularFamily::Lattice, 1, -0.1), DomainError);
    CHECK_THROWS_AS(expected_reachers(RegularFamily::Tree, 0, 0.1), DomainError);
    CHECK(expected_reachers(RegularFamily::Lattice, 3, 0.0) == 0.0);

    for (int d : {1, 2, 3}) {
        for (double mu : {0.1, 0.3, 0.5}) {
            double lattice = 0.0, tree = 0.0, tree_term = (d + 1) * mu;
            for (int n = 1; n <= 1000; ++n) {
                lattice += binom(n + d - 1, n) * std::pow(mu, n);
                tree += tree_term;
                tree_term *= d * mu;
            }
            CAPTURE(d);
            CAPTURE(mu);
            CHECK(std::fabs(expected_reachers(RegularFamily::Lattice, d, mu) - lattice) < 1e-9);
            if (mu * d < 0.9) CHECK(std::fabs(expected_reachers(RegularFamily::Tree, d, mu) - tree) < 1e-9);
        }
    }
}

TEST_CASE("verdicts") {
    const auto line = theorem1_verdict(RegularFamily::Lattice, 1, ModelParams(1.0, 0.5));
    CHECK(line.m == 2);
    CHECK(line.mu == doctest::Approx(0.92419624).epsilon(1e-8));
    CHECK(line.global == Verdict::Extinct);
    CHECK(line.local == Verdict::Extinct);

    const auto tree = theorem1_verdict(RegularFamily::Tree, 2, ModelParams(1.0, 0.5));
    CHECK(tree.m == 3);
    CHECK(tree.mu == doctest::Approx(0.5 * 3 / 2.5 * std::log(6.0)).epsilon(1e-12));
    CHECK(tree.global == Verdict::Unknown);
    CHECK(tree.local == Verdict::Unknown);

    for (auto family : {RegularFamily::Lattice, RegularFamily::Tree}) {
        const auto dead = theorem1_verdict(family, 3, ModelParams(50.0, 0.0));
        CHECK(dead.mu == 0.0);
        CHECK(dead.global == Verdict::Extinct);
        CHECK(dead.local == Verdict::Extinct);
    }

    // Tree d=2 with 1/2 <= mu <= 1: globally extinct, locally unknown.
    const auto mixed = theorem1_verdict(RegularFamily::Tree, 2, ModelParams(0.1, 0.6));
    REQUIRE(mixed.mu > 0.5);
    REQUIRE(mixed.mu <= 1.0);
    CHECK(mixed.global == Verdict::Extinct);
    CHECK(mixed.local == Verdict::Unknown);

    CHECK(to_string(Verdict::Extinct) == "extinct");
    CHECK(to_string(Verdict::Unknown) == "unknown");
    CHECK(regular_degree(RegularFamily::Lattice, 3) == 6);
    CHECK(regular_degree(RegularFamily::Tree, 3) == 4);
    CHECK_THROWS_AS(theorem1_verdict(RegularFamily::Lattice, 0, ModelParams(1.0, 0.5)), DomainError);
}

TEST_CASE("verdicts never improve with larger parameters") {
    const auto rank = [](Verdict v) { return v == Verdict::Extinct ? 0 : 1; };
    for (auto family : {RegularFamily::Lattice, RegularFamily::Tree}) {
        for (int d : {1, 2, 3}) {
            for (double p : {0.1, 0.4, 0.7, 0.95}) {
                int prev_g = 0, prev_l = 0;
                for (double lambda : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) {
                    const auto v = theorem1_verdict(family, d, ModelParams(lambda, p));
                    CHECK(rank(v.global) >= prev_g);
                    CHECK(rank(v.local) >= prev_l);
                    CHECK(rank(v.local) >= rank(v.global));
                    prev_g = rank(v.global);
                    prev_l = rank(v.local);
                }
            }
            for (double lambda : {0.3, 3.0}) {
                int prev = 0;
                for (double p : {0.05, 0.2, 0.5, 0.8, 1.0}) {
                    const auto v = theorem1_verdict(family, d, ModelParams(lambda, p));
                    CHECK(rank(v.global) >= prev);
                    prev = rank(v.global);
                }
            }
        }
    }
}
