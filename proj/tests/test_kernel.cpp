#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ccsim/errors.hpp"
#include "ccsim/kernel.hpp"

using namespace ccsim;

namespace {

// Frozen from tests/oracles/kernel_oracle.py (mpmath, 30 digits): quadrature
// over the collapse time for g, and a Markov chain on the number of distinct
// neighbours hit, summed against the Yule law, for the offspring pmf.
struct GfCase {
    double s, lambda, value;
};
const GfCase kGf[] = {
    {0.5, 1.0, 0.306852819440054690582767878542},
    {0.75, 1.0, 0.537901879626703127055178585695},
    {0.3, 2.5, 0.0988187074544764333606400704204},
    {0.9, 0.2, 0.878824994064844980159525136755},
    {0.55, 100.0, 0.00788895036826320733351447192675},
};

struct PmfCase {
    int m;
    double lambda, p;
    std::vector<double> probs;
};
const PmfCase kPmf[] = {
    {2, 1.0, 0.5, {0.306852819440054690582767878542, 0.462098120373296872944821414306, 0.231049060186648436472410707153}},
    {3, 2.0, 0.7,
     {0.114585671326258386978314734078, 0.358613992726578086180373937305, 0.173648321155135067774429027562,
      0.353152014792028459066882301056}},
    {4, 0.5, 0.3,
     {0.585132866895241805353892510186, 0.342707200631270658344947102297, 0.0523924713633710801134213719860,
      0.0141436064340517180441882510871, 0.00562385467606473814355076444387}},
};

double g_lambda_one(double s) { return 1.0 + (1.0 - s) / s * std::log1p(-s); }
double mu_lambda_one(int m, double p) { return p * m / (m - p) * std::log(m / p); }

}  // namespace

TEST_CASE("model parameters are validated") {
    CHECK_NOTHROW(ModelParams(0.0, 0.0));
    CHECK_NOTHROW(ModelParams(1e6, 1.0));
    CHECK_THROWS_AS(ModelParams(-1.0, 0.5), DomainError);
    CHECK_THROWS_AS(ModelParams(1.0, 1.5), DomainError);
    CHECK_THROWS_AS(ModelParams(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(ModelParams(INFINITY, 0.5), DomainError);
    CHECK_THROWS_AS(ModelParams(NAN, 0.5), DomainError);
}

TEST_CASE("yule size law") {
    const ModelParams params(1.0, 0.5);
    CHECK(yule_size_pmf(params, 1) == doctest::Approx(0.5).epsilon(1e-15));
    // lambda = 1: P[Y = k] = 1 / (k (k + 1))
    for (std::uint64_t k : {1u, 2u, 7u, 100u}) {
        CHECK(yule_size_pmf(params, k) == doctest::Approx(1.0 / (k * (k + 1.0))).epsilon(1e-12));
    }
    const ModelParams fast(3.0, 0.5);
    double total = 0.0;
    for (std::uint64_t k = 1; k <= 200000; ++k) total += yule_size_pmf(fast, k);
    CHECK(total > 0.98);
    CHECK(total <= 1.0);
    CHECK_THROWS_AS(yule_size_pmf(params, 0), DomainError);
    CHECK(yule_size_pmf(ModelParams(0.0, 0.5), 1) == 1.0);
    CHECK(yule_size_pmf(ModelParams(0.0, 0.5), 2) == 0.0);
}

TEST_CASE("generating function against quadrature oracle") {
    for (const auto& c : kGf) {
        CAPTURE(c.s);
        CAPTURE(c.lambda);
        CHECK(std::fabs(attempt_gf(c.s, ModelParams(c.lambda, 0.5)) - c.value) < 1e-12);
    }
}

TEST_CASE("generating function edge cases") {
    const ModelParams params(2.0, 0.5);
    CHECK(attempt_gf(0.0, params) == 0.0);
    CHECK(attempt_gf(1.0, params) == 1.0);
    CHECK(attempt_gf(0.37, ModelParams(0.0, 0.5)) == doctest::Approx(0.37).epsilon(1e-15));
    CHECK_THROWS_AS(attempt_gf(-0.1, params), DomainError);
    CHECK_THROWS_AS(attempt_gf(1.1, params), DomainError);
    SeriesControl tight;
    tight.max_terms = 3;
    CHECK_THROWS_AS(attempt_gf(0.999, params, tight), ConvergenceError);
    try {
        attempt_gf(0.999, params, tight);
    } catch (const ConvergenceError& e) {
        CHECK(e.terms() == 3);
        CHECK(e.partial_sum() > 0.0);
    }
}

TEST_CASE("lambda = 1 closed forms") {
    for (double s : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
        CAPTURE(s);
        CHECK(std::fabs(attempt_gf(s, ModelParams(1.0, 0.5)) - g_lambda_one(s)) < 1e-12);
    }
    for (int m : {2, 3, 4, 6}) {
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            CAPTURE(m);
            CAPTURE(p);
            CHECK(std::fabs(mu(m, ModelParams(1.0, p)) - mu_lambda_one(m, p)) < 1e-12);
        }
    }
    CHECK(mu(2, ModelParams(1.0, 0.5)) == doctest::Approx(0.924196240746593745889642828611).epsilon(1e-13));
    CHECK(mu(3, ModelParams(1.0, 0.5)) == doctest::Approx(1.07505568153683296070243406849).epsilon(1e-13));
    CHECK(mu(2, ModelParams(1.0, 1.0)) == doctest::Approx(1.38629436111989061883446424292).epsilon(1e-13));
    CHECK(alpha(ModelParams(1.0, 0.5)) == doctest::Approx(0.306852819440054690582767878542).epsilon(1e-13));
}

TEST_CASE("mu: series and hypergeometric routes") {
    CHECK(mu(3, ModelParams(2.0, 0.7)) == doctest::Approx(1.7653666794129335989298788956).epsilon(1e-12));
    for (double lambda : {0.05, 0.2, 1.0, 5.0, 40.0}) {
        for (double p : {0.05, 0.5, 1.0}) {
            for (int m : {2, 5, 8}) {
                const ModelParams params(lambda, p);
                const double a = mu(m, params), b = mu_hypergeometric(m, params);
                CAPTURE(lambda);
                CAPTURE(p);
                CAPTURE(m);
                CHECK(std::fabs(a - b) <= 1e-10 * b);
                CHECK(a >= p - 1e-12);
                CHECK(a <= m);
            }
        }
    }
    CHECK(mu(4, ModelParams(3.0, 0.0)) == 0.0);
    CHECK(mu(4, ModelParams(0.0, 0.8)) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK_THROWS_AS(mu_hypergeometric(2, ModelParams(0.0, 0.5)), DomainError);
    CHECK_THROWS_AS(mu(0, ModelParams(1.0, 0.5)), DomainError);
}

TEST_CASE("mu is increasing in lambda and in p") {
    for (int m : {2, 3, 4}) {
        double prev = 0.0;
        for (double lambda : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
            const double v = mu(m, ModelParams(lambda, 0.6));
            CHECK(v > prev);
            prev = v;
        }
        prev = 0.0;
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const double v = mu(m, ModelParams(2.0, p));
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("offspring pmf against Markov chain oracle") {
    for (const auto& c : kPmf) {
        const auto pmf = offspring_pmf(c.m, ModelParams(c.lambda, c.p));
        REQUIRE(pmf.m() == c.m);
        for (int w = 0; w <= c.m; ++w) {
            CAPTURE(c.m);
            CAPTURE(w);
            CHECK(std::fabs(pmf[w] - c.probs[static_cast<std::size_t>(w)]) < 1e-11);
        }
    }
}

TEST_CASE("offspring pmf structure") {
    for (double lambda : {0.2, 1.0, 5.0}) {
        for (double p : {0.1, 0.9}) {
            for (int m : {1, 2, 6}) {
                const ModelParams params(lambda, p);
                const auto pmf = offspring_pmf(m, params);
                const auto probs = pmf.probs();
                CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(pmf.mean() == doctest::Approx(mu(m, params)).epsilon(1e-10));
                CHECK(pmf[0] == doctest::Approx(alpha(params)).epsilon(1e-12));
                CHECK(pmf[m] >= q_lower_bound(m, params));
                CHECK(offspring_pgf(1.0, pmf) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(offspring_pgf(0.0, pmf) == doctest::Approx(pmf[0]).epsilon(1e-15));
            }
        }
    }
    // p = 0: nobody survives a collapse.
    const auto none = offspring_pmf(3, ModelParams(2.0, 0.0));
    CHECK(none[0] == 1.0);
    // lambda = 0, p = 1: the lone founder always lands somewhere.
    const auto walker = offspring_pmf(4, ModelParams(0.0, 1.0));
    CHECK(walker[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("offspring distribution validation") {
    CHECK_THROWS_AS(OffspringDistribution({1.0}), ValidationError);
    CHECK_THROWS_AS(OffspringDistribution({0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(OffspringDistribution({-0.1, 1.1}), ValidationError);
    const OffspringDistribution d({0.25, 0.5, 0.25});
    CHECK(d.m() == 2);
    CHECK(d.mean() == doctest::Approx(1.0));
    CHECK(offspring_pgf(0.5, d) == doctest::Approx(0.25 + 0.25 + 0.0625));
    CHECK_THROWS_AS(offspring_pgf(2.0, d), DomainError);
}

TEST_CASE("q lower bound") {
    const ModelParams params(100.0, 0.9);
    CHECK(q_lower_bound(2, params) == doctest::Approx(1.0 - 0.02 * std::log(2.0 / 0.9)));
    CHECK(offspring_pmf(2, params)[2] >= q_lower_bound(2, params));
    CHECK(q_lower_bound(2, ModelParams(0.5, 0.5)) < 0.0);
    CHECK_THROWS_AS(q_lower_bound(2, ModelParams(1.0, 0.0)), DomainError);
}

TEST_CASE("solving for lambda") {
    for (int m : {2, 3, 4, 6}) {
        for (double p : {0.3, 0.5, 0.9}) {
            for (double target : {0.95, 1.0, 1.5}) {
                if (!(target > p && target < m)) continue;
                const double lambda = solve_lambda_for_mu(m, p, target, 1e-12);
                CHECK(std::fabs(mu(m, ModelParams(lambda, p)) - target) < 1e-10);
            }
        }
    }
    // mu(2, 1, 0.5) < 1, so the threshold lies above 1.
    CHECK(solve_lambda_for_mu(2, 0.5, 1.0, 1e-12) > 1.0);
    CHECK_THROWS_AS(solve_lambda_for_mu(3, 0.9, 0.5, 1e-10), NoSolutionError);
    CHECK_THROWS_AS(solve_lambda_for_mu(2, 0.5, 2.0, 1e-10), NoSolutionError);
    CHECK_THROWS_AS(solve_lambda_for_mu(2, 0.5, 1.0, 0.0), DomainError);
}
