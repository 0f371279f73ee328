#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccsim/errors.hpp"
#include "ccsim/sweep.hpp"

using namespace ccsim;

namespace {

SweepSpec line_spec(std::uint64_t replicas = 100) {
    SweepSpec spec;
    spec.topology = Topology::lattice(1);
    spec.replicas = replicas;
    spec.sim.t_max = 200.0;
    spec.sim.n_max = 1e4;
    spec.sim.seed = 12;
    return spec;
}

}  // namespace

TEST_CASE("spec validation") {
    SweepSpec spec = line_spec();
    spec.lambdas = {1.0};
    spec.ps = {0.5};
    CHECK_NOTHROW(spec.validate());
    spec.lambdas.clear();
    CHECK_THROWS_AS(survival_curve(spec), DomainError);
    spec.lambdas = {1.0};
    spec.ps = {1.5};
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec.ps = {0.5};
    spec.replicas = 0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("survival curve on the plane") {
    SweepSpec spec;
    spec.topology = Topology::lattice(2);
    spec.lambdas = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    spec.ps = {0.0, 0.5};
    spec.replicas = 200;
    spec.sim.t_max = 30.0;
    spec.sim.n_max = 2000;
    spec.sim.seed = 5;
    const auto rows = survival_curve(spec);
    REQUIRE(rows.size() == 12);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(rows[i].p == 0.0);
        CHECK(rows[i].lambda == spec.lambdas[i]);
        CHECK(rows[i].estimate.survived_fraction == 0.0);
    }
    for (std::size_t i = 7; i < 12; ++i) {
        CHECK(rows[i].estimate.survived_fraction >= rows[i - 1].estimate.survived_fraction);
    }
    CHECK(rows[11].estimate.survived_fraction > rows[6].estimate.survived_fraction);
}

TEST_CASE("duplicate grid points give identical rows") {
    SweepSpec spec = line_spec(60);
    spec.lambdas = {3.0, 3.0};
    spec.ps = {0.9};
    const auto rows = survival_curve(spec);
    REQUIRE(rows.size() == 2);
    CHECK(curve_csv_row(spec, rows[0]) == curve_csv_row(spec, rows[1]));
}

TEST_CASE("survival curve on the line is monotone in both parameters") {
    SweepSpec spec = line_spec(100);
    spec.lambdas = {0.2, 1.0, 5.0, 20.0, 100.0};
    spec.ps = {0.5, 0.9};
    const auto rows = survival_curve(spec);
    for (std::size_t i = 0; i < 5; ++i) {
        if (i > 0) {
            CHECK(rows[i].estimate.survived_fraction >= rows[i - 1].estimate.survived_fraction);
            CHECK(rows[5 + i].estimate.survived_fraction >= rows[5 + i - 1].estimate.survived_fraction);
        }
        CHECK(rows[5 + i].estimate.survived_fraction >= rows[i].estimate.survived_fraction);
    }
}

TEST_CASE("bracketing the critical birth rate") {
    const SweepSpec spec = line_spec(100);
    const auto b = estimate_lambda_c(spec, 0.9, 0.1, 50.0, 0.5, 1.0);
    CHECK(b.hi - b.lo <= 1.0);
    CHECK(b.lo < b.hi);
    CHECK(b.survival_lo < 0.5);
    CHECK(b.survival_hi >= 0.5);
    REQUIRE(b.mu_at_lo.has_value());
    CHECK(*b.mu_at_lo == doctest::Approx(mu(2, ModelParams(b.lo, 0.9))).epsilon(1e-12));

    const auto again = estimate_lambda_c(spec, 0.9, 0.1, 50.0, 0.5, 1.0);
    CHECK(again.lo == b.lo);
    CHECK(again.hi == b.hi);
    CHECK(again.evaluations == b.evaluations);

    CHECK_THROWS_AS(estimate_lambda_c(spec, 0.9, 0.05, 0.2, 0.5, 1.0), BracketError);
    CHECK_THROWS_AS(estimate_lambda_c(spec, 0.9, 5.0, 1.0, 0.5, 1.0), DomainError);

    SweepSpec finite = spec;
    finite.topology = Topology::lattice(1, 50);
    finite.sim.t_max = 20.0;
    const auto boxed = estimate_lambda_c(finite, 0.9, 0.1, 50.0, 0.5, 5.0);
    CHECK_FALSE(boxed.mu_at_lo.has_value());
}

TEST_CASE("analytic thresholds back-substitute") {
    for (int d : {1, 2, 3}) {
        for (double p : {0.3, 0.5, 0.9}) {
            const auto rec = theorem_thresholds(RegularFamily::Lattice, d, p);
            REQUIRE(rec.lambda_global.has_value());
            REQUIRE(rec.lambda_local.has_value());
            CHECK(std::fabs(mu(2 * d, ModelParams(*rec.lambda_global, p)) - 1.0) <= 1e-8);
            CHECK(*rec.lambda_local == *rec.lambda_global);
        }
    }
    for (int d : {2, 3}) {
        for (double p : {0.3, 0.5, 0.9}) {
            const auto rec = theorem_thresholds(RegularFamily::Tree, d, p);
            REQUIRE(rec.lambda_global.has_value());
            CHECK(std::fabs(mu(d + 1, ModelParams(*rec.lambda_global, p)) - 1.0) <= 1e-8);
            const double target = 1.0 / d;
            if (target > p) {
                REQUIRE(rec.lambda_local.has_value());
                CHECK(std::fabs(mu(d + 1, ModelParams(*rec.lambda_local, p)) - target) <= 1e-8);
                CHECK(*rec.lambda_local < *rec.lambda_global);
            } else {
                CHECK_FALSE(rec.lambda_local.has_value());
            }
        }
    }
    CHECK(*theorem_thresholds(RegularFamily::Lattice, 1, 0.5).lambda_global > 1.0);
    CHECK_FALSE(theorem_thresholds(RegularFamily::Tree, 2, 0.9).lambda_local.has_value());
    CHECK_THROWS_AS(theorem_thresholds(RegularFamily::Lattice, 1, 1.0), DomainError);
    CHECK_THROWS_AS(theorem_thresholds(RegularFamily::Lattice, 1, 0.0), DomainError);
}

TEST_CASE("simulation dies below the analytic threshold") {
    const double p = 0.5;
    const double lambda = *theorem_thresholds(RegularFamily::Lattice, 1, p).lambda_global;
    SweepSpec spec = line_spec(200);
    spec.lambdas = {0.5 * lambda, lambda};
    spec.ps = {p};
    for (const auto& row : survival_curve(spec)) CHECK(row.estimate.survived_fraction < 0.1);
}

TEST_CASE("csv") {
    CHECK(curve_csv_header() == "graph,d,p,lambda,replicas,t_max,n_max,seed,survived_fraction,ci_low,ci_high");
    SweepSpec spec = line_spec(4);
    const CurveRow row{2.5, 0.9, SurvivalEstimate{4, 1, 0, 0.25, 0.05, 0.7}};
    const auto text = curve_csv_row(spec, row);
    CHECK(text.rfind("lattice,1,0.90000000000000002,2.5,4,200,10000,12,0.25,", 0) == 0);
}
