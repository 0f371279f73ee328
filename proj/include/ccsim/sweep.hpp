#pragma once

// Survival curves over (lambda, p) grids, bracketing of the critical birth
// rate, and the analytic extinction thresholds on regular graphs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/branching.hpp"
#include "ccsim/graphs.hpp"
#include "ccsim/simulator.hpp"

namespace ccsim {

struct SweepSpec {
    Topology topology = Topology::lattice(1);
    std::vector<double> lambdas;
    std::vector<double> ps;
    std::uint64_t replicas = 100;
    SimConfig sim;                       // seed shared by every grid point
    std::optional<VertexId> start;       // defaults to topology.default_start()
    unsigned jobs = 0;

    void validate() const;
};

struct CurveRow {
    double lambda;
    double p;
    SurvivalEstimate estimate;
};

// Rows ordered p-major, then lambda, in the order given.
std::vector<CurveRow> survival_curve(const SweepSpec& spec);

struct LambdaBracket {
    double lo;
    double hi;
    double survival_lo;
    double survival_hi;
    std::uint64_t evaluations;
    // mu(m, lo, p) on Z^d (unboxed) and T^d; absent on other graphs.
    std::optional<double> mu_at_lo;
};

// Bisection on lambda at fixed p for the crossing of `target` by the
// survival fraction. Requires f(lo) < target <= f(hi) at the initial bounds
// (BracketError otherwise). Stops once hi - lo <= width_tol.
LambdaBracket estimate_lambda_c(const SweepSpec& spec, double p, double lo, double hi, double target = 0.5,
                                double width_tol = 0.5);

struct ThresholdRecord {
    RegularFamily family;
    int d;
    double p;
    std::optional<double> lambda_global;  // mu(m) = 1
    std::optional<double> lambda_local;   // mu(m) = 1 on Z^d, 1/d on T^d
};

// Absent entries mean the target lies outside (p, m), the range of mu.
ThresholdRecord theorem_thresholds(RegularFamily family, int d, double p);

// graph,d,p,lambda,replicas,t_max,n_max,seed,survived_fraction,ci_low,ci_high
std::string curve_csv_header();
std::string curve_csv_row(const SweepSpec& spec, const CurveRow& row);

}  // namespace ccsim
