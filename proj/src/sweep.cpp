#include "ccsim/sweep.hpp"

#include <cmath>

#include "ccsim/errors.hpp"
#include "ccsim/format.hpp"

namespace ccsim {

namespace {

SurvivalEstimate evaluate(const SweepSpec& spec, double lambda, double p) {
    const ModelParams params(lambda, p);
    const VertexId start = spec.start ? *spec.start : spec.topology.default_start();
    const std::vector<VertexId> init{start};
    return run_replicas(spec.topology, params, init, spec.sim, spec.replicas, spec.jobs);
}

std::optional<int> regular_degree_of(const Topology& t) {
    if (t.family() == GraphFamily::Tree) return t.dimension() + 1;
    if (t.family() == GraphFamily::Lattice && !t.box_extent()) return 2 * t.dimension();
    return std::nullopt;
}

}  // namespace

void SweepSpec::validate() const {
    if (replicas < 1) throw DomainError("replicas must be >= 1");
    sim.validate();
    for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("lambda grid values must be finite and >= 0");
    }
    for (double p : ps) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p grid values must lie in [0, 1]");
    }
}

std::vector<CurveRow> survival_curve(const SweepSpec& spec) {
    spec.validate();
    if (spec.lambdas.empty() || spec.ps.empty()) throw DomainError("lambda and p grids must be nonempty");
    std::vector<CurveRow> rows;
    rows.reserve(spec.lambdas.size() * spec.ps.size());
    for (double p : spec.ps) {
        for (double lambda : spec.lambdas) rows.push_back({lambda, p, evaluate(spec, lambda, p)});
    }
    return rows;
}

LambdaBracket estimate_lambda_c(const SweepSpec& spec, double p, double lo, double hi, double target,
                                double width_tol) {
    spec.validate();
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw DomainError("bisection bounds must satisfy 0 < lo < hi");
    if (!(target > 0.0 && target < 1.0)) throw DomainError("target must lie in (0, 1)");
    if (!(width_tol > 0.0)) throw DomainError("width_tol must be positive");
    LambdaBracket b{lo, hi, 0.0, 0.0, 0, std::nullopt};
    b.survival_lo = evaluate(spec, lo, p).survived_fraction;
    b.survival_hi = evaluate(spec, hi, p).survived_fraction;
    b.evaluations = 2;
    if (!(b.survival_lo < target)) {
        throw BracketError("survival fraction " + format_double(b.survival_lo) + " at lower bound " +
                           format_double(lo) + " is not below the target; lower the bound");
    }
    if (!(b.survival_hi >= target)) {
        throw BracketError("survival fraction " + format_double(b.survival_hi) + " at upper bound " +
                           format_double(hi) + " is below the target; raise the bound");
    }
    while (b.hi - b.lo > width_tol) {
        const double mid = 0.5 * (b.lo + b.hi);
        const double f = evaluate(spec, mid, p).survived_fraction;
        ++b.evaluations;
        if (f < target) {
            b.lo = mid;
            b.survival_lo = f;
        } else {
            b.hi = mid;
            b.survival_hi = f;
        }
    }
    if (const auto m = regular_degree_of(spec.topology)) b.mu_at_lo = mu(*m, ModelParams(b.lo, p));
    return b;
}

ThresholdRecord theorem_thresholds(RegularFamily family, int d, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
    const int m = regular_degree(family, d);
    const auto solve = [&](double target) -> std::optional<double> {
        if (!(target > p && target < m)) return std::nullopt;
        return solve_lambda_for_mu(m, p, target, 1e-11);
    };
    ThresholdRecord r{family, d, p, solve(1.0), std::nullopt};
    r.lambda_local = family == RegularFamily::Lattice ? r.lambda_global : solve(1.0 / d);
    return r;
}

std::string curve_csv_header() {
    return "graph,d,p,lambda,replicas,t_max,n_max,seed,survived_fraction,ci_low,ci_high";
}

std::string curve_csv_row(const SweepSpec& spec, const CurveRow& row) {
    std::string out = to_string(spec.topology.family());
    out += "," + std::to_string(spec.topology.dimension());
    out += "," + format_double(row.p);
    out += "," + format_double(row.lambda);
    out += "," + std::to_string(spec.replicas);
    out += "," + format_double(spec.sim.t_max);
    out += "," + std::to_string(spec.sim.n_max);
    out += "," + std::to_string(spec.sim.seed);
    out += "," + format_double(row.estimate.survived_fraction);
    out += "," + format_double(row.estimate.ci_low);
    out += "," + format_double(row.estimate.ci_high);
    return out;
}

}  // namespace ccsim
