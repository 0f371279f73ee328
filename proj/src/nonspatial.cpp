#include "ccsim/nonspatial.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "ccsim/errors.hpp"
#include "ccsim/format.hpp"
#include "ccsim/parallel.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

namespace {

struct Transition {
    double extinct;
    double ratio;
    double one_minus_ratio;
};

Transition transition(double lambda, double mu_death, double t) {
    if (!(t > 0.0)) return {0.0, 0.0, 1.0};
    if (lambda == mu_death) {
        const double x = lambda * t;
        return {x / (1.0 + x), x / (1.0 + x), 1.0 / (1.0 + x)};
    }
    const double r = lambda - mu_death;
    const double em1 = std::expm1(r * t);
    if (!std::isfinite(em1)) return {mu_death / lambda, 1.0, 0.0};
    const double denom = lambda * em1 + r;
    return {mu_death * em1 / denom, lambda * em1 / denom, r / denom};
}

// pgf of the one-individual birth-death law at time t.
double birth_death_pgf(const Transition& law, double x) {
    if (law.one_minus_ratio == 0.0) return law.extinct;
    return law.extinct + (1.0 - law.extinct) * law.one_minus_ratio * x / (law.one_minus_ratio + law.ratio * (1.0 - x));
}

SimResult finish(SimResult r, SimStatus status, std::optional<double> when) {
    r.status = status;
    r.extinction_time = when;
    return r;
}

}  // namespace

void CatastropheParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
    if (!(mu_death >= 0.0) || !std::isfinite(mu_death)) throw DomainError("mu must be finite and >= 0");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be finite and > 0");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
}

std::string to_string(ColonyModel model) { return model == ColonyModel::Single ? "single" : "multi"; }

ColonyModel parse_colony_model(const std::string& name) {
    if (name == "single") return ColonyModel::Single;
    if (name == "multi") return ColonyModel::Multi;
    throw DomainError("unknown model '" + name + "' (expected single or multi)");
}

std::optional<double> critical_p(ColonyModel model, const CatastropheParams& params) {
    params.validate();
    const double growth = params.lambda - params.mu_death;
    if (growth <= 0.0) return std::nullopt;
    if (model == ColonyModel::Single) return std::clamp(std::exp(-growth / params.a), 0.0, 1.0);
    if (growth >= params.a) return 0.0;
    return std::clamp(1.0 - growth / params.a, 0.0, 1.0);
}

bool survival_condition(ColonyModel model, const CatastropheParams& params) {
    params.validate();
    const double growth = params.lambda - params.mu_death;
    if (params.p == 0.0 || growth <= 0.0) return false;
    if (model == ColonyModel::Single) return params.mu_death - params.a * std::log(params.p) < params.lambda;
    if (growth >= params.a) return true;
    return params.p * params.a / (params.a - growth) > 1.0;
}

BirthDeathLaw birth_death_law(double lambda, double mu_death, double t) {
    const Transition law = transition(lambda, mu_death, t);
    return {law.extinct, law.ratio};
}

std::optional<double> colony_extinction_bound(const CatastropheParams& params) {
    if (!survival_condition(ColonyModel::Multi, params)) return std::nullopt;
    const double p = params.p;
    // Offspring pgf of the colony-level branching process: a colony lives
    // T ~ Exp(a), then each individual alive founds a colony with prob p.
    const auto f = [&](double s, double& err) {
        const double x = 1.0 - p + p * s;
        const auto integrand = [&](double t) {
            return params.a * std::exp(-params.a * t) * birth_death_pgf(transition(params.lambda, params.mu_death, t), x);
        };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
    };
    // f is convex with fixed points q and 1 only, so f(s) < s certifies q < s.
    const auto below_diagonal = [&](double s) {
        double err = 0.0;
        const double v = f(s, err);
        return v < s - std::max(1e-13, 16.0 * err);
    };
    double hi = -1.0;
    for (double gap : {1e-3, 1e-6}) {
        if (below_diagonal(1.0 - gap)) {
            hi = 1.0 - gap;
            break;
        }
    }
    if (hi < 0.0) return std::nullopt;
    double lo = 0.0;
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below_diagonal(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

SimResult simulate_single(const CatastropheParams& params, const SimConfig& cfg, const NonspatialOptions& opt) {
    params.validate();
    cfg.validate();
    StreamRng rng(replica_key(cfg.seed, cfg.replica_index), 0);
    const double lambda = params.lambda, death = params.mu_death;
    std::uint64_t n = opt.initial_size;
    double t = 0.0;
    SimResult r;
    r.max_population = n;
    r.max_colonies = n > 0 ? 1 : 0;

    while (true) {
        r.max_population = std::max(r.max_population, n);
        r.final_colonies = n > 0 ? 1 : 0;
        if (n == 0) return finish(r, SimStatus::Extinct, t);
        if (n >= cfg.n_max) return finish(r, SimStatus::ReachedColonyCap, std::nullopt);
        if (r.events >= cfg.event_max) return finish(r, SimStatus::EventCapExceeded, std::nullopt);
        ++r.events;

        if (n < opt.leap_threshold) {
            const double nd = static_cast<double>(n);
            const double rate = nd * (lambda + death) + params.a;
            const double dt = rng.exponential(rate);
            if (t + dt > cfg.t_max) return finish(r, SimStatus::SurvivedToHorizon, std::nullopt);
            t += dt;
            const double u = rng.uniform() * rate;
            if (u < nd * lambda) {
                ++n;
            } else if (u < nd * (lambda + death)) {
                --n;
            } else {
                std::binomial_distribution<std::uint64_t> keep(n, params.p);
                n = keep(rng);
                ++r.collapses;
            }
            continue;
        }

        // Jump to the next catastrophe using the exact birth-death transition law.
        const double dt = rng.exponential(params.a);
        const bool past_horizon = t + dt > cfg.t_max;
        const Transition law = transition(lambda, death, past_horizon ? cfg.t_max - t : dt);
        std::binomial_distribution<std::uint64_t> lines(n, 1.0 - law.extinct);
        const std::uint64_t k = lines(rng);
        if (k > 0 && law.one_minus_ratio == 0.0) return finish(r, SimStatus::ReachedColonyCap, std::nullopt);
        n = k;
        if (k > 0) {
            std::negative_binomial_distribution<std::uint64_t> extra(k, law.one_minus_ratio);
            n += extra(rng);
        }
        r.max_population = std::max(r.max_population, n);
        if (past_horizon) {
            t = cfg.t_max;
            r.final_colonies = n > 0 ? 1 : 0;
            return n == 0 ? finish(r, SimStatus::Extinct, t) : finish(r, SimStatus::SurvivedToHorizon, std::nullopt);
        }
        t += dt;
        if (n == 0 || n >= cfg.n_max) continue;
        std::binomial_distribution<std::uint64_t> keep(n, params.p);
        n = keep(rng);
        ++r.collapses;
    }
}

SimResult simulate_multi(const CatastropheParams& params, const SimConfig& cfg, const NonspatialOptions& opt) {
    params.validate();
    cfg.validate();
    std::optional<double> log_bound;
    if (opt.certify_eps > 0.0) {
        const auto bound = opt.extinction_bound ? opt.extinction_bound : colony_extinction_bound(params);
        if (bound && *bound < 1.0) log_bound = std::log(*bound);
    }
    const double log_eps = opt.certify_eps > 0.0 ? std::log(opt.certify_eps) : 0.0;

    StreamRng rng(replica_key(cfg.seed, cfg.replica_index), 0);
    const double lambda = params.lambda, death = params.mu_death;
    std::map<std::uint64_t, std::uint64_t> sizes;  // colony size -> number of colonies
    std::uint64_t population = 0, colonies = 0;
    if (opt.initial_size > 0) {
        sizes[opt.initial_size] = 1;
        population = opt.initial_size;
        colonies = 1;
    }
    const auto add = [&](std::uint64_t size, std::uint64_t count) {
        if (size == 0 || count == 0) return;
        sizes[size] += count;
        population += size * count;
        colonies += count;
    };
    const auto remove_one = [&](std::map<std::uint64_t, std::uint64_t>::iterator it) {
        const std::uint64_t size = it->first;
        if (--it->second == 0) sizes.erase(it);
        population -= size;
        --colonies;
        return size;
    };

    double t = 0.0;
    SimResult r;
    while (true) {
        r.max_population = std::max(r.max_population, population);
        r.max_colonies = std::max(r.max_colonies, colonies);
        r.final_colonies = colonies;
        if (population == 0) return finish(r, SimStatus::Extinct, t);
        if (population >= cfg.n_max) return finish(r, SimStatus::ReachedColonyCap, std::nullopt);
        if (log_bound && static_cast<double>(colonies) * *log_bound <= log_eps) {
            return finish(r, SimStatus::SurvivalCertified, std::nullopt);
        }
        if (r.events >= cfg.event_max) return finish(r, SimStatus::EventCapExceeded, std::nullopt);
        ++r.events;

        const double nd = static_cast<double>(population);
        const double individual_rate = nd * (lambda + death);
        const double rate = individual_rate + params.a * static_cast<double>(colonies);
        const double dt = rng.exponential(rate);
        if (t + dt > cfg.t_max) return finish(r, SimStatus::SurvivedToHorizon, std::nullopt);
        t += dt;
        const double u = rng.uniform() * rate;
        if (u < individual_rate) {
            // Colony of a uniformly chosen individual.
            std::uint64_t target = std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.uniform() * nd), population - 1);
            auto it = sizes.begin();
            while (target >= it->first * it->second) {
                target -= it->first * it->second;
                ++it;
            }
            const std::uint64_t size = remove_one(it);
            add(u < nd * lambda ? size + 1 : size - 1, 1);
        } else {
            std::uint64_t target = std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.uniform() * colonies), colonies - 1);
            auto it = sizes.begin();
            while (target >= it->second) {
                target -= it->second;
                ++it;
            }
            const std::uint64_t size = remove_one(it);
            std::binomial_distribution<std::uint64_t> keep(size, params.p);
            add(1, keep(rng));
            ++r.collapses;
        }
    }
}

std::vector<SimResult> run_nonspatial_replica_results(ColonyModel model, const CatastropheParams& params,
                                                      const SimConfig& cfg, std::uint64_t replicas, unsigned jobs,
                                                      const NonspatialOptions& opt) {
    if (replicas < 1) throw DomainError("replicas must be >= 1");
    params.validate();
    cfg.validate();
    NonspatialOptions shared = opt;
    if (model == ColonyModel::Multi && shared.certify_eps > 0.0 && !shared.extinction_bound) {
        shared.extinction_bound = colony_extinction_bound(params);
        if (!shared.extinction_bound) shared.extinction_bound = 1.0;
    }
    std::vector<SimResult> results(replicas);
    parallel_for(replicas, jobs, [&](std::uint64_t i) {
        SimConfig c = cfg;
        c.replica_index = i;
        results[i] = model == ColonyModel::Single ? simulate_single(params, c, shared) : simulate_multi(params, c, shared);
    });
    return results;
}

SurvivalEstimate run_nonspatial_replicas(ColonyModel model, const CatastropheParams& params, const SimConfig& cfg,
                                         std::uint64_t replicas, unsigned jobs, const NonspatialOptions& opt) {
    return estimate_survival(run_nonspatial_replica_results(model, params, cfg, replicas, jobs, opt));
}

std::string nonspatial_csv_header() { return "model,lambda,mu,a,p,replicas,survived_fraction,ci_low,ci_high,p1,p2"; }

std::string nonspatial_csv_row(ColonyModel model, const CatastropheParams& params, const SurvivalEstimate& est) {
    std::string row = to_string(model);
    for (double v : {params.lambda, params.mu_death, params.a, params.p}) row += "," + format_double(v);
    row += "," + std::to_string(est.replicas);
    for (double v : {est.survived_fraction, est.ci_low, est.ci_high}) row += "," + format_double(v);
    row += "," + format_optional(critical_p(ColonyModel::Single, params));
    row += "," + format_optional(critical_p(ColonyModel::Multi, params));
    return row;
}

}  // namespace ccsim
