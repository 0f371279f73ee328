#pragma once

// Birth-death populations with binomial catastrophes, without space.
//
// Single: one colony; individuals give birth at rate lambda and die at rate
// mu_death; at rate a a catastrophe keeps each individual with probability p.
// Multi: the same per-individual dynamics, but each colony collapses at rate
// a on its own and every survivor founds a new singleton colony.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/simulator.hpp"

namespace ccsim {

struct CatastropheParams {
    double lambda = 0.0;
    double mu_death = 0.0;
    double a = 1.0;
    double p = 1.0;

    void validate() const;
};

enum class ColonyModel { Single, Multi };

std::string to_string(ColonyModel model);
ColonyModel parse_colony_model(const std::string& name);

// Single: exp(-(lambda - mu)/a). Multi: 1 - (lambda - mu)/a, or 0 once
// lambda >= mu + a. nullopt when lambda <= mu (no p gives survival).
std::optional<double> critical_p(ColonyModel model, const CatastropheParams& params);

// Exact criterion for positive survival probability from one individual.
bool survival_condition(ColonyModel model, const CatastropheParams& params);

struct NonspatialOptions {
    std::uint64_t initial_size = 1;
    // Single model: below this size events are simulated one by one; above
    // it the population jumps straight to the next catastrophe.
    std::uint64_t leap_threshold = 1024;
    // Multi model: stop with SurvivalCertified once the probability of
    // eventual extinction from the current state is provably below this.
    // 0 disables the certificate.
    double certify_eps = 1e-12;
    // Precomputed colony_extinction_bound(); computed on demand when unset.
    std::optional<double> extinction_bound;
};

// Linear birth-death transition from one individual over time t:
// P[N_t = 0] = extinct, P[N_t = j] = (1 - extinct)(1 - ratio) ratio^(j-1).
struct BirthDeathLaw {
    double extinct;
    double ratio;
};
BirthDeathLaw birth_death_law(double lambda, double mu_death, double t);

// Upper bound on the probability that a single colony founded by one
// individual leaves no descendants in the multi-colony model. nullopt when
// no bound below 1 can be verified (in particular when survival is
// impossible). Any colony of size >= 1 dies out with at most this
// probability, independently of the others.
std::optional<double> colony_extinction_bound(const CatastropheParams& params);

// SimConfig fields used: t_max, n_max (population cap), event_max, seed,
// replica_index. max_population records the largest total population.
SimResult simulate_single(const CatastropheParams& params, const SimConfig& cfg, const NonspatialOptions& opt = {});
SimResult simulate_multi(const CatastropheParams& params, const SimConfig& cfg, const NonspatialOptions& opt = {});

// Replica r runs with cfg.replica_index = r; results are ordered by replica.
std::vector<SimResult> run_nonspatial_replica_results(ColonyModel model, const CatastropheParams& params,
                                                      const SimConfig& cfg, std::uint64_t replicas, unsigned jobs = 0,
                                                      const NonspatialOptions& opt = {});

SurvivalEstimate run_nonspatial_replicas(ColonyModel model, const CatastropheParams& params, const SimConfig& cfg,
                                         std::uint64_t replicas, unsigned jobs = 0,
                                         const NonspatialOptions& opt = {});

// CSV: model,lambda,mu,a,p,replicas,survived_fraction,ci_low,ci_high,p1,p2
std::string nonspatial_csv_header();
std::string nonspatial_csv_row(ColonyModel model, const CatastropheParams& params, const SurvivalEstimate& est);

}  // namespace ccsim
