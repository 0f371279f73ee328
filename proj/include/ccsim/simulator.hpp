#pragma once

// Event-driven simulation of the colonization-and-collapse process (one
// colony per vertex, attempts on occupied vertices die) and of its
// dominating auxiliary process (any number of colonies per vertex, each
// collapse creates at most one colony per neighbour).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccsim/graphs.hpp"
#include "ccsim/kernel.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

// Colony size at collapse. Sizes beyond 2^53 lose integer precision and may
// be +inf; only powers s^size are ever taken of them.
using ColonySize = double;

struct Colony {
    VertexId vertex;
    double founded_at = 0.0;
    double collapse_at = 0.0;
};

struct SimConfig {
    double t_max = 100.0;
    std::uint64_t n_max = 1'000'000;
    std::uint64_t event_max = 100'000'000;
    std::optional<VertexId> track_vertex;
    std::uint64_t seed = 0x5EED;
    std::uint64_t replica_index = 0;

    void validate() const;
};

enum class SimStatus {
    Extinct,
    SurvivedToHorizon,
    ReachedColonyCap,
    EventCapExceeded,
    // Non-spatial multi-colony runs only: extinction probability from the
    // current state is provably below the configured epsilon.
    SurvivalCertified,
};

std::string to_string(SimStatus status);

struct SimResult {
    SimStatus status = SimStatus::EventCapExceeded;
    std::optional<double> extinction_time;
    std::uint64_t events = 0;
    std::uint64_t collapses = 0;
    // Neighbours that received at least one attempt, summed over collapses,
    // whether or not the attempt founded a colony.
    std::uint64_t neighbor_hits = 0;
    std::uint64_t max_colonies = 0;
    std::uint64_t final_colonies = 0;
    std::uint64_t origin_colonizations = 0;
    std::optional<double> last_origin_time;
    std::optional<std::int64_t> rightmost_site;  // Z^1 only
    std::uint64_t max_population = 0;            // non-spatial models only
    // Auxiliary process only: offspring_counts[w] = collapses that created w colonies.
    std::vector<std::uint64_t> offspring_counts;
};

// Survival proxy: alive at the horizon, or grown past the cap.
bool survived(const SimResult& r) noexcept;

struct SurvivalEstimate {
    std::uint64_t replicas = 0;
    std::uint64_t survivors = 0;
    std::uint64_t event_capped = 0;  // replicas stopped by event_max, counted as not surviving
    double survived_fraction = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct Interval {
    double low;
    double high;
};

// Wilson score interval at 95%.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials);
SurvivalEstimate estimate_survival(std::span<const SimResult> results);

// Y given lifetime tau: 1 + floor(ln u / ln(1 - e^{-lambda tau})).
ColonySize sample_collapse_size(double lambda, double lifetime, double u);

// Which of m neighbours receive at least one attempt from `size`
// individuals, each surviving with probability p and picking a uniform
// neighbour. Exact joint law from at most 2m uniforms: the k-th newly hit
// neighbour appears after a Geometric(p (m-k)/m) number of further
// individuals and is uniform among those not yet hit. For fixed uniforms the
// hit set only grows with size and with p.
class HitSampler {
public:
    HitSampler(int m, double p);

    int degree() const noexcept { return m_; }

    template <class UniformFn>
    void sample(ColonySize size, UniformFn&& next_uniform, std::span<std::uint8_t> hits);

private:
    int m_;
    double p_;
    std::vector<double> log_miss_;  // ln(1 - p (m-k)/m), -inf when that probability is 0
    std::vector<int> unhit_;
};

std::vector<bool> sample_hit_pattern(int m, ColonySize size, double p, const std::function<double()>& next_uniform);

// Same law, sampled neighbour by neighbour from the conditional probability
// of receiving no attempt given the bits already drawn (inclusion-exclusion
// in log domain). Independent route used to cross-check the sampler above.
std::vector<bool> sample_hit_pattern_sequential(int m, ColonySize size, double p,
                                                const std::function<double()>& next_uniform);

SimResult run_cc(const Topology& t, const ModelParams& params, std::span<const VertexId> init, const SimConfig& cfg);
SimResult run_xi(const Topology& t, const ModelParams& params, std::span<const VertexId> init, const SimConfig& cfg);

enum class ProcessKind { CC, Xi };

// Replica r runs with cfg.replica_index = r; results are ordered by replica.
std::vector<SimResult> run_replica_results(const Topology& t, const ModelParams& params,
                                           std::span<const VertexId> init, const SimConfig& cfg,
                                           std::uint64_t replicas, unsigned jobs = 0,
                                           ProcessKind kind = ProcessKind::CC);

SurvivalEstimate run_replicas(const Topology& t, const ModelParams& params, std::span<const VertexId> init,
                              const SimConfig& cfg, std::uint64_t replicas, unsigned jobs = 0,
                              ProcessKind kind = ProcessKind::CC);

struct SpeedEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t survivors = 0;
    std::uint64_t replicas = 0;
};

// Edge speed on Z^1 from the half-full interval {-10, -8, ..., 10}:
// mean of (r_T - r_0)/T over replicas alive at T.
SpeedEstimate edge_speed_experiment(const ModelParams& params, double t_max, std::uint64_t replicas,
                                    std::uint64_t seed, unsigned jobs = 0);

// Start configuration used by edge_speed_experiment.
std::vector<VertexId> half_full_interval(std::int64_t half_width);

// ---------------------------------------------------------------------------

template <class UniformFn>
void HitSampler::sample(ColonySize size, UniformFn&& next_uniform, std::span<std::uint8_t> hits) {
    for (int j = 0; j < m_; ++j) {
        hits[static_cast<std::size_t>(j)] = 0;
        unhit_[static_cast<std::size_t>(j)] = j;
    }
    if (!(p_ > 0.0) || !(size >= 1.0)) return;
    double reached = 0.0;  // index of the individual that produced the latest new hit
    for (int k = 0; k < m_; ++k) {
        const double u_gap = next_uniform();
        const double u_pick = next_uniform();
        reached += 1.0 + std::floor(std::log(u_gap) / log_miss_[static_cast<std::size_t>(k)]);
        if (reached > size) return;
        const int left = m_ - k;
        const int pick = std::min(static_cast<int>(u_pick * left), left - 1);
        hits[static_cast<std::size_t>(unhit_[static_cast<std::size_t>(pick)])] = 1;
        unhit_[static_cast<std::size_t>(pick)] = unhit_[static_cast<std::size_t>(left - 1)];
    }
}

}  // namespace ccsim
