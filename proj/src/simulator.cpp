#include "ccsim/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "ccsim/errors.hpp"
#include "ccsim/parallel.hpp"

namespace ccsim {

namespace {

// Address layout per ring r of a vertex clock: slot 0 holds the gap from
// ring r-1 and the size uniform of a collapse at ring r; slots 1.. feed the
// hit pattern two uniforms at a time.
constexpr std::uint64_t kSlotBits = 20;
constexpr std::uint64_t kRingSlot = 0;
constexpr std::uint64_t kHitSlot0 = 1;
constexpr std::uint64_t kXiStreamTag = 0xC0105EULL << 40;

constexpr std::uint64_t address(std::uint64_t ring, std::uint64_t slot) { return (ring << kSlotBits) | slot; }

struct Event {
    double time;
    std::uint64_t seq;
    std::uint32_t site;
    // Auxiliary process only.
    double founded_at;
    std::uint64_t colony;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const noexcept {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

using EventQueue = std::priority_queue<Event, std::vector<Event>, EventLater>;

// Vertices touched by a run, interned to dense indices in first-touch order.
// Randomness is keyed by the vertex hash, never by the index.
struct Site {
    VertexId id;
    std::uint64_t key = 0;
    std::uint64_t ring = 0;
    double ring_time = 0.0;
    double founded_at = 0.0;
    std::uint32_t colonies = 0;
    bool neighbors_ready = false;
    std::vector<std::int32_t> neighbors;  // -1 marks an off-graph neighbour
};

class SiteTable {
public:
    explicit SiteTable(const Topology& t) : topology_(t) {}

    std::uint32_t intern(const VertexId& v) {
        auto [it, inserted] = index_.try_emplace(v, static_cast<std::uint32_t>(sites_.size()));
        if (inserted) {
            Site s;
            s.id = v;
            s.key = v.hash();
            sites_.push_back(std::move(s));
        }
        return it->second;
    }

    Site& operator[](std::uint32_t i) { return sites_[i]; }
    std::size_t size() const { return sites_.size(); }

    const std::vector<std::int32_t>& neighbors(std::uint32_t i) {
        if (!sites_[i].neighbors_ready) {
            const auto list = topology_.neighbors(sites_[i].id);
            std::vector<std::int32_t> idx;
            idx.reserve(list.size());
            for (const Neighbor& n : list) idx.push_back(n.off_graph ? -1 : static_cast<std::int32_t>(intern(n.id)));
            sites_[i].neighbors = std::move(idx);
            sites_[i].neighbors_ready = true;
        }
        return sites_[i].neighbors;
    }

    std::optional<std::int64_t> rightmost_occupied() const {
        if (topology_.family() != GraphFamily::Lattice || topology_.dimension() != 1) return std::nullopt;
        std::optional<std::int64_t> best;
        for (const Site& s : sites_) {
            if (s.colonies > 0 && (!best || s.id[0] > *best)) best = s.id[0];
        }
        return best;
    }

private:
    const Topology& topology_;
    std::unordered_map<VertexId, std::uint32_t, VertexIdHash> index_;
    std::vector<Site> sites_;
};

std::vector<std::uint32_t> intern_initial(SiteTable& sites, const Topology& t, std::span<const VertexId> init,
                                          bool require_distinct) {
    std::vector<std::uint32_t> out;
    out.reserve(init.size());
    for (const VertexId& v : init) {
        if (!t.contains(v)) throw DomainError("initial vertex " + v.to_string() + " is not in " + t.describe());
        out.push_back(sites.intern(v));
    }
    if (require_distinct) {
        auto sorted = out;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DomainError("initial vertices must be distinct");
        }
    }
    return out;
}

std::optional<std::uint32_t> tracked_site(SiteTable& sites, const Topology& t, const SimConfig& cfg) {
    if (!cfg.track_vertex) return std::nullopt;
    if (!t.contains(*cfg.track_vertex)) {
        throw DomainError("tracked vertex " + cfg.track_vertex->to_string() + " is not in " + t.describe());
    }
    return sites.intern(*cfg.track_vertex);
}

// Move the site's rate-1 clock to its first ring strictly after `time`.
void advance_clock(Site& s, const CounterRng& rng, double time) {
    while (s.ring_time <= time) {
        ++s.ring;
        s.ring_time += exponential_from(rng.uniform(s.key, address(s.ring, kRingSlot)));
    }
}

double log_one_minus_exp_neg(double x) {
    // ln(1 - e^{-x}) for x > 0
    return x > std::log(2.0) ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

// Feeds the hit sampler from consecutive 128-bit blocks.
class PairedUniforms {
public:
    PairedUniforms(const CounterRng& rng, std::uint64_t a, std::uint64_t first_b) : rng_(rng), a_(a), b_(first_b) {}

    double operator()() {
        if (spare_) {
            spare_ = false;
            return second_;
        }
        const auto [x, y] = rng_.uniform_pair(a_, b_++);
        second_ = y;
        spare_ = true;
        return x;
    }

private:
    const CounterRng& rng_;
    std::uint64_t a_;
    std::uint64_t b_;
    double second_ = 0.0;
    bool spare_ = false;
};

// One sampler per degree met during a run.
class SamplerCache {
public:
    explicit SamplerCache(double p) : p_(p) {}

    HitSampler& get(int m) {
        if (static_cast<std::size_t>(m) >= by_degree_.size()) by_degree_.resize(static_cast<std::size_t>(m) + 1);
        auto& slot = by_degree_[static_cast<std::size_t>(m)];
        if (!slot) slot.emplace(m, p_);
        return *slot;
    }

private:
    double p_;
    std::vector<std::optional<HitSampler>> by_degree_;
};

}  // namespace

void SimConfig::validate() const {
    if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    if (event_max < 1) throw DomainError("event_max must be >= 1");
}

std::string to_string(SimStatus status) {
    switch (status) {
        case SimStatus::Extinct: return "extinct";
        case SimStatus::SurvivedToHorizon: return "survived_to_horizon";
        case SimStatus::ReachedColonyCap: return "reached_colony_cap";
        case SimStatus::EventCapExceeded: return "event_cap_exceeded";
        case SimStatus::SurvivalCertified: return "survival_certified";
    }
    return "unknown";
}

bool survived(const SimResult& r) noexcept {
    return r.status == SimStatus::SurvivedToHorizon || r.status == SimStatus::ReachedColonyCap ||
           r.status == SimStatus::SurvivalCertified;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (phat + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    return {std::clamp(std::min(centre - half, phat), 0.0, 1.0), std::clamp(std::max(centre + half, phat), 0.0, 1.0)};
}

SurvivalEstimate estimate_survival(std::span<const SimResult> results) {
    SurvivalEstimate e;
    e.replicas = results.size();
    e.survivors = static_cast<std::uint64_t>(std::count_if(results.begin(), results.end(), survived));
    e.event_capped = static_cast<std::uint64_t>(std::count_if(
        results.begin(), results.end(), [](const SimResult& r) { return r.status == SimStatus::EventCapExceeded; }));
    e.survived_fraction = e.replicas ? static_cast<double>(e.survivors) / static_cast<double>(e.replicas) : 0.0;
    const Interval ci = wilson_interval(e.survivors, e.replicas);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
    return e;
}

ColonySize sample_collapse_size(double lambda, double lifetime, double u) {
    if (lambda == 0.0) return 1.0;
    const double x = lambda * lifetime;
    if (!(x > 0.0)) return 1.0;
    const double log_fail = log_one_minus_exp_neg(x);
    if (log_fail == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 + std::floor(std::log(u) / log_fail);
}

HitSampler::HitSampler(int m, double p) : m_(m), p_(p), unhit_(static_cast<std::size_t>(std::max(m, 0))) {
    if (m < 1) throw DomainError("degree m must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    log_miss_.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double q = p * static_cast<double>(m - k) / m;
        log_miss_.push_back(q >= 1.0 ? -std::numeric_limits<double>::infinity() : std::log1p(-q));
    }
}

std::vector<bool> sample_hit_pattern(int m, ColonySize size, double p, const std::function<double()>& next_uniform) {
    HitSampler sampler(m, p);
    std::vector<std::uint8_t> hits(static_cast<std::size_t>(m));
    sampler.sample(size, next_uniform, hits);
    return {hits.begin(), hits.end()};
}

std::vector<bool> sample_hit_pattern_sequential(int m, ColonySize size, double p,
                                                const std::function<double()>& next_uniform) {
    if (m < 1) throw DomainError("degree m must be >= 1");
    // (1 - k p/m)^size: probability that no individual lands on k fixed neighbours.
    const auto none_on = [&](int k) {
        if (k == 0) return 1.0;
        const double base = 1.0 - k * p / m;
        if (base <= 0.0) return 0.0;
        return std::exp(size * std::log1p(-k * p / m));
    };
    // P[zeros receive nothing, every one of `hit` receives something].
    const auto joint = [&](int zeros, int hit) {
        double acc = 0.0, c = 1.0;
        for (int i = 0; i <= hit; ++i) {
            acc += ((i % 2) ? -c : c) * none_on(zeros + i);
            c = c * (hit - i) / (i + 1);
        }
        return std::max(acc, 0.0);
    };
    std::vector<bool> bits(static_cast<std::size_t>(m), false);
    int zeros = 0, hit = 0;
    for (int j = 0; j < m; ++j) {
        // Remaining m - j neighbours are unconstrained; marginalising them out
        // leaves the constraints on the first j.
        const double before = joint(zeros, hit);
        const double p_zero = before > 0.0 ? joint(zeros + 1, hit) / before : 1.0;
        if (next_uniform() < p_zero) {
            ++zeros;
        } else {
            bits[static_cast<std::size_t>(j)] = true;
            ++hit;
        }
    }
    return bits;
}

SimResult run_cc(const Topology& t, const ModelParams& params, std::span<const VertexId> init,
                 const SimConfig& cfg) {
    cfg.validate();
    const CounterRng rng(replica_key(cfg.seed, cfg.replica_index));
    SiteTable sites(t);
    const auto start = intern_initial(sites, t, init, true);
    const auto tracked = tracked_site(sites, t, cfg);

    SimResult result;
    EventQueue queue;
    std::uint64_t seq = 0;
    std::uint64_t colonies = 0;
    for (std::uint32_t i : start) {
        Site& s = sites[i];
        s.colonies = 1;
        s.founded_at = 0.0;
        advance_clock(s, rng, 0.0);
        queue.push({s.ring_time, seq++, i, 0.0, 0});
        ++colonies;
    }
    result.max_colonies = colonies;

    std::vector<std::uint8_t> hits;
    SamplerCache samplers(params.p());
    const auto finish = [&](SimStatus status, std::optional<double> when) {
        result.status = status;
        result.extinction_time = when;
        result.final_colonies = colonies;
        result.rightmost_site = sites.rightmost_occupied();
        return result;
    };

    if (colonies == 0) return finish(SimStatus::Extinct, 0.0);
    if (colonies >= cfg.n_max) return finish(SimStatus::ReachedColonyCap, std::nullopt);

    while (true) {
        if (queue.empty()) return finish(SimStatus::Extinct, 0.0);
        const Event ev = queue.top();
        if (ev.time > cfg.t_max) return finish(SimStatus::SurvivedToHorizon, std::nullopt);
        if (result.events >= cfg.event_max) return finish(SimStatus::EventCapExceeded, std::nullopt);
        queue.pop();
        ++result.events;
        ++result.collapses;

        const std::uint32_t x = ev.site;
        const auto& nbrs = sites.neighbors(x);
        Site& s = sites[x];
        assert(s.colonies == 1 && s.ring_time == ev.time);
        const std::uint64_t key = s.key;
        const std::uint64_t ring = s.ring;
        const ColonySize size = sample_collapse_size(params.lambda(), ev.time - s.founded_at,
                                                     rng.uniform_pair(key, address(ring, kRingSlot)).second);
        s.colonies = 0;
        --colonies;

        const int m = static_cast<int>(nbrs.size());
        hits.resize(nbrs.size());
        samplers.get(m).sample(size, PairedUniforms(rng, key, address(ring, kHitSlot0)), hits);
        for (int j = 0; j < m; ++j) {
            if (!hits[static_cast<std::size_t>(j)]) continue;
            ++result.neighbor_hits;
            const std::int32_t y = nbrs[static_cast<std::size_t>(j)];
            if (y < 0) continue;
            Site& target = sites[static_cast<std::uint32_t>(y)];
            if (target.colonies > 0) continue;  // attempt on an occupied vertex dies
            target.colonies = 1;
            target.founded_at = ev.time;
            advance_clock(target, rng, ev.time);
            queue.push({target.ring_time, seq++, static_cast<std::uint32_t>(y), ev.time, 0});
            ++colonies;
            if (tracked && *tracked == static_cast<std::uint32_t>(y)) {
                ++result.origin_colonizations;
                result.last_origin_time = ev.time;
            }
        }
        result.max_colonies = std::max(result.max_colonies, colonies);
        if (colonies == 0) return finish(SimStatus::Extinct, ev.time);
        if (colonies >= cfg.n_max) return finish(SimStatus::ReachedColonyCap, std::nullopt);
    }
}

SimResult run_xi(const Topology& t, const ModelParams& params, std::span<const VertexId> init,
                 const SimConfig& cfg) {
    cfg.validate();
    const CounterRng rng(replica_key(cfg.seed, cfg.replica_index));
    SiteTable sites(t);
    const auto start = intern_initial(sites, t, init, true);
    const auto tracked = tracked_site(sites, t, cfg);

    SimResult result;
    EventQueue queue;
    std::uint64_t seq = 0;
    std::uint64_t next_colony = 0;
    std::uint64_t colonies = 0;
    const auto found = [&](std::uint32_t site, double when) {
        const std::uint64_t id = next_colony++;
        const double lifetime = exponential_from(rng.uniform(kXiStreamTag | id, 0));
        queue.push({when + lifetime, seq++, site, when, id});
        ++sites[site].colonies;
        ++colonies;
    };
    for (std::uint32_t i : start) found(i, 0.0);
    result.max_colonies = colonies;

    std::vector<std::uint8_t> hits;
    SamplerCache samplers(params.p());
    const auto finish = [&](SimStatus status, std::optional<double> when) {
        result.status = status;
        result.extinction_time = when;
        result.final_colonies = colonies;
        result.rightmost_site = sites.rightmost_occupied();
        return result;
    };

    if (colonies == 0) return finish(SimStatus::Extinct, 0.0);
    if (colonies >= cfg.n_max) return finish(SimStatus::ReachedColonyCap, std::nullopt);

    while (true) {
        if (queue.empty()) return finish(SimStatus::Extinct, 0.0);
        const Event ev = queue.top();
        if (ev.time > cfg.t_max) return finish(SimStatus::SurvivedToHorizon, std::nullopt);
        if (result.events >= cfg.event_max) return finish(SimStatus::EventCapExceeded, std::nullopt);
        queue.pop();
        ++result.events;
        ++result.collapses;

        const std::uint64_t stream = kXiStreamTag | ev.colony;
        const ColonySize size =
            sample_collapse_size(params.lambda(), ev.time - ev.founded_at, rng.uniform_pair(stream, 0).second);
        const auto& nbrs = sites.neighbors(ev.site);
        --sites[ev.site].colonies;
        --colonies;

        const int m = static_cast<int>(nbrs.size());
        hits.resize(nbrs.size());
        samplers.get(m).sample(size, PairedUniforms(rng, stream, kHitSlot0), hits);
        std::size_t created = 0;
        for (int j = 0; j < m; ++j) {
            if (!hits[static_cast<std::size_t>(j)]) continue;
            ++result.neighbor_hits;
            const std::int32_t y = nbrs[static_cast<std::size_t>(j)];
            if (y < 0) continue;
            found(static_cast<std::uint32_t>(y), ev.time);
            ++created;
            if (tracked && *tracked == static_cast<std::uint32_t>(y)) {
                ++result.origin_colonizations;
                result.last_origin_time = ev.time;
            }
        }
        if (result.offspring_counts.size() <= created) result.offspring_counts.resize(created + 1, 0);
        ++result.offspring_counts[created];

        result.max_colonies = std::max(result.max_colonies, colonies);
        if (colonies == 0) return finish(SimStatus::Extinct, ev.time);
        if (colonies >= cfg.n_max) return finish(SimStatus::ReachedColonyCap, std::nullopt);
    }
}

std::vector<SimResult> run_replica_results(const Topology& t, const ModelParams& params,
                                           std::span<const VertexId> init, const SimConfig& cfg,
                                           std::uint64_t replicas, unsigned jobs, ProcessKind kind) {
    if (replicas < 1) throw DomainError("replicas must be >= 1");
    cfg.validate();
    std::vector<SimResult> results(replicas);
    parallel_for(replicas, jobs, [&](std::uint64_t r) {
        SimConfig c = cfg;
        c.replica_index = r;
        results[r] = kind == ProcessKind::CC ? run_cc(t, params, init, c) : run_xi(t, params, init, c);
    });
    return results;
}

SurvivalEstimate run_replicas(const Topology& t, const ModelParams& params, std::span<const VertexId> init,
                              const SimConfig& cfg, std::uint64_t replicas, unsigned jobs, ProcessKind kind) {
    const auto results = run_replica_results(t, params, init, cfg, replicas, jobs, kind);
    return estimate_survival(results);
}

std::vector<VertexId> half_full_interval(std::int64_t half_width) {
    std::vector<VertexId> out;
    for (std::int64_t x = -half_width; x <= half_width; x += 2) out.push_back(VertexId{x});
    return out;
}

SpeedEstimate edge_speed_experiment(const ModelParams& params, double t_max, std::uint64_t replicas,
                                    std::uint64_t seed, unsigned jobs) {
    if (!(params.lambda() > 0.0) || !(params.p() > 0.0)) {
        throw DomainError("edge_speed_experiment requires lambda > 0 and p > 0");
    }
    constexpr std::int64_t kHalfWidth = 10;
    const Topology line = Topology::lattice(1);
    const auto init = half_full_interval(kHalfWidth);
    SimConfig cfg;
    cfg.t_max = t_max;
    cfg.n_max = std::numeric_limits<std::uint64_t>::max();
    cfg.event_max = std::numeric_limits<std::uint64_t>::max();
    cfg.seed = seed;
    const auto results = run_replica_results(line, params, init, cfg, replicas, jobs);

    std::vector<double> speeds;
    for (const SimResult& r : results) {
        if (r.status == SimStatus::SurvivedToHorizon && r.rightmost_site) {
            speeds.push_back(static_cast<double>(*r.rightmost_site - kHalfWidth) / t_max);
        }
    }
    if (speeds.empty()) throw InsufficientDataError("every replica died out before the horizon");
    SpeedEstimate e;
    e.replicas = replicas;
    e.survivors = speeds.size();
    const double n = static_cast<double>(speeds.size());
    e.mean = std::accumulate(speeds.begin(), speeds.end(), 0.0) / n;
    if (speeds.size() > 1) {
        double ss = 0.0;
        for (double v : speeds) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

}  // namespace ccsim
