#include "ccsim/branching.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/parallel.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

double gw_extinction_prob(const GWModel& model, double tol) {
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    const auto probs = model.offspring.probs();
    if (probs.size() > 1 && probs[1] == 1.0) return 0.0;
    if (model.offspring.mean() <= 1.0) return 1.0;
    constexpr std::size_t kMaxIter = 100'000'000;
    double s = 0.0;
    for (std::size_t it = 0; it < kMaxIter; ++it) {
        const double next = offspring_pgf(s, model.offspring);
        if (std::fabs(next - s) < tol) return next;
        s = next;
    }
    throw ConvergenceError("fixed-point iteration for the extinction probability did not settle", s, kMaxIter);
}

GWSimResult gw_simulate(const GWModel& model, std::uint64_t generations, std::uint64_t replicas,
                        std::uint64_t seed, unsigned jobs) {
    if (generations < 1) throw DomainError("generations must be >= 1");
    if (replicas < 1) throw DomainError("replicas must be >= 1");
    const auto probs = model.offspring.probs();
    // Conditional probabilities for drawing multinomial counts as a chain of binomials.
    std::vector<double> cond(probs.size(), 1.0);
    double rest = 1.0;
    for (std::size_t w = 0; w < probs.size(); ++w) {
        cond[w] = rest > 0.0 ? std::min(1.0, probs[w] / rest) : 0.0;
        rest -= probs[w];
    }

    enum class Outcome : std::uint8_t { Extinct, Alive, Capped };
    std::vector<Outcome> outcome(replicas);
    parallel_for(replicas, jobs, [&](std::uint64_t r) {
        StreamRng rng(replica_key(seed, r), 0);
        std::uint64_t z = 1;
        for (std::uint64_t gen = 0; gen < generations; ++gen) {
            std::uint64_t left = z, next = 0;
            for (std::size_t w = 0; w + 1 < cond.size() && left > 0; ++w) {
                std::binomial_distribution<std::uint64_t> draw(left, cond[w]);
                const std::uint64_t k = draw(rng);
                next += k * w;
                left -= k;
            }
            next += left * (cond.size() - 1);
            z = next;
            if (z == 0) {
                outcome[r] = Outcome::Extinct;
                return;
            }
            if (z >= kGWPopulationCap) {
                outcome[r] = Outcome::Capped;
                return;
            }
        }
        outcome[r] = Outcome::Alive;
    });

    GWSimResult res;
    res.replicas = replicas;
    for (Outcome o : outcome) {
        if (o == Outcome::Extinct) ++res.extinct;
        if (o == Outcome::Capped) ++res.hit_cap;
    }
    res.extinction_frequency = static_cast<double>(res.extinct) / static_cast<double>(replicas);
    return res;
}

std::string to_string(RegularFamily family) { return family == RegularFamily::Lattice ? "lattice" : "tree"; }

int regular_degree(RegularFamily family, int d) {
    if (d < 1) throw DomainError("d must be >= 1");
    return family == RegularFamily::Lattice ? 2 * d : d + 1;
}

double expected_reachers(RegularFamily family, int d, double mu) {
    if (d < 1) throw DomainError("d must be >= 1");
    if (std::isnan(mu) || mu < 0.0) throw DomainError("mu must be nonnegative");
    if (family == RegularFamily::Lattice) {
        if (mu >= 1.0) throw DivergenceError("series diverges on Z^d for mu >= 1");
        return std::pow(1.0 - mu, -d) - 1.0;
    }
    if (mu * d >= 1.0) throw DivergenceError("series diverges on T^d for mu >= 1/d");
    return (d + 1) * mu / (1.0 - d * mu);
}

std::string to_string(Verdict v) { return v == Verdict::Extinct ? "extinct" : "unknown"; }

ExtinctionVerdict theorem1_verdict(RegularFamily family, int d, const ModelParams& params) {
    const int m = regular_degree(family, d);
    const double value = mu(m, params);
    const double local_bound = family == RegularFamily::Lattice ? 1.0 : 1.0 / d;
    return {family,
            d,
            m,
            value,
            value <= 1.0 ? Verdict::Extinct : Verdict::Unknown,
            value < local_bound ? Verdict::Extinct : Verdict::Unknown};
}

}  // namespace ccsim
