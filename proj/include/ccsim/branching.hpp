#pragma once

// Galton-Watson view of the auxiliary process: generation n is the set of
// colonies founded by colonies of generation n-1, each producing an
// independent W_m offspring.

#include <cstdint>
#include <string>

#include "ccsim/kernel.hpp"

namespace ccsim {

struct GWModel {
    OffspringDistribution offspring;
};

// Least fixed point of the offspring pgf on [0, 1]. Exactly 1 when the
// mean is at most 1, except for the law concentrated at one child (0).
// Throws ConvergenceError if the iteration does not settle.
double gw_extinction_prob(const GWModel& model, double tol = 1e-13);

struct GWSimResult {
    std::uint64_t replicas = 0;
    std::uint64_t extinct = 0;
    std::uint64_t hit_cap = 0;  // reached the population cap (counted as surviving)
    double extinction_frequency = 0.0;
};

inline constexpr std::uint64_t kGWPopulationCap = 1'000'000;

// Z_0 = 1; replica r draws from a stream keyed by (seed, r).
GWSimResult gw_simulate(const GWModel& model, std::uint64_t generations, std::uint64_t replicas,
                        std::uint64_t seed, unsigned jobs = 0);

enum class RegularFamily { Lattice, Tree };

std::string to_string(RegularFamily family);
// 2d on Z^d, d + 1 on the tree T^d.
int regular_degree(RegularFamily family, int d);

// Expected number of auxiliary-process colonies ever founded at a fixed
// vertex other than the start, summed over generations: (1-mu)^-d - 1 on
// Z^d and (d+1)mu/(1-d mu) on T^d. DivergenceError outside mu in [0, 1)
// (lattice) or [0, 1/d) (tree).
double expected_reachers(RegularFamily family, int d, double mu);

enum class Verdict { Extinct, Unknown };

std::string to_string(Verdict v);

struct ExtinctionVerdict {
    RegularFamily family;
    int d;
    int m;
    double mu;
    Verdict global;  // from a finite start: mu <= 1
    Verdict local;   // from all sites occupied: mu < 1 (lattice), mu < 1/d (tree)
};

ExtinctionVerdict theorem1_verdict(RegularFamily family, int d, const ModelParams& params);

}  // namespace ccsim
