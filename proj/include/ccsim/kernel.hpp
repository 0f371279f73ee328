#pragma once

// Closed-form quantities of the colonization-and-collapse model.
//
// A colony is founded by one individual, grows as a Yule process at rate
// lambda and collapses after an Exp(1) lifetime. Y is its size at collapse;
// every survivor (probability p each) picks one of the m neighbours
// uniformly. Everything below is a functional of the law of Y, mostly
// through its generating function g(s) = E[s^Y].

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ccsim {

class ModelParams {
public:
    // Throws DomainError unless lambda >= 0 and 0 <= p <= 1.
    ModelParams(double lambda, double p);

    double lambda() const noexcept { return lambda_; }
    double p() const noexcept { return p_; }

private:
    double lambda_;
    double p_;
};

struct SeriesControl {
    double rel_tol = 1e-14;
    std::size_t max_terms = 10'000'000;

    void validate() const;
};

// Law of W_m: number of neighbours receiving at least one colonization
// attempt when a colony collapses (new colonies in the auxiliary process).
class OffspringDistribution {
public:
    // Throws ValidationError if probs is empty, has a negative entry, or
    // does not sum to 1 within 1e-9. m is probs.size() - 1.
    explicit OffspringDistribution(std::vector<double> probs);

    int m() const noexcept { return static_cast<int>(probs_.size()) - 1; }
    std::span<const double> probs() const noexcept { return probs_; }
    double operator[](int w) const { return probs_.at(static_cast<std::size_t>(w)); }
    double mean() const noexcept;

private:
    std::vector<double> probs_;
};

// P[Y = k] = B(1 + 1/lambda, k) / lambda.
double yule_size_pmf(const ModelParams& params, std::uint64_t k);

// g(s) = E[s^Y].
double attempt_gf(double s, const ModelParams& params, const SeriesControl& ctl = {});

// Mean number of new colonies per collapse on an m-regular graph:
// mu(m) = m * (1 - g(1 - p/m)).
double mu(int m, const ModelParams& params, const SeriesControl& ctl = {});

// Same quantity through 2F1(1, 1; 2 + 1/lambda; 1 - p/m). Requires lambda > 0.
double mu_hypergeometric(int m, const ModelParams& params, const SeriesControl& ctl = {});

// Probability that a collapse sends out no colonization attempt: g(1 - p).
double alpha(const ModelParams& params, const SeriesControl& ctl = {});

OffspringDistribution offspring_pmf(int m, const ModelParams& params, const SeriesControl& ctl = {});

// 1 - (m/lambda) ln(m/p), a lower bound on P[W_m = m] that tends to 1 as
// lambda grows. Can be negative.
double q_lower_bound(int m, const ModelParams& params);

double offspring_pgf(double s, const OffspringDistribution& dist);

// lambda with |mu(m, lambda, p) - target| < tol. The target must lie in
// (p, m), the range of mu over lambda in (0, inf); otherwise NoSolutionError.
double solve_lambda_for_mu(int m, double p, double target, double tol);

}  // namespace ccsim
