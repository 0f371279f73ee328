#include "ccsim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ccsim/errors.hpp"

namespace ccsim {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

void require_degree(int m) {
    if (m < 1) throw DomainError("degree m must be >= 1, got " + std::to_string(m));
}

}  // namespace

ModelParams::ModelParams(double lambda, double p) : lambda_(lambda), p_(p) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("lambda must be a finite value >= 0");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
}

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
    if (max_terms < 1) throw DomainError("max_terms must be >= 1");
}

OffspringDistribution::OffspringDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw ValidationError("offspring distribution needs m >= 1");
    CompensatedSum total;
    for (double x : probs_) {
        if (!(x >= 0.0)) throw ValidationError("offspring probabilities must be nonnegative");
        total.add(x);
    }
    if (std::fabs(total.value() - 1.0) > 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "offspring probabilities sum to " << total.value();
        throw ValidationError(os.str());
    }
}

double OffspringDistribution::mean() const noexcept {
    CompensatedSum s;
    for (std::size_t w = 1; w < probs_.size(); ++w) s.add(static_cast<double>(w) * probs_[w]);
    return s.value();
}

double yule_size_pmf(const ModelParams& params, std::uint64_t k) {
    if (k == 0) throw DomainError("colony size k must be >= 1");
    const double lambda = params.lambda();
    if (lambda == 0.0) return k == 1 ? 1.0 : 0.0;
    // B(a,1)/lambda = 1/(1+lambda); then B(a,k+1) = B(a,k) k/(a+k).
    const double a = 1.0 + 1.0 / lambda;
    double pk = 1.0 / (1.0 + lambda);
    for (std::uint64_t j = 1; j < k && pk > 0.0; ++j) pk *= static_cast<double>(j) / (a + static_cast<double>(j));
    return pk;
}

double attempt_gf(double s, const ModelParams& params, const SeriesControl& ctl) {
    ctl.validate();
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("attempt_gf argument must lie in [0, 1]");
    if (s == 0.0) return 0.0;
    if (s == 1.0) return 1.0;
    const double lambda = params.lambda();
    if (lambda == 0.0) return s;

    const double a = 1.0 + 1.0 / lambda;
    double pk = 1.0 / (1.0 + lambda);  // P[Y = k]
    double sk = s;                     // s^k
    CompensatedSum sum;
    for (std::size_t k = 1; k <= ctl.max_terms; ++k) {
        sum.add(pk * sk);
        pk *= static_cast<double>(k) / (a + static_cast<double>(k));
        sk *= s;
        // Terms decrease in k, so the remainder is at most P[Y=k+1] s^{k+1} / (1-s).
        const double tail = pk * sk * (1.0 / (1.0 - s));
        if (tail <= ctl.rel_tol * sum.value() || pk * sk == 0.0) return std::min(sum.value(), 1.0);
    }
    throw ConvergenceError("attempt_gf: series did not converge within max_terms", sum.value(), ctl.max_terms);
}

double mu(int m, const ModelParams& params, const SeriesControl& ctl) {
    require_degree(m);
    if (params.p() == 0.0) return 0.0;
    const double value = m * (1.0 - attempt_gf(1.0 - params.p() / m, params, ctl));
    return std::clamp(value, 0.0, static_cast<double>(m));
}

double mu_hypergeometric(int m, const ModelParams& params, const SeriesControl& ctl) {
    require_degree(m);
    ctl.validate();
    const double lambda = params.lambda();
    if (!(lambda > 0.0)) throw DomainError("mu_hypergeometric requires lambda > 0");
    const double p = params.p();
    const double c = 2.0 + 1.0 / lambda;
    const double z = 1.0 - p / m;

    double f = 0.0;
    if (z == 1.0) {
        // 2F1(1,1;c;1) = (c-1)/(c-2) = lambda + 1.
        f = lambda + 1.0;
    } else {
        // 2F1(1,1;c;z) = sum_n n!/(c)_n z^n; term ratio (n+1) z/(c+n) < z.
        CompensatedSum sum;
        double term = 1.0;
        bool converged = false;
        for (std::size_t n = 0; n < ctl.max_terms; ++n) {
            sum.add(term);
            term *= (static_cast<double>(n) + 1.0) * z / (c + static_cast<double>(n));
            if (term / (1.0 - z) <= 1e-17 * sum.value() || term == 0.0) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw ConvergenceError("mu_hypergeometric: 2F1 series stalled", sum.value(), ctl.max_terms);
        }
        f = sum.value();
    }
    const double value = m - (m - p) / (lambda + 1.0) * f;
    return std::clamp(value, 0.0, static_cast<double>(m));
}

double alpha(const ModelParams& params, const SeriesControl& ctl) {
    return attempt_gf(1.0 - params.p(), params, ctl);
}

OffspringDistribution offspring_pmf(int m, const ModelParams& params, const SeriesControl& ctl) {
    require_degree(m);
    const double p = params.p();
    // gvals[j] = g(1 - p + j p/m): no survivor lands outside a fixed set of j neighbours.
    std::vector<double> gvals(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) {
        const double s = j == m ? 1.0 : 1.0 - p + j * p / m;
        gvals[static_cast<std::size_t>(j)] = attempt_gf(std::clamp(s, 0.0, 1.0), params, ctl);
    }

    std::vector<double> probs(static_cast<std::size_t>(m) + 1);
    std::vector<double> terms;
    for (int w = 0; w <= m; ++w) {
        // P[a fixed set of w neighbours is exactly the hit set], by inclusion-exclusion.
        terms.clear();
        for (int i = 0; i <= w; ++i) {
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            terms.push_back(sign * binomial(w, i) * gvals[static_cast<std::size_t>(w - i)]);
        }
        std::sort(terms.begin(), terms.end(), [](double x, double y) { return std::fabs(x) > std::fabs(y); });
        CompensatedSum sum;
        for (double t : terms) sum.add(t);
        double value = binomial(m, w) * sum.value();
        if (value < -1e-9) {
            std::ostringstream os;
            os.precision(17);
            os << "offspring_pmf: cancellation produced P[W=" << w << "] = " << value << " for m = " << m;
            throw NumericInstabilityError(os.str());
        }
        probs[static_cast<std::size_t>(w)] = std::max(value, 0.0);
    }
    return OffspringDistribution(std::move(probs));
}

double q_lower_bound(int m, const ModelParams& params) {
    require_degree(m);
    if (params.p() == 0.0) throw DomainError("q_lower_bound requires p > 0 (log divergence)");
    if (params.lambda() == 0.0) throw DomainError("q_lower_bound requires lambda > 0");
    return 1.0 - (m / params.lambda()) * std::log(m / params.p());
}

double offspring_pgf(double s, const OffspringDistribution& dist) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("offspring_pgf argument must lie in [0, 1]");
    const auto probs = dist.probs();
    double acc = 0.0;
    for (auto it = probs.rbegin(); it != probs.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double solve_lambda_for_mu(int m, double p, double target, double tol) {
    require_degree(m);
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    if (!(target > p && target < m)) {
        std::ostringstream os;
        os << "no lambda gives mu(" << m << ") = " << target << ": mu ranges over (" << p << ", " << m << ")";
        throw NoSolutionError(os.str());
    }
    const auto mu_at = [&](double lambda) { return mu(m, ModelParams(lambda, p)); };

    constexpr double kMinLambda = 0x1.0p-20;
    constexpr double kMaxLambda = 0x1.0p20;
    double lo = 1.0;
    double hi = 1.0;
    while (mu_at(lo) > target) {
        lo *= 0.5;
        if (lo < kMinLambda) throw BracketError("solve_lambda_for_mu: target too close to p for lambda >= 2^-20");
    }
    while (mu_at(hi) < target) {
        hi *= 2.0;
        if (hi > kMaxLambda) throw BracketError("solve_lambda_for_mu: target too close to m for lambda <= 2^20");
    }
    if (lo == hi) {
        if (std::fabs(mu_at(lo) - target) < tol) return lo;
        lo = hi * 0.5;
    }

    // Bisection in log(lambda); mu is nondecreasing in lambda.
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = std::sqrt(lo * hi);
        const double value = mu_at(mid);
        if (std::fabs(value - target) < tol) return mid;
        if (value < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    throw BracketError("solve_lambda_for_mu: bracket collapsed before reaching the tolerance");
}

}  // namespace ccsim
