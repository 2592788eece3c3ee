#include "ltvstab/limits.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

constexpr double kEqualityTol = 1e-12;

// Growth factor g entering sigma^2 (g - 1) / mu^2: the squared top multiplier
// in the square-input regime, the 2/M power of the positive-multiplier product
// otherwise.
double growth_factor(const SpectrumResult& spec, Index m_inputs) {
  const Index n = static_cast<Index>(spec.exponents.size());
  if (m_inputs == n) {
    const double top = spec.multipliers.empty() ? 1.0 : spec.multipliers.front();
    return top * top;
  }
  const double product = positive_exponent_product(spec);
  return std::pow(product, 2.0 / static_cast<double>(m_inputs));
}

void check_inputs(const SpectrumResult& spec, Index m_inputs) {
  const Index n = static_cast<Index>(spec.exponents.size());
  if (n == 0) throw ConfigError("empty spectrum");
  if (m_inputs < 1 || m_inputs > n) {
    throw ConfigError("input count " + std::to_string(m_inputs) + " is outside [1, " +
                      std::to_string(n) + "]");
  }
}

}  // namespace

LimitVerdict necessary_condition(const SpectrumResult& spec, double mu, double sigma2,
                                 Index m_inputs) {
  check_inputs(spec, m_inputs);
  if (mu == 0.0) throw ConfigError("threshold undefined for mu = 0");
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");

  const Index n = static_cast<Index>(spec.exponents.size());
  LimitVerdict verdict;
  verdict.mu = mu;
  verdict.sigma2 = sigma2;
  verdict.m_inputs = m_inputs;
  verdict.regime = (m_inputs == n) ? "necessary-and-sufficient" : "necessary-only";
  verdict.positive_product = positive_exponent_product(spec);
  verdict.no_positive_exponents = (spec.n_positive == 0);
  verdict.lhs = sigma2 * (growth_factor(spec, m_inputs) - 1.0) / (mu * mu);
  verdict.margin = 1.0 - verdict.lhs;
  verdict.at_equality = std::abs(verdict.lhs - 1.0) <= kEqualityTol;
  // The condition is strict, so exact equality counts as violated.
  verdict.satisfied = verdict.lhs < 1.0 && !verdict.at_equality;
  return verdict;
}

double critical_variance(const SpectrumResult& spec, double mu, Index m_inputs) {
  check_inputs(spec, m_inputs);
  if (mu == 0.0) throw ConfigError("threshold undefined for mu = 0");
  const double g = growth_factor(spec, m_inputs);
  if (g <= 1.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(mu * mu / (g - 1.0));
}

double critical_erasure_probability(const SpectrumResult& spec, Index m_inputs) {
  check_inputs(spec, m_inputs);
  const double g = growth_factor(spec, m_inputs);
  if (g <= 1.0) return 0.0;
  return 1.0 - 1.0 / g;
}

}  // namespace ltvstab
