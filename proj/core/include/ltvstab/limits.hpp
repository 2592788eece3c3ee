#pragma once

#include <string_view>

#include "ltvstab/spectrum.hpp"
#include "ltvstab/types.hpp"

namespace ltvstab {

/// Outcome of the closed-form stabilizability condition. For M < N the
/// condition is necessary only; for M = N (square invertible B) it is
/// necessary and sufficient and depends on the top multiplier alone.
struct LimitVerdict {
  double lhs = 0.0;
  bool satisfied = false;  // lhs < 1, strict
  double margin = 0.0;     // 1 - lhs
  std::string_view regime; // "necessary-only" or "necessary-and-sufficient"
  double mu = 0.0;
  double sigma2 = 0.0;
  Index m_inputs = 0;
  double positive_product = 0.0;    // product of multipliers above the zero threshold
  bool at_equality = false;         // |lhs - 1| <= 1e-12; reported as violated
  bool no_positive_exponents = false;
};

/// Evaluates sigma^2 (g - 1) / mu^2 < 1 where g is the squared top multiplier
/// for M = N and (product of positive multipliers)^(2/M) for M < N. Trivially
/// satisfied when the open loop has no positive exponents. Throws ConfigError
/// for mu == 0 or M outside [1, N].
LimitVerdict necessary_condition(const SpectrumResult& spec, double mu, double sigma2,
                                 Index m_inputs);

/// Critical uncertainty deviation sigma* = sqrt(mu^2 / (g - 1)); +infinity
/// when g <= 1 (no positive exponents). Throws ConfigError for mu == 0.
double critical_variance(const SpectrumResult& spec, double mu, Index m_inputs);

/// Bernoulli specialization (mu = p, sigma^2 = p(1-p)): the non-erasure
/// probability p* = 1 - 1/g below which stabilization is impossible; 0 when
/// the open loop is already stable.
double critical_erasure_probability(const SpectrumResult& spec, Index m_inputs);

}  // namespace ltvstab
