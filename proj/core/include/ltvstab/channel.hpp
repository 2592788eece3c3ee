#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace ltvstab {

namespace rng {

/// Counter-based keyed draw: a pure function of (seed, stream, counter).
/// Distinct streams are statistically independent; no state is carried, so
/// results do not depend on evaluation order or worker count.
std::uint64_t keyed_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform on the open interval (0, 1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Standard normal via inverse-CDF transform of uniform01.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

}  // namespace rng

/// Scalar multiplicative channel gamma(t): i.i.d. across t with exact
/// closed-form first and second moments. Analysis code consumes only
/// (mean, variance); simulation draws from the concrete law.
class ChannelModel {
 public:
  enum class Kind { kDeterministic, kBernoulli, kGaussian, kUniform, kTwoPoint };

  static ChannelModel deterministic(double value);
  static ChannelModel bernoulli(double p);
  static ChannelModel gaussian(double mean, double variance);
  static ChannelModel uniform(double lo, double hi);
  /// Takes value v1 with probability q, v2 with probability 1-q.
  static ChannelModel two_point(double v1, double v2, double q);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  /// Distribution parameters in declaration order (p | mean,var | lo,hi | v1,v2,q).
  const std::array<double, 3>& params() const { return params_; }

  /// gamma(t) for realization index `realization` under `seed`; a pure
  /// function of (seed, realization, t).
  double sample(std::uint64_t seed, std::uint64_t realization, std::uint64_t t) const;

 private:
  ChannelModel(Kind kind, std::array<double, 3> params, double mean, double variance)
      : kind_(kind), params_(params), mean_(mean), variance_(variance) {}

  Kind kind_;
  std::array<double, 3> params_;
  double mean_;
  double variance_;
};

/// Exact (mean, variance) of gamma.
std::pair<double, double> moments(const ChannelModel& ch);

/// A channel bound to one (seed, realization) pair; at(t) is deterministic.
class ChannelStream {
 public:
  ChannelStream(ChannelModel ch, std::uint64_t seed, std::uint64_t realization)
      : ch_(ch), seed_(seed), realization_(realization) {}
  double at(std::uint64_t t) const { return ch_.sample(seed_, realization_, t); }

 private:
  ChannelModel ch_;
  std::uint64_t seed_;
  std::uint64_t realization_;
};

inline ChannelStream sample_stream(const ChannelModel& ch, std::uint64_t seed,
                                   std::uint64_t realization) {
  return ChannelStream(ch, seed, realization);
}

}  // namespace ltvstab
