#include "ltvstab/channel.hpp"

#include <cmath>
#include <string>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace rng {

namespace {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Inverse standard normal CDF (Acklam's rational approximation, relative
// error below 1.2e-9 over (0,1)).
double inverse_normal_cdf(double u) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  if (u < lo) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > 1.0 - lo) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::uint64_t keyed_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = splitmix(seed ^ 0x517CC1B727220A95ull);
  h = splitmix(h ^ stream);
  h = splitmix(h ^ counter);
  return splitmix(h);
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = keyed_draw(seed, stream, counter) >> 11;  // 53 bits
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return inverse_normal_cdf(uniform01(seed, stream, counter));
}

}  // namespace rng

ChannelModel ChannelModel::deterministic(double value) {
  return ChannelModel(Kind::kDeterministic, {value, 0, 0}, value, 0.0);
}

ChannelModel ChannelModel::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("bernoulli p = " + std::to_string(p) + " is outside [0, 1]");
  }
  return ChannelModel(Kind::kBernoulli, {p, 0, 0}, p, p * (1.0 - p));
}

ChannelModel ChannelModel::gaussian(double mean, double variance) {
  if (!(variance >= 0.0)) throw ConfigError("gaussian variance must be nonnegative");
  return ChannelModel(Kind::kGaussian, {mean, variance, 0}, mean, variance);
}

ChannelModel ChannelModel::uniform(double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("uniform bounds are not ordered");
  const double mean = 0.5 * (lo + hi);
  const double variance = (hi - lo) * (hi - lo) / 12.0;
  return ChannelModel(Kind::kUniform, {lo, hi, 0}, mean, variance);
}

ChannelModel ChannelModel::two_point(double v1, double v2, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("two-point q is outside [0, 1]");
  const double mean = q * v1 + (1.0 - q) * v2;
  const double variance = q * (1.0 - q) * (v1 - v2) * (v1 - v2);
  return ChannelModel(Kind::kTwoPoint, {v1, v2, q}, mean, variance);
}

double ChannelModel::sample(std::uint64_t seed, std::uint64_t realization, std::uint64_t t) const {
  switch (kind_) {
    case Kind::kDeterministic:
      return params_[0];
    case Kind::kBernoulli:
      return rng::uniform01(seed, realization, t) < params_[0] ? 1.0 : 0.0;
    case Kind::kGaussian:
      return params_[0] + std::sqrt(params_[1]) * rng::standard_normal(seed, realization, t);
    case Kind::kUniform:
      return params_[0] + (params_[1] - params_[0]) * rng::uniform01(seed, realization, t);
    case Kind::kTwoPoint:
      return rng::uniform01(seed, realization, t) < params_[2] ? params_[0] : params_[1];
  }
  return params_[0];
}

std::pair<double, double> moments(const ChannelModel& ch) {
  return {ch.mean(), ch.variance()};
}

}  // namespace ltvstab
