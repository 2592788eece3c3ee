#include <doctest.h>

#include <cmath>

#include "ltvstab/builtins.hpp"
#include "ltvstab/channel.hpp"
#include "ltvstab/errors.hpp"
#include "ltvstab/mcsim.hpp"
#include "ltvstab/riccati.hpp"
#include "test_support.hpp"

using namespace ltvstab;
using testing::Rng;

namespace {

SystemModel scalar_system(double a, double b) {
  Matrix am(1, 1), bm(1, 1);
  am << a;
  bm << b;
  return SystemModel::periodic({am}, {bm});
}

GainSchedule constant_gain(const Matrix& k, Index T, double mu, double sigma2) {
  GainSchedule gains;
  gains.K.assign(static_cast<std::size_t>(T), k);
  gains.mu = mu;
  gains.sigma2 = sigma2;
  return gains;
}

Matrix scalar(double v) {
  Matrix m(1, 1);
  m << v;
  return m;
}

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("deadbeat gain with a deterministic channel zeroes the ensemble") {
  const auto sys = scalar_system(2.0, 1.0);
  const auto gains = constant_gain(scalar(-2.0), 20, 1.0, 0.0);
  const auto stats = simulate_ensemble(sys, gains, ChannelModel::deterministic(1.0), vec1(1.0), 20,
                                       16, 42);
  CHECK(stats.msq[0] == 1.0);
  for (Index t = 1; t <= 20; ++t) CHECK(stats.msq[static_cast<std::size_t>(t)] == 0.0);
}

TEST_CASE("analytic recursion closed forms") {
  SUBCASE("scalar one step") {
    const auto sys = scalar_system(2.0, 1.0);
    const auto gains = constant_gain(scalar(-2.0), 1, 1.0, 0.2);
    const auto oracle = analytic_ms_recursion(sys, gains, 1.0, 0.2, vec1(1.0), 1);
    CHECK(oracle[1] == doctest::Approx(0.8));
  }
  SUBCASE("square-input gain on diag(2,3) gives E||x(t)||^2 = 2^t") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 3.0;
    const auto sys = SystemModel::periodic({a}, {Matrix::Identity(2, 2)});
    GainSchedule gains;
    gains.mu = 1.0;
    gains.sigma2 = 1.0;
    gains.K.assign(12, -0.5 * a);
    Vector x0(2);
    x0 << 1.0, 0.0;
    const auto oracle = analytic_ms_recursion(sys, gains, 1.0, 1.0, x0, 12);
    for (Index t = 0; t <= 12; ++t) {
      CHECK(oracle[static_cast<std::size_t>(t)] ==
            doctest::Approx(std::pow(2.0, static_cast<double>(t))).epsilon(1e-12));
    }
  }
  SUBCASE("deadbeat is identically zero from t = 1") {
    const auto sys = scalar_system(2.0, 1.0);
    const auto gains = constant_gain(scalar(-2.0), 6, 1.0, 0.0);
    const auto oracle = analytic_ms_recursion(sys, gains, 1.0, 0.0, vec1(1.0), 6);
    for (Index t = 1; t <= 6; ++t) CHECK(oracle[static_cast<std::size_t>(t)] == 0.0);
  }
}

TEST_CASE("square-input closed form matches the transition-matrix expression") {
  Rng rng(890);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 2;
    const Matrix a = testing::random_matrix(rng, n, n, 1.2);
    const Matrix b = testing::random_invertible(rng, n);
    const auto sys = SystemModel::periodic({a}, {b});
    const double mu = testing::uniform(rng, 0.5, 1.5);
    const double s2 = testing::uniform(rng, 0.1, 1.0);
    GainSchedule gains;
    gains.mu = mu;
    gains.sigma2 = s2;
    gains.K.assign(25, (-mu / (mu * mu + s2)) * b.inverse() * a);
    const Vector x0 = testing::random_matrix(rng, n, 1).col(0);
    const auto oracle = analytic_ms_recursion(sys, gains, mu, s2, x0, 25);
    const double c = s2 / (s2 + mu * mu);
    for (Index t = 0; t <= 25; ++t) {
      const double direct = std::pow(c, static_cast<double>(t)) *
                            (transition_matrix(sys, 0, t) * x0).squaredNorm();
      const double got = oracle[static_cast<std::size_t>(t)];
      CHECK(got == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("ensemble matches the exact recursion on the bernoulli scalar example") {
  const auto sys = scalar_system(2.0, 1.0);
  const double p = 0.75;
  const Index T = 30;
  const auto gains = constant_gain(scalar(-2.0), T, p, p * (1 - p));
  const auto channel = ChannelModel::bernoulli(p);
  const auto stats = simulate_ensemble(sys, gains, channel, vec1(1.0), T, 10000, 42);
  const auto oracle = analytic_ms_recursion(sys, gains, p, p * (1 - p), vec1(1.0), T);
  // direct expansion: (2 - 2p)^2 + p(1-p) * 4 = 1 for p = 0.75, so the exact
  // mean square is 1 at every t
  CHECK(oracle[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle[10] == doctest::Approx(1.0).epsilon(1e-12));
  // the erasure ensemble is heavy-tailed (value 4^t on an all-zero gamma run,
  // zero otherwise), so only the first couple of steps are measurable at this
  // ensemble size; later entries are dominated by paths no finite sample sees
  for (Index t = 1; t <= 2; ++t) {
    const double rel = stats.msq[static_cast<std::size_t>(t)] / oracle[static_cast<std::size_t>(t)];
    CHECK(rel == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("rate estimation") {
  SUBCASE("exact log-linear data") {
    std::vector<double> msq;
    for (Index t = 0; t <= 40; ++t) msq.push_back(5.0 * std::pow(0.8, static_cast<double>(t)));
    const auto est = estimate_ms_rate(msq, 1.0, 0.2);
    CHECK(est.rate == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(est.gain == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(est.residual <= 1e-10);
    CHECK(est.stable);
  }
  SUBCASE("simulated loop with E[A_cl^2] = 0.75 fits beta within 0.05") {
    // gain solving E[(1 + gamma k)^2] = 0.75 for the two-point channel below;
    // the fluctuation is mild, so the ensemble mean is measurable at every t
    const auto sys = scalar_system(1.0, 1.0);
    const auto channel = ChannelModel::two_point(0.9, 1.1, 0.5);
    const auto [mu, s2] = moments(channel);
    const double e2 = mu * mu + s2;
    const double k = (-2.0 * mu + std::sqrt(4.0 * mu * mu - 4.0 * e2 * 0.25)) / (2.0 * e2);
    const Index T = 40;
    const auto gains = constant_gain(scalar(k), T, mu, s2);
    CHECK(expected_quadratic(sys, 0, scalar(1.0), scalar(k), mu, s2)(0, 0) ==
          doctest::Approx(0.75).epsilon(1e-12));
    const auto stats =
        simulate_ensemble(sys, gains, channel, vec1(1.0), T, 10000, 7);
    const auto est = estimate_ms_rate(stats);
    CHECK(est.rate == doctest::Approx(0.75).epsilon(0.05 / 0.75));
    CHECK(est.stable);
    // the exact recursion fits the same rate to machine precision
    const auto oracle = analytic_ms_recursion(sys, gains, mu, s2, vec1(1.0), T);
    CHECK(estimate_ms_rate(oracle, 1.0).rate == doctest::Approx(0.75).epsilon(1e-10));
  }
  SUBCASE("growing ensemble is reported unstable") {
    std::vector<double> msq;
    for (Index t = 0; t <= 30; ++t) msq.push_back(std::pow(1.2, static_cast<double>(t)));
    const auto est = estimate_ms_rate(msq, 1.0);
    CHECK(est.rate == doctest::Approx(1.2).epsilon(1e-10));
    CHECK_FALSE(est.stable);
  }
  SUBCASE("nonpositive window values are a fit error") {
    std::vector<double> msq(30, 0.0);
    msq[0] = 1.0;
    CHECK_THROWS_AS(estimate_ms_rate(msq, 1.0), NumericalError);
  }
  SUBCASE("too few points is a config error") {
    std::vector<double> msq(5, 1.0);
    CHECK_THROWS_AS(estimate_ms_rate(msq, 1.0), ConfigError);
  }
}

TEST_CASE("rate of a constant loop equals the moment-map spectral radius") {
  Rng rng(891);
  for (int trial = 0; trial < 6; ++trial) {
    // real, well-separated closed-loop spectra keep the fit bias negligible
    const Matrix acl = testing::with_real_spectrum(
        rng, {testing::uniform(rng, 0.7, 0.95), testing::uniform(rng, 0.2, 0.5)});
    const Matrix bk = 0.2 * testing::random_matrix(rng, 2, 2);
    const double s2 = 0.04;
    const auto sys = SystemModel::periodic({acl}, {Matrix::Identity(2, 2)});
    GainSchedule gains;  // A(t) already holds the mean loop; gain supplies the noise part
    gains.mu = 0.0;
    gains.sigma2 = s2;
    const Index T = 700;
    gains.K.assign(static_cast<std::size_t>(T), bk);

    const double radius = testing::moment_map_radius(acl, bk, s2);
    Vector x0(2);
    x0 << 1.0, 0.8;
    const auto oracle = analytic_ms_recursion(sys, gains, 0.0, s2, x0, T);
    // mu = 0 makes the mean loop A alone; variance term still enters via K
    const auto est = estimate_ms_rate(oracle, x0.squaredNorm(), 0.6);
    CHECK(est.rate == doctest::Approx(radius).epsilon(1e-6));
  }
}

TEST_CASE("seed determinism across worker counts") {
  const auto sys = builtin_system("example1");
  const Index T = 120;
  const double p = 0.2;
  const auto schedule = ms_riccati_backward(sys, T, p, p * (1 - p));
  const auto gains = optimal_gain(sys, schedule, p, p * (1 - p));
  const Vector x0 = Vector::Ones(2);
  SimulateOptions one;
  one.workers = 1;
  one.noise_variance = 1.0;
  SimulateOptions four;
  four.workers = 4;
  four.noise_variance = 1.0;
  const auto a = simulate_ensemble(sys, gains, ChannelModel::bernoulli(p), x0, T, 1000, 42, one);
  const auto b = simulate_ensemble(sys, gains, ChannelModel::bernoulli(p), x0, T, 1000, 42, four);
  for (Index t = 0; t <= T; ++t) {
    CHECK(a.msq[static_cast<std::size_t>(t)] == b.msq[static_cast<std::size_t>(t)]);
  }
  CHECK(a.terminal_sq_norms == b.terminal_sq_norms);

  const auto c = simulate_ensemble(sys, gains, ChannelModel::bernoulli(p), x0, T, 1000, 43, one);
  CHECK(a.msq[10] != c.msq[10]);
}

TEST_CASE("overflow guard truncates and flags") {
  const auto sys = scalar_system(4.0, 1.0);  // msq grows by 16x per step open loop
  const Index T = 60;
  const auto gains = constant_gain(scalar(0.0), T, 1.0, 0.0);
  const auto stats = simulate_ensemble(sys, gains, ChannelModel::deterministic(1.0), vec1(1.0), T,
                                       8, 42);
  CHECK(stats.flagged == 8);
  CHECK(stats.flagged_by_t[0] == 0);
  CHECK(stats.flagged_by_t[static_cast<std::size_t>(T)] == 8);
  for (double v : stats.msq) CHECK(std::isfinite(v));
  // frozen at the first overflowing value
  CHECK(stats.msq[static_cast<std::size_t>(T)] ==
        doctest::Approx(stats.msq[static_cast<std::size_t>(T) - 1]));
}

TEST_CASE("ensemble input validation") {
  const auto sys = scalar_system(1.0, 1.0);
  const auto gains = constant_gain(scalar(0.0), 5, 1.0, 0.0);
  const auto ch = ChannelModel::deterministic(1.0);
  CHECK_THROWS_AS(simulate_ensemble(sys, gains, ch, Vector::Ones(2), 5, 4, 1), ConfigError);
  CHECK_THROWS_AS(simulate_ensemble(sys, gains, ch, vec1(1.0), 9, 4, 1), ConfigError);
  CHECK_THROWS_AS(simulate_ensemble(sys, gains, ch, vec1(1.0), 5, 0, 1), ConfigError);
}

TEST_CASE("noise keeps the first sample exact") {
  const auto sys = scalar_system(0.5, 1.0);
  const Index T = 50;
  const auto gains = constant_gain(scalar(0.0), T, 1.0, 0.0);
  SimulateOptions opts;
  opts.noise_variance = 1.0;
  const auto stats = simulate_ensemble(sys, gains, ChannelModel::deterministic(1.0), vec1(3.0), T,
                                       2000, 11, opts);
  CHECK(stats.msq[0] == 9.0);
  // stationary mean-square of x(t+1) = 0.5 x + w is 1/(1-0.25)
  const auto oracle =
      analytic_ms_recursion(sys, gains, 1.0, 0.0, vec1(3.0), T, opts.noise_variance);
  CHECK(oracle[static_cast<std::size_t>(T)] == doctest::Approx(1.0 / 0.75).epsilon(1e-3));
  CHECK(stats.msq[static_cast<std::size_t>(T)] ==
        doctest::Approx(oracle[static_cast<std::size_t>(T)]).epsilon(0.15));
}
