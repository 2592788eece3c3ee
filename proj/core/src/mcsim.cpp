#include "ltvstab/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

// Seed salt separating the additive-noise stream space from the channel's.
constexpr std::uint64_t kNoiseDomain = 0x6C74767374616221ull;

// Realizations are processed in fixed-size blocks; block partial sums are
// reduced in block order, so the result is independent of the worker count.
constexpr Index kBlock = 64;

struct BlockResult {
  std::vector<double> msq_sum;
  std::vector<std::pair<Index, Index>> truncations;  // (realization, first overflow t)
};

}  // namespace

EnsembleStats simulate_ensemble(const SystemModel& sys, const GainSchedule& gains,
                                const ChannelModel& ch, const Vector& x0, Index T, Index n,
                                std::uint64_t seed, const SimulateOptions& opts) {
  const Index dim = sys.state_dim();
  if (x0.size() != dim) throw ConfigError("x0 dimension mismatch");
  if (T < 0) throw ConfigError("horizon must be nonnegative");
  if (n < 1) throw ConfigError("need at least one realization");
  if (gains.horizon() < T) {
    throw ConfigError("gain schedule covers " + std::to_string(gains.horizon()) +
                      " steps, simulation needs " + std::to_string(T));
  }
  if (opts.workers < 1) throw ConfigError("worker count must be positive");

  // Materialize A(t) and B(t)K(t) once; keeps the hot loop allocation-free
  // and avoids generator-cache contention across workers.
  std::vector<Matrix> a_seq(static_cast<std::size_t>(T));
  std::vector<Matrix> bk_seq(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    a_seq[static_cast<std::size_t>(t)] = sys.A(t);
    bk_seq[static_cast<std::size_t>(t)] = sys.B(t) * gains.K[static_cast<std::size_t>(t)];
  }

  const Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockResult> results(static_cast<std::size_t>(blocks));
  std::vector<double> terminal(static_cast<std::size_t>(n), 0.0);
  const bool noise_on = opts.noise_variance > 0.0;
  const double noise_sd = noise_on ? std::sqrt(opts.noise_variance) : 0.0;

  auto run_block = [&](Index block) {
    BlockResult& result = results[static_cast<std::size_t>(block)];
    result.msq_sum.assign(static_cast<std::size_t>(T) + 1, 0.0);
    const Index r_begin = block * kBlock;
    const Index r_end = std::min(n, r_begin + kBlock);
    Vector x(dim);
    Vector next(dim);
    for (Index r = r_begin; r < r_end; ++r) {
      const auto stream = sample_stream(ch, seed, static_cast<std::uint64_t>(r));
      x = x0;
      double sq = x.squaredNorm();
      result.msq_sum[0] += sq;
      bool truncated = false;
      for (Index t = 0; t < T; ++t) {
        if (!truncated) {
          const double gamma = stream.at(static_cast<std::uint64_t>(t));
          next.noalias() = a_seq[static_cast<std::size_t>(t)] * x;
          next.noalias() += gamma * (bk_seq[static_cast<std::size_t>(t)] * x);
          if (noise_on) {
            for (Index i = 0; i < dim; ++i) {
              next(i) += noise_sd * rng::standard_normal(
                                        seed ^ kNoiseDomain, static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(dim) +
                                            static_cast<std::uint64_t>(i));
            }
          }
          x.swap(next);
          sq = x.squaredNorm();
          if (!(sq <= opts.overflow_guard)) {
            truncated = true;
            result.truncations.emplace_back(r, t + 1);
          }
        }
        result.msq_sum[static_cast<std::size_t>(t) + 1] += sq;
      }
      terminal[static_cast<std::size_t>(r)] = sq;
    }
  };

  if (opts.workers == 1 || blocks == 1) {
    for (Index block = 0; block < blocks; ++block) run_block(block);
  } else {
    std::atomic<Index> next_block{0};
    auto worker = [&] {
      while (true) {
        const Index block = next_block.fetch_add(1);
        if (block >= blocks) break;
        run_block(block);
      }
    };
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<Index>(opts.workers, blocks));
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EnsembleStats stats;
  stats.horizon = T;
  stats.realizations = n;
  stats.seed = seed;
  stats.noise_variance = opts.noise_variance;
  stats.x0_sq_norm = x0.squaredNorm();
  stats.msq.assign(static_cast<std::size_t>(T) + 1, 0.0);
  stats.flagged_by_t.assign(static_cast<std::size_t>(T) + 1, 0);
  for (Index block = 0; block < blocks; ++block) {
    const BlockResult& result = results[static_cast<std::size_t>(block)];
    for (Index t = 0; t <= T; ++t) {
      stats.msq[static_cast<std::size_t>(t)] += result.msq_sum[static_cast<std::size_t>(t)];
    }
    for (const auto& [r, t_over] : result.truncations) {
      ++stats.flagged;
      for (Index t = t_over; t <= T; ++t) ++stats.flagged_by_t[static_cast<std::size_t>(t)];
    }
  }
  for (double& v : stats.msq) v /= static_cast<double>(n);
  stats.terminal_sq_norms = std::move(terminal);
  return stats;
}

std::vector<double> analytic_ms_recursion(const SystemModel& sys, const GainSchedule& gains,
                                          double mu, double sigma2, const Vector& x0, Index T,
                                          double noise_variance) {
  const Index dim = sys.state_dim();
  if (x0.size() != dim) throw ConfigError("x0 dimension mismatch");
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  if (noise_variance < 0.0) throw ConfigError("noise variance must be nonnegative");
  if (gains.horizon() < T) {
    throw ConfigError("gain schedule covers " + std::to_string(gains.horizon()) +
                      " steps, recursion needs " + std::to_string(T));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T) + 1);
  Matrix second_moment = x0 * x0.transpose();
  out.push_back(second_moment.trace());
  for (Index t = 0; t < T; ++t) {
    const Matrix bk = sys.B(t) * gains.K[static_cast<std::size_t>(t)];
    const Matrix mean_loop = sys.A(t) + mu * bk;
    second_moment = mean_loop * second_moment * mean_loop.transpose() +
                    sigma2 * bk * second_moment * bk.transpose();
    if (noise_variance > 0.0) second_moment.diagonal().array() += noise_variance;
    second_moment = 0.5 * (second_moment + second_moment.transpose());
    out.push_back(second_moment.trace());
  }
  return out;
}

RateEstimate estimate_ms_rate(const std::vector<double>& msq, double x0_sq_norm, double burn_in,
                              double stability_tol) {
  if (burn_in < 0.0 || burn_in >= 1.0) throw ConfigError("burn-in fraction outside [0, 1)");
  if (x0_sq_norm <= 0.0) throw ConfigError("rate estimate needs a nonzero initial state");
  const Index size = static_cast<Index>(msq.size());
  const Index begin = static_cast<Index>(std::ceil(burn_in * static_cast<double>(size - 1)));
  const Index count = size - begin;
  if (count < 10) {
    throw ConfigError("rate fit needs at least 10 points after burn-in, has " +
                      std::to_string(count));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Index t = begin; t < size; ++t) {
    const double v = msq[static_cast<std::size_t>(t)];
    if (!(v > 0.0)) {
      throw NumericalError("nonpositive mean-square value in the fit window at t = " +
                           std::to_string(t) + "; rerun with noise off for rate estimation");
    }
    const double x = static_cast<double>(t);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(count);
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;

  double ss = 0.0;
  for (Index t = begin; t < size; ++t) {
    const double resid =
        std::log(msq[static_cast<std::size_t>(t)]) - (intercept + slope * static_cast<double>(t));
    ss += resid * resid;
  }

  RateEstimate estimate;
  estimate.rate = std::exp(slope);
  estimate.gain = std::exp(intercept) / x0_sq_norm;
  estimate.fit_begin = begin;
  estimate.fit_end = size - 1;
  estimate.residual = std::sqrt(ss / m);
  estimate.stable = estimate.rate < 1.0 - stability_tol;
  return estimate;
}

RateEstimate estimate_ms_rate(const EnsembleStats& stats, double burn_in, double stability_tol) {
  return estimate_ms_rate(stats.msq, stats.x0_sq_norm, burn_in, stability_tol);
}

}  // namespace ltvstab
