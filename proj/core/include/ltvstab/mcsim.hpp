#pragma once

#include <cstdint>
#include <vector>

#include "ltvstab/channel.hpp"
#include "ltvstab/riccati.hpp"
#include "ltvstab/system_model.hpp"
#include "ltvstab/types.hpp"

namespace ltvstab {

struct EnsembleStats {
  Index horizon = 0;
  Index realizations = 0;
  std::vector<double> msq;               // size T+1, ensemble mean of ||x(t)||^2
  std::vector<double> terminal_sq_norms; // per realization, ||x(T)||^2
  std::vector<Index> flagged_by_t;       // size T+1, cumulative overflow-truncated count
  Index flagged = 0;                     // total truncated realizations
  std::uint64_t seed = 0;
  double noise_variance = 0.0;
  double x0_sq_norm = 0.0;
};

struct SimulateOptions {
  double noise_variance = 0.0;  // additive zero-mean Gaussian state noise, 0 = off
  int workers = 1;              // results are bit-identical for any worker count
  double overflow_guard = 1e30; // ||x||^2 above this truncates the realization
};

/// Runs n independent realizations of
///   x(t+1) = (A(t) + gamma(t) B(t) K(t)) x(t) + w(t),
/// gamma drawn from the channel stream (seed, realization), w optional
/// Gaussian noise. msq is accumulated in realization-index order in fixed-size
/// blocks, so the result does not depend on scheduling. A realization whose
/// squared norm exceeds the overflow guard is frozen at its last value and
/// flagged. Requires gains covering [0, T).
EnsembleStats simulate_ensemble(const SystemModel& sys, const GainSchedule& gains,
                                const ChannelModel& ch, const Vector& x0, Index T, Index n,
                                std::uint64_t seed, const SimulateOptions& opts = {});

/// Exact second-moment sequence E||x(t)||^2 for t = 0..T via the moment map
///   S(t+1) = (A + mu B K) S (A + mu B K)' + sigma^2 (B K) S (B K)',
/// returning trace(S(t)). This is the distribution-free oracle for
/// mean-square behavior; only (mu, sigma^2) of the channel enter. A nonzero
/// `noise_variance` adds the exact contribution of i.i.d. additive state
/// noise (+ noise_variance * I per step).
std::vector<double> analytic_ms_recursion(const SystemModel& sys, const GainSchedule& gains,
                                          double mu, double sigma2, const Vector& x0, Index T,
                                          double noise_variance = 0.0);

struct RateEstimate {
  double gain = 0.0;      // fitted prefactor K
  double rate = 0.0;      // fitted base beta; mean-square stable iff < 1
  Index fit_begin = 0;
  Index fit_end = 0;      // inclusive
  double residual = 0.0;  // rms residual of the log-linear fit
  bool stable = false;    // rate < 1 - stability_tol
};

/// Least-squares line fit of log msq[t] vs t over the post-burn-in window.
/// rate = exp(slope); gain = exp(intercept) / ||x(0)||^2. Requires at least
/// 10 usable points and strictly positive msq on the window.
RateEstimate estimate_ms_rate(const std::vector<double>& msq, double x0_sq_norm,
                              double burn_in = 0.2, double stability_tol = 0.0);
RateEstimate estimate_ms_rate(const EnsembleStats& stats, double burn_in = 0.2,
                              double stability_tol = 0.0);

}  // namespace ltvstab
