#pragma once

#include <vector>

#include "ltvstab/system_model.hpp"
#include "ltvstab/types.hpp"

namespace ltvstab {

/// Exponents with |value| at or below this threshold are flagged as ties
/// rather than silently classified as positive or negative.
inline constexpr double kZeroExponentThreshold = 1e-9;

struct SpectrumResult {
  std::vector<double> exponents;    // per-step log scale, nonincreasing
  std::vector<double> multipliers;  // exp(exponent)
  Index n_positive = 0;             // count above the zero threshold (N1)
  Index n_nonpositive = 0;          // N - N1
  Index horizon = 0;
  std::vector<double> convergence;  // per-exponent change over the last diagnostic window
  bool converged = false;
  bool singular = false;            // hit an underflowing QR diagonal; -inf sentinel present
  bool zero_tie = false;            // some exponent within the zero threshold
};

/// 10 000 steps for aperiodic systems, an exact period multiple covering at
/// least 300 periods for periodic ones, the recorded length (capped at
/// 10 000) for finite sequences.
Index default_spectrum_horizon(const SystemModel& sys);

/// Lyapunov spectrum of x(t+1) = A(t) x(t) by propagating an orthonormal
/// frame with QR re-orthonormalization every step and accumulating the logs
/// of the R-diagonal magnitudes. The convergence diagnostic compares the
/// estimates at the full horizon against those at 0.9 * horizon; `converged`
/// is false when any exponent moved by more than `tol` (relative to
/// max(1, |exponent|)). A singular step yields a -infinity sentinel exponent
/// and sets `singular` instead of throwing.
SpectrumResult lyapunov_spectrum(const SystemModel& sys, Index horizon, double tol = 1e-3);

/// Wraps externally known exponents (e.g. from the monodromy oracle) in a
/// SpectrumResult so threshold evaluations can consume them.
SpectrumResult spectrum_from_exponents(std::vector<double> exponents);

/// exp(sum of exponents strictly above the zero threshold); 1 when none.
double positive_exponent_product(const SpectrumResult& spec);

/// Independent oracle for periodic systems: (1/p) * log|eig| of the one-period
/// product A(p-1) ... A(0), sorted nonincreasing. Zero-magnitude eigenvalues
/// map to -infinity sentinels.
std::vector<double> monodromy_spectrum(const SystemModel& sys);

}  // namespace ltvstab
