#pragma once

#include <vector>

#include "ltvstab/system_model.hpp"
#include "ltvstab/types.hpp"

namespace ltvstab {

/// Backward Riccati solution P(0..T) with the observed eigenvalue bounds.
/// Bounds are estimated over t in [0, 0.9*T]; the 10% of the schedule nearest
/// the terminal condition is excluded since the recursion's interior is the
/// object of interest.
struct RiccatiSchedule {
  std::vector<Matrix> P;   // size T+1, P[T] is the terminal condition
  Matrix regularizer;      // constant R actually used (empty for callable R)
  double alpha1 = 0.0;     // smallest eigenvalue over the bound window
  double alpha2 = 0.0;     // largest eigenvalue over the bound window
  Index horizon() const { return static_cast<Index>(P.size()) - 1; }
};

struct GainSchedule {
  std::vector<Matrix> K;  // size T, K(t) is M x N
  double mu = 0.0;
  double sigma2 = 0.0;
  Index horizon() const { return static_cast<Index>(K.size()); }
};

/// Standard backward recursion
///   P(t) = A'PA - A'PB (I_M + B'PB)^-1 B'PA + R(t),  P(T) = terminal,
/// with every step symmetrized. Throws NumericalError naming the step if
/// positive definiteness is lost.
RiccatiSchedule riccati_backward(const SystemModel& sys, Index T, const Matrix& regularizer,
                                 const Matrix& terminal);
/// Same with R = r_scale * I and terminal = I.
RiccatiSchedule riccati_backward(const SystemModel& sys, Index T, double r_scale = 1.0);

/// Channel-aware variant used for gain synthesis:
///   P(t) = A'PA - mu^2 A'PB ((mu^2+sigma^2) B'PB)^-1 B'PA + R(t).
/// Its fixed point saturates the mean-square stabilizability bound, so the
/// gain it induces stabilizes whenever any linear gain does (up to the
/// regularizer margin).
RiccatiSchedule ms_riccati_backward(const SystemModel& sys, Index T, double mu, double sigma2,
                                    const Matrix& regularizer, const Matrix& terminal);
RiccatiSchedule ms_riccati_backward(const SystemModel& sys, Index T, double mu, double sigma2,
                                    double r_scale = 1e-6);

/// K(t) = -mu/(mu^2+sigma^2) (B'P(t+1)B)^-1 B'P(t+1)A(t). Zero gains when
/// mu == 0. Throws NumericalError at the first t where B'PB is singular.
GainSchedule optimal_gain(const SystemModel& sys, const RiccatiSchedule& schedule, double mu,
                          double sigma2);

/// E over the channel of A_cl' Q A_cl for A_cl = A + (mu+Delta) B K:
/// (A + mu B K)' Q (A + mu B K) + sigma^2 (B K)' Q (B K).
Matrix expected_quadratic(const SystemModel& sys, Index t, const Matrix& q_weight,
                          const Matrix& gain, double mu, double sigma2);

struct CertificateReport {
  std::vector<double> margins;  // per-t smallest eigenvalue of P(t) - E[A_cl' P(t+1) A_cl]
  double min_margin = 0.0;
  Index worst_t = 0;
  bool bounds_ok = false;  // every P(t) positive definite
  bool pass = false;
};

/// Verifies the stochastic Lyapunov decrease E[A_cl' P(t+1) A_cl] < P(t) at
/// every step, with a scale-relative margin tolerance 1e-9 * trace(P)/N.
CertificateReport check_mss_certificate(const SystemModel& sys, const RiccatiSchedule& schedule,
                                        const GainSchedule& gains, double mu, double sigma2);

/// Truncated series certificate for a closed loop believed stable: backward
/// moment recursion P(t) = E[A_cl'(t) (I + P(t+1)) A_cl(t)] from a zero
/// terminal over min(truncation, gains.horizon()) steps. Entries exceeding
/// 1e12 raise NumericalError (the loop is not mean-square stable at this
/// truncation).
RiccatiSchedule build_certificate(const SystemModel& sys, const GainSchedule& gains, double mu,
                                  double sigma2, Index truncation);

}  // namespace ltvstab
