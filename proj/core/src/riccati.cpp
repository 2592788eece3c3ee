#include "ltvstab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_spd(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + " must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ConfigError(std::string(what) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError(std::string(what) + " must be positive definite");
  }
}

// Solves G X = RHS for symmetric positive definite G; NumericalError otherwise.
Matrix solve_spd(const Matrix& g, const Matrix& rhs, Index t) {
  Eigen::LDLT<Matrix> ldlt(g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw NumericalError("singular or indefinite B'PB block at t = " + std::to_string(t));
  }
  return ldlt.solve(rhs);
}

void fill_bounds(RiccatiSchedule& schedule) {
  const Index T = schedule.horizon();
  const Index last = std::max<Index>(0, (T * 9) / 10);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index t = 0; t <= last; ++t) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(schedule.P[static_cast<std::size_t>(t)]);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
    hi = std::max(hi, eig.eigenvalues().maxCoeff());
  }
  schedule.alpha1 = lo;
  schedule.alpha2 = hi;
}

enum class RiccatiForm { kStandard, kChannelAware };

RiccatiSchedule run_backward(const SystemModel& sys, Index T, const Matrix& regularizer,
                             const Matrix& terminal, RiccatiForm form, double mu, double sigma2) {
  if (T < 1) throw ConfigError("riccati horizon must be at least 1");
  const Index n = sys.state_dim();
  const Index m = sys.input_dim();
  if (regularizer.rows() != n) throw ConfigError("regularizer dimension mismatch");
  if (terminal.rows() != n) throw ConfigError("terminal dimension mismatch");
  require_spd(regularizer, "regularizer R");
  require_spd(terminal, "terminal condition");

  RiccatiSchedule schedule;
  schedule.regularizer = regularizer;
  schedule.P.assign(static_cast<std::size_t>(T) + 1, Matrix());
  schedule.P[static_cast<std::size_t>(T)] = terminal;

  for (Index t = T - 1; t >= 0; --t) {
    const Matrix& next = schedule.P[static_cast<std::size_t>(t + 1)];
    const Matrix a = sys.A(t);
    const Matrix b = sys.B(t);
    const Matrix pa = next * a;
    const Matrix bpa = b.transpose() * pa;
    const Matrix bpb = symmetrized(b.transpose() * next * b);
    Matrix p;
    if (form == RiccatiForm::kStandard) {
      const Matrix gain_term = solve_spd(Matrix::Identity(m, m) + bpb, bpa, t);
      p = a.transpose() * pa - bpa.transpose() * gain_term + regularizer;
    } else {
      const Matrix gain_term = solve_spd((mu * mu + sigma2) * bpb, bpa, t);
      p = a.transpose() * pa - (mu * mu) * bpa.transpose() * gain_term + regularizer;
    }
    p = symmetrized(p);
    if (!p.allFinite()) {
      throw NumericalError("riccati recursion diverged (non-finite entries) at t = " +
                           std::to_string(t) + "; no bounded solution for these channel moments");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw NumericalError("riccati recursion lost positive definiteness at t = " +
                           std::to_string(t));
    }
    schedule.P[static_cast<std::size_t>(t)] = std::move(p);
  }
  fill_bounds(schedule);
  return schedule;
}

}  // namespace

RiccatiSchedule riccati_backward(const SystemModel& sys, Index T, const Matrix& regularizer,
                                 const Matrix& terminal) {
  return run_backward(sys, T, regularizer, terminal, RiccatiForm::kStandard, 0.0, 0.0);
}

RiccatiSchedule riccati_backward(const SystemModel& sys, Index T, double r_scale) {
  const Index n = sys.state_dim();
  return riccati_backward(sys, T, r_scale * Matrix::Identity(n, n), Matrix::Identity(n, n));
}

RiccatiSchedule ms_riccati_backward(const SystemModel& sys, Index T, double mu, double sigma2,
                                    const Matrix& regularizer, const Matrix& terminal) {
  if (mu == 0.0) throw ConfigError("channel-aware riccati requires a nonzero mean");
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  return run_backward(sys, T, regularizer, terminal, RiccatiForm::kChannelAware, mu, sigma2);
}

RiccatiSchedule ms_riccati_backward(const SystemModel& sys, Index T, double mu, double sigma2,
                                    double r_scale) {
  const Index n = sys.state_dim();
  return ms_riccati_backward(sys, T, mu, sigma2, r_scale * Matrix::Identity(n, n),
                             Matrix::Identity(n, n));
}

GainSchedule optimal_gain(const SystemModel& sys, const RiccatiSchedule& schedule, double mu,
                          double sigma2) {
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  const Index T = schedule.horizon();
  GainSchedule gains;
  gains.mu = mu;
  gains.sigma2 = sigma2;
  gains.K.reserve(static_cast<std::size_t>(T));
  const Index m = sys.input_dim();
  for (Index t = 0; t < T; ++t) {
    if (mu == 0.0) {
      gains.K.push_back(Matrix::Zero(m, sys.state_dim()));
      continue;
    }
    const Matrix& next = schedule.P[static_cast<std::size_t>(t + 1)];
    const Matrix b = sys.B(t);
    const Matrix bpb = 0.5 * (b.transpose() * next * b + (b.transpose() * next * b).transpose());
    const Matrix bpa = b.transpose() * next * sys.A(t);
    Eigen::LDLT<Matrix> ldlt(bpb);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().cwiseAbs().minCoeff() <=
            1e-14 * std::max(1.0, bpb.cwiseAbs().maxCoeff())) {
      throw NumericalError("gain synthesis failed: singular B'PB at t = " + std::to_string(t));
    }
    gains.K.push_back(-(mu / (mu * mu + sigma2)) * ldlt.solve(bpa));
  }
  return gains;
}

Matrix expected_quadratic(const SystemModel& sys, Index t, const Matrix& q_weight,
                          const Matrix& gain, double mu, double sigma2) {
  const Matrix a = sys.A(t);
  const Matrix bk = sys.B(t) * gain;
  const Matrix mean_loop = a + mu * bk;
  const Matrix value =
      mean_loop.transpose() * q_weight * mean_loop + sigma2 * bk.transpose() * q_weight * bk;
  return symmetrized(value);
}

CertificateReport check_mss_certificate(const SystemModel& sys, const RiccatiSchedule& schedule,
                                        const GainSchedule& gains, double mu, double sigma2) {
  const Index T = schedule.horizon();
  if (gains.horizon() < T) {
    throw ConfigError("gain schedule covers " + std::to_string(gains.horizon()) +
                      " steps, certificate needs " + std::to_string(T));
  }
  const double n = static_cast<double>(sys.state_dim());
  CertificateReport report;
  report.bounds_ok = true;
  report.pass = true;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < T; ++t) {
    const Matrix& p = schedule.P[static_cast<std::size_t>(t)];
    const Matrix& next = schedule.P[static_cast<std::size_t>(t + 1)];
    const Matrix expected =
        expected_quadratic(sys, t, next, gains.K[static_cast<std::size_t>(t)], mu, sigma2);
    Eigen::SelfAdjointEigenSolver<Matrix> diff_eig(symmetrized(p - expected));
    const double margin = diff_eig.eigenvalues().minCoeff();
    report.margins.push_back(margin);
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.worst_t = t;
    }
    const double tol = 1e-9 * p.trace() / n;
    if (margin <= tol) report.pass = false;
    Eigen::SelfAdjointEigenSolver<Matrix> p_eig(p);
    if (p_eig.eigenvalues().minCoeff() <= 0.0) report.bounds_ok = false;
  }
  report.pass = report.pass && report.bounds_ok;
  return report;
}

RiccatiSchedule build_certificate(const SystemModel& sys, const GainSchedule& gains, double mu,
                                  double sigma2, Index truncation) {
  if (truncation < 1) throw ConfigError("certificate truncation must be at least 1");
  const Index steps = std::min<Index>(truncation, gains.horizon());
  const Index n = sys.state_dim();
  constexpr double kOverflowGuard = 1e12;

  RiccatiSchedule schedule;
  schedule.P.assign(static_cast<std::size_t>(steps) + 1, Matrix());
  schedule.P[static_cast<std::size_t>(steps)] = Matrix::Zero(n, n);
  for (Index t = steps - 1; t >= 0; --t) {
    const Matrix& next = schedule.P[static_cast<std::size_t>(t + 1)];
    const Matrix weight = Matrix::Identity(n, n) + next;
    Matrix p = expected_quadratic(sys, t, weight, gains.K[static_cast<std::size_t>(t)], mu, sigma2);
    if (p.cwiseAbs().maxCoeff() > kOverflowGuard) {
      throw NumericalError(
          "certificate series diverged at t = " + std::to_string(t) +
          "; the closed loop is not mean-square stable at this truncation");
    }
    schedule.P[static_cast<std::size_t>(t)] = std::move(p);
  }
  const Index last = std::max<Index>(0, (steps * 9) / 10);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index t = 0; t <= last; ++t) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(schedule.P[static_cast<std::size_t>(t)]);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
    hi = std::max(hi, eig.eigenvalues().maxCoeff());
  }
  schedule.alpha1 = lo;
  schedule.alpha2 = hi;
  return schedule;
}

}  // namespace ltvstab
