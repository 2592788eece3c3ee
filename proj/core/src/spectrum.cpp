#include "ltvstab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

constexpr double kUnderflowFloor = 1e-300;

double safe_exp(double x) { return std::exp(x); }  // exp(-inf) == 0

}  // namespace

Index default_spectrum_horizon(const SystemModel& sys) {
  constexpr Index kAperiodic = 10000;
  if (auto p = sys.period()) {
    const Index periods = std::max<Index>(300, (kAperiodic + *p - 1) / *p);
    return periods * *p;
  }
  if (auto h = sys.horizon()) return std::min<Index>(*h, kAperiodic);
  return kAperiodic;
}

SpectrumResult lyapunov_spectrum(const SystemModel& sys, Index horizon, double tol) {
  const Index n = sys.state_dim();
  if (horizon < n) {
    throw ConfigError("spectrum horizon " + std::to_string(horizon) +
                      " is below the state dimension " + std::to_string(n));
  }

  Matrix frame = Matrix::Identity(n, n);
  Vector accumulated = Vector::Zero(n);
  Vector snapshot = Vector::Zero(n);
  const Index snapshot_at = std::max<Index>(1, (horizon * 9) / 10);
  bool singular = false;

  for (Index t = 0; t < horizon; ++t) {
    const Matrix z = sys.A(t) * frame;
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
      const double d = r(i, i);
      if (d < 0) q.col(i) = -q.col(i);
      const double mag = std::abs(d);
      if (mag < kUnderflowFloor) {
        singular = true;
        accumulated(i) = -std::numeric_limits<double>::infinity();
      } else {
        accumulated(i) += std::log(mag);
      }
    }
    frame = q;
    if (t + 1 == snapshot_at) snapshot = accumulated / static_cast<double>(snapshot_at);
  }

  struct Entry {
    double exponent;
    double change;
  };
  std::vector<Entry> entries(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double exponent = accumulated(i) / static_cast<double>(horizon);
    double change = 0.0;
    if (std::isinf(exponent) && std::isinf(snapshot(i))) {
      change = 0.0;
    } else {
      change = std::abs(exponent - snapshot(i)) / std::max(1.0, std::abs(exponent));
    }
    entries[static_cast<std::size_t>(i)] = {exponent, change};
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.exponent > b.exponent; });

  SpectrumResult result;
  result.horizon = horizon;
  result.singular = singular;
  result.converged = true;
  for (const Entry& e : entries) {
    result.exponents.push_back(e.exponent);
    result.multipliers.push_back(safe_exp(e.exponent));
    result.convergence.push_back(e.change);
    if (e.exponent > kZeroExponentThreshold) ++result.n_positive;
    if (std::abs(e.exponent) <= kZeroExponentThreshold) result.zero_tie = true;
    if (!(e.change <= tol)) result.converged = false;
  }
  result.n_nonpositive = n - result.n_positive;
  return result;
}

SpectrumResult spectrum_from_exponents(std::vector<double> exponents) {
  std::sort(exponents.begin(), exponents.end(), std::greater<>());
  SpectrumResult result;
  result.converged = true;
  result.horizon = 0;
  for (double e : exponents) {
    result.exponents.push_back(e);
    result.multipliers.push_back(safe_exp(e));
    result.convergence.push_back(0.0);
    if (e > kZeroExponentThreshold) ++result.n_positive;
    if (std::abs(e) <= kZeroExponentThreshold) result.zero_tie = true;
    if (std::isinf(e) && e < 0) result.singular = true;
  }
  result.n_nonpositive = static_cast<Index>(exponents.size()) - result.n_positive;
  return result;
}

double positive_exponent_product(const SpectrumResult& spec) {
  double sum = 0.0;
  for (double e : spec.exponents) {
    if (e > kZeroExponentThreshold) sum += e;
  }
  return std::exp(sum);
}

std::vector<double> monodromy_spectrum(const SystemModel& sys) {
  const auto p = sys.period();
  if (!p) throw ConfigError("monodromy spectrum requires a periodic system");
  const Matrix m = transition_matrix(sys, 0, *p);
  Eigen::EigenSolver<Matrix> eig(m);
  std::vector<double> exponents;
  exponents.reserve(static_cast<std::size_t>(sys.state_dim()));
  for (Index i = 0; i < sys.state_dim(); ++i) {
    const double mag = std::abs(eig.eigenvalues()(i));
    exponents.push_back(mag < kUnderflowFloor ? -std::numeric_limits<double>::infinity()
                                              : std::log(mag) / static_cast<double>(*p));
  }
  std::sort(exponents.begin(), exponents.end(), std::greater<>());
  return exponents;
}

}  // namespace ltvstab
