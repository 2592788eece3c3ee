#include "ltvstab/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

void check_finite(const Matrix& m, const char* what, Index step) {
  if (!m.allFinite()) {
    throw ConfigError(std::string(what) + " at step " + std::to_string(step) +
                      " contains non-finite entries");
  }
}

void check_dims(const Matrix& m, Index rows, Index cols, const char* what, Index step) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(std::string(what) + " at step " + std::to_string(step) + " is " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_partition(const std::optional<Partition>& partition, Index n) {
  if (!partition) return;
  if (partition->n_antistable < 0 || partition->n_stable < 0 ||
      partition->n_antistable + partition->n_stable != n) {
    throw ConfigError("partition [" + std::to_string(partition->n_antistable) + ", " +
                      std::to_string(partition->n_stable) + "] does not sum to the state dimension " +
                      std::to_string(n));
  }
}

// Least squares of log(values[l-1]) vs l; values <= 0 floor at a tiny positive.
ExponentialFit fit_exponential(const std::vector<double>& values) {
  const auto n = static_cast<Index>(values.size());
  if (n == 0) return {1.0, 1.0};
  if (n == 1) return {1.0, std::max(values[0], 1e-300)};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1);
    const double y = std::log(std::max(values[static_cast<std::size_t>(i)], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / static_cast<double>(n);
  return {std::exp(intercept), std::exp(slope)};
}

}  // namespace

struct SystemModel::GeneratorCache {
  std::mutex mutex;
  std::vector<std::optional<std::pair<Matrix, Matrix>>> slots;
};

SystemModel SystemModel::periodic(std::vector<Matrix> a_steps, std::vector<Matrix> b_steps,
                                  std::optional<Partition> partition) {
  if (a_steps.empty()) throw ConfigError("periodic system needs at least one A step");
  if (a_steps.size() != b_steps.size()) {
    throw ConfigError("periodic system has " + std::to_string(a_steps.size()) + " A steps but " +
                      std::to_string(b_steps.size()) + " B steps");
  }
  SystemModel sys;
  sys.source_ = Source::kPeriodic;
  sys.n_ = a_steps.front().rows();
  sys.m_ = b_steps.front().cols();
  if (sys.m_ > sys.n_) throw ConfigError("input dimension exceeds state dimension");
  for (std::size_t i = 0; i < a_steps.size(); ++i) {
    check_dims(a_steps[i], sys.n_, sys.n_, "A", static_cast<Index>(i));
    check_dims(b_steps[i], sys.n_, sys.m_, "B", static_cast<Index>(i));
    check_finite(a_steps[i], "A", static_cast<Index>(i));
    check_finite(b_steps[i], "B", static_cast<Index>(i));
  }
  check_partition(partition, sys.n_);
  sys.a_steps_ = std::move(a_steps);
  sys.b_steps_ = std::move(b_steps);
  sys.partition_ = partition;
  return sys;
}

SystemModel SystemModel::sequence(std::vector<Matrix> a_steps, std::vector<Matrix> b_steps,
                                  std::optional<Partition> partition) {
  SystemModel sys = periodic(std::move(a_steps), std::move(b_steps), partition);
  sys.source_ = Source::kSequence;
  return sys;
}

SystemModel SystemModel::generator(Index state_dim, Index input_dim,
                                   std::function<Matrix(Index)> a_of_t,
                                   std::function<Matrix(Index)> b_of_t,
                                   std::optional<Partition> partition) {
  if (state_dim < 1 || input_dim < 1) throw ConfigError("dimensions must be positive");
  if (input_dim > state_dim) throw ConfigError("input dimension exceeds state dimension");
  if (!a_of_t || !b_of_t) throw ConfigError("generator callables must be set");
  check_partition(partition, state_dim);
  SystemModel sys;
  sys.source_ = Source::kGenerator;
  sys.n_ = state_dim;
  sys.m_ = input_dim;
  sys.a_of_t_ = std::move(a_of_t);
  sys.b_of_t_ = std::move(b_of_t);
  sys.partition_ = partition;
  sys.cache_ = std::make_shared<GeneratorCache>();
  return sys;
}

std::optional<Index> SystemModel::period() const {
  if (source_ == Source::kPeriodic) return static_cast<Index>(a_steps_.size());
  return std::nullopt;
}

std::optional<Index> SystemModel::horizon() const {
  if (source_ == Source::kSequence) return static_cast<Index>(a_steps_.size());
  return std::nullopt;
}

void SystemModel::check_time(Index t) const {
  if (t < 0) throw ConfigError("time index " + std::to_string(t) + " is negative");
  if (source_ == Source::kSequence && t >= static_cast<Index>(a_steps_.size())) {
    throw ConfigError("time index " + std::to_string(t) + " is beyond the recorded horizon " +
                      std::to_string(a_steps_.size()));
  }
}

Matrix SystemModel::A(Index t) const {
  check_time(t);
  switch (source_) {
    case Source::kPeriodic:
      return a_steps_[static_cast<std::size_t>(t % static_cast<Index>(a_steps_.size()))];
    case Source::kSequence:
      return a_steps_[static_cast<std::size_t>(t)];
    case Source::kGenerator:
      break;
  }
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto& slots = cache_->slots;
  if (static_cast<std::size_t>(t) >= slots.size()) slots.resize(static_cast<std::size_t>(t) + 1);
  auto& slot = slots[static_cast<std::size_t>(t)];
  if (!slot) {
    Matrix a = a_of_t_(t);
    Matrix b = b_of_t_(t);
    check_dims(a, n_, n_, "generated A", t);
    check_dims(b, n_, m_, "generated B", t);
    check_finite(a, "generated A", t);
    check_finite(b, "generated B", t);
    slot = std::make_pair(std::move(a), std::move(b));
  }
  return slot->first;
}

Matrix SystemModel::B(Index t) const {
  check_time(t);
  switch (source_) {
    case Source::kPeriodic:
      return b_steps_[static_cast<std::size_t>(t % static_cast<Index>(b_steps_.size()))];
    case Source::kSequence:
      return b_steps_[static_cast<std::size_t>(t)];
    case Source::kGenerator:
      break;
  }
  A(t);  // fills the cache slot
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->slots[static_cast<std::size_t>(t)]->second;
}

Matrix transition_matrix(const SystemModel& sys, Index t0, Index t1) {
  if (t0 < 0 || t1 < t0) {
    throw ConfigError("transition window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                      ") is not ordered");
  }
  Matrix phi = Matrix::Identity(sys.state_dim(), sys.state_dim());
  for (Index t = t0; t < t1; ++t) phi = sys.A(t) * phi;
  return phi;
}

Matrix controllability_gramian(const SystemModel& sys, Index t0, Index k) {
  if (k < 1) throw ConfigError("gramian window length must be at least 1");
  const Index n = sys.state_dim();
  Matrix w = Matrix::Zero(n, n);
  // phi tracks Phi(t+1, t0+k), built from the far end of the window inward.
  Matrix phi = Matrix::Identity(n, n);
  for (Index t = t0 + k - 1; t >= t0; --t) {
    const Matrix b = sys.B(t);
    const Matrix pb = phi * b;
    w += pb * pb.transpose();
    if (t > t0) phi = phi * sys.A(t);
  }
  return 0.5 * (w + w.transpose());
}

double antistability_margin(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("antistability margin needs a square matrix");
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

double max_abs_entry(const SystemModel& sys, Index t0, Index t1) {
  double bound = 0.0;
  for (Index t = t0; t < t1; ++t) {
    bound = std::max(bound, sys.A(t).cwiseAbs().maxCoeff());
    bound = std::max(bound, sys.B(t).cwiseAbs().maxCoeff());
  }
  return bound;
}

ControllabilityReport check_uniform_controllability(const SystemModel& sys, Index k,
                                                    Index windows) {
  if (k < 1 || windows < 1) throw ConfigError("window length and count must be at least 1");
  const Index n = sys.state_dim();
  ControllabilityReport report;
  report.window_length = k;
  report.windows = windows;
  report.pass = true;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  report.alpha0 = std::numeric_limits<double>::infinity();
  report.beta0 = std::numeric_limits<double>::infinity();
  for (Index t0 = 0; t0 < windows; ++t0) {
    Matrix w = controllability_gramian(sys, t0, k);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    report.min_eigenvalue = std::min(report.min_eigenvalue, lo);
    const double tol = 1e-9 * std::max(1.0, w.trace() / static_cast<double>(n));
    if (lo <= tol) {
      report.pass = false;
      report.alpha1 = std::numeric_limits<double>::infinity();
      report.beta1 = std::numeric_limits<double>::infinity();
    } else {
      // Eigenvalues of W^-1 are reciprocals of those of W.
      report.alpha0 = std::min(report.alpha0, 1.0 / hi);
      report.alpha1 = std::max(report.alpha1, 1.0 / lo);
      const Matrix phi = transition_matrix(sys, t0, t0 + k);
      const Matrix m = phi.transpose() * w.llt().solve(phi);
      Eigen::SelfAdjointEigenSolver<Matrix> beig(0.5 * (m + m.transpose()));
      report.beta0 = std::min(report.beta0, beig.eigenvalues().minCoeff());
      report.beta1 = std::max(report.beta1, beig.eigenvalues().maxCoeff());
    }
    report.gramians.push_back(std::move(w));
  }
  return report;
}

namespace {

StabilityWindowReport block_window_report(const SystemModel& sys, Index offset, Index size,
                                          Index window) {
  StabilityWindowReport report;
  report.start = 0;
  report.max_length = window;
  if (size == 0) {
    report.norm_fit = {1.0, 0.0};
    report.margin_fit = {1.0, std::numeric_limits<double>::infinity()};
    return report;
  }
  Matrix prod = Matrix::Identity(size, size);
  for (Index l = 0; l < window; ++l) {
    prod = sys.A(l).block(offset, offset, size, size) * prod;
    report.norms.push_back(prod.norm() == 0.0 ? 0.0 : prod.operatorNorm());
    report.margins.push_back(antistability_margin(prod));
  }
  report.norm_fit = fit_exponential(report.norms);
  report.margin_fit = fit_exponential(report.margins);
  return report;
}

}  // namespace

DecompositionReport validate_decomposition(const SystemModel& sys, Index window) {
  if (!sys.partition()) throw ConfigError("system declares no antistable/stable partition");
  if (window < 1) throw ConfigError("validation window must be at least 1");
  const Partition part = *sys.partition();
  const Index n1 = part.n_antistable;
  const Index n2 = part.n_stable;

  DecompositionReport report;
  report.block_diagonal = true;
  for (Index t = 0; t < window; ++t) {
    const Matrix a = sys.A(t);
    report.max_entry = std::max(report.max_entry, a.cwiseAbs().maxCoeff());
    if (n1 > 0 && n2 > 0) {
      const double off = std::max(a.block(0, n1, n1, n2).cwiseAbs().maxCoeff(),
                                  a.block(n1, 0, n2, n1).cwiseAbs().maxCoeff());
      report.max_offdiagonal = std::max(report.max_offdiagonal, off);
    }
  }
  if (report.max_offdiagonal > 1e-12 * std::max(1.0, report.max_entry)) {
    report.block_diagonal = false;
  }

  report.antistable = block_window_report(sys, 0, n1, window);
  report.stable = block_window_report(sys, n1, n2, window);

  constexpr double kRateTol = 1e-9;
  const bool antistable_ok = report.antistable.margin_fit.rate > 1.0 + kRateTol;
  const bool stable_ok = report.stable.norm_fit.rate < 1.0 - kRateTol;
  report.pass = report.block_diagonal && antistable_ok && stable_ok;
  return report;
}

}  // namespace ltvstab
