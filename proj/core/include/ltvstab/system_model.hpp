#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ltvstab/types.hpp"

namespace ltvstab {

/// Declared split of the state space into an antistable leading block of size
/// `n_antistable` and a stable trailing block of size `n_stable`.
struct Partition {
  Index n_antistable = 0;
  Index n_stable = 0;
};

/// A discrete-time linear time-varying pair (A(t), B(t)) with state dimension
/// N and input dimension M <= N. Three sources are supported: a periodic list
/// of matrices, a finite recorded sequence with an explicit horizon, and a
/// closed-form generator callable at any t >= 0. Models are immutable after
/// construction and safe to share across threads; generator systems memoize
/// per time index so repeated queries are deterministic and cheap.
class SystemModel {
 public:
  static SystemModel periodic(std::vector<Matrix> a_steps, std::vector<Matrix> b_steps,
                              std::optional<Partition> partition = {});
  static SystemModel sequence(std::vector<Matrix> a_steps, std::vector<Matrix> b_steps,
                              std::optional<Partition> partition = {});
  static SystemModel generator(Index state_dim, Index input_dim,
                               std::function<Matrix(Index)> a_of_t,
                               std::function<Matrix(Index)> b_of_t,
                               std::optional<Partition> partition = {});

  Index state_dim() const { return n_; }
  Index input_dim() const { return m_; }

  /// Period length for periodic sources, empty otherwise.
  std::optional<Index> period() const;
  /// Number of recorded steps for finite sequences, empty otherwise.
  std::optional<Index> horizon() const;
  std::optional<Partition> partition() const { return partition_; }

  /// System matrix at time t. Throws ConfigError for t < 0 or, on a finite
  /// sequence, for t at or beyond the recorded horizon.
  Matrix A(Index t) const;
  Matrix B(Index t) const;

 private:
  enum class Source { kPeriodic, kSequence, kGenerator };

  struct GeneratorCache;

  SystemModel() = default;
  void check_time(Index t) const;

  Source source_ = Source::kPeriodic;
  Index n_ = 0;
  Index m_ = 0;
  std::vector<Matrix> a_steps_;
  std::vector<Matrix> b_steps_;
  std::function<Matrix(Index)> a_of_t_;
  std::function<Matrix(Index)> b_of_t_;
  std::optional<Partition> partition_;
  std::shared_ptr<GeneratorCache> cache_;
};

/// Ordered state-transition product A(t1-1) * A(t1-2) * ... * A(t0); identity
/// when t1 == t0. Latest factor leftmost, matching x(t1) = Phi(t0,t1) x(t0).
Matrix transition_matrix(const SystemModel& sys, Index t0, Index t1);

/// Controllability Gramian W(t0, t0+k) = sum_{t=t0}^{t0+k-1}
/// Phi(t+1, t0+k) B(t) B'(t) Phi'(t+1, t0+k), evaluated as the direct sum.
Matrix controllability_gramian(const SystemModel& sys, Index t0, Index k);

/// Smallest singular value: inf{ ||M x|| : ||x|| = 1 }.
double antistability_margin(const Matrix& m);

/// Largest |entry| of A(t) and B(t) over t in [t0, t1). Finite for any
/// well-formed model; useful as a uniform-boundedness diagnostic.
double max_abs_entry(const SystemModel& sys, Index t0, Index t1);

struct ControllabilityReport {
  Index window_length = 0;       // k
  Index windows = 0;             // consecutive start times tested
  std::vector<Matrix> gramians;  // W(t0, t0+k) for t0 = 0..windows-1
  double alpha0 = 0.0;           // extremal eigenvalues of W^-1 over windows
  double alpha1 = 0.0;
  double beta0 = 0.0;            // extremal eigenvalues of Phi' W^-1 Phi
  double beta1 = 0.0;
  double min_eigenvalue = 0.0;   // smallest Gramian eigenvalue seen
  bool pass = false;
};

/// Evaluates W over `windows` consecutive start times; passes iff every
/// Gramian's smallest eigenvalue exceeds 1e-9 * max(1, trace(W)/N).
ControllabilityReport check_uniform_controllability(const SystemModel& sys, Index k, Index windows);

/// Constants (gain, rate) fitted by least squares on log(value) vs window
/// length, i.e. value(l) ~ gain * rate^l.
struct ExponentialFit {
  double gain = 0.0;
  double rate = 0.0;
};

/// Growth/decay data for one diagonal block over window products of
/// increasing length l = 1..max_length starting at `start`.
struct StabilityWindowReport {
  Index start = 0;
  Index max_length = 0;
  std::vector<double> norms;    // ||prod A_block|| per length
  std::vector<double> margins;  // antistability margin of the product per length
  ExponentialFit norm_fit;      // fitted on norms  (K_s, beta_s)
  ExponentialFit margin_fit;    // fitted on margins (K_u, beta_u)
};

struct DecompositionReport {
  bool block_diagonal = false;
  double max_offdiagonal = 0.0;  // largest |entry| outside the declared blocks
  double max_entry = 0.0;        // uniform bound observed over the window
  StabilityWindowReport antistable;
  StabilityWindowReport stable;
  bool pass = false;
};

/// Checks the declared antistable/stable block structure over [0, window):
/// A(t) must be block diagonal, the leading block's margin products must grow
/// (fitted rate > 1) and the trailing block's norm products must contract
/// (fitted rate < 1). Throws ConfigError when no partition is declared.
DecompositionReport validate_decomposition(const SystemModel& sys, Index window);

}  // namespace ltvstab
