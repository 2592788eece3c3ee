#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace ltvstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Discrete time index (t >= 0 everywhere in this library).
using Index = std::int64_t;

}  // namespace ltvstab
