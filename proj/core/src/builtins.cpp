#include "ltvstab/builtins.hpp"

#include <cmath>

#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
  return r;
}

// One-step flow map of the sampled oscillator. The underlying transition
// matrix factors as Phi(s) = rotation(s) * diag(e^{0.5 s}, e^{-s}), so the
// step map rotation(s') * diag(e^{0.5 dt}, e^{-dt}) * rotation(s)' stays
// bounded for all t; forming Phi(s') Phi(s)^-1 directly would overflow.
SystemModel example1(double dt) {
  if (!(dt > 0.0)) throw ConfigError("example1 requires a positive dt");
  Matrix step = Matrix::Zero(2, 2);
  step(0, 0) = std::exp(0.5 * dt);
  step(1, 1) = std::exp(-dt);
  Matrix b(2, 1);
  b << 1.0, 1.0;
  auto a_of_t = [dt, step](Index t) -> Matrix {
    const double s = dt * static_cast<double>(t);
    return rotation(s + dt) * step * rotation(s).transpose();
  };
  auto b_of_t = [b](Index) -> Matrix { return b; };
  return SystemModel::generator(2, 1, a_of_t, b_of_t);
}

SystemModel example2() {
  Matrix a1(3, 3), a2(3, 3), a3(3, 3);
  a1 << -0.4, 0.8, 1.2,
         1.0, 0.8, -0.4,
         0.6, -0.8, 0.4;
  a2 << 1.6, -1.4, 1.2,
        0.8, -1.6, 2.8,
        1.6, -2.2, 1.2;
  a3 << -0.8, 1.6, 1.2,
         1.6, -1.2, -1.2,
         1.6, -2.4, 1.2;
  Matrix b1(3, 1), b2(3, 1), b3(3, 1);
  b1 << 1.0, 1.0, 1.0;
  b2 << 2.0, 1.0, 1.0;
  b3 << 1.0, 1.0, 2.0;
  return SystemModel::periodic({a1, a2, a3}, {b1, b2, b3});
}

}  // namespace

SystemModel builtin_system(const std::string& name, double dt) {
  if (name == "example1") return example1(dt);
  if (name == "example2") return example2();
  throw ConfigError("unknown builtin system '" + name + "' (expected example1 or example2)");
}

}  // namespace ltvstab
