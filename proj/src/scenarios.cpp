#include "approxk/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace approxk {

BlockPair block_pair(const CMatrix& twist, const Tol& tol, std::uint64_t seed) {
  const Index r = twist.rows();
  CMatrix w = kron(unit(2, 0, 0), identity(r)) + kron(unit(2, 1, 1), twist);
  Subalg c = left_tensor_factor(2, r);
  Subalg d = conjugated(c, w, tol);
  return {MatrixSetting(full_algebra(2 * r), c, d, tol, seed), w, kron(unit(2, 0, 0), identity(r)),
          kron(unit(2, 1, 1), identity(r)), kron(unit(2, 0, 1) + unit(2, 1, 0), identity(r))};
}

BlockPair twisted_pair(double angle_pi, const Tol& tol) {
  return block_pair(rotation(angle_pi * std::numbers::pi), tol);
}

BlockPair random_block_pair(Index r, std::uint64_t seed, const Tol& tol) {
  Rng rng(seed);
  CMatrix twist = random_unitary(r, rng);
  CMatrix v = random_unitary(2 * r, rng);
  const Index n = 2 * r;
  CMatrix w = kron(unit(2, 0, 0), identity(r)) + kron(unit(2, 1, 1), twist);
  Subalg c = conjugated(left_tensor_factor(2, r), v, tol);
  Subalg d = conjugated(c, CMatrix(v * w * v.adjoint()), tol);
  (void)n;
  return {MatrixSetting(full_algebra(2 * r), c, d, tol, seed), v * w * v.adjoint(),
          v * kron(unit(2, 0, 0), identity(r)) * v.adjoint(), v * kron(unit(2, 1, 1), identity(r)) * v.adjoint(),
          v * kron(unit(2, 0, 1) + unit(2, 1, 0), identity(r)) * v.adjoint()};
}

CircleSplit circle_split(Index grid, const Tol& tol) {
  LoopAlg a = loop_ambient(grid);
  LoopAlg c = arc_ideal(a, -0.6, 0.6);
  LoopAlg d = arc_ideal(a, 0.4, 1.6);
  return {LoopSetting(a, c, d, tol), bump(a, -0.4, 0.4, 0.2), power_z(grid, 1)};
}

CMatrix hereditary_q(double theta) {
  CMatrix f = CMatrix::Zero(4, 2);
  f(0, 0) = std::cos(theta);
  f(2, 0) = std::sin(theta);
  f(1, 1) = std::cos(theta);
  f(3, 1) = std::sin(theta);
  return f * f.adjoint();
}

MatrixSetting hereditary_pair(double theta, const Tol& tol) {
  auto corner = [&](const CMatrix& proj) {
    std::vector<CMatrix> gens;
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) gens.push_back(proj * unit(4, i, j) * proj);
    return Subalg::from_basis(4, gens, tol);
  };
  CMatrix p = CMatrix::Zero(4, 4);
  p(0, 0) = p(1, 1) = 1.0;
  return MatrixSetting(full_algebra(4), corner(p), corner(hereditary_q(theta)), tol);
}

}  // namespace approxk
