#pragma once

#include <span>
#include <vector>

#include "approxk/matrix.hpp"

namespace approxk {

struct Nearest {
  CMatrix proj;
  double resid_op = 0.0;
};

struct EpsIn {
  bool inside = false;
  CMatrix witness;
  double residual = 0.0;
};

// Linear subspace of M_N with a Hilbert-Schmidt orthonormal basis.
class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(Index ambient_dim);

  // Orthonormalized span; directions below rank_rel_tol * (largest singular
  // value) are dropped.
  static Subspace span(Index ambient_dim, std::span<const CMatrix> elems, const Tol& tol = {});
  // Trusts that `basis` is already orthonormal (checked to 1e-10).
  static Subspace from_orthonormal(Index ambient_dim, std::vector<CMatrix> basis);

  Index ambient_dim() const { return n_; }
  Index dim() const { return static_cast<Index>(basis_.size()); }
  const std::vector<CMatrix>& basis() const { return basis_; }
  // N^2 x dim matrix whose columns are vec(b_i).
  const CMatrix& frame() const { return frame_; }

  CVector coords(const CMatrix& x) const;
  CMatrix element(const CVector& coeffs) const;
  CMatrix project(const CMatrix& x) const;
  // x lives in M_{nN}; every N x N block is projected separately.
  CMatrix project_amplified(const CMatrix& x) const;
  CMatrix random_element(Rng& rng) const;
  double gram_defect() const;

 protected:
  void set_basis(std::vector<CMatrix> basis);

  Index n_ = 0;
  std::vector<CMatrix> basis_;
  CMatrix frame_;
};

// *-closed subspace closed under multiplication.
class Subalg : public Subspace {
 public:
  Subalg() = default;

  // *-algebra generated by `generators`.
  static Subalg from_basis(Index ambient_dim, std::span<const CMatrix> generators, const Tol& tol = {});
  // The span must already be an algebra; ClosureFailure otherwise.
  static Subalg from_span(const Subspace& s, const Tol& tol = {});

  bool is_unital_in_ambient() const { return unital_; }
  // Unit of the algebra: the support projection of its elements.
  const CMatrix& unit() const { return unit_; }
  // Worst adjoint / product distance to the span found during verification.
  double closure_residual() const { return closure_residual_; }

 private:
  void finish(const Tol& tol);

  bool unital_ = false;
  CMatrix unit_;
  double closure_residual_ = 0.0;
};

Nearest nearest(const CMatrix& x, const Subspace& s);
Nearest nearest_amplified(const CMatrix& x, const Subspace& s);
EpsIn eps_in(const CMatrix& x, const Subspace& s, double eps);

Subalg unitize(const Subalg& s, const Tol& tol = {});
Subalg amplify(const Subalg& s, Index n, const Tol& tol = {});
Subalg intersect(const Subalg& s, const Subalg& t, const Tol& tol = {});
Subalg tensor_with_full(const Subalg& s, Index m, const Tol& tol = {});
Subspace enlarge_subspace(const Subspace& x0, int n_pow, const Tol& tol = {});

Subalg full_algebra(Index n);
Subalg diagonal_algebra(Index n);
// M_a (x) 1_b inside M_{ab}.
Subalg left_tensor_factor(Index a, Index b);
Subalg conjugated(const Subalg& s, const CMatrix& unitary, const Tol& tol = {});

}  // namespace approxk
