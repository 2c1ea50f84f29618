#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "approxk/loop_kernels.hpp"
#include "approxk/matrix.hpp"
#include "approxk/wedderburn.hpp"

namespace approxk {

// Function S^1 -> M_K sampled at theta_j = 2 pi j / m.
class LoopElem {
 public:
  LoopElem() = default;
  explicit LoopElem(std::vector<CMatrix> samples);

  static LoopElem constant(Index grid, const CMatrix& value);
  // f(theta) * 1_fiber.
  static LoopElem scalar(Index grid, Index fiber, const std::function<cplx(double)>& f);
  static LoopElem from_function(Index grid, const std::function<CMatrix(double)>& f);

  Index grid() const { return static_cast<Index>(samples_.size()); }
  Index fiber() const { return samples_.empty() ? 0 : samples_[0].rows(); }
  const CMatrix& operator[](Index j) const { return samples_[static_cast<size_t>(j)]; }
  CMatrix& operator[](Index j) { return samples_[static_cast<size_t>(j)]; }
  const std::vector<CMatrix>& samples() const { return samples_; }

  LoopElem map(const std::function<CMatrix(const CMatrix&)>& f) const;

 private:
  std::vector<CMatrix> samples_;
};

double theta(Index j, Index grid);

LoopElem operator+(const LoopElem& a, const LoopElem& b);
LoopElem operator-(const LoopElem& a, const LoopElem& b);
LoopElem operator-(const LoopElem& a);
LoopElem operator*(const LoopElem& a, const LoopElem& b);
LoopElem operator*(cplx s, const LoopElem& a);
LoopElem operator*(const LoopElem& a, cplx s);
LoopElem operator*(double s, const LoopElem& a);

Index dim(const LoopElem& x);
double norm(const LoopElem& x);
LoopElem identity_like(const LoopElem& x);
LoopElem zeros_like(const LoopElem& x);
LoopElem inverse(const LoopElem& x, const Tol& tol);
LoopElem adjoint(const LoopElem& x);
LoopElem sub_block(const LoopElem& x, Index r, Index c, Index rows, Index cols);
LoopElem block2x2(const LoopElem& a, const LoopElem& b, const LoopElem& c, const LoopElem& d);
LoopElem direct_sum(const LoopElem& a, const LoopElem& b);
LoopElem direct_sum(std::span<const LoopElem> parts);
LoopElem amplify_diag(const LoopElem& h, Index n);
LoopElem kron_right(const LoopElem& x, const CMatrix& p);
// Constant loop with value `p` on the grid of `like`.
LoopElem constant_like(const LoopElem& like, const CMatrix& p);

// C(S^1) (x) M_fiber or an ideal of it given by a support mask.
struct LoopAlg {
  Index grid = 0;
  Index fiber = 1;
  // The fiber is M_k (x) M_free; the unitization adds 1_k (x) M_free, so a
  // tensor factor M_m added by tensor_with_full stays free.
  Index free = 1;
  std::vector<char> mask;  // empty means every sample is in the support
  std::optional<Index> basepoint;
  bool unitized = false;

  bool in_support(Index j) const;
  Index support_count() const;
  bool is_full() const;
  std::vector<char> off_support() const;
  void validate() const;
};

LoopAlg loop_ambient(Index grid, Index fiber = 1, std::optional<Index> basepoint = std::nullopt);
// Angles in units of pi; the mask keeps samples strictly inside the open arc.
LoopAlg arc_ideal(const LoopAlg& a, double start_pi, double end_pi);
LoopAlg intersect(const LoopAlg& a, const LoopAlg& b);
LoopAlg unitize(const LoopAlg& a);
// Same supports, fiber multiplied by m.
LoopAlg tensor_with_full(const LoopAlg& a, Index m);

// 1 on the closed plateau, 0 beyond the ramp, linear in between.
LoopElem bump(const LoopAlg& a, double plateau_start_pi, double plateau_end_pi, double ramp_pi);
// e^{i n theta} (x) 1_fiber.
LoopElem power_z(Index grid, int n, Index fiber = 1);

// Projection of x in M_n (x) M_k (x) M_q onto M_n (x) 1_k (x) M_q.
CMatrix scalar_part(const CMatrix& x, Index n, Index k, Index q);

struct LoopNearest {
  LoopElem proj;
  double resid_op = 0.0;
};

// x has fiber n * a.fiber. Non-unitized: truncation to the mask (exact sup
// distance). Unitized: off-support samples replaced by their mean projected
// onto M_n (x) 1_k (x) M_free; the residual is the worst off-support deviation.
LoopNearest nearest_amplified(const LoopElem& x, const LoopAlg& a);

struct LoopEpsIn {
  bool inside = false;
  LoopElem witness;
  double residual = 0.0;
};
LoopEpsIn loop_eps_in(const LoopElem& x, const LoopAlg& a, double eps);

// Determinant winding per diagonal block (block_sizes empty: one block).
K1Vec winding_k1(const LoopElem& u, const std::vector<Index>& block_sizes = {});

struct ArcTrivialization {
  Index scalar_rank = 0;
  CMatrix scalar_value;   // the constant idempotent off the support
  LoopElem conjugator;    // z with z f_inf z^-1 = e, z = 1 off the support
  double residual = 0.0;
  Index path_points = 0;  // length of the refined idempotent paths
};

// `cap` is the non-unitized ideal; e is an idempotent over its unitization.
ArcTrivialization arc_k0_trivialize(const LoopElem& e, const LoopAlg& cap, const Tol& tol = {});

// Per-sample Riesz idempotent.
LoopElem riesz_loop(const LoopElem& e, const Tol& tol = {});

}  // namespace approxk
