#pragma once

#include <cstdint>
#include <string_view>

#include "approxk/functional_calculus.hpp"
#include "approxk/loop_algebra.hpp"
#include "approxk/matrix.hpp"
#include "approxk/star_algebra.hpp"
#include "approxk/wedderburn.hpp"

// An ambient algebra A with the pair (C, D) and their intersection, in one of
// two concrete models. The boundary engine is written against the common
// interface of MatrixSetting and LoopSetting.
namespace approxk {

enum class Which { Ambient, C, D, Cap };
std::string_view which_name(Which w);

template <class E>
struct Member {
  E witness;
  double residual = 0.0;
};

template <class E>
struct RoundedIdem {
  E f;
  K0Vec cls;
  double residual = 0.0;
  double distance = 0.0;
  Threshold threshold;
};

// WedderburnData of S (x) M_m given that of S; block i keeps its multiplicity
// and has size d_i m.
WedderburnData tensor_wedderburn(const WedderburnData& w, Index m);
// Blocks (i, j) in lexicographic order, central projections z_i (x) z'_j.
WedderburnData product_wedderburn(const WedderburnData& a, const WedderburnData& b);
WedderburnData full_wedderburn(Index n);

// w with w e w^-1 = f for idempotents in a full matrix algebra.
CMatrix idempotent_similarity(const CMatrix& e, const CMatrix& f);

class MatrixSetting {
 public:
  using Elem = CMatrix;

  MatrixSetting(Subalg ambient, Subalg c, Subalg d, const Tol& tol = {}, std::uint64_t seed = 1);
  MatrixSetting(Subalg ambient, Subalg c, Subalg d, Subalg cap, const Tol& tol = {}, std::uint64_t seed = 1);

  const Tol& tol() const { return tol_; }
  Index base_dim() const { return ambient_.ambient_dim(); }
  const Subalg& alg(Which w) const;
  const Subalg& unitized(Which w) const;
  // Decomposition of the unitization; not available for the ambient.
  const WedderburnData& wedderburn(Which w) const;

  Member<CMatrix> member(const CMatrix& x, Which w, bool unitized) const;
  K0Vec k0(const CMatrix& f, Which w) const;
  K1Vec k1(const CMatrix&, Which) const { return {}; }
  RoundedIdem<CMatrix> round_idempotent(const CMatrix& e, Which w, double eps_fraction = 0.5) const;
  // w over the unitization of `w` with w f w^-1 = target.
  CMatrix trivializer(const CMatrix& f, const CMatrix& target, Which w) const;
  // s (x) 1_N for a scalar k x k matrix s.
  CMatrix lift(const CMatrix& s, const CMatrix& like) const;
  CMatrix random_in(Which w, Rng& rng) const;

  MatrixSetting tensored(Index m) const;
  // dim((C (x) M_m) cap (D (x) M_m)) - dim((C cap D) (x) M_m).
  Index intersection_gap(Index m) const;

 private:
  MatrixSetting() = default;
  void finish(std::uint64_t seed);

  Tol tol_;
  Subalg ambient_, c_, d_, cap_;
  Subalg c_u_, d_u_, cap_u_;
  WedderburnData w_c_, w_d_, w_cap_;
};

class LoopSetting {
 public:
  using Elem = LoopElem;

  LoopSetting(LoopAlg ambient, LoopAlg c, LoopAlg d, const Tol& tol = {});

  const Tol& tol() const { return tol_; }
  Index base_dim() const { return ambient_.fiber; }
  Index grid() const { return ambient_.grid; }
  const LoopAlg& alg(Which w) const;

  Member<LoopElem> member(const LoopElem& x, Which w, bool unitized) const;
  // The class over the unitization. For a proper arc ideal K0 of the ideal is
  // trivial and the only entry is the rank of the scalar part, recorded as the
  // augmentation; for the full circle the entry is the constant rank.
  K0Vec k0(const LoopElem& f, Which w) const;
  K1Vec k1(const LoopElem& x, Which w) const;
  RoundedIdem<LoopElem> round_idempotent(const LoopElem& e, Which w, double eps_fraction = 0.5) const;
  LoopElem trivializer(const LoopElem& f, const LoopElem& target, Which w) const;
  LoopElem lift(const CMatrix& s, const LoopElem& like) const;
  LoopElem random_in(Which w, Rng& rng) const;

  LoopSetting tensored(Index m) const;
  Index intersection_gap(Index) const { return 0; }

 private:
  Tol tol_;
  LoopAlg ambient_, c_, d_, cap_;
};

}  // namespace approxk
