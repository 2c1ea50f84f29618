#pragma once

#include <vector>

#include "approxk/boundary.hpp"

// External products on representatives. The second factor B is always a full
// matrix algebra M_m; its elements are m x m matrices and sit to the right in
// Kronecker products.
namespace approxk {

// u (x) p + 1 (x) (1 - p); throws unless the inverse u^-1 box p checks out.
CMatrix box_times(const CMatrix& u, const CMatrix& p, const Tol& tol = {});
LoopElem box_times(const LoopElem& u, const CMatrix& p, const Tol& tol = {});

// p in M_k(A~) with A~ in M_na, q in M_l(B~) with B~ in M_nb: p (x) q with the
// indices regrouped as (i, j, a, b) so it sits in M_kl(A~ (x) B~).
CMatrix tensor_elements(const CMatrix& p, Index na, const CMatrix& q, Index nb);

// Class of p (x) q over the product decomposition.
K0Vec k0_product(const CMatrix& p, const WedderburnData& wa, const CMatrix& q, const WedderburnData& wb);

template <class S>
struct ProductCheck {
  K0Vec lhs;  // boundary of (u, v) times [p]
  K0Vec rhs;  // boundary of (u box p, v box p) over the tensored pair
  bool equal = false;
  Index intersection_gap = 0;
  LiftCert<S> cert;
};

template <class S>
ProductCheck<S> boundary_product_check(const S& s, const LiftCert<S>& cert, const CMatrix& p);

// A unitization X~ in M_N together with the projection onto its scalar
// summand (1 - 1_X).
struct UnitizedFactor {
  WedderburnData w;
  CMatrix z;
};

struct NonunitalCheck {
  K0Vec image_a;  // (eps_A (x) id) of the class, over B~
  K0Vec image_b;  // (id (x) eps_B) of the class, over A~
  bool in_kernel = false;
};

// Scalar part of x in M_k(X~): the k x k matrix of eps(x).
CMatrix augmentation_value(const CMatrix& x, const UnitizedFactor& f);

// The class sum(pos) - sum(neg) of idempotents over A~ (x) B~ lies in
// K0(A (x) B) iff both augmentation images vanish.
NonunitalCheck nonunital_class_check(const std::vector<CMatrix>& pos, const std::vector<CMatrix>& neg,
                                     const UnitizedFactor& a, const UnitizedFactor& b);

}  // namespace approxk
