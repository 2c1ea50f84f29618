#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "approxk/settings.hpp"

// Ideal structures, lifts and boundary classes. Every function is a template
// over the setting (MatrixSetting or LoopSetting); both are instantiated in
// boundary.cpp.
namespace approxk {

struct IdealResiduals {
  double comm = 0.0;  // ||[h,x]|| / ||x||
  double c = 0.0;     // hx against C
  double d = 0.0;     // (1-h)x against D
  double int1 = 0.0;  // h(1-h)x against C cap D
  double int2 = 0.0;  // h^2(1-h)x against C cap D
  double max() const;
};

template <class S>
struct IdealCert {
  using Elem = typename S::Elem;
  Elem h;
  std::vector<Elem> x_basis;  // op-norm normalized
  IdealResiduals measured;
  Index probes = 0;           // basis elements plus random combinations
  bool valid_at(double delta) const { return measured.max() <= delta; }
};

// Residuals over the basis of X and `random_count` random combinations.
template <class S>
IdealCert<S> check_delta_ideal_structure(const S& s, const typename S::Elem& h,
                                         const std::vector<typename S::Elem>& x, std::uint64_t seed,
                                         int random_count = 50);

template <class S>
struct TensorScale {
  S setting;          // C (x) M_m, D (x) M_m
  IdealCert<S> cert;  // for h (x) 1 over X (x) M_m
  double n = 0.0;     // dim X
  double m_dual = 0.0;  // largest trace norm of the dual basis
  double m_x = 0.0;   // n * m_dual
  double delta_in = 0.0;
  double bound = 0.0;
  bool passed = false;
};

template <class S>
TensorScale<S> tensor_scale_ideal_structure(const S& s, const IdealCert<S>& cert, Index m, std::uint64_t seed);

template <class S>
struct LiftCert {
  using Elem = typename S::Elem;
  Elem u, u_inv, v, v_inv;
  double c = 0.0;
  double norm_v = 0.0, norm_v_inv = 0.0;
  double res_d = 0.0;    // v against M_2n(D~)
  double res_c = 0.0;    // v diag(u^-1, u) against M_2n(C~)
  double res_cap = 0.0;  // v diag(1,0) v^-1 against M_2n((C cap D)~)
  bool rounded = false;
  std::string rounding_error;
  Elem f;                // rounded idempotent
  K0Vec cls;             // class of f minus diag(1,0), over (C cap D)~
  double rounding_distance = 0.0;
  Threshold threshold;

  double level() const;
  bool augmentation_ok() const { return rounded && cls.augmentation_entry() == 0; }
  bool valid_at(double delta) const;
};

// Measures the lift conditions for a given v (with its inverse).
template <class S>
LiftCert<S> certify_lift(const S& s, const typename S::Elem& u, const typename S::Elem& v,
                         const typename S::Elem& v_inv, double c = 0.0);

// v = X(a) Y(-b) X(a) J with a = h + (1-h)u, b = h + u^-1(1-h).
template <class S>
LiftCert<S> build_lift_v(const S& s, const typename S::Elem& u, const typename S::Elem& h, double c = 0.0);

template <class E>
struct InvCut {
  double residual = 0.0;
  double c = 0.0;
  double delta_comm = 0.0;
  double bound = 0.0;
  bool passed = false;
};

// ab - 1 and ba - 1 against (y+z)h(1-h) for y = u - 1, z = u^-1 - 1.
InvCut<CMatrix> check_inv_cut(const CMatrix& u, const CMatrix& h, const Tol& tol = {});
InvCut<LoopElem> check_inv_cut(const LoopElem& u, const LoopElem& h, const Tol& tol = {});

// The class of the rounded v diag(1,0) v^-1 minus diag(1,0), restricted to
// C cap D; throws ExactnessViolation unless it vanishes in K0(C~) and K0(D~).
template <class S>
K0Vec boundary_class(const S& s, const LiftCert<S>& cert);

template <class S>
LiftCert<S> iota_lift(const S& s, const typename S::Elem& p, const typename S::Elem& q);

template <class S>
struct Boxplus {
  LiftCert<S> cert;
  K0Vec sum_of_parts;
};

// Block sum; additivity of the boundary is asserted.
template <class S>
Boxplus<S> boxplus(const S& s, const std::vector<LiftCert<S>>& lifts);

// v^-1 certified as a lift of u^-1; negation of the class is asserted.
template <class S>
LiftCert<S> inverse_lift(const S& s, const LiftCert<S>& cert);

template <class S>
struct SigmaWitness {
  using Elem = typename S::Elem;
  Index l = 0;
  Elem x;                   // over D~
  Elem factor_c;            // (u + 1_l) x^-1 over C~
  double res_d = 0.0;
  double res_c = 0.0;
  double off_diagonal = 0.0;  // size of the off-diagonal part of w v
  K1Vec k1_u, k1_x, k1_c;     // windings in the loop model, empty otherwise
};

template <class S>
SigmaWitness<S> sigma_witness(const S& s, const LiftCert<S>& cert, double eps);

template <class E>
struct Discretized {
  E a;  // diag(u_{t1}^-1, ..., u_{tm}^-1)
  E b;  // diag(u_{t0}, ..., u_{tm})
  double defect = 0.0;
  double bound = 0.0;  // delta c
  double max_step = 0.0;
};

// delta <= 0 uses the largest step plus a hair.
Discretized<CMatrix> discretize_homotopy(const std::vector<CMatrix>& path, double delta, const Tol& tol = {});
Discretized<LoopElem> discretize_homotopy(const std::vector<LoopElem>& path, double delta, const Tol& tol = {});

template <class S>
struct WhiteheadSplit {
  using Elem = typename S::Elem;
  std::vector<double> t;
  std::vector<Elem> vc, vd;
  Elem vc_inv0, vd_inv0;
  double c = 0.0;
  double norm_bound = 0.0;        // (3 + c)^5
  double max_norm = 0.0;
  double max_res_c = 0.0;         // v^C_t - 1 against M_2n(C)
  double max_res_d = 0.0;         // v^D_t - 1 against M_2n(D)
  double product_residual = 0.0;  // ||diag(a, a^-1) - v^C_0 v^D_0||
  double endpoint_residual = 0.0;
  double continuity = 0.0;        // max ||v_{j+1} - v_j|| ||v_j^-1||
  double y_delta = 0.0;           // ideal-structure level measured on the monomial space
  Index steps = 0;
  bool passed(double eps) const;
};

// Splits diag(a, a^-1) for a = 1 + x. `swap` uses (1-h, D, C) in place of
// (h, C, D), which is how the a-factor of the sigma construction is split.
template <class S>
WhiteheadSplit<S> whitehead_split(const S& s, const typename S::Elem& a, const typename S::Elem& h,
                                  double eps, int steps = 32, bool swap = false, bool measure_y = true);

template <class S>
struct SigmaReconstruction {
  using Elem = typename S::Elem;
  Elem x;
  double defect = 0.0;
  double factor_gap = 0.0;     // ||u_0 - u_C u_D||
  double residual = 0.0;       // max ||x - E_C||, ||x - E_D||
  double disagreement = 0.0;   // ||E_C - E_D||
  double component_gap = 0.0;  // max ||1 - x^-1 E||, < 1 means same component
  double split_c = 0.0, split_d = 0.0;
  K1Vec k1_x, k1_uc, k1_ud;
};

template <class S>
SigmaReconstruction<S> sigma_reconstruct(const S& s, const std::vector<typename S::Elem>& path,
                                         const typename S::Elem& u_c, const typename S::Elem& u_d,
                                         const typename S::Elem& h, double eps, double path_delta = 0.0);

struct UniformitySample {
  Index m = 0;
  double delta_in = 0.0;
  double achieved = 0.0;
  double ratio = 0.0;
};

struct UniformityReport {
  std::vector<UniformitySample> samples;
  double sup_ratio = 0.0;
  bool monotone = true;  // achieved non-decreasing in delta_in for each m
};

template <class S>
UniformityReport uniformity_probe(const S& s, int sample_count, const std::vector<Index>& b_dims,
                                  const std::vector<double>& deltas, std::uint64_t seed);

}  // namespace approxk
