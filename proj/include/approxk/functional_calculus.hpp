#pragma once

#include "approxk/matrix.hpp"
#include "approxk/star_algebra.hpp"
#include "approxk/wedderburn.hpp"

namespace approxk {

struct RoundingCert {
  double input_defect = 0.0;      // ||e^2 - e|| or a membership residual
  double input_norm_bound = 0.0;  // c
  double output_distance = 0.0;
  double paper_bound = 0.0;
  bool passed = false;
};

struct RieszResult {
  CMatrix chi;
  RoundingCert cert;
  bool used_schur = false;
};

// 4 sqrt(delta) (c + 2) / (1 - sqrt(delta)).
double riesz_bound(double delta, double c);

// chi(e) for chi the indicator of Re z > 1/2.
RieszResult riesz_idempotent(const CMatrix& e, const Tol& tol = {});
// The Schur + Sylvester route on its own, used as fallback and for testing.
CMatrix riesz_schur(const CMatrix& e);

struct Threshold {
  double eps = 0.0;    // closeness of the rounded element
  double delta = 0.0;  // admissible membership residual
};

// Admissible (eps, delta) for rounding an idempotent of norm <= c.
// eps_fraction in (0, 1) picks eps = eps_fraction / (4c + 6).
Threshold idempotent_threshold(double c, double eps_fraction = 0.5);
// eps = delta = 1/(4c) with c >= ||u^-1||.
Threshold invertible_threshold(double c);

struct IdempotentRounding {
  CMatrix f;
  K0Vec cls;
  double residual = 0.0;   // membership residual of the input
  Threshold threshold;
  double distance = 0.0;   // ||e - f||
};

// `b` must be the (already unitized) algebra that `w` decomposes.
IdempotentRounding round_idempotent_in(const CMatrix& e, const Subalg& b, const WedderburnData& w,
                                       const Tol& tol = {}, double eps_fraction = 0.5);

struct InvertibleRounding {
  CMatrix v;
  double residual = 0.0;
  Threshold threshold;
  double defect = 0.0;    // ||1 - u^-1 v||
  double inv_norm = 0.0;  // ||v^-1||
};

// c defaults to ||u^-1|| when not positive.
InvertibleRounding round_invertible_in(const CMatrix& u, const Subalg& b, const Tol& tol = {},
                                       double c = 0.0);

// ||1 - v^-1 v'|| < 1, i.e. v' = v e^z for some z in the algebra.
bool same_k1_component(const CMatrix& v, const CMatrix& vp, const Tol& tol = {});

}  // namespace approxk
