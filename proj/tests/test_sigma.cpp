#include <gtest/gtest.h>

#include <cmath>

#include "approxk/boundary.hpp"
#include "approxk/error.hpp"
#include "approxk/scenarios.hpp"
#include "oracles.hpp"

using namespace approxk;

namespace {

// exp(i s phi) for a real scalar loop phi.
LoopElem phase(const LoopElem& phi, double s) {
  return phi.map([s](const CMatrix& x) {
    CMatrix out = x;
    for (Index i = 0; i < x.rows(); ++i) out(i, i) = std::polar(1.0, s * x(i, i).real());
    return out;
  });
}

}  // namespace

TEST(Sigma, CircleSplitWitness) {
  CircleSplit cs = circle_split(720);
  LiftCert<LoopSetting> l = build_lift_v(cs.s, cs.u, cs.h);
  ASSERT_TRUE(l.rounded);
  SigmaWitness<LoopSetting> w = sigma_witness(cs.s, l, 0.05);
  EXPECT_LE(w.res_d, 0.05);
  EXPECT_LE(w.res_c, 0.05);
  ASSERT_EQ(w.k1_u.windings.size(), 1u);
  EXPECT_EQ(w.k1_u.windings[0], 1);
  EXPECT_EQ(w.k1_x.windings[0] + w.k1_c.windings[0], 1);
  // Independent check that (u + 1_l) x^-1 really is the C factor.
  EXPECT_LE(norm(LoopElem(cs.u * inverse(w.x, {})) - w.factor_c), 1e-12);
}

TEST(Sigma, WitnessRejectsNonzeroClass) {
  BlockPair bp = twisted_pair();
  LiftCert<MatrixSetting> l = iota_lift(bp.s, bp.p, bp.q);
  EXPECT_THROW(sigma_witness(bp.s, l, 0.05), Error);
}

TEST(Whitehead, CircleSplit) {
  CircleSplit cs = circle_split(720);
  WhiteheadSplit<LoopSetting> ws = whitehead_split(cs.s, cs.u, cs.h, 0.1);
  EXPECT_LE(ws.endpoint_residual, 1e-12);
  EXPECT_LE(ws.product_residual, 1e-9);
  EXPECT_LE(ws.max_res_c, 0.1);
  EXPECT_LE(ws.max_res_d, 0.1);
  EXPECT_DOUBLE_EQ(ws.norm_bound, std::pow(3.0 + ws.c, 5));
  EXPECT_LE(ws.max_norm, ws.norm_bound);
  EXPECT_LT(ws.continuity, 1.0);
  EXPECT_TRUE(ws.passed(0.1));
  EXPECT_EQ(ws.t.front(), 0.0);
  EXPECT_EQ(ws.t.back(), 1.0);
  // Factors at t = 0 multiply to diag(u, u^-1), checked directly.
  LoopElem prod = ws.vc.front() * ws.vd.front();
  EXPECT_LE(norm(prod - direct_sum(cs.u, inverse(cs.u, {}))), 1e-9);
  EXPECT_LE(norm(ws.vc.front() * ws.vc_inv0 - identity_like(prod)), 1e-9);
  EXPECT_LE(norm(ws.vd.front() * ws.vd_inv0 - identity_like(prod)), 1e-9);
}

TEST(Whitehead, SwappedRolesAlsoSplit) {
  CircleSplit cs = circle_split(360);
  WhiteheadSplit<LoopSetting> ws = whitehead_split(cs.s, cs.u, cs.h, 0.1, 32, true, false);
  EXPECT_TRUE(ws.passed(0.1));
}

TEST(Homotopy, DiscretizationBound) {
  Rng rng(4);
  CMatrix l = random_hermitian(3, rng);
  l /= op_norm(l);
  std::vector<CMatrix> path;
  const int m = 24;
  for (int j = 0; j <= m; ++j) path.push_back(oracle::expm(cplx(0, 1.0 - double(j) / m) * l));
  Discretized<CMatrix> d = discretize_homotopy(path, 0.0);
  EXPECT_LE(d.defect, d.bound);
  EXPECT_EQ(d.a.rows(), 3 * m);
  EXPECT_EQ(d.b.rows(), 3 * (m + 1));
  EXPECT_NEAR(d.max_step, oracle::op_norm(path[1] - path[0]), 1e-9);
}

TEST(Homotopy, DiscretizationErrors) {
  Rng rng(4);
  CMatrix l = random_hermitian(2, rng);
  std::vector<CMatrix> path{oracle::expm(cplx(0, 1) * l), identity(2)};
  try {
    discretize_homotopy(path, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PathTooCoarse);
  }
  std::vector<CMatrix> open{identity(2), 2.0 * identity(2)};
  EXPECT_THROW(discretize_homotopy(open, 0.0), Error);
  EXPECT_THROW(discretize_homotopy(std::vector<CMatrix>{identity(2)}, 0.0), Error);
}

TEST(Sigma, ReconstructLoopPath) {
  CircleSplit cs = circle_split(96);
  LoopAlg a = loop_ambient(96);
  LoopElem phi_c = 0.8 * bump(a, -0.3, 0.3, 0.2);
  LoopElem phi_d = 0.6 * bump(a, 0.6, 1.4, 0.15);
  LoopElem u_c = phase(phi_c, 1.0), u_d = phase(phi_d, 1.0);
  LoopElem l = phi_c + phi_d;
  std::vector<LoopElem> path;
  const int m = 16;
  for (int j = 0; j <= m; ++j) path.push_back(phase(l, 1.0 - double(j) / m));
  SigmaReconstruction<LoopSetting> r = sigma_reconstruct(cs.s, path, u_c, u_d, cs.h, 0.1);
  EXPECT_LE(r.factor_gap, 1e-14);
  EXPECT_LE(r.residual, 0.1);
  EXPECT_LT(r.component_gap, 1.0);
  EXPECT_EQ(r.k1_x.windings, r.k1_uc.windings);
  EXPECT_LE(r.split_c, 1e-12);
  EXPECT_LE(r.split_d, 1e-12);
}

TEST(Sigma, HereditaryPairIsNotUniform) {
  MatrixSetting s = hereditary_pair(0.3);
  CMatrix p = CMatrix::Zero(4, 4);
  p(0, 0) = p(1, 1) = 1.0;
  CMatrix q = hereditary_q(0.3);
  // u_C = 1 + e_C, u_D = 1 + e_D with e_C, e_D large corner elements; the
  // intersection is zero, so no x can be near both sides.
  CMatrix ec = 0.5 * p * unit(4, 0, 1) * p, ed = 0.5 * q * unit(4, 0, 1) * q;
  CMatrix uc = identity(4) + ec, ud = identity(4) + ed;
  CMatrix u0 = uc * ud;
  CMatrix lg = matrix_log(u0);
  std::vector<CMatrix> path;
  for (int j = 0; j <= 32; ++j) path.push_back(matrix_exp((1.0 - j / 32.0) * lg));
  CMatrix h = 0.5 * identity(4);
  try {
    sigma_reconstruct(s, path, uc, ud, h, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PairNotUniform);
  }
}

TEST(Uniformity, IdealPairHasLinearModulus) {
  CircleSplit cs = circle_split(360);
  UniformityReport rep = uniformity_probe(cs.s, 40, {1, 2, 3}, {1e-3, 1e-2, 1e-1}, 7);
  EXPECT_EQ(rep.samples.size(), 9u);
  EXPECT_LE(rep.sup_ratio, 3.0);
  EXPECT_TRUE(rep.monotone);
}

TEST(Uniformity, HereditaryRatiosGrowAsAngleShrinks) {
  std::vector<double> sup;
  for (double th : {0.3, 0.1, 0.03}) {
    UniformityReport rep = uniformity_probe(hereditary_pair(th), 40, {1}, {1e-3, 1e-2, 1e-1}, 7);
    sup.push_back(rep.sup_ratio);
  }
  EXPECT_LT(sup[0], sup[1]);
  EXPECT_LT(sup[1], sup[2]);
  // The ratio behaves like 1 / sin(theta) at small angles.
  EXPECT_GT(sup[2], 10.0);
}

TEST(Uniformity, InputValidation) {
  CircleSplit cs = circle_split(64);
  EXPECT_THROW(uniformity_probe(cs.s, 0, {1}, {1e-2}, 1), Error);
  EXPECT_THROW(uniformity_probe(cs.s, 4, {0}, {1e-2}, 1), Error);
  EXPECT_THROW(uniformity_probe(cs.s, 4, {1}, {-1.0}, 1), Error);
}
