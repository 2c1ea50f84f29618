#include "approxk/functional_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace approxk {

double riesz_bound(double delta, double c) {
  double s = std::sqrt(delta);
  return 4.0 * s * (c + 2.0) / (1.0 - s);
}

namespace {

bool selected(cplx z) { return z.real() > 0.5; }

// Swap the adjacent diagonal entries k, k+1 of the upper triangular t,
// updating the unitary q so that q t q^* is preserved.
void swap_adjacent(CMatrix& t, CMatrix& q, Index k) {
  cplx a = t(k, k), b = t(k + 1, k + 1), c = t(k, k + 1);
  CVector v(2);
  v << c, b - a;
  double nv = v.norm();
  if (nv == 0.0) return;
  v /= nv;
  CMatrix g(2, 2);
  g << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
  const Index n = t.rows();
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  q.middleCols(k, 2) = q.middleCols(k, 2) * g;
  t(k + 1, k) = 0.0;
  (void)n;
}

}  // namespace

CMatrix riesz_schur(const CMatrix& e) {
  require_square(e, "riesz_schur");
  const Index n = e.rows();
  Eigen::ComplexSchur<CMatrix> schur(e);
  CMatrix t = schur.matrixT();
  CMatrix q = schur.matrixU();
  // Bubble the selected eigenvalues to the top-left.
  for (Index pass = 0; pass < n; ++pass) {
    bool moved = false;
    for (Index k = 0; k + 1 < n; ++k) {
      if (!selected(t(k, k)) && selected(t(k + 1, k + 1))) {
        swap_adjacent(t, q, k);
        moved = true;
      }
    }
    if (!moved) break;
  }
  Index r = 0;
  while (r < n && selected(t(r, r))) ++r;
  if (r == 0) return zeros(n);
  if (r == n) return identity(n);
  const Index s = n - r;
  CMatrix t11 = t.topLeftCorner(r, r);
  CMatrix t12 = t.topRightCorner(r, s);
  CMatrix t22 = t.bottomRightCorner(s, s);
  // t11 x - x t22 = t12, solved one column at a time.
  CMatrix x(r, s);
  for (Index j = 0; j < s; ++j) {
    CVector rhs = t12.col(j);
    for (Index i = 0; i < j; ++i) rhs += x.col(i) * t22(i, j);
    CMatrix lhs = t11 - t22(j, j) * identity(r);
    x.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  CMatrix p = zeros(n);
  p.topLeftCorner(r, r) = identity(r);
  p.topRightCorner(r, s) = x;
  return q * p * q.adjoint();
}

RieszResult riesz_idempotent(const CMatrix& e, const Tol& tol) {
  require_square(e, "riesz_idempotent");
  RieszResult out;
  const double delta = op_norm(e * e - e);
  const double c = op_norm(e);
  if (!(delta < 1.0 / 16.0)) fail(ErrorKind::DefectTooLarge, "defect " + std::to_string(delta), delta);
  EigenDecomposition d = eig_unchecked(e);
  for (Index i = 0; i < d.values.size(); ++i) {
    if (std::abs(d.values(i).real() - 0.5) < tol.rank_rel_tol) {
      fail(ErrorKind::SpectralAmbiguity, "eigenvalue on the line Re z = 1/2");
    }
  }
  CMatrix chi;
  bool done = false;
  if (d.basis_cond <= 1e6) {
    CVector ind(d.values.size());
    for (Index i = 0; i < ind.size(); ++i) ind(i) = selected(d.values(i)) ? 1.0 : 0.0;
    chi = d.vectors * ind.asDiagonal() * d.vectors.inverse();
    done = all_finite(chi) && op_norm(chi * chi - chi) <= 1e-10 * std::max(1.0, op_norm(chi));
  }
  if (!done) {
    chi = riesz_schur(e);
    out.used_schur = true;
  }
  out.chi = chi;
  out.cert.input_defect = delta;
  out.cert.input_norm_bound = c;
  out.cert.output_distance = op_norm(chi - e);
  out.cert.paper_bound = riesz_bound(delta, c);
  // Roundoff slack: the bound is 0 for an exact idempotent.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, c);
  out.cert.passed = out.cert.output_distance <= out.cert.paper_bound + slack;
  return out;
}

Threshold idempotent_threshold(double c, double eps_fraction) {
  if (!(c > 0) || !(eps_fraction > 0 && eps_fraction < 1))
    fail(ErrorKind::InvalidInput, "idempotent_threshold: bad parameters");
  Threshold t;
  t.eps = eps_fraction / (4.0 * c + 6.0);
  // Conditions from the proof: delta < eps/2, (2c+delta+1) delta < 1/16, and
  // the Riesz bound for b (with ||b|| <= c + delta) below eps/2. All are
  // monotone in delta, so bisect.
  auto ok = [&](double delta) {
    double db = (2.0 * c + delta + 1.0) * delta;
    return delta < t.eps / 2.0 && db < 1.0 / 16.0 && riesz_bound(db, c + delta) < t.eps / 2.0;
  };
  double lo = 0.0, hi = t.eps / 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  t.delta = lo;
  return t;
}

Threshold invertible_threshold(double c) {
  if (!(c > 0)) fail(ErrorKind::InvalidInput, "invertible_threshold: c must be positive");
  return {1.0 / (4.0 * c), 1.0 / (4.0 * c)};
}

IdempotentRounding round_idempotent_in(const CMatrix& e, const Subalg& b, const WedderburnData& w,
                                       const Tol& tol, double eps_fraction) {
  IdempotentRounding out;
  Nearest nb = nearest_amplified(e, b);
  out.residual = nb.resid_op;
  out.threshold = idempotent_threshold(std::max(op_norm(e), 1e-300), eps_fraction);
  if (!(out.residual < out.threshold.delta) && out.residual > tol.membership_tol) {
    fail(ErrorKind::NotCloseEnough,
         "residual " + std::to_string(out.residual) + " above threshold " + std::to_string(out.threshold.delta),
         out.residual);
  }
  RieszResult r = riesz_idempotent(nb.proj, tol);
  out.f = r.chi;
  out.distance = op_norm(e - out.f);
  out.cls = k0_class(out.f, w);
  return out;
}

InvertibleRounding round_invertible_in(const CMatrix& u, const Subalg& b, const Tol& tol, double c) {
  InvertibleRounding out;
  CMatrix ui = invert(u, tol);
  if (!(c > 0)) c = op_norm(ui);
  out.threshold = invertible_threshold(c);
  Nearest nb = nearest_amplified(u, b);
  out.residual = nb.resid_op;
  if (!(out.residual < out.threshold.delta)) {
    fail(ErrorKind::NotCloseEnough,
         "residual " + std::to_string(out.residual) + " above threshold " + std::to_string(out.threshold.delta),
         out.residual);
  }
  out.v = nb.proj;
  out.defect = op_norm(identity(u.rows()) - ui * out.v);
  if (!(out.defect < 0.25)) fail(ErrorKind::RoundingUnstable, "||1 - u^-1 v|| >= 1/4", out.defect);
  out.inv_norm = op_norm(invert(out.v, tol));
  if (!(out.inv_norm <= 2.0 * c * (1.0 + 1e-12)))
    fail(ErrorKind::RoundingUnstable, "||v^-1|| exceeds 2c", out.inv_norm);
  return out;
}

bool same_k1_component(const CMatrix& v, const CMatrix& vp, const Tol& tol) {
  return op_norm(identity(v.rows()) - invert(v, tol) * vp) < 1.0;
}

}  // namespace approxk
