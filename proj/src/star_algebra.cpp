#include "approxk/star_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace approxk {

namespace {

std::vector<CMatrix> orthonormal_span(Index n, const CMatrix& columns, const Tol& tol) {
  std::vector<CMatrix> out;
  if (columns.cols() == 0) return out;
  Eigen::BDCSVD<CMatrix> bdc(columns, Eigen::ComputeThinU);
  CMatrix u = bdc.matrixU();
  Eigen::VectorXd s = bdc.singularValues();
  if (!u.allFinite() || !s.allFinite()) {
    // BDCSVD occasionally returns NaN on complex input; Jacobi is slower but reliable.
    Eigen::JacobiSVD<CMatrix> jac(columns, Eigen::ComputeThinU);
    u = jac.matrixU();
    s = jac.singularValues();
  }
  if (s.size() == 0 || s(0) < 1e-14) return out;
  double cut = tol.rank_rel_tol * s(0);
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) > cut) out.push_back(unvec(u.col(k), n));
  }
  return out;
}

CMatrix stack(const std::vector<CMatrix>& elems, Index n) {
  CMatrix m(n * n, static_cast<Index>(elems.size()));
  for (size_t i = 0; i < elems.size(); ++i) m.col(static_cast<Index>(i)) = vec(elems[i]);
  return m;
}

}  // namespace

Subspace::Subspace(Index ambient_dim) : n_(ambient_dim), frame_(ambient_dim * ambient_dim, 0) {
  if (ambient_dim < 1) fail(ErrorKind::InvalidInput, "ambient dimension must be positive");
}

void Subspace::set_basis(std::vector<CMatrix> basis) {
  basis_ = std::move(basis);
  frame_ = stack(basis_, n_);
}

Subspace Subspace::span(Index ambient_dim, std::span<const CMatrix> elems, const Tol& tol) {
  Subspace s(ambient_dim);
  std::vector<CMatrix> v;
  for (const auto& e : elems) {
    if (e.rows() != ambient_dim || e.cols() != ambient_dim)
      fail(ErrorKind::InvalidInput, "span: element outside the ambient M_N");
    require_finite(e, "span");
    v.push_back(e);
  }
  s.set_basis(orthonormal_span(ambient_dim, stack(v, ambient_dim), tol));
  return s;
}

Subspace Subspace::from_orthonormal(Index ambient_dim, std::vector<CMatrix> basis) {
  Subspace s(ambient_dim);
  s.set_basis(std::move(basis));
  if (s.gram_defect() > 1e-10) fail(ErrorKind::InvalidInput, "basis is not orthonormal");
  return s;
}

double Subspace::gram_defect() const {
  if (basis_.empty()) return 0.0;
  CMatrix g = frame_.adjoint() * frame_;
  return (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

CVector Subspace::coords(const CMatrix& x) const { return frame_.adjoint() * vec(x); }

CMatrix Subspace::element(const CVector& coeffs) const {
  if (basis_.empty()) return zeros(n_);
  return unvec(frame_ * coeffs, n_);
}

CMatrix Subspace::project(const CMatrix& x) const {
  if (x.rows() != n_ || x.cols() != n_) fail(ErrorKind::InvalidInput, "project: dimension mismatch");
  if (basis_.empty()) return zeros(n_);
  return element(coords(x));
}

CMatrix Subspace::project_amplified(const CMatrix& x) const {
  if (x.rows() != x.cols() || x.rows() % n_ != 0)
    fail(ErrorKind::InvalidInput, "project_amplified: dimension is not a multiple of N");
  Index k = x.rows() / n_;
  CMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      out.block(i * n_, j * n_, n_, n_) = project(CMatrix(x.block(i * n_, j * n_, n_, n_)));
  return out;
}

CMatrix Subspace::random_element(Rng& rng) const {
  if (basis_.empty()) return zeros(n_);
  return element(random_gaussian(dim(), 1, rng).col(0));
}

Subalg Subalg::from_basis(Index ambient_dim, std::span<const CMatrix> generators, const Tol& tol) {
  std::vector<CMatrix> seed;
  for (const auto& g : generators) {
    seed.push_back(g);
    seed.push_back(g.adjoint());
  }
  Subspace cur = Subspace::span(ambient_dim, seed, tol);
  const Index cap = ambient_dim * ambient_dim;
  for (Index iter = 0; iter <= cap; ++iter) {
    std::vector<CMatrix> cand = cur.basis();
    const auto& b = cur.basis();
    for (const auto& x : b)
      for (const auto& y : b) cand.push_back(x * y);
    Subspace next = Subspace::span(ambient_dim, cand, tol);
    if (next.dim() == cur.dim()) {
      Subalg out;
      out.n_ = ambient_dim;
      out.set_basis(next.basis());
      out.finish(tol);
      return out;
    }
    if (next.dim() > cap) break;
    cur = next;
  }
  fail(ErrorKind::ClosureFailure, "generated algebra did not stabilize");
}

Subalg Subalg::from_span(const Subspace& s, const Tol& tol) {
  Subalg out;
  out.n_ = s.ambient_dim();
  out.set_basis(s.basis());
  out.finish(tol);
  return out;
}

void Subalg::finish(const Tol& tol) {
  const Index d = dim();
  double worst = 0.0;
  auto dist = [&](const CMatrix& x) { return hs_norm(x - project(x)); };
  for (Index i = 0; i < d; ++i) worst = std::max(worst, dist(basis_[i].adjoint()));
  if (d * d <= 4096) {
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) worst = std::max(worst, dist(basis_[i] * basis_[j]));
  } else {
    Rng rng(0x5eed);
    std::uniform_int_distribution<Index> pick(0, d - 1);
    for (int t = 0; t < 2000; ++t) worst = std::max(worst, dist(basis_[pick(rng)] * basis_[pick(rng)]));
  }
  closure_residual_ = worst;
  if (worst > tol.membership_tol) {
    fail(ErrorKind::ClosureFailure, "span is not a *-algebra, residual " + std::to_string(worst), worst);
  }
  unit_ = zeros(n_);
  if (d > 0) {
    CMatrix acc = zeros(n_);
    for (const auto& b : basis_) acc += b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (acc + acc.adjoint()));
    double top = es.eigenvalues().maxCoeff();
    for (Index k = 0; k < n_; ++k) {
      if (es.eigenvalues()(k) > tol.rank_rel_tol * top)
        unit_ += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    }
  }
  unital_ = d > 0 && hs_norm(identity(n_) - project(identity(n_))) <= tol.membership_tol * std::sqrt(double(n_));
}

Nearest nearest(const CMatrix& x, const Subspace& s) {
  require_finite(x, "nearest");
  Nearest out;
  out.proj = s.project(x);
  out.resid_op = op_norm(x - out.proj);
  return out;
}

Nearest nearest_amplified(const CMatrix& x, const Subspace& s) {
  require_finite(x, "nearest_amplified");
  Nearest out;
  out.proj = s.project_amplified(x);
  out.resid_op = op_norm(x - out.proj);
  return out;
}

EpsIn eps_in(const CMatrix& x, const Subspace& s, double eps) {
  Nearest n = x.rows() == s.ambient_dim() ? nearest(x, s) : nearest_amplified(x, s);
  return {n.resid_op <= eps, n.proj, n.resid_op};
}

Subalg unitize(const Subalg& s, const Tol& tol) {
  if (s.is_unital_in_ambient()) return s;
  std::vector<CMatrix> elems = s.basis();
  elems.push_back(identity(s.ambient_dim()));
  return Subalg::from_span(Subspace::span(s.ambient_dim(), elems, tol), tol);
}

Subalg amplify(const Subalg& s, Index n, const Tol& tol) {
  if (n < 1) fail(ErrorKind::InvalidInput, "amplify: n must be positive");
  std::vector<CMatrix> basis;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (const auto& b : s.basis()) basis.push_back(kron(unit(n, i, j), b));
  return Subalg::from_span(Subspace::from_orthonormal(n * s.ambient_dim(), std::move(basis)), tol);
}

Subalg tensor_with_full(const Subalg& s, Index m, const Tol& tol) {
  if (m < 1) fail(ErrorKind::InvalidInput, "tensor_with_full: m must be positive");
  std::vector<CMatrix> basis;
  for (const auto& b : s.basis())
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) basis.push_back(kron(b, unit(m, i, j)));
  return Subalg::from_span(Subspace::from_orthonormal(m * s.ambient_dim(), std::move(basis)), tol);
}

Subalg intersect(const Subalg& s, const Subalg& t, const Tol& tol) {
  if (s.ambient_dim() != t.ambient_dim()) fail(ErrorKind::InvalidInput, "intersect: ambient mismatch");
  const Index n = s.ambient_dim();
  if (s.dim() == 0 || t.dim() == 0) return Subalg::from_span(Subspace(n), tol);
  const CMatrix& u = s.frame();
  const CMatrix& v = t.frame();
  CMatrix resid = u - v * (v.adjoint() * u);
  Eigen::JacobiSVD<CMatrix> svd(resid, Eigen::ComputeFullV);
  // Singular values are sines of principal angles; JacobiSVD only returns
  // min(rows, cols) of them, pad the rest with zeros.
  Eigen::VectorXd sines = Eigen::VectorXd::Zero(u.cols());
  sines.head(svd.singularValues().size()) = svd.singularValues();
  const double cut = tol.rank_rel_tol;
  std::vector<CMatrix> elems;
  for (Index k = 0; k < u.cols(); ++k) {
    double sk = sines(k);
    if (sk > cut / 10 && sk < cut * 10) {
      fail(ErrorKind::AmbiguousIntersection, "principal angle sine " + std::to_string(sk) + " near cutoff", sk);
    }
    if (sk <= cut) elems.push_back(unvec(u * svd.matrixV().col(k), n));
  }
  return Subalg::from_span(Subspace::span(n, elems, tol), tol);
}

Subspace enlarge_subspace(const Subspace& x0, int n_pow, const Tol& tol) {
  if (n_pow < 2) fail(ErrorKind::InvalidInput, "enlarge_subspace: N_pow must be at least 2");
  const Index n = x0.ambient_dim();
  std::vector<CMatrix> elems;
  auto positive_parts = [&](const CMatrix& herm) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (herm + herm.adjoint()));
    if (es.info() != Eigen::Success) fail(ErrorKind::DefectiveMatrix, "positive part decomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXd pos = ev.cwiseMax(0.0), neg = (-ev).cwiseMax(0.0);
    const CMatrix& q = es.eigenvectors();
    std::vector<CMatrix> parts;
    for (const Eigen::VectorXd* d : {&pos, &neg}) {
      CMatrix part = q * d->cast<cplx>().asDiagonal() * q.adjoint();
      double nrm = d->maxCoeff();
      if (nrm > 1e-14) parts.push_back(part / nrm);
    }
    return parts;
  };
  for (const auto& b : x0.basis()) {
    double nb = op_norm(b);
    if (nb == 0) continue;
    CMatrix x = b / nb;
    CMatrix re = 0.5 * (x + x.adjoint());
    CMatrix im = cplx(0, -0.5) * (x - x.adjoint());
    for (const CMatrix* h : {&re, &im}) {
      for (const auto& p : positive_parts(*h)) {
        for (int m = 1; m <= n_pow + 1; ++m) elems.push_back(psd_root(p, m));
      }
    }
  }
  for (const auto& b : x0.basis()) elems.push_back(b);
  return Subspace::span(n, elems, tol);
}

Subalg full_algebra(Index n) {
  std::vector<CMatrix> basis;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) basis.push_back(unit(n, i, j));
  return Subalg::from_span(Subspace::from_orthonormal(n, std::move(basis)));
}

Subalg diagonal_algebra(Index n) {
  std::vector<CMatrix> basis;
  for (Index i = 0; i < n; ++i) basis.push_back(unit(n, i, i));
  return Subalg::from_span(Subspace::from_orthonormal(n, std::move(basis)));
}

Subalg left_tensor_factor(Index a, Index b) {
  std::vector<CMatrix> basis;
  for (Index j = 0; j < a; ++j)
    for (Index i = 0; i < a; ++i) basis.push_back(kron(unit(a, i, j), identity(b)) / std::sqrt(double(b)));
  return Subalg::from_span(Subspace::from_orthonormal(a * b, std::move(basis)));
}

Subalg conjugated(const Subalg& s, const CMatrix& w, const Tol& tol) {
  if (w.rows() != s.ambient_dim()) fail(ErrorKind::InvalidInput, "conjugated: unitary has wrong size");
  if (op_norm(w * w.adjoint() - identity(w.rows())) > 1e-10)
    fail(ErrorKind::InvalidInput, "conjugated: parameter is not unitary");
  std::vector<CMatrix> basis;
  for (const auto& b : s.basis()) basis.push_back(w * b * w.adjoint());
  return Subalg::from_span(Subspace::from_orthonormal(s.ambient_dim(), std::move(basis)), tol);
}

}  // namespace approxk
