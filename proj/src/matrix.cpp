#include "approxk/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace approxk {

void Tol::validate() const {
  if (!(membership_tol > 0) || !(rank_rel_tol > 0) || !(invert_cond_max > 0)) {
    fail(ErrorKind::InvalidInput, "tolerances must be strictly positive");
  }
}

Tol Tol::from_env() {
  Tol t;
  if (const char* env = std::getenv("APPROXK_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || !(v > 0) || !std::isfinite(v)) {
      fail(ErrorKind::InvalidInput, std::string("APPROXK_TOL is not a positive number: ") + env);
    }
    t.membership_tol = v;
  }
  return t;
}

bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

void require_finite(const CMatrix& m, const char* where) {
  if (m.size() == 0) fail(ErrorKind::InvalidInput, std::string(where) + ": empty matrix");
  if (!all_finite(m)) fail(ErrorKind::InvalidInput, std::string(where) + ": non-finite entry");
}

void require_square(const CMatrix& m, const char* where) {
  require_finite(m, where);
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidInput, std::string(where) + ": not square");
}

Eigen::VectorXd singular_values(const CMatrix& m) {
  if (m.rows() > 64 || m.cols() > 64) {
    Eigen::VectorXd s = Eigen::BDCSVD<CMatrix>(m).singularValues();
    if (s.allFinite()) return s;
  }
  return Eigen::JacobiSVD<CMatrix>(m).singularValues();
}

double op_norm(const CMatrix& m) {
  require_finite(m, "op_norm");
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  if (m.rows() == 2 && m.cols() == 2) {
    // Largest singular value of a 2x2 from the invariants of m*m.
    double f2 = m.squaredNorm();
    double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
  }
  return singular_values(m)(0);
}

double hs_norm(const CMatrix& m) { return m.norm(); }

double trace_norm(const CMatrix& m) { return singular_values(m).sum(); }

double cond(const CMatrix& m) {
  require_square(m, "cond");
  Eigen::VectorXd s = singular_values(m);
  double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

CMatrix invert(const CMatrix& m, const Tol& tol) {
  require_square(m, "invert");
  if (m.rows() == 1) {
    if (m(0, 0) == cplx(0.0)) fail(ErrorKind::NotInvertible, "zero scalar", INFINITY);
    return CMatrix::Constant(1, 1, 1.0 / m(0, 0));
  }
  double c = cond(m);
  if (!(c <= tol.invert_cond_max)) {
    fail(ErrorKind::NotInvertible, "condition estimate " + std::to_string(c), c);
  }
  return m.fullPivLu().inverse();
}

EigenDecomposition eig_unchecked(const CMatrix& m) {
  require_square(m, "eig");
  Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
  if (solver.info() != Eigen::Success) fail(ErrorKind::DefectiveMatrix, "eigensolver did not converge");
  EigenDecomposition out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  for (Index j = 0; j < out.vectors.cols(); ++j) {
    double nj = out.vectors.col(j).norm();
    if (nj > 0) out.vectors.col(j) /= nj;
  }
  out.basis_cond = cond(out.vectors);
  return out;
}

EigenDecomposition eig(const CMatrix& m) {
  EigenDecomposition d = eig_unchecked(m);
  if (!(d.basis_cond < 1e8)) {
    fail(ErrorKind::DefectiveMatrix, "eigenvector basis condition " + std::to_string(d.basis_cond),
         d.basis_cond);
  }
  CMatrix recon = d.vectors * d.values.asDiagonal() * d.vectors.inverse();
  double scale = std::max(1.0, op_norm(m));
  if (op_norm(recon - m) > 1e-8 * scale * std::max(1.0, d.basis_cond)) {
    fail(ErrorKind::DefectiveMatrix, "eigendecomposition residual too large");
  }
  return d;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix identity(Index n) { return CMatrix::Identity(n, n); }
CMatrix zeros(Index n) { return CMatrix::Zero(n, n); }

CMatrix unit(Index n, Index i, Index j) {
  CMatrix e = CMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix rotation(double angle) {
  CMatrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

CMatrix direct_sum(std::span<const CMatrix> parts) {
  Index r = 0, c = 0;
  for (const auto& p : parts) { r += p.rows(); c += p.cols(); }
  CMatrix out = CMatrix::Zero(r, c);
  r = c = 0;
  for (const auto& p : parts) {
    out.block(r, c, p.rows(), p.cols()) = p;
    r += p.rows();
    c += p.cols();
  }
  return out;
}

CMatrix block2x2(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols()) {
    fail(ErrorKind::InvalidInput, "block2x2: incompatible block sizes");
  }
  CMatrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

CMatrix matrix_exp(const CMatrix& m) {
  require_square(m, "matrix_exp");
  return m.exp();
}

CMatrix matrix_log(const CMatrix& m) {
  require_square(m, "matrix_log");
  CVector ev = Eigen::ComplexEigenSolver<CMatrix>(m, false).eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) == 0.0) fail(ErrorKind::NotInvertible, "matrix_log of singular matrix");
  }
  // Pick the rotation e^{i phi} that keeps the spectrum farthest from the
  // branch cut, then undo it.
  double best_phi = 0.0, best_gap = -1.0;
  for (int k = 0; k < 16; ++k) {
    double phi = 2.0 * std::numbers::pi * k / 16.0;
    double gap = INFINITY;
    for (Index i = 0; i < ev.size(); ++i) {
      double a = std::arg(ev(i) * std::polar(1.0, phi));
      gap = std::min(gap, std::numbers::pi - std::abs(a));
    }
    if (gap > best_gap + 1e-12) { best_gap = gap; best_phi = phi; }
  }
  cplx rot = std::polar(1.0, best_phi);
  CMatrix rotated = rot * m;
  CMatrix l = rotated.log();
  return l - cplx(0.0, best_phi) * identity(m.rows());
}

CMatrix psd_root(const CMatrix& m, int degree) {
  require_square(m, "psd_root");
  if (degree < 1) fail(ErrorKind::InvalidInput, "psd_root degree must be positive");
  Eigen::SelfAdjointEigenSolver<CMatrix> s(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = s.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0 ? std::pow(ev(i), 1.0 / degree) : 0.0;
  return s.eigenvectors() * ev.cast<cplx>().asDiagonal() * s.eigenvectors().adjoint();
}

CMatrix polar_part(const CMatrix& x, double rel_cut) {
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double cut = s.size() ? rel_cut * s(0) : 0.0;
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) > cut) out += svd.matrixU().col(k) * svd.matrixV().col(k).adjoint();
  }
  return out;
}

CMatrix random_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      double re = g(rng);
      double im = g(rng);
      m(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return m;
}

CMatrix random_hermitian(Index n, Rng& rng) {
  CMatrix g = random_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

CMatrix random_unitary(Index n, Rng& rng) {
  CMatrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

CMatrix random_invertible(Index n, double target_cond, Rng& rng) {
  CMatrix u = random_unitary(n, rng);
  CMatrix v = random_unitary(n, rng);
  Eigen::VectorXd s(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < n; ++i) s(i) = std::pow(target_cond, -unif(rng));
  s(0) = 1.0;
  if (n > 1) s(n - 1) = 1.0 / target_cond;
  return u * s.cast<cplx>().asDiagonal() * v.adjoint();
}

CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unvec(const CVector& v, Index n) { return Eigen::Map<const CMatrix>(v.data(), n, n); }

CMatrix amplify_diag(const CMatrix& h, Index n) { return kron(identity(n), h); }

CMatrix kron_right(const CMatrix& x, const CMatrix& p) { return kron(x, p); }

}  // namespace approxk
