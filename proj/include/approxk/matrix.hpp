#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "approxk/error.hpp"

namespace approxk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

struct Tol {
  double membership_tol = 1e-9;
  double rank_rel_tol = 1e-8;
  double invert_cond_max = 1e12;

  void validate() const;
  // Defaults, with membership_tol overridden by APPROXK_TOL when set.
  static Tol from_env();
};

bool all_finite(const CMatrix& m);
void require_finite(const CMatrix& m, const char* where);
void require_square(const CMatrix& m, const char* where);

double op_norm(const CMatrix& m);
double hs_norm(const CMatrix& m);
double trace_norm(const CMatrix& m);
Eigen::VectorXd singular_values(const CMatrix& m);
double cond(const CMatrix& m);

CMatrix invert(const CMatrix& m, const Tol& tol = {});

struct EigenDecomposition {
  CVector values;
  CMatrix vectors;     // columns normalized
  double basis_cond;   // condition number of `vectors`
};

// Throws DefectiveMatrix when the eigenvector basis is numerically singular.
EigenDecomposition eig(const CMatrix& m);
// Same, but never throws on defectiveness; callers inspect basis_cond.
EigenDecomposition eig_unchecked(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix identity(Index n);
CMatrix zeros(Index n);
CMatrix unit(Index n, Index i, Index j);
CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix rotation(double angle);
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);
CMatrix direct_sum(std::span<const CMatrix> parts);
CMatrix block2x2(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d);

CMatrix matrix_exp(const CMatrix& m);
// Principal logarithm after rotating the spectrum away from the negative axis;
// always a primary matrix function of `m`, so it commutes with m's commutant.
CMatrix matrix_log(const CMatrix& m);
// Principal square root of a Hermitian positive semidefinite matrix, and the
// general m-th root of the same.
CMatrix psd_root(const CMatrix& m, int degree);
// Polar part x (x*x)^{-1/2} on the support of x.
CMatrix polar_part(const CMatrix& x, double rel_cut = 1e-10);

CMatrix random_gaussian(Index rows, Index cols, Rng& rng);
CMatrix random_hermitian(Index n, Rng& rng);
CMatrix random_unitary(Index n, Rng& rng);
// Random invertible with condition number exactly `target_cond` (in op norm)
// and largest singular value 1.
CMatrix random_invertible(Index n, double target_cond, Rng& rng);

// Column-major vectorization used for all Hilbert-Schmidt geometry.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Index n);

// Generic element helpers shared with the loop model.
inline Index dim(const CMatrix& x) { return x.rows(); }
inline double norm(const CMatrix& x) { return op_norm(x); }
inline CMatrix identity_like(const CMatrix& x) { return identity(x.rows()); }
inline CMatrix zeros_like(const CMatrix& x) { return zeros(x.rows()); }
inline CMatrix inverse(const CMatrix& x, const Tol& tol) { return invert(x, tol); }
inline CMatrix adjoint(const CMatrix& x) { return x.adjoint(); }
inline CMatrix sub_block(const CMatrix& x, Index r, Index c, Index rows, Index cols) {
  return x.block(r, c, rows, cols);
}
// kron(1_n, h): the amplification of h in M_n(A).
CMatrix amplify_diag(const CMatrix& h, Index n);
CMatrix kron_right(const CMatrix& x, const CMatrix& p);

}  // namespace approxk
