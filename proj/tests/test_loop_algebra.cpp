#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "approxk/error.hpp"
#include "approxk/loop_algebra.hpp"
#include "approxk/loop_kernels.hpp"
#include "oracles.hpp"

using namespace approxk;

namespace {

constexpr double kPi = std::numbers::pi;

// Winding by summing principal phase increments of det, written against
// plain Eigen so it shares nothing with the library kernels.
double winding_oracle(const std::vector<CMatrix>& s) {
  double acc = 0.0;
  const size_t m = s.size();
  for (size_t j = 0; j < m; ++j) acc += std::arg(s[(j + 1) % m].determinant() / s[j].determinant());
  return acc / (2.0 * kPi);
}

LoopElem random_loop(Index grid, Index fiber, std::mt19937_64& g) {
  std::vector<CMatrix> s;
  for (Index j = 0; j < grid; ++j) s.push_back(oracle::gaussian(fiber, fiber, g));
  return LoopElem(std::move(s));
}

// Smooth loop of small matrices: a few random Fourier modes.
LoopElem smooth_loop(Index grid, Index fiber, double scale, std::mt19937_64& g) {
  CMatrix a = oracle::gaussian(fiber, fiber, g), b = oracle::gaussian(fiber, fiber, g),
          c = oracle::gaussian(fiber, fiber, g);
  double n = oracle::op_norm(a) + oracle::op_norm(b) + oracle::op_norm(c);
  return LoopElem::from_function(grid, [&](double t) -> CMatrix {
    return (scale / n) * (a + std::cos(t) * b + std::sin(2 * t) * c);
  });
}

// diag(z^a, z^b) conjugated by a constant unitary.
LoopElem diag_power(Index grid, int a, int b, const CMatrix& w) {
  return LoopElem::from_function(grid, [&](double t) -> CMatrix {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = std::polar(1.0, a * t);
    d(1, 1) = std::polar(1.0, b * t);
    return w * d * w.adjoint();
  });
}

}  // namespace

TEST(LoopAlgebra, WindingExamples) {
  EXPECT_EQ(winding_k1(LoopElem::constant(64, identity(2))).windings, std::vector<long long>{0});
  EXPECT_EQ(winding_k1(power_z(64, 1)).windings, std::vector<long long>{1});
  LoopElem u = LoopElem::from_function(96, [](double t) -> CMatrix {
    CMatrix d = identity(2);
    d(0, 0) = std::polar(1.0, -2.0 * t);
    return d;
  });
  EXPECT_EQ(winding_k1(u).windings, std::vector<long long>{-2});
  EXPECT_NEAR(winding_oracle(u.samples()), -2.0, 1e-12);
  // Per-block bookkeeping.
  EXPECT_EQ(winding_k1(u, {1, 1}).windings, (std::vector<long long>{-2, 0}));
}

TEST(LoopAlgebra, WindingMatchesOracleOnPowers) {
  std::mt19937_64 g(5);
  for (int n = -4; n <= 4; ++n) {
    CMatrix w = oracle::unitary(2, g);
    LoopElem u = diag_power(128, n, 1, w);
    EXPECT_EQ(winding_k1(u).windings[0], n + 1);
    EXPECT_NEAR(winding_oracle(u.samples()), double(n + 1), 1e-9);
  }
}

TEST(LoopAlgebra, GridTooCoarse) {
  try {
    winding_k1(power_z(16, 5));
    FAIL() << "expected GridTooCoarse";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
}

TEST(LoopAlgebra, WindingAdditiveProperty) {
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> k(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    int a = k(g), b = k(g), c = k(g), d = k(g);
    LoopElem u = diag_power(160, a, b, oracle::unitary(2, g));
    LoopElem v = diag_power(160, c, d, oracle::unitary(2, g));
    EXPECT_EQ(winding_k1(u * v).windings[0], a + b + c + d);
  }
}

TEST(LoopAlgebra, WindingHomotopyInvariantProperty) {
  std::mt19937_64 g(23);
  std::uniform_real_distribution<double> eps(0.0, 0.1);
  for (int trial = 0; trial < 40; ++trial) {
    LoopElem u = diag_power(200, 1, -2, oracle::unitary(2, g));
    LoopElem s = smooth_loop(200, 2, 1.0, g);
    double e = eps(g);
    LoopElem pert = s.map([e](const CMatrix& x) { return matrix_exp(e * x); });
    EXPECT_EQ(winding_k1(u * pert).windings[0], -1);
  }
}

TEST(LoopAlgebra, ArcIdealCounts) {
  LoopAlg a = loop_ambient(720);
  LoopAlg c = arc_ideal(a, -0.6, 0.6);
  EXPECT_EQ(c.support_count(), 431);
  long long brute = 0;
  for (Index j = 0; j < 720; ++j) {
    double t = theta(j, 720);
    if (t > kPi) t -= 2 * kPi;
    brute += std::abs(t) < 0.6 * kPi - 1e-12;
  }
  EXPECT_EQ(c.support_count(), brute);
  EXPECT_TRUE(arc_ideal(a, 0.0, 2.0).is_full());
  EXPECT_EQ(arc_ideal(a, 0.3, 0.3).support_count(), 0);
}

TEST(LoopAlgebra, BumpValues) {
  LoopAlg a = loop_ambient(720);
  LoopElem h = bump(a, -0.4, 0.4, 0.2);
  EXPECT_DOUBLE_EQ(h[0](0, 0).real(), 1.0);
  EXPECT_DOUBLE_EQ(h[360](0, 0).real(), 0.0);
  EXPECT_NEAR(h[180](0, 0).real(), 0.5, 1e-12);
  for (Index j = 0; j < 720; ++j) {
    double v = h[j](0, 0).real();
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  LoopElem one = bump(a, 0.0, 2.0, 0.0);
  EXPECT_EQ(norm(one - LoopElem::constant(720, identity(1))), 0.0);
}

TEST(LoopAlgebra, BumpProductLivesOnRamps) {
  LoopAlg a = loop_ambient(720);
  LoopElem h = bump(a, -0.4, 0.4, 0.2);
  LoopElem hh = h * (identity_like(h) - h);
  LoopAlg right = arc_ideal(a, 0.4, 0.6), left = arc_ideal(a, -0.6, -0.4);
  Index nonzero = 0;
  for (Index j = 0; j < 720; ++j) {
    if (hh[j].norm() == 0.0) continue;
    ++nonzero;
    EXPECT_TRUE(right.in_support(j) || left.in_support(j)) << j;
  }
  EXPECT_GT(nonzero, 0);
}

TEST(LoopAlgebra, BumpCommutesProperty) {
  std::mt19937_64 g(3);
  LoopAlg a = loop_ambient(128, 3);
  LoopElem h = bump(a, -0.4, 0.4, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    LoopElem x = random_loop(128, 3, g);
    EXPECT_LE(norm(h * x - x * h), 1e-15 * norm(x));
  }
}

TEST(LoopAlgebra, EpsInExamples) {
  LoopAlg a = loop_ambient(720);
  LoopAlg c = arc_ideal(a, -0.6, 0.6);
  LoopElem h = bump(a, -0.4, 0.4, 0.2);
  LoopEpsIn in = loop_eps_in(h, c, 0.0);
  EXPECT_TRUE(in.inside);
  EXPECT_EQ(in.residual, 0.0);
  LoopEpsIn one = loop_eps_in(LoopElem::constant(720, identity(1)), c, 0.5);
  EXPECT_FALSE(one.inside);
  EXPECT_DOUBLE_EQ(one.residual, 1.0);
  // h x sits in C exactly for any x.
  std::mt19937_64 g(8);
  LoopElem x = random_loop(720, 1, g);
  EXPECT_EQ(loop_eps_in(h * x, c, 0.0).residual, 0.0);
}

TEST(LoopAlgebra, NearestIsTruncation) {
  std::mt19937_64 g(12);
  LoopAlg a = loop_ambient(64);
  LoopAlg c = arc_ideal(a, -0.5, 0.5);
  LoopElem x = random_loop(64, 2, g);
  LoopNearest n = nearest_amplified(x, c);
  double worst = 0.0;
  for (Index j = 0; j < 64; ++j) {
    if (c.in_support(j)) {
      EXPECT_EQ((n.proj[j] - x[j]).norm(), 0.0);
    } else {
      EXPECT_EQ(n.proj[j].norm(), 0.0);
      worst = std::max(worst, oracle::op_norm(x[j]));
    }
  }
  EXPECT_NEAR(n.resid_op, worst, 1e-10 * worst);
}

TEST(LoopAlgebra, ValidationErrors) {
  EXPECT_THROW(loop_ambient(8), Error);
  LoopAlg a = loop_ambient(64);
  a.mask.assign(64, 1);
  for (int j : {5, 20, 40}) a.mask[j] = 0;
  EXPECT_THROW(a.validate(), Error);  // three arcs
}

TEST(LoopAlgebra, ArcTrivializationExamples) {
  LoopAlg a = loop_ambient(720);
  LoopAlg cap = intersect(arc_ideal(a, -0.6, 0.6), arc_ideal(a, 0.4, 1.6));
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  ArcTrivialization t0 = arc_k0_trivialize(LoopElem::constant(720, p), cap);
  EXPECT_EQ(t0.scalar_rank, 1);
  EXPECT_LE(norm(t0.conjugator - LoopElem::constant(720, identity(2))), 1e-12);
  ArcTrivialization tz = arc_k0_trivialize(LoopElem::constant(720, zeros(2)), cap);
  EXPECT_EQ(tz.scalar_rank, 0);

  // e = w diag(1,0) w^-1 with w = exp(s X), s a bump inside the cap.
  LoopElem s = bump(a, 0.48, 0.52, 0.06);
  CMatrix gen(2, 2);
  gen << 0.3, 1.2, -0.7, 0.1;
  LoopElem w = LoopElem::from_function(720, [&](double) { return identity(2); });
  for (Index j = 0; j < 720; ++j) w[j] = matrix_exp(s[j](0, 0) * gen);
  LoopElem e = w * LoopElem::constant(720, p) * inverse(w, {});
  ArcTrivialization t1 = arc_k0_trivialize(e, cap);
  EXPECT_EQ(t1.scalar_rank, 1);
  EXPECT_LT(t1.residual, 1e-5);
  // The conjugator does what it says.
  LoopElem z = t1.conjugator;
  EXPECT_LT(norm(z * LoopElem::constant(720, t1.scalar_value) * inverse(z, {}) - e), 1e-5);
}

TEST(LoopKernels, ParallelMatchesSerial) {
  std::mt19937_64 g(99);
  for (Index grid : {16, 97, 512}) {
    LoopElem a = random_loop(grid, 3, g), b = random_loop(grid, 3, g);
    const auto& sa = a.samples();
    const auto& sb = b.samples();
    auto m1 = kernels::serial::mul(sa, sb), m2 = kernels::parallel::mul(sa, sb);
    auto a1 = kernels::serial::add(sa, sb, cplx(0.5, -1)), a2 = kernels::parallel::add(sa, sb, cplx(0.5, -1));
    auto i1 = kernels::serial::inverse(sa, {}), i2 = kernels::parallel::inverse(sa, {});
    for (size_t j = 0; j < sa.size(); ++j) {
      EXPECT_EQ(m1[j], m2[j]);
      EXPECT_EQ(a1[j], a2[j]);
      EXPECT_EQ(i1[j], i2[j]);
    }
    EXPECT_EQ(kernels::serial::sup_norm(sa), kernels::parallel::sup_norm(sa));
    std::vector<char> keep(sa.size());
    for (size_t j = 0; j < keep.size(); ++j) keep[j] = j % 3 == 0;
    EXPECT_EQ(kernels::serial::sup_norm_masked(sa, keep), kernels::parallel::sup_norm_masked(sa, keep));
    EXPECT_EQ(kernels::serial::det_phase_steps(sa), kernels::parallel::det_phase_steps(sa));
  }
}

TEST(LoopKernels, WindingIndependentOfThreadCount) {
  std::mt19937_64 g(4);
  LoopElem u = diag_power(600, 3, -1, oracle::unitary(2, g));
  std::vector<long long> seen;
  for (int t : {1, 2, 4, 7}) {
    kernels::set_threads(t);
    seen.push_back(winding_k1(u).windings[0]);
  }
  kernels::set_threads(0);
  for (long long w : seen) EXPECT_EQ(w, 2);
}

TEST(LoopKernels, InverseThrowsOnSingularSample) {
  std::vector<CMatrix> s(20, identity(2));
  s[7] = zeros(2);
  EXPECT_THROW(kernels::parallel::inverse(s, {}), Error);
  EXPECT_THROW(kernels::serial::inverse(s, {}), Error);
}
