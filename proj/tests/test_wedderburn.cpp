#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "approxk/error.hpp"
#include "approxk/wedderburn.hpp"
#include "oracles.hpp"

using namespace approxk;

namespace {

std::vector<BlockSig> sorted(std::vector<BlockSig> b) {
  std::sort(b.begin(), b.end());
  return b;
}

// Algebra V (M_{d_1} (x) 1_{m_1} + ... ) V* in M_N with N = sum d_i m_i (plus
// `pad` zero rows), and the block embedding used for the rank oracle.
struct Known {
  Subalg alg;
  std::vector<BlockSig> sig;
  CMatrix v;
  Index n = 0;
  std::vector<Index> offsets;
};

Known known(const std::vector<BlockSig>& sig, Index pad, std::mt19937_64& g) {
  Known k;
  k.sig = sig;
  Index n = pad;
  for (const auto& b : sig) {
    k.offsets.push_back(n - pad);
    n += b.d * b.m;
  }
  k.n = n;
  k.v = oracle::unitary(n, g);
  std::vector<CMatrix> gens;
  for (size_t i = 0; i < sig.size(); ++i)
    for (Index a = 0; a < sig[i].d; ++a)
      for (Index b = 0; b < sig[i].d; ++b) {
        CMatrix e = CMatrix::Zero(n, n);
        e.block(k.offsets[i], k.offsets[i], sig[i].d * sig[i].m, sig[i].d * sig[i].m) =
            oracle::kron(unit(sig[i].d, a, b), CMatrix::Identity(sig[i].m, sig[i].m));
        gens.push_back(k.v * e * k.v.adjoint());
      }
  k.alg = Subalg::from_basis(n, gens);
  return k;
}

}  // namespace

// Random unitary conjugates of known block algebras give back their block
// signature exactly.
TEST(Wedderburn, RecoversBlockSignatures) {
  std::mt19937_64 g(31);
  const std::vector<std::vector<BlockSig>> shapes = {
      {{2, 2}}, {{1, 2}, {1, 2}}, {{1, 1}, {1, 1}, {1, 1}}, {{2, 1}, {1, 1}}, {{1, 3}}, {{2, 1}, {1, 2}}, {{3, 1}}};
  int runs = 0;
  for (int k = 0; k < 100; ++k) {
    const auto& shape = shapes[static_cast<size_t>(k) % shapes.size()];
    Known kn = known(shape, 0, g);
    WedderburnData w = decompose(kn.alg, {}, g());
    EXPECT_EQ(sorted(w.blocks), sorted(shape)) << "shape " << k % shapes.size();
    ++runs;
  }
  EXPECT_EQ(runs, 100);
}

TEST(Wedderburn, TwoByTwoTensorOneInsideFour) {
  WedderburnData w = decompose(left_tensor_factor(2, 2), {}, 3);
  ASSERT_EQ(w.blocks.size(), 1u);
  EXPECT_EQ(w.blocks[0], (BlockSig{2, 2}));
}

TEST(Wedderburn, SpanOfTwoProjections) {
  std::vector<CMatrix> gens{kron(unit(2, 0, 0), identity(2)), kron(unit(2, 1, 1), identity(2))};
  WedderburnData w = decompose(Subalg::from_basis(4, gens), {}, 4);
  EXPECT_EQ(sorted(w.blocks), (std::vector<BlockSig>{{1, 2}, {1, 2}}));
}

TEST(Wedderburn, CentralProjectionsAreCentralAndSumToUnit) {
  std::mt19937_64 g(32);
  Known kn = known({{2, 1}, {1, 2}}, 1, g);
  WedderburnData w = decompose(kn.alg, {}, 5);
  CMatrix sum = CMatrix::Zero(kn.n, kn.n);
  for (const auto& z : w.central_projections) {
    sum += z;
    EXPECT_LT((z * z - z).norm(), 1e-9);
    for (const auto& b : kn.alg.basis()) EXPECT_LT((z * b - b * z).norm(), 1e-9);
  }
  EXPECT_LT((sum - kn.alg.unit()).norm(), 1e-9);
}

TEST(Wedderburn, UnitizationMarksAugmentation) {
  std::mt19937_64 g(33);
  Known kn = known({{2, 1}}, 2, g);
  WedderburnData w = decompose_unitized(kn.alg, {}, 6);
  ASSERT_TRUE(w.augmentation.has_value());
  EXPECT_EQ(w.blocks.size(), 2u);
  EXPECT_EQ(w.blocks[*w.augmentation], (BlockSig{1, 2}));
}

// Class of V diag(p_1 (x) 1, ...) V* is the rank vector (rank p_i).
TEST(Wedderburn, ClassMatchesRankOracle) {
  std::mt19937_64 g(34);
  for (int k = 0; k < 30; ++k) {
    Known kn = known({{2, 1}, {1, 2}, {3, 1}}, 0, g);
    WedderburnData w = decompose(kn.alg, {}, g());
    CMatrix e = CMatrix::Zero(kn.n, kn.n);
    std::vector<long long> want;
    for (size_t i = 0; i < kn.sig.size(); ++i) {
      const auto& b = kn.sig[i];
      std::uniform_int_distribution<int> r(0, static_cast<int>(b.d));
      int rk = r(g);
      CMatrix s = oracle::gaussian(b.d, b.d, g) + 3.0 * CMatrix::Identity(b.d, b.d);
      CMatrix p = CMatrix::Zero(b.d, b.d);
      for (int j = 0; j < rk; ++j) p(j, j) = 1.0;
      p = s * p * s.inverse();
      e.block(kn.offsets[i], kn.offsets[i], b.d * b.m, b.d * b.m) = oracle::kron(p, CMatrix::Identity(b.m, b.m));
      want.push_back(oracle::rank(p));
    }
    e = kn.v * e * kn.v.adjoint();
    K0Vec cls = k0_class(e, w);
    // Map our block order to the decomposition's by signature + rank of z_i e.
    for (size_t i = 0; i < w.blocks.size(); ++i) {
      // z_i e is idempotent, so its rank is its trace; an SVD cut would count noise when z_i e = 0.
      long long r = std::llround((w.central_projections[i] * e).trace().real());
      EXPECT_EQ(cls.entries[i] * w.blocks[i].m, r);
    }
    long long total = 0;
    for (size_t i = 0; i < kn.sig.size(); ++i) total += want[i] * kn.sig[i].m;
    EXPECT_EQ(oracle::rank(e), total);
  }
}

TEST(Wedderburn, AmplifiedClassesAdd) {
  WedderburnData w = decompose(full_algebra(2), {}, 7);
  CMatrix p = unit(2, 0, 0);
  CMatrix e = direct_sum(p, identity(2));
  EXPECT_EQ(k0_class(e, w).entries, (std::vector<long long>{3}));
}

TEST(Wedderburn, NonIdempotentIsRejected) {
  WedderburnData w = decompose(full_algebra(2), {}, 8);
  EXPECT_THROW(k0_class(0.5 * identity(2), w), Error);
}

TEST(Wedderburn, K0VecArithmetic) {
  K0Vec a{{1, -1}, {{1, 2}, {1, 2}}, std::nullopt};
  K0Vec b{{2, 0}, {{1, 2}, {1, 2}}, std::nullopt};
  EXPECT_EQ((a + b).entries, (std::vector<long long>{3, -1}));
  EXPECT_EQ((a - b).entries, (std::vector<long long>{-1, -1}));
  EXPECT_EQ((-a).entries, (std::vector<long long>{-1, 1}));
  EXPECT_EQ(a.scaled(2).entries, (std::vector<long long>{2, -2}));
  EXPECT_FALSE(a.is_zero());
  EXPECT_TRUE((a - a).is_zero());
  K0Vec aug{{1, 3}, {{1, 2}, {1, 1}}, 1};
  EXPECT_EQ(aug.augmentation_entry(), 3);
  EXPECT_EQ(aug.restricted().entries, (std::vector<long long>{1}));
}

// Similar idempotents inside the algebra: the witness lives in the
// amplified algebra and conjugates e to f.
TEST(Wedderburn, SimilarityWitnessProperty) {
  std::mt19937_64 g(35);
  Known kn = known({{2, 1}, {1, 1}}, 0, g);
  WedderburnData w = decompose(kn.alg, {}, 9);
  for (int k = 0; k < 10; ++k) {
    CMatrix p = CMatrix::Zero(3, 3);
    p(0, 0) = 1.0;
    p(2, 2) = 1.0;
    CMatrix s = CMatrix::Zero(3, 3);
    s.topLeftCorner(2, 2) = oracle::gaussian(2, 2, g) + 3.0 * CMatrix::Identity(2, 2);
    s(2, 2) = 1.0;
    CMatrix e = kn.v * p * kn.v.adjoint();
    CMatrix f = kn.v * s * p * s.inverse() * kn.v.adjoint();
    SimilarityWitness sw = similarity_witness(e, f, w);
    EXPECT_LT((sw.w * e * sw.w.inverse() - f).norm(), 1e-8);
    EXPECT_LT(nearest(sw.w, unitize(kn.alg)).resid_op, 1e-8);
  }
}

TEST(Wedderburn, DissimilarIdempotentsHaveNoWitness) {
  WedderburnData w = decompose(diagonal_algebra(2), {}, 10);
  EXPECT_THROW(similarity_witness(unit(2, 0, 0), unit(2, 1, 1), w), Error);
}

TEST(Wedderburn, SimilarityStepIntertwines) {
  std::mt19937_64 g(36);
  CMatrix e = unit(3, 0, 0);
  CMatrix x = 0.05 * oracle::gaussian(3, 3, g);
  CMatrix f = (CMatrix::Identity(3, 3) + x) * e * (CMatrix::Identity(3, 3) + x).inverse();
  CMatrix s = similarity_step(e, f);
  EXPECT_LT((s * e - f * s).norm(), 1e-10);
}
