#include <gtest/gtest.h>

#include "approxk/error.hpp"
#include "approxk/kproducts.hpp"
#include "approxk/scenarios.hpp"
#include "oracles.hpp"

using namespace approxk;

namespace {

long long entry_sum(const K0Vec& k) {
  long long s = 0;
  for (long long e : k.entries) s += e;
  return s;
}

// A = C e11 inside M_2, unitized by e22.
UnitizedFactor corner_factor() {
  std::vector<CMatrix> g{unit(2, 0, 0)};
  Subalg a = Subalg::from_basis(2, g);
  return {decompose_unitized(a, {}, 3), unit(2, 1, 1)};
}

}  // namespace

TEST(BoxTimes, Examples) {
  Rng rng(1);
  CMatrix u = random_invertible(3, 5.0, rng);
  EXPECT_LE(op_norm(box_times(u, identity(2)) - oracle::kron(u, identity(2))), 1e-14);
  EXPECT_LE(op_norm(box_times(u, zeros(2)) - identity(6)), 0.0);
  CMatrix p = unit(2, 0, 0);
  CMatrix b = box_times(u, p);
  // det(u box p) = det(u)^rank(p)
  EXPECT_NEAR(std::abs(b.determinant() - u.determinant()), 0.0, 1e-10 * std::abs(u.determinant()));
  EXPECT_THROW(box_times(u, CMatrix(2.0 * p)), Error);
}

TEST(BoxTimes, LoopWindingScalesWithRank) {
  LoopElem z = power_z(64, 1);
  LoopElem b = box_times(z, unit(2, 0, 0));
  EXPECT_EQ(b.fiber(), 2);
  EXPECT_EQ(winding_k1(b).windings[0], 1);
  LoopElem b2 = box_times(power_z(64, -2), identity(3));
  EXPECT_EQ(winding_k1(b2).windings[0], -6);
}

TEST(BoxTimes, MultiplicativeProperty) {
  Rng rng(11);
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 50; ++trial) {
    Index n = 1 + Index(g() % 4), m = 1 + Index(g() % 3);
    CMatrix u1 = random_invertible(n, 10.0, rng), u2 = random_invertible(n, 10.0, rng);
    CMatrix s = random_invertible(m, 5.0, rng);
    CMatrix d = CMatrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) d(i, i) = double(g() % 2);
    CMatrix p = s * d * s.inverse();
    CMatrix lhs = box_times(CMatrix(u1 * u2), p);
    CMatrix rhs = box_times(u1, p) * box_times(u2, p);
    EXPECT_LE(op_norm(lhs - rhs), 1e-10 * std::max(1.0, op_norm(lhs)));
  }
}

TEST(K0Product, Examples) {
  WedderburnData m2 = full_wedderburn(2);
  K0Vec one = k0_product(unit(2, 0, 0), m2, unit(2, 0, 0), m2);
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_EQ(one.entries[0], 1);

  Subalg diag = diagonal_algebra(2);
  WedderburnData wd = decompose(diag, {}, 1);
  WedderburnData m1 = full_wedderburn(1);
  CMatrix p = unit(2, 0, 0);
  K0Vec kp = k0_class(p, wd);
  K0Vec prod = k0_product(p, wd, identity(2), m1);
  ASSERT_EQ(prod.entries.size(), 2u);
  EXPECT_EQ(prod.entries, (std::vector<long long>{2 * kp.entries[0], 2 * kp.entries[1]}));
  EXPECT_EQ(entry_sum(prod), 2);

  K0Vec zero = k0_product(zeros(2), wd, identity(2), m1);
  EXPECT_TRUE(zero.is_zero());
}

TEST(K0Product, BilinearProperty) {
  std::mt19937_64 g(19);
  Subalg diag = diagonal_algebra(3);
  WedderburnData wa = decompose(diag, {}, 2);
  WedderburnData wb = full_wedderburn(2);
  auto rand_diag_idem = [&](Index n) {
    CMatrix d = CMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = double(g() % 2);
    return d;
  };
  for (int trial = 0; trial < 30; ++trial) {
    CMatrix p1 = rand_diag_idem(3), p2 = rand_diag_idem(3);
    CMatrix q = rand_diag_idem(2);
    K0Vec sum = k0_product(direct_sum(p1, p2), wa, q, wb);
    K0Vec parts = k0_product(p1, wa, q, wb) + k0_product(p2, wa, q, wb);
    EXPECT_EQ(sum, parts);
    CMatrix q2 = rand_diag_idem(2);
    EXPECT_EQ(k0_product(p1, wa, direct_sum(q, q2), wb), k0_product(p1, wa, q, wb) + k0_product(p1, wa, q2, wb));
  }
}

TEST(ProductCheck, TwistedPair) {
  BlockPair bp = twisted_pair(0.2);
  LiftCert<MatrixSetting> l = iota_lift(bp.s, bp.p, bp.q);
  Rng rng(5);
  CMatrix s = random_invertible(2, 20.0, rng);
  struct Case {
    CMatrix p;
    long long scale;
  };
  std::vector<Case> cases{{zeros(2), 0},
                          {unit(2, 0, 0), 1},
                          {identity(2), 2},
                          {CMatrix(s * unit(2, 0, 0) * s.inverse()), 1}};
  K0Vec base = boundary_class(bp.s, l);
  for (const auto& c : cases) {
    ProductCheck<MatrixSetting> pc = boundary_product_check(bp.s, l, c.p);
    EXPECT_TRUE(pc.equal) << pc.lhs.to_string() << " vs " << pc.rhs.to_string();
    EXPECT_EQ(pc.lhs.entries, base.scaled(c.scale).entries);
    EXPECT_EQ(pc.rhs.entries, base.scaled(c.scale).entries);
    EXPECT_EQ(pc.intersection_gap, 0);
  }
}

TEST(ProductCheck, RandomCorpus) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BlockPair bp = random_block_pair(2, seed);
    LiftCert<MatrixSetting> l = iota_lift(bp.s, bp.p, bp.q);
    for (const CMatrix& p : {CMatrix(unit(2, 1, 1)), identity(2)}) {
      ProductCheck<MatrixSetting> pc = boundary_product_check(bp.s, l, p);
      EXPECT_TRUE(pc.equal) << seed;
    }
  }
}

TEST(ProductCheck, CircleSplit) {
  CircleSplit cs = circle_split(360);
  LiftCert<LoopSetting> l = build_lift_v(cs.s, cs.u, cs.h);
  ProductCheck<LoopSetting> pc = boundary_product_check(cs.s, l, unit(2, 0, 0));
  EXPECT_TRUE(pc.equal);
  EXPECT_TRUE(pc.rhs.is_zero());
}

TEST(Nonunital, Examples) {
  UnitizedFactor a = corner_factor(), b = corner_factor();
  // p in M_2(A~) with scalar part E11, its scalar lift, and q = e11 in B.
  CMatrix p = oracle::kron(unit(2, 0, 0), identity(2)) + oracle::kron(unit(2, 1, 1), unit(2, 0, 0));
  CMatrix sp = oracle::kron(unit(2, 0, 0), identity(2));
  EXPECT_LE(op_norm(augmentation_value(p, a) - unit(2, 0, 0)), 1e-14);
  CMatrix q = unit(2, 0, 0);
  CMatrix pq = tensor_elements(p, 2, q, 2), spq = tensor_elements(sp, 2, q, 2);
  NonunitalCheck good = nonunital_class_check({pq}, {spq}, a, b);
  EXPECT_TRUE(good.in_kernel);
  NonunitalCheck bad = nonunital_class_check({pq}, {}, a, b);
  EXPECT_FALSE(bad.in_kernel);
  EXPECT_TRUE(bad.image_b.is_zero());
  EXPECT_FALSE(bad.image_a.is_zero());

  CMatrix one_q = tensor_elements(identity(2), 2, identity(2), 2);
  EXPECT_FALSE(nonunital_class_check({one_q}, {}, a, b).in_kernel);
  EXPECT_TRUE(nonunital_class_check({zeros(4)}, {}, a, b).in_kernel);
  EXPECT_TRUE(nonunital_class_check({}, {}, a, b).in_kernel);
}
