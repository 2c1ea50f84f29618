// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "approxk/boundary.hpp"
#include "approxk/error.hpp"
#include "approxk/kproducts.hpp"
#include "approxk/runner.hpp"
#include "approxk/scenarios.hpp"
#include "oracles.hpp"

using namespace approxk;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// Cap block whose central projection is p.
size_t cap_block(const MatrixSetting& s, const CMatrix& p) {
  const auto& z = s.wedderburn(Which::Cap).central_projections;
  for (size_t i = 0; i < z.size(); ++i)
    if ((z[i] - p).norm() < 1e-8) return i;
  throw Error(ErrorKind::InvalidInput, "no cap block for p");
}

long long rank_oracle(const CMatrix& v, const CMatrix& v_inv, const CMatrix& p, Index mult) {
  const Index k = v.rows() / p.rows();
  CMatrix e = CMatrix::Zero(v.rows(), v.rows());
  e.topLeftCorner(v.rows() / 2, v.rows() / 2).setIdentity();
  CMatrix pp = oracle::kron(CMatrix::Identity(k, k), p);
  double t = (pp * v * e * v_inv).trace().real() - (pp * e).trace().real();
  return std::llround(t / double(mult));
}

// ---------------------------------------------------------------- criteria

Outcome riesz_sweep() {
  auto t0 = Clock::now();
  runner::SweepOptions o;
  o.kind = "riesz";
  o.count = 1000;
  o.seed = 1;
  runner::SweepTable t = runner::sweep(o);
  double secs = seconds_since(t0);
  size_t ok = 0;
  for (const auto& r : t.rows) ok += r.back() == "true";
  return {ok == 1000 && t.rows.size() == 1000 && secs < 10.0,
          std::to_string(ok) + "/" + std::to_string(t.rows.size()) + " within bound, " + num(secs) + " s"};
}

Outcome whitehead_identity() {
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Rng rng(runner::draw_seed(2, k));
    Index n = 1 + Index(rng() % 4);
    double cnd = 1.0 + 99.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    CMatrix u = random_invertible(n, cnd, rng);
    CMatrix ui = u.inverse();
    CMatrix one = CMatrix::Identity(n, n), z = CMatrix::Zero(n, n);
    CMatrix x = block2x2(one, u, z, one), y = block2x2(one, z, CMatrix(-ui), one), j = block2x2(z, -one, one, z);
    CMatrix lhs = x * y * x * j;
    worst = std::max(worst, op_norm(lhs - direct_sum(u, ui)));
  }
  return {worst <= 1e-10, "max residual " + num(worst)};
}

Outcome lift_endpoints() {
  BlockPair bp = twisted_pair();
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Rng rng(runner::draw_seed(3, k));
    CMatrix u = random_invertible(4, 10.0, rng);
    auto one = build_lift_v(bp.s, u, identity(4));
    auto zero = build_lift_v(bp.s, u, zeros(4));
    worst = std::max({worst, op_norm(one.v - identity(8)), op_norm(zero.v - direct_sum(u, CMatrix(u.inverse())))});
  }
  return {worst <= 1e-12, "max residual " + num(worst)};
}

Outcome inv_cut() {
  runner::SweepOptions o;
  o.kind = "invcut";
  o.count = 500;
  o.seed = 1;
  runner::SweepTable t = runner::sweep(o);
  size_t bad = 0;
  for (const auto& r : t.rows) bad += r.back() != "true";
  return {bad == 0 && t.rows.size() == 500, std::to_string(bad) + " violations in " + std::to_string(t.rows.size())};
}

// The matrix corpus: the twisted pair plus 50 random block pairs.
std::vector<BlockPair> corpus() {
  std::vector<BlockPair> out{twisted_pair(0.2)};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) out.push_back(random_block_pair(2 + Index(seed % 2), seed));
  return out;
}

Outcome iota_exactness(const std::vector<BlockPair>& c) {
  size_t checked = 0;
  for (const auto& bp : c) {
    boundary_class(bp.s, iota_lift(bp.s, bp.p, bp.q));
    boundary_class(bp.s, iota_lift(bp.s, bp.q, bp.p));
    checked += 2;
  }
  CircleSplit cs = circle_split(720);
  boundary_class(cs.s, build_lift_v(cs.s, cs.u, cs.h));
  ++checked;
  return {true, std::to_string(checked) + " lifts, zero pushforward into C and D"};
}

Outcome twisted_pair_boundary() {
  auto t0 = Clock::now();
  BlockPair bp = twisted_pair(0.2);
  auto l = iota_lift(bp.s, bp.p, bp.q);
  K0Vec d = boundary_class(bp.s, l);
  auto li = inverse_lift(bp.s, l);
  K0Vec di = boundary_class(bp.s, li);
  double secs = seconds_since(t0);
  size_t ip = cap_block(bp.s, bp.p), iq = cap_block(bp.s, bp.q);
  bool ok = d.entries.size() == 2 && d.entries[ip] == 1 && d.entries[iq] == -1 && di.entries[ip] == -1 &&
            di.entries[iq] == 1 && rank_oracle(l.v, l.v_inv, bp.p, 2) == 1 &&
            rank_oracle(l.v, l.v_inv, bp.q, 2) == -1 && rank_oracle(li.v, li.v_inv, bp.p, 2) == -1 && secs < 1.0;
  return {ok, "d = " + d.to_string() + ", inverse " + di.to_string() + ", " + num(secs) + " s"};
}

Outcome additivity(const std::vector<BlockPair>& c) {
  size_t ok = 0, total = 0;
  for (const auto& bp : c) {
    auto pq = iota_lift(bp.s, bp.p, bp.q);
    auto qp = iota_lift(bp.s, bp.q, bp.p);
    K0Vec a = boundary_class(bp.s, pq);
    bool good = boundary_class(bp.s, qp) == -a;
    good = good && boundary_class(bp.s, boxplus(bp.s, {pq, pq}).cert) == a.scaled(2);
    good = good && boundary_class(bp.s, boxplus(bp.s, {pq, qp}).cert).is_zero();
    good = good && boundary_class(bp.s, inverse_lift(bp.s, pq)) == -a;
    ok += good;
    ++total;
  }
  CircleSplit cs = circle_split(720);
  auto l = build_lift_v(cs.s, cs.u, cs.h);
  auto li = inverse_lift(cs.s, l);
  bool good = boundary_class(cs.s, li).is_zero() && boundary_class(cs.s, boxplus(cs.s, {l, li}).cert).is_zero();
  ok += good;
  ++total;
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " scenarios"};
}

Outcome product_compat() {
  BlockPair bp = twisted_pair(0.2);
  auto l = iota_lift(bp.s, bp.p, bp.q);
  std::string detail;
  bool ok = true;
  for (const CMatrix& p : {zeros(2), CMatrix(unit(2, 0, 0)), identity(2)}) {
    auto pc = boundary_product_check(bp.s, l, p);
    ok = ok && pc.equal;
    detail += (detail.empty() ? "" : ", ") + pc.rhs.to_string();
  }
  auto full = boundary_product_check(bp.s, l, identity(2));
  size_t ip = cap_block(bp.s, bp.p), iq = cap_block(bp.s, bp.q);
  ok = ok && full.rhs.entries[ip] == 2 && full.rhs.entries[iq] == -2;
  return {ok, detail};
}

Outcome loop_factorization() {
  auto t0 = Clock::now();
  CircleSplit cs = circle_split(720);
  auto l = build_lift_v(cs.s, cs.u, cs.h);
  auto w = sigma_witness(cs.s, l, 0.05);
  double secs = seconds_since(t0);
  bool ok = w.res_d <= 0.05 && w.res_c <= 0.05 && w.k1_u.windings == std::vector<long long>{1} &&
            w.k1_x.windings[0] + w.k1_c.windings[0] == 1 && secs < 30.0;
  return {ok, "residuals " + num(w.res_d) + ", " + num(w.res_c) + "; windings x " + std::to_string(w.k1_x.windings[0]) +
                  " + factor " + std::to_string(w.k1_c.windings[0]) + " = 1; " + num(secs) + " s"};
}

Outcome uniformity() {
  const std::vector<double> deltas{1e-3, 1e-2, 1e-1};
  CircleSplit cs = circle_split(720);
  UniformityReport ideal = uniformity_probe(cs.s, 200, {1, 2, 3}, deltas, 1);
  std::vector<double> sup;
  for (double th : {0.3, 0.1, 0.03}) sup.push_back(uniformity_probe(hereditary_pair(th), 200, {1}, deltas, 1).sup_ratio);
  bool ok = ideal.sup_ratio <= 3.0 && sup[0] < sup[1] && sup[1] < sup[2];
  return {ok, "ideal pair sup ratio " + num(ideal.sup_ratio) + "; hereditary " + num(sup[0]) + " < " + num(sup[1]) +
                  " < " + num(sup[2])};
}

Outcome wedderburn_oracle() {
  const std::vector<std::vector<BlockSig>> shapes = {
      {{2, 2}}, {{1, 2}, {1, 2}}, {{1, 1}, {2, 1}}, {{1, 3}}, {{1, 1}, {1, 1}, {1, 2}}};
  size_t ok = 0;
  for (int k = 0; k < 100; ++k) {
    std::mt19937_64 g(runner::draw_seed(11, k));
    const auto& sig = shapes[size_t(k) % shapes.size()];
    Index n = 0;
    for (const auto& b : sig) n += b.d * b.m;
    CMatrix v = oracle::unitary(n, g);
    std::vector<CMatrix> gens;
    Index off = 0;
    for (const auto& b : sig) {
      for (Index i = 0; i < b.d; ++i)
        for (Index j = 0; j < b.d; ++j) {
          CMatrix e = CMatrix::Zero(n, n);
          e.block(off, off, b.d * b.m, b.d * b.m) = oracle::kron(unit(b.d, i, j), CMatrix::Identity(b.m, b.m));
          gens.push_back(v * e * v.adjoint());
        }
      off += b.d * b.m;
    }
    WedderburnData w = decompose(Subalg::from_basis(n, gens), {}, std::uint64_t(k));
    auto got = w.blocks, want = sig;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    ok += got == want;
  }
  return {ok == 100, std::to_string(ok) + "/100 signatures recovered"};
}

Outcome whitehead_split_check() {
  CircleSplit cs = circle_split(720);
  auto ws = whitehead_split(cs.s, cs.u, cs.h, 0.1);
  return {ws.passed(0.1), "endpoint " + num(ws.endpoint_residual) + ", membership " +
                              num(std::max(ws.max_res_c, ws.max_res_d)) + ", max norm " + num(ws.max_norm) +
                              " <= " + num(ws.norm_bound)};
}

Outcome tensor_scaling() {
  BlockPair bp = twisted_pair();
  size_t ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Rng rng(runner::draw_seed(13, k));
    std::mt19937_64 g(runner::draw_seed(14, k));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CMatrix h = unif(g) * bp.p + unif(g) * bp.q;
    std::vector<CMatrix> x;
    int n = 1 + int(g() % 3);
    for (int i = 0; i < n; ++i)
      x.push_back(bp.s.random_in(Which::C, rng) + bp.s.random_in(Which::D, rng) + 0.01 * oracle::gaussian(4, 4, g));
    auto cert = check_delta_ideal_structure(bp.s, h, x, std::uint64_t(k));
    auto ts = tensor_scale_ideal_structure(bp.s, cert, 1 + k % 3, std::uint64_t(k));
    ok += ts.passed;
    if (ts.bound > 0) worst = std::max(worst, ts.cert.measured.max() / ts.bound);
  }
  return {ok == 100, std::to_string(ok) + "/100 within M_X delta (worst fraction " + num(worst) + ")"};
}

Outcome determinism() {
  bool ok = true;
  for (const char* f : {"twisted_pair.json", "circle_split.json"}) {
    std::string path = std::string(APPROXK_SCENARIO_DIR) + "/" + f;
    runner::RunOptions a, b;
    b.jobs = 3;
    std::string p1 = runner::run_scenario_file(path, a).payload().dump();
    std::string p2 = runner::run_scenario_file(path, a).payload().dump();
    std::string p3 = runner::run_scenario_file(path, b).payload().dump();
    ok = ok && p1 == p2 && p1 == p3;
  }
  return {ok, "payloads identical across reruns and worker counts"};
}

}  // namespace

int main() {
  std::vector<BlockPair> c = corpus();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"riesz bound sweep", riesz_sweep},
      {"whitehead identity", whitehead_identity},
      {"lift endpoints", lift_endpoints},
      {"inv_cut inequality", inv_cut},
      {"iota exactness", [&] { return iota_exactness(c); }},
      {"twisted-pair boundary", twisted_pair_boundary},
      {"additivity and negation", [&] { return additivity(c); }},
      {"product compatibility", product_compat},
      {"loop factorization", loop_factorization},
      {"uniformity constants", uniformity},
      {"wedderburn oracle", wedderburn_oracle},
      {"whitehead split", whitehead_split_check},
      {"tensor scaling", tensor_scaling},
      {"determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const Error& e) {
      o = {false, std::string(e.name()) + ": " + e.what()};
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed;
}
