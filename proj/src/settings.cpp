#include "approxk/settings.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace approxk {

std::string_view which_name(Which w) {
  switch (w) {
    case Which::Ambient: return "A";
    case Which::C: return "C";
    case Which::D: return "D";
    case Which::Cap: return "C∩D";
  }
  return "?";
}

WedderburnData full_wedderburn(Index n) {
  WedderburnData w;
  w.ambient_dim = n;
  w.blocks.push_back({n, 1});
  w.central_projections.push_back(identity(n));
  w.block_isometries.push_back(identity(n));
  return w;
}

WedderburnData product_wedderburn(const WedderburnData& a, const WedderburnData& b) {
  WedderburnData out;
  out.ambient_dim = a.ambient_dim * b.ambient_dim;
  const Index nb = b.ambient_dim;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    for (size_t j = 0; j < b.blocks.size(); ++j) {
      const auto [da, ma] = a.blocks[i];
      const auto [db, mb] = b.blocks[j];
      const Index d = da * db, m = ma * mb;
      out.blocks.push_back({d, m});
      out.central_projections.push_back(kron(a.central_projections[i], b.central_projections[j]));
      const CMatrix& ua = a.block_isometries[i];
      const CMatrix& ub = b.block_isometries[j];
      CMatrix iso(a.ambient_dim * nb, d * m);
      for (Index ja = 0; ja < da; ++ja)
        for (Index jb = 0; jb < db; ++jb)
          for (Index sa = 0; sa < ma; ++sa)
            for (Index sb = 0; sb < mb; ++sb) {
              Index col = (ja * db + jb) * m + sa * mb + sb;
              iso.col(col) = kron(ua.col(ja * ma + sa), ub.col(jb * mb + sb));
            }
      out.block_isometries.push_back(std::move(iso));
    }
  }
  if (a.augmentation && b.blocks.size() == 1 && b.blocks[0].m == 1) out.augmentation = a.augmentation;
  return out;
}

WedderburnData tensor_wedderburn(const WedderburnData& w, Index m) {
  return product_wedderburn(w, full_wedderburn(m));
}

CMatrix idempotent_similarity(const CMatrix& e, const CMatrix& f) {
  if (e.rows() != f.rows()) fail(ErrorKind::InvalidInput, "idempotent_similarity: size mismatch");
  if (op_norm(e - f) <= 1e-14 * std::max(1.0, op_norm(e))) return identity(e.rows());
  return similarity_witness(e, f, full_wedderburn(e.rows())).w;
}

// ---------------------------------------------------------------- matrices

MatrixSetting::MatrixSetting(Subalg ambient, Subalg c, Subalg d, const Tol& tol, std::uint64_t seed)
    : tol_(tol), ambient_(std::move(ambient)), c_(std::move(c)), d_(std::move(d)) {
  cap_ = intersect(c_, d_, tol_);
  finish(seed);
}

MatrixSetting::MatrixSetting(Subalg ambient, Subalg c, Subalg d, Subalg cap, const Tol& tol, std::uint64_t seed)
    : tol_(tol), ambient_(std::move(ambient)), c_(std::move(c)), d_(std::move(d)), cap_(std::move(cap)) {
  finish(seed);
}

void MatrixSetting::finish(std::uint64_t seed) {
  tol_.validate();
  const Index n = ambient_.ambient_dim();
  if (c_.ambient_dim() != n || d_.ambient_dim() != n || cap_.ambient_dim() != n)
    fail(ErrorKind::InvalidInput, "setting: algebras live in different ambients");
  c_u_ = unitize(c_, tol_);
  d_u_ = unitize(d_, tol_);
  cap_u_ = unitize(cap_, tol_);
  w_c_ = decompose_unitized(c_, tol_, seed);
  w_d_ = decompose_unitized(d_, tol_, seed + 1);
  w_cap_ = decompose_unitized(cap_, tol_, seed + 2);
}

const Subalg& MatrixSetting::alg(Which w) const {
  switch (w) {
    case Which::Ambient: return ambient_;
    case Which::C: return c_;
    case Which::D: return d_;
    case Which::Cap: return cap_;
  }
  return ambient_;
}

const Subalg& MatrixSetting::unitized(Which w) const {
  switch (w) {
    case Which::Ambient: return ambient_;
    case Which::C: return c_u_;
    case Which::D: return d_u_;
    case Which::Cap: return cap_u_;
  }
  return ambient_;
}

const WedderburnData& MatrixSetting::wedderburn(Which w) const {
  switch (w) {
    case Which::C: return w_c_;
    case Which::D: return w_d_;
    case Which::Cap: return w_cap_;
    default: break;
  }
  fail(ErrorKind::InvalidInput, "no decomposition is kept for the ambient");
}

Member<CMatrix> MatrixSetting::member(const CMatrix& x, Which w, bool unitized_alg) const {
  const Subalg& s = unitized_alg ? unitized(w) : alg(w);
  Nearest n = nearest_amplified(x, s);
  return {std::move(n.proj), n.resid_op};
}

K0Vec MatrixSetting::k0(const CMatrix& f, Which w) const { return k0_class(f, wedderburn(w)); }

RoundedIdem<CMatrix> MatrixSetting::round_idempotent(const CMatrix& e, Which w, double eps_fraction) const {
  IdempotentRounding r = round_idempotent_in(e, unitized(w), wedderburn(w), tol_, eps_fraction);
  return {std::move(r.f), std::move(r.cls), r.residual, r.distance, r.threshold};
}

CMatrix MatrixSetting::trivializer(const CMatrix& f, const CMatrix& target, Which w) const {
  try {
    return similarity_witness(f, target, wedderburn(w)).w;
  } catch (const Error& e) {
    fail(ErrorKind::NoWitness, std::string("no similarity in ") + std::string(which_name(w)) + ": " + e.what());
  }
}

CMatrix MatrixSetting::lift(const CMatrix& s, const CMatrix&) const { return kron(s, identity(base_dim())); }

CMatrix MatrixSetting::random_in(Which w, Rng& rng) const {
  const Subalg& s = alg(w);
  if (s.dim() == 0) return zeros(base_dim());
  return s.random_element(rng);
}

MatrixSetting MatrixSetting::tensored(Index m) const {
  MatrixSetting out;
  out.tol_ = tol_;
  out.ambient_ = tensor_with_full(ambient_, m, tol_);
  out.c_ = tensor_with_full(c_, m, tol_);
  out.d_ = tensor_with_full(d_, m, tol_);
  out.cap_ = cap_.dim() ? tensor_with_full(cap_, m, tol_) : Subalg::from_span(Subspace(m * base_dim()), tol_);
  out.c_u_ = tensor_with_full(c_u_, m, tol_);
  out.d_u_ = tensor_with_full(d_u_, m, tol_);
  out.cap_u_ = tensor_with_full(cap_u_, m, tol_);
  out.w_c_ = tensor_wedderburn(w_c_, m);
  out.w_d_ = tensor_wedderburn(w_d_, m);
  out.w_cap_ = tensor_wedderburn(w_cap_, m);
  return out;
}

Index MatrixSetting::intersection_gap(Index m) const {
  Subalg ct = tensor_with_full(c_, m, tol_);
  Subalg dt = tensor_with_full(d_, m, tol_);
  return intersect(ct, dt, tol_).dim() - cap_.dim() * m * m;
}

// ---------------------------------------------------------------- loops

LoopSetting::LoopSetting(LoopAlg ambient, LoopAlg c, LoopAlg d, const Tol& tol)
    : tol_(tol), ambient_(std::move(ambient)), c_(std::move(c)), d_(std::move(d)) {
  tol_.validate();
  ambient_.validate();
  c_.validate();
  d_.validate();
  if (c_.grid != ambient_.grid || d_.grid != ambient_.grid || c_.fiber != ambient_.fiber ||
      d_.fiber != ambient_.fiber)
    fail(ErrorKind::InvalidInput, "setting: loop algebras on different grids");
  cap_ = intersect(c_, d_);
}

const LoopAlg& LoopSetting::alg(Which w) const {
  switch (w) {
    case Which::Ambient: return ambient_;
    case Which::C: return c_;
    case Which::D: return d_;
    case Which::Cap: return cap_;
  }
  return ambient_;
}

Member<LoopElem> LoopSetting::member(const LoopElem& x, Which w, bool unitized_alg) const {
  const LoopAlg& a = alg(w);
  LoopNearest n = nearest_amplified(x, unitized_alg ? unitize(a) : a);
  return {std::move(n.proj), n.resid_op};
}

K0Vec LoopSetting::k0(const LoopElem& f, Which w) const {
  const LoopAlg& a = alg(w);
  const Index k = a.fiber;
  if (f.grid() != a.grid || f.fiber() % k != 0) fail(ErrorKind::InvalidInput, "k0: element does not fit the algebra");
  auto rank_of = [&](const CMatrix& s) {
    if (op_norm(s * s - s) > 1e-6) fail(ErrorKind::InvalidInput, "k0: not an idempotent");
    double t = s.trace().real();
    long long r = std::llround(t);
    if (std::abs(t - double(r)) > 1e-6) fail(ErrorKind::NotAClass, "k0: non-integral trace", t);
    return r;
  };
  K0Vec out;
  const long long r0 = rank_of(f[0]);
  for (Index j = 1; j < f.grid(); ++j)
    if (rank_of(f[j]) != r0) fail(ErrorKind::NotAClass, "k0: rank jumps along the loop", double(j));
  if (a.is_full()) {
    out.entries = {r0};
    out.blocks = {{k, 1}};
    return out;
  }
  LoopNearest scal = nearest_amplified(f, unitize(a));
  if (scal.resid_op > 1e-6)
    fail(ErrorKind::NotAClass, "k0: idempotent is not scalar off the support", scal.resid_op);
  const Index ks = k / a.free;
  if (r0 % ks != 0) fail(ErrorKind::NotAClass, "k0: rank is not a multiple of the fiber", double(r0));
  out.entries = {r0 / ks};
  out.blocks = {{a.free, ks}};
  out.augmentation = 0;
  return out;
}

K1Vec LoopSetting::k1(const LoopElem& x, Which) const { return winding_k1(x); }

RoundedIdem<LoopElem> LoopSetting::round_idempotent(const LoopElem& e, Which w, double eps_fraction) const {
  RoundedIdem<LoopElem> out;
  LoopNearest n = nearest_amplified(e, unitize(alg(w)));
  out.residual = n.resid_op;
  out.threshold = idempotent_threshold(std::max(norm(e), 1e-300), eps_fraction);
  if (!(out.residual < out.threshold.delta) && out.residual > tol_.membership_tol) {
    fail(ErrorKind::NotCloseEnough,
         "residual " + std::to_string(out.residual) + " above threshold " + std::to_string(out.threshold.delta),
         out.residual);
  }
  out.f = riesz_loop(n.proj, tol_);
  out.distance = norm(e - out.f);
  out.cls = k0(out.f, w);
  return out;
}

LoopElem LoopSetting::trivializer(const LoopElem& f, const LoopElem& target, Which w) const {
  const CMatrix& t0 = target[0];
  for (Index j = 1; j < target.grid(); ++j)
    if (op_norm(target[j] - t0) > 1e-12) fail(ErrorKind::InvalidInput, "trivializer: target must be constant");
  try {
    const LoopAlg& a = alg(w);
    if (a.is_full()) {
      // Constant rank on the whole circle: telescope along the loop itself.
      CMatrix s = idempotent_similarity(f[0], t0);
      std::vector<CMatrix> conj(static_cast<size_t>(f.grid()));
      CMatrix z = identity(f.fiber());
      conj[0] = z;
      for (Index j = 1; j < f.grid(); ++j) {
        z = similarity_step(f[j - 1], f[j]) * z;
        conj[j] = z;
      }
      CMatrix hol = similarity_step(f[f.grid() - 1], f[0]) * z;
      if (op_norm(hol - identity(f.fiber())) > 1e-6)
        fail(ErrorKind::NoWitness, "idempotent loop has nontrivial holonomy");
      return LoopElem::constant(f.grid(), s) * inverse(LoopElem(std::move(conj)), tol_);
    }
    ArcTrivialization t = arc_k0_trivialize(f, a, tol_);
    CMatrix s = idempotent_similarity(t.scalar_value, t0);
    return LoopElem::constant(f.grid(), s) * inverse(t.conjugator, tol_);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoWitness) throw;
    fail(ErrorKind::NoWitness, std::string("no trivialization in ") + std::string(which_name(w)) + ": " + e.what());
  }
}

LoopElem LoopSetting::lift(const CMatrix& s, const LoopElem& like) const {
  return constant_like(like, kron(s, identity(base_dim())));
}

LoopElem LoopSetting::random_in(Which w, Rng& rng) const {
  const LoopAlg& a = alg(w);
  std::vector<CMatrix> s(static_cast<size_t>(a.grid));
  for (Index j = 0; j < a.grid; ++j) {
    CMatrix g = random_gaussian(a.fiber, a.fiber, rng);
    s[j] = a.in_support(j) ? g : zeros(a.fiber);
  }
  return LoopElem(std::move(s));
}

LoopSetting LoopSetting::tensored(Index m) const {
  return LoopSetting(tensor_with_full(ambient_, m), tensor_with_full(c_, m), tensor_with_full(d_, m), tol_);
}

}  // namespace approxk
