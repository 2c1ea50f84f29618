#include "approxk/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace approxk {

namespace {

double contraction_excess(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return std::max({op_norm(h - h.adjoint()), -ev.minCoeff(), ev.maxCoeff() - 1.0});
}

double contraction_excess(const LoopElem& h) {
  double worst = 0.0;
  for (const auto& s : h.samples()) worst = std::max(worst, contraction_excess(s));
  return worst;
}

cplx hs_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace(); }

cplx hs_inner(const LoopElem& a, const LoopElem& b) {
  cplx s = 0.0;
  for (Index j = 0; j < a.grid(); ++j) s += hs_inner(a[j], b[j]);
  return s;
}

double dual_norm(const CMatrix& g) { return trace_norm(g); }

double dual_norm(const LoopElem& g) {
  double s = 0.0;
  for (const auto& x : g.samples()) s += trace_norm(x);
  return s;
}

template <class E>
E X(const E& one, const E& z) { return block2x2(one, z, zeros_like(one), one); }
template <class E>
E Y(const E& one, const E& z) { return block2x2(one, zeros_like(one), z, one); }
template <class E>
E J(const E& one) { return block2x2(zeros_like(one), -one, one, zeros_like(one)); }
template <class E>
E Jinv(const E& one) { return block2x2(zeros_like(one), one, -one, zeros_like(one)); }

// diag(1_k, 0_k) in M_2k over the setting's base.
template <class S>
typename S::Elem top_projection(const S& s, const typename S::Elem& like, Index raw) {
  const Index k = raw / s.base_dim();
  CMatrix e = CMatrix::Zero(2 * k, 2 * k);
  e.topLeftCorner(k, k).setIdentity();
  return s.lift(e, like);
}

template <class S>
Index blocks_of(const S& s, const typename S::Elem& x) {
  if (dim(x) % s.base_dim() != 0) fail(ErrorKind::InvalidInput, "element size is not a multiple of the base");
  return dim(x) / s.base_dim();
}

template <class E>
E one_of(const E& like, Index raw) {
  CMatrix i = identity(raw);
  if constexpr (std::is_same_v<E, CMatrix>) {
    return i;
  } else {
    return constant_like(like, i);
  }
}

// Whitehead factors at parameter t; `inv` are the closed-form inverses.
template <class E>
struct Factors {
  E vc, vd, vc_inv, vd_inv;
};

template <class E>
Factors<E> whitehead_factors(const E& x, const E& y, const E& hh, double t) {
  const E one = identity_like(x);
  const E om = one - hh;
  const double r = 1.0 - t;
  E xc = one + r * (hh * x), xd = r * (om * x);
  E yc = one + r * (hh * y), yd = r * (om * y);
  const E i2 = identity_like(X(one, xc));
  (void)i2;
  Factors<E> f;
  f.vc = X(one, xd) * X(one, xc) * Y(one, E(-yc)) * X(one, xc) * J(one) * X(one, E(-xd));
  f.vd = X(one, xd) * Jinv(one) * X(one, E(-xc)) * Y(one, E(-yd)) * X(one, xc) * X(one, xd) * J(one);
  f.vc_inv = X(one, xd) * Jinv(one) * X(one, E(-xc)) * Y(one, yc) * X(one, E(-xc)) * X(one, E(-xd));
  f.vd_inv = Jinv(one) * X(one, E(-xd)) * X(one, E(-xc)) * Y(one, yd) * X(one, xc) * J(one) * X(one, E(-xd));
  return f;
}

template <class E>
E amplified_h(const E& h, Index nb) { return amplify_diag(h, nb); }

// Entries of the n x n block matrix x over the base.
template <class S>
std::vector<typename S::Elem> entries_of(const S& s, const typename S::Elem& x) {
  const Index b = s.base_dim(), nb = blocks_of(s, x);
  std::vector<typename S::Elem> out;
  for (Index i = 0; i < nb; ++i)
    for (Index j = 0; j < nb; ++j) {
      auto e = sub_block(x, i * b, j * b, b, b);
      if (norm(e) > 1e-14) out.push_back(std::move(e));
    }
  return out;
}

// Monomials of degree 1..4 in `gens`, at most `cap` of them; the long tail is
// sampled deterministically.
template <class E>
std::vector<E> monomials(const std::vector<E>& gens, size_t cap, std::uint64_t seed) {
  std::vector<E> out;
  if (gens.empty()) return out;
  const size_t g = gens.size();
  size_t total = 0, p = 1;
  for (int d = 1; d <= 4; ++d) { p *= g; total += p; }
  if (total <= cap) {
    std::vector<E> layer = gens;
    out = layer;
    for (int d = 2; d <= 4; ++d) {
      std::vector<E> next;
      for (const auto& a : layer)
        for (const auto& b : gens) next.push_back(a * b);
      out.insert(out.end(), next.begin(), next.end());
      layer = std::move(next);
    }
    return out;
  }
  out = gens;
  Rng rng(seed);
  std::uniform_int_distribution<size_t> pick(0, g - 1);
  std::uniform_int_distribution<int> deg(2, 4);
  while (out.size() < cap) {
    E m = gens[pick(rng)];
    int d = deg(rng);
    for (int k = 1; k < d; ++k) m = m * gens[pick(rng)];
    out.push_back(std::move(m));
  }
  return out;
}

template <class S>
std::vector<typename S::Elem> y_space(const S& s, const std::vector<typename S::Elem>& y0) {
  if constexpr (std::is_same_v<S, MatrixSetting>) {
    if (y0.empty()) return y0;
    Subspace sp = Subspace::span(s.base_dim(), y0, s.tol());
    if (sp.dim() == 0) return {};
    return enlarge_subspace(sp, 4, s.tol()).basis();
  } else {
    return y0;
  }
}

}  // namespace

double IdealResiduals::max() const { return std::max({comm, c, d, int1, int2}); }

// ------------------------------------------------------------ ideal structure

template <class S>
IdealCert<S> check_delta_ideal_structure(const S& s, const typename S::Elem& h,
                                         const std::vector<typename S::Elem>& x, std::uint64_t seed,
                                         int random_count) {
  using Elem = typename S::Elem;
  if (dim(h) != s.base_dim()) fail(ErrorKind::InvalidInput, "h must live in the base algebra");
  double excess = contraction_excess(h);
  if (excess > 1e-9) fail(ErrorKind::NotAContraction, "h is not a positive contraction", excess);
  IdealCert<S> cert;
  cert.h = h;
  for (const auto& xi : x) {
    if (dim(xi) != s.base_dim()) fail(ErrorKind::InvalidInput, "X must live in the base algebra");
    double n = norm(xi);
    if (n < 1e-300) continue;
    cert.x_basis.push_back(cplx(1.0 / n) * xi);
  }
  std::vector<Elem> probes = cert.x_basis;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  if (!cert.x_basis.empty()) {
    for (int k = 0; k < random_count; ++k) {
      Elem comb = zeros_like(h);
      for (const auto& xi : cert.x_basis) comb = comb + cplx(g(rng), g(rng)) * xi;
      probes.push_back(std::move(comb));
    }
  }
  const Elem one = identity_like(h);
  const Elem om = one - h;
  IdealResiduals r;
  for (const auto& xi : probes) {
    double nx = norm(xi);
    if (nx < 1e-300) continue;
    Elem hx = h * xi;
    Elem hom = h * om;
    r.comm = std::max(r.comm, norm(Elem(hx - xi * h)) / nx);
    r.c = std::max(r.c, s.member(hx, Which::C, false).residual / nx);
    r.d = std::max(r.d, s.member(Elem(om * xi), Which::D, false).residual / nx);
    r.int1 = std::max(r.int1, s.member(Elem(hom * xi), Which::Cap, false).residual / nx);
    r.int2 = std::max(r.int2, s.member(Elem(h * hom * xi), Which::Cap, false).residual / nx);
  }
  cert.measured = r;
  cert.probes = static_cast<Index>(probes.size());
  return cert;
}

template <class S>
TensorScale<S> tensor_scale_ideal_structure(const S& s, const IdealCert<S>& cert, Index m, std::uint64_t seed) {
  using Elem = typename S::Elem;
  if (m < 1) fail(ErrorKind::InvalidInput, "tensor_scale: m must be positive");
  TensorScale<S> out{s.tensored(m)};
  const auto& xs = cert.x_basis;
  const Index n = static_cast<Index>(xs.size());
  std::vector<Elem> xt;
  for (const auto& xi : xs)
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) xt.push_back(kron_right(xi, unit(m, a, b)));
  out.cert = check_delta_ideal_structure(out.setting, kron_right(cert.h, identity(m)), xt, seed);

  // Dual basis through the Hilbert-Schmidt Gram matrix.
  double mdual = 0.0;
  if (n > 0) {
    CMatrix gram(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) gram(i, j) = hs_inner(xs[i], xs[j]);
    if (cond(gram) > 1e12) fail(ErrorKind::InvalidInput, "tensor_scale: X basis is linearly dependent");
    CMatrix gi = invert(gram);
    for (Index i = 0; i < n; ++i) {
      Elem gd = zeros_like(xs[0]);
      for (Index k = 0; k < n; ++k) gd = gd + std::conj(gi(i, k)) * xs[k];
      mdual = std::max(mdual, dual_norm(gd));
    }
  }
  out.n = double(n);
  out.m_dual = mdual;
  out.m_x = double(n) * mdual;
  out.delta_in = cert.measured.max();
  out.bound = out.m_x * out.delta_in;
  out.passed = out.cert.measured.max() <= out.bound + 1e-12;
  return out;
}

// ------------------------------------------------------------------ lifts

template <class S>
double LiftCert<S>::level() const { return std::max({res_d, res_c, res_cap}); }

template <class S>
bool LiftCert<S>::valid_at(double delta) const {
  return norm_v <= c && norm_v_inv <= c && level() <= delta && augmentation_ok();
}

template <class S>
LiftCert<S> certify_lift(const S& s, const typename S::Elem& u, const typename S::Elem& v,
                         const typename S::Elem& v_inv, double c) {
  using Elem = typename S::Elem;
  const Index rn = dim(u);
  if (dim(v) != 2 * rn || dim(v_inv) != 2 * rn) fail(ErrorKind::InvalidInput, "lift has the wrong size");
  blocks_of(s, u);
  LiftCert<S> cert;
  cert.u = u;
  cert.u_inv = inverse(u, s.tol());
  cert.v = v;
  cert.v_inv = v_inv;
  cert.norm_v = norm(v);
  cert.norm_v_inv = norm(v_inv);
  cert.c = c > 0 ? c : std::max({cert.norm_v, cert.norm_v_inv, norm(u), norm(cert.u_inv)});
  cert.res_d = s.member(v, Which::D, true).residual;
  cert.res_c = s.member(Elem(v * direct_sum(cert.u_inv, u)), Which::C, true).residual;
  const Elem e = top_projection(s, v, rn);
  const Elem g = v * e * v_inv;
  cert.res_cap = s.member(g, Which::Cap, true).residual;
  try {
    RoundedIdem<Elem> r = s.round_idempotent(g, Which::Cap);
    cert.f = std::move(r.f);
    cert.cls = r.cls - s.k0(e, Which::Cap);
    cert.threshold = r.threshold;
    cert.rounding_distance = r.distance;
    cert.rounded = true;
  } catch (const Error& err) {
    cert.rounding_error = std::string(err.name()) + ": " + err.what();
  }
  return cert;
}

template <class S>
LiftCert<S> build_lift_v(const S& s, const typename S::Elem& u, const typename S::Elem& h, double c) {
  using Elem = typename S::Elem;
  const Index nb = blocks_of(s, u);
  const Elem one = identity_like(u);
  const Elem y = u - one;
  double ya = s.member(y, Which::Ambient, false).residual;
  if (ya > s.tol().membership_tol * std::max(1.0, norm(y)))
    fail(ErrorKind::NeedsHomotopyNormalization, "u - 1 has a component outside the ambient ideal", ya);
  const Elem hh = amplify_diag(h, nb);
  const Elem ui = inverse(u, s.tol());
  const Elem a = hh + (one - hh) * u;
  const Elem b = hh + ui * (one - hh);
  Elem v = X(one, a) * Y(one, Elem(-b)) * X(one, a) * J(one);
  Elem v_inv = Jinv(one) * X(one, Elem(-a)) * Y(one, b) * X(one, Elem(-a));
  return certify_lift(s, u, v, v_inv, c);
}

namespace {

template <class E>
InvCut<E> inv_cut_impl(const E& u, const E& h, const Tol& tol) {
  if (dim(u) % dim(h) != 0) fail(ErrorKind::InvalidInput, "inv_cut: size mismatch");
  const E hh = amplify_diag(h, dim(u) / dim(h));
  const E one = identity_like(u);
  const E ui = inverse(u, tol);
  const E y = u - one, z = ui - one;
  const E om = one - hh;
  const E a = hh + om * u, b = hh + ui * om;
  const E target = (y + z) * hh * om;
  InvCut<E> out;
  out.residual = std::max(norm(E(a * b - one - target)), norm(E(b * a - one - target)));
  double ny = norm(y), nz = norm(z);
  out.c = std::max(ny, nz);
  double dy = ny > 0 ? norm(E(hh * y - y * hh)) / ny : 0.0;
  double dz = nz > 0 ? norm(E(hh * z - z * hh)) / nz : 0.0;
  out.delta_comm = std::max(dy, dz);
  out.bound = 2.0 * (out.c * out.c + out.c) * out.delta_comm;
  out.passed = out.residual <= out.bound + 1e-12 * std::max(1.0, out.c * out.c);
  return out;
}

}  // namespace

InvCut<CMatrix> check_inv_cut(const CMatrix& u, const CMatrix& h, const Tol& tol) { return inv_cut_impl(u, h, tol); }
InvCut<LoopElem> check_inv_cut(const LoopElem& u, const LoopElem& h, const Tol& tol) {
  return inv_cut_impl(u, h, tol);
}

// -------------------------------------------------------------- boundary

template <class S>
K0Vec boundary_class(const S& s, const LiftCert<S>& cert) {
  using Elem = typename S::Elem;
  if (!cert.rounded) fail(ErrorKind::NotCloseEnough, "lift could not be rounded: " + cert.rounding_error);
  if (cert.cls.augmentation_entry() != 0)
    fail(ErrorKind::ExactnessViolation, "class has a nonzero augmentation part: " + cert.cls.to_string());
  const Elem e = top_projection(s, cert.v, dim(cert.u));
  for (Which w : {Which::C, Which::D}) {
    K0Vec pushed = s.k0(cert.f, w) - s.k0(e, w);
    if (!pushed.is_zero())
      fail(ErrorKind::ExactnessViolation,
           "boundary class pushed into " + std::string(which_name(w)) + " is " + pushed.to_string());
  }
  return cert.cls.restricted();
}

template <class S>
LiftCert<S> iota_lift(const S& s, const typename S::Elem& p, const typename S::Elem& q) {
  using Elem = typename S::Elem;
  Elem uc, ud;
  try {
    uc = s.trivializer(p, q, Which::C);
    ud = s.trivializer(p, q, Which::D);
  } catch (const Error& e) {
    fail(ErrorKind::IotaNotZero, std::string("p and q are not similar in both C and D: ") + e.what());
  }
  const Elem one = identity_like(p);
  const Elem uci = inverse(uc, s.tol()), udi = inverse(ud, s.tol());
  const Elem u = (one - p) * uci + p * udi;
  const Elem pud = p * udi, udp = ud * p;
  Elem v = block2x2(pud, Elem(p - one), Elem(one - q), udp);
  Elem v_inv = block2x2(udp, Elem(one - q), Elem(p - one), pud);
  LiftCert<S> cert = certify_lift(s, u, v, v_inv);
  if (cert.rounded) {
    K0Vec expect = (s.k0(p, Which::Cap) - s.k0(q, Which::Cap)).restricted();
    if (!(cert.cls.restricted() == expect))
      fail(ErrorKind::ExactnessViolation,
           "iota lift class " + cert.cls.to_string() + " differs from [p]-[q] = " + expect.to_string());
  }
  return cert;
}

template <class S>
Boxplus<S> boxplus(const S& s, const std::vector<LiftCert<S>>& lifts) {
  using Elem = typename S::Elem;
  if (lifts.empty()) fail(ErrorKind::InvalidInput, "boxplus of nothing");
  std::vector<Elem> us, vs, vis;
  std::vector<Index> k;
  double c = 0.0;
  for (const auto& l : lifts) {
    us.push_back(l.u);
    vs.push_back(l.v);
    vis.push_back(l.v_inv);
    k.push_back(blocks_of(s, l.u));
    c = std::max(c, l.c);
  }
  Index total = 0;
  for (Index ki : k) total += ki;
  // Old order (top_1, bottom_1, top_2, ...), new order (top_1..top_m, bottom_1..bottom_m).
  CMatrix perm = CMatrix::Zero(2 * total, 2 * total);
  Index old_pos = 0, top_pos = 0, bot_pos = total;
  for (Index ki : k) {
    for (Index r = 0; r < ki; ++r) perm(top_pos + r, old_pos + r) = 1.0;
    for (Index r = 0; r < ki; ++r) perm(bot_pos + r, old_pos + ki + r) = 1.0;
    old_pos += 2 * ki;
    top_pos += ki;
    bot_pos += ki;
  }
  const Elem big = direct_sum(std::span<const Elem>(vs));
  const Elem pl = s.lift(perm, big), pt = s.lift(CMatrix(perm.transpose()), big);
  Elem v = pl * big * pt;
  Elem v_inv = pl * direct_sum(std::span<const Elem>(vis)) * pt;
  Boxplus<S> out{certify_lift(s, direct_sum(std::span<const Elem>(us)), v, v_inv, c), {}};
  bool all = std::all_of(lifts.begin(), lifts.end(), [](const auto& l) { return l.rounded; });
  if (all) {
    out.sum_of_parts = lifts[0].cls;
    for (size_t i = 1; i < lifts.size(); ++i) out.sum_of_parts = out.sum_of_parts + lifts[i].cls;
    if (out.cert.rounded && !(out.cert.cls == out.sum_of_parts))
      fail(ErrorKind::ExactnessViolation,
           "boxplus class " + out.cert.cls.to_string() + " differs from the sum " + out.sum_of_parts.to_string());
  }
  return out;
}

template <class S>
LiftCert<S> inverse_lift(const S& s, const LiftCert<S>& cert) {
  LiftCert<S> inv = certify_lift(s, cert.u_inv, cert.v_inv, cert.v, cert.c);
  if (cert.rounded && inv.rounded && !(inv.cls == -cert.cls))
    fail(ErrorKind::ExactnessViolation,
         "inverse lift class " + inv.cls.to_string() + " is not the negative of " + cert.cls.to_string());
  return inv;
}

template <class S>
SigmaWitness<S> sigma_witness(const S& s, const LiftCert<S>& cert, double eps) {
  using Elem = typename S::Elem;
  if (!cert.rounded) fail(ErrorKind::NotCloseEnough, "lift could not be rounded: " + cert.rounding_error);
  if (!cert.cls.is_zero())
    fail(ErrorKind::InvalidInput, "sigma_witness needs a zero boundary class, got " + cert.cls.to_string());
  const Index rn = dim(cert.u);
  const Elem e = top_projection(s, cert.v, rn);
  const Elem w = s.trivializer(cert.f, e, Which::Cap);
  const Elem wv = w * cert.v;
  SigmaWitness<S> out;
  out.x = sub_block(wv, 0, 0, rn, rn);
  out.off_diagonal = std::max(norm(sub_block(wv, 0, rn, rn, rn)), norm(sub_block(wv, rn, 0, rn, rn)));
  Elem xi;
  try {
    xi = inverse(out.x, s.tol());
  } catch (const Error& err) {
    fail(ErrorKind::ReconstructionFailed, std::string("x is not invertible: ") + err.what());
  }
  out.factor_c = cert.u * xi;
  out.res_d = s.member(out.x, Which::D, true).residual;
  out.res_c = s.member(out.factor_c, Which::C, true).residual;
  out.k1_u = s.k1(cert.u, Which::Ambient);
  out.k1_x = s.k1(out.x, Which::D);
  out.k1_c = s.k1(out.factor_c, Which::C);
  for (size_t i = 0; i < out.k1_u.windings.size(); ++i) {
    if (out.k1_x.windings.at(i) + out.k1_c.windings.at(i) != out.k1_u.windings[i])
      fail(ErrorKind::ExactnessViolation, "windings of the factors do not add up to that of u");
  }
  double worst = std::max(out.res_d, out.res_c);
  if (worst > eps)
    fail(ErrorKind::ReconstructionFailed, "factor residual " + std::to_string(worst) + " above eps", worst);
  return out;
}

// ------------------------------------------------------------ homotopies

namespace {

template <class E>
Discretized<E> discretize_impl(const std::vector<E>& path, double delta, const Tol& tol) {
  if (path.size() < 2) fail(ErrorKind::InvalidInput, "discretize_homotopy needs at least two points");
  const E one = identity_like(path[0]);
  if (norm(E(path.back() - one)) > 1e-12) fail(ErrorKind::InvalidInput, "homotopy must end at the identity");
  Discretized<E> out;
  size_t worst_at = 0;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    double st = norm(E(path[i + 1] - path[i]));
    if (st > out.max_step) { out.max_step = st; worst_at = i; }
  }
  if (!(delta > 0)) delta = out.max_step * (1.0 + 1e-9) + 1e-300;
  if (!(out.max_step < delta))
    fail(ErrorKind::PathTooCoarse, "homotopy step " + std::to_string(worst_at) + " exceeds delta", double(worst_at));
  std::vector<E> inv;
  double c = 0.0;
  for (const auto& u : path) {
    inv.push_back(inverse(u, tol));
    c = std::max({c, norm(u), norm(inv.back())});
  }
  out.a = direct_sum(std::span<const E>(inv).subspan(1));
  out.b = direct_sum(std::span<const E>(path));
  const Index n = dim(path[0]), m = static_cast<Index>(path.size()) - 1;
  const E bi = direct_sum(std::span<const E>(inv));
  std::vector<E> left{one, out.a, direct_sum(std::span<const E>(path).subspan(1)), one};
  E lhs = direct_sum(path[0], one_of(path[0], (2 * m + 1) * n));
  E rhs = direct_sum(std::span<const E>(left)) * direct_sum(out.b, bi);
  out.defect = norm(E(lhs - rhs));
  out.bound = delta * c;
  if (out.defect > out.bound * (1.0 + 1e-9) + 1e-14)
    fail(ErrorKind::DefectTooLarge, "discretization defect " + std::to_string(out.defect) + " above delta c",
         out.defect);
  return out;
}

}  // namespace

Discretized<CMatrix> discretize_homotopy(const std::vector<CMatrix>& path, double delta, const Tol& tol) {
  return discretize_impl(path, delta, tol);
}
Discretized<LoopElem> discretize_homotopy(const std::vector<LoopElem>& path, double delta, const Tol& tol) {
  return discretize_impl(path, delta, tol);
}

template <class S>
bool WhiteheadSplit<S>::passed(double eps) const {
  return endpoint_residual <= 1e-12 && max_norm <= norm_bound && product_residual <= 1e-9 && max_res_c <= eps &&
         max_res_d <= eps && continuity < 1.0;
}

template <class S>
WhiteheadSplit<S> whitehead_split(const S& s, const typename S::Elem& a, const typename S::Elem& h, double eps,
                                  int steps, bool swap, bool measure_y) {
  using Elem = typename S::Elem;
  (void)eps;
  if (steps < 1) fail(ErrorKind::InvalidInput, "whitehead_split: steps must be positive");
  const Index nb = blocks_of(s, a);
  const Elem one = identity_like(a);
  const Elem ai = inverse(a, s.tol());
  const Elem x = a - one, y = ai - one;
  Elem hh = amplify_diag(h, nb);
  if (swap) hh = one - hh;
  const Which wc = swap ? Which::D : Which::C;
  const Which wd = swap ? Which::C : Which::D;

  WhiteheadSplit<S> out;
  out.c = std::max(norm(a), norm(ai));
  out.norm_bound = std::pow(3.0 + out.c, 5);
  const Elem one2 = identity_like(direct_sum(a, a));

  for (int T = steps;; T *= 2) {
    out.t.clear();
    out.vc.clear();
    out.vd.clear();
    out.max_norm = out.max_res_c = out.max_res_d = out.continuity = 0.0;
    Elem prev_c, prev_d, prev_ci, prev_di;
    for (int j = 0; j <= T; ++j) {
      double t = double(j) / double(T);
      Factors<Elem> f = whitehead_factors(x, y, hh, t);
      out.max_norm = std::max({out.max_norm, norm(f.vc), norm(f.vd)});
      out.max_res_c = std::max(out.max_res_c, s.member(Elem(f.vc - one2), wc, false).residual);
      out.max_res_d = std::max(out.max_res_d, s.member(Elem(f.vd - one2), wd, false).residual);
      if (j > 0) {
        out.continuity = std::max({out.continuity, norm(Elem(f.vc - prev_c)) * norm(prev_ci),
                                   norm(Elem(f.vd - prev_d)) * norm(prev_di)});
      } else {
        out.vc_inv0 = f.vc_inv;
        out.vd_inv0 = f.vd_inv;
        out.product_residual = norm(Elem(direct_sum(a, ai) - f.vc * f.vd));
      }
      if (j == T) out.endpoint_residual = std::max(norm(Elem(f.vc - one2)), norm(Elem(f.vd - one2)));
      prev_c = f.vc;
      prev_d = f.vd;
      prev_ci = f.vc_inv;
      prev_di = f.vd_inv;
      out.t.push_back(t);
      out.vc.push_back(std::move(f.vc));
      out.vd.push_back(std::move(f.vd));
    }
    out.steps = T;
    if (out.continuity < 1.0 || T >= 512) break;
  }

  if (measure_y) {
    std::vector<Elem> gens = entries_of(s, x);
    for (auto& g : entries_of(s, y)) gens.push_back(std::move(g));
    std::vector<Elem> ys = y_space(s, monomials(gens, 256, 0x5eedULL));
    if (!ys.empty()) out.y_delta = check_delta_ideal_structure(s, h, ys, 0x5eedULL).measured.max();
  }
  return out;
}

template <class S>
SigmaReconstruction<S> sigma_reconstruct(const S& s, const std::vector<typename S::Elem>& path,
                                         const typename S::Elem& u_c, const typename S::Elem& u_d,
                                         const typename S::Elem& h, double eps, double path_delta) {
  using Elem = typename S::Elem;
  if (path.empty()) fail(ErrorKind::InvalidInput, "sigma_reconstruct: empty path");
  Discretized<Elem> disc = discretize_homotopy(path, path_delta, s.tol());
  SigmaReconstruction<S> out;
  out.defect = disc.defect;
  const Index n = dim(path[0]);
  const Index m = static_cast<Index>(path.size()) - 1;
  const Elem one_n = identity_like(path[0]);
  out.factor_gap = norm(Elem(path[0] - u_c * u_d));

  // diag(a, a^-1) = v^{D,a} v^{C,a} from the split with (1-h, D, C);
  // diag(b, b^-1) = v^{C,b} v^{D,b} from the split with (h, C, D).
  const Elem a = disc.a, b = disc.b;
  const Elem ha = one_of(a, dim(a)) - amplify_diag(h, blocks_of(s, a));
  const Elem hb = amplify_diag(h, blocks_of(s, b));
  Factors<Elem> fa = whitehead_factors(Elem(a - identity_like(a)), Elem(inverse(a, s.tol()) - identity_like(a)), ha, 0.0);
  Factors<Elem> fb = whitehead_factors(Elem(b - identity_like(b)), Elem(inverse(b, s.tol()) - identity_like(b)), hb, 0.0);

  auto pad = [&](const Elem& z) {
    std::vector<Elem> parts{one_n, z, one_n};
    return direct_sum(std::span<const Elem>(parts));
  };
  const Elem vda = pad(fa.vc), vda_i = pad(fa.vc_inv);
  const Elem vca = pad(fa.vd), vca_i = pad(fa.vd_inv);
  const Elem v_c = vda * vca * fb.vc * vda_i;
  const Elem v_c_inv = vda * fb.vc_inv * vca_i * vda_i;
  const Elem v_d = vda * fb.vd;
  const Elem one = identity_like(v_c);
  out.split_c = s.member(Elem(v_c - one), Which::C, false).residual;
  out.split_d = s.member(Elem(v_d - one), Which::D, false).residual;

  const Elem rest = one_of(path[0], (2 * m + 1) * n);
  const Elem uc_big = direct_sum(u_c, rest);
  const Elem ud_big_inv = direct_sum(inverse(u_d, s.tol()), rest);
  const Elem ec = v_c_inv * uc_big;
  const Elem ed = v_d * ud_big_inv;
  out.disagreement = norm(Elem(ec - ed));
  const Elem mid = 0.5 * (Elem(ec - one) + Elem(ed - one));
  out.x = one + s.member(mid, Which::Cap, false).witness;
  out.residual = std::max(norm(Elem(out.x - ec)), norm(Elem(out.x - ed)));
  if (out.residual > eps)
    fail(ErrorKind::PairNotUniform,
         "no element of the intersection is near both factors (residual " + std::to_string(out.residual) + ")",
         out.residual);
  Elem xi;
  try {
    xi = inverse(out.x, s.tol());
  } catch (const Error& err) {
    fail(ErrorKind::ReconstructionFailed, std::string("x is not invertible: ") + err.what());
  }
  out.component_gap = std::max(norm(Elem(one - xi * ec)), norm(Elem(one - xi * ed)));
  if (!(out.component_gap < 1.0))
    fail(ErrorKind::ReconstructionFailed, "x is not in the component of the factors", out.component_gap);
  out.k1_x = s.k1(out.x, Which::Cap);
  out.k1_uc = s.k1(u_c, Which::C);
  out.k1_ud = s.k1(u_d, Which::D);
  for (size_t i = 0; i < out.k1_x.windings.size(); ++i) {
    if (out.k1_x.windings[i] != out.k1_uc.windings.at(i) || -out.k1_x.windings[i] != out.k1_ud.windings.at(i))
      fail(ErrorKind::ExactnessViolation, "K1 data of x does not match (u_C, u_D)");
  }
  return out;
}

// ------------------------------------------------------------ uniformity

template <class S>
UniformityReport uniformity_probe(const S& s, int sample_count, const std::vector<Index>& b_dims,
                                  const std::vector<double>& deltas, std::uint64_t seed) {
  using Elem = typename S::Elem;
  if (sample_count < 1) fail(ErrorKind::InvalidInput, "uniformity_probe: sample_count must be positive");
  std::vector<double> ds = deltas;
  std::sort(ds.begin(), ds.end());
  UniformityReport rep;
  Rng rng(seed);
  for (Index m : b_dims) {
    if (m < 1) fail(ErrorKind::InvalidInput, "uniformity_probe: B dimensions must be positive");
    const S t = m == 1 ? s : s.tensored(m);
    double last = -1.0;
    for (double delta : ds) {
      if (!(delta > 0)) fail(ErrorKind::InvalidInput, "uniformity_probe: deltas must be positive");
      UniformitySample smp{m, delta, 0.0, 0.0};
      for (int k = 0; k < sample_count; ++k) {
        Elem x0 = t.random_in(Which::Cap, rng);
        Elem c1 = t.random_in(Which::C, rng);
        Elem d1 = t.member(c1, Which::D, false).witness;
        Elem r = t.random_in(Which::D, rng);
        double gap = norm(Elem(c1 - d1)), nc = norm(c1), nr = norm(r);
        if (gap < 1e-8 * nc && nr > 0) d1 = d1 + cplx(0.1 * nc / nr) * r;
        gap = norm(Elem(c1 - d1));
        if (!(gap > 0)) continue;
        const double sc = delta / gap;
        Elem c = x0 + cplx(sc) * c1;
        Elem d = x0 + cplx(sc) * d1;
        Elem x = t.member(Elem(0.5 * (c + d)), Which::Cap, false).witness;
        double ach = std::max(norm(Elem(x - c)), norm(Elem(x - d)));
        smp.achieved = std::max(smp.achieved, ach);
      }
      smp.ratio = smp.achieved / delta;
      rep.sup_ratio = std::max(rep.sup_ratio, smp.ratio);
      if (smp.achieved < last) rep.monotone = false;
      last = smp.achieved;
      rep.samples.push_back(smp);
    }
  }
  return rep;
}

// ------------------------------------------------------- instantiations

#define APPROXK_INSTANTIATE(S)                                                                                  \
  template struct LiftCert<S>;                                                                                  \
  template struct WhiteheadSplit<S>;                                                                            \
  template IdealCert<S> check_delta_ideal_structure(const S&, const S::Elem&, const std::vector<S::Elem>&,      \
                                                    std::uint64_t, int);                                        \
  template TensorScale<S> tensor_scale_ideal_structure(const S&, const IdealCert<S>&, Index, std::uint64_t);    \
  template LiftCert<S> certify_lift(const S&, const S::Elem&, const S::Elem&, const S::Elem&, double);          \
  template LiftCert<S> build_lift_v(const S&, const S::Elem&, const S::Elem&, double);                          \
  template K0Vec boundary_class(const S&, const LiftCert<S>&);                                                  \
  template LiftCert<S> iota_lift(const S&, const S::Elem&, const S::Elem&);                                     \
  template Boxplus<S> boxplus(const S&, const std::vector<LiftCert<S>>&);                                       \
  template LiftCert<S> inverse_lift(const S&, const LiftCert<S>&);                                              \
  template SigmaWitness<S> sigma_witness(const S&, const LiftCert<S>&, double);                                 \
  template WhiteheadSplit<S> whitehead_split(const S&, const S::Elem&, const S::Elem&, double, int, bool, bool); \
  template SigmaReconstruction<S> sigma_reconstruct(const S&, const std::vector<S::Elem>&, const S::Elem&,      \
                                                    const S::Elem&, const S::Elem&, double, double);            \
  template UniformityReport uniformity_probe(const S&, int, const std::vector<Index>&, const std::vector<double>&, \
                                             std::uint64_t);

APPROXK_INSTANTIATE(MatrixSetting)
APPROXK_INSTANTIATE(LoopSetting)

#undef APPROXK_INSTANTIATE

}  // namespace approxk
