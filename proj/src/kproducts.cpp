#include "approxk/kproducts.hpp"

#include <cmath>
#include <string>

namespace approxk {

namespace {

void require_idempotent(const CMatrix& p) {
  require_square(p, "box_times");
  double defect = op_norm(p * p - p);
  if (defect > 1e-8) fail(ErrorKind::InvalidInput, "box_times: p is not an idempotent", defect);
}

long long rank_of(const CMatrix& p) { return std::llround(p.trace().real()); }

// Compression by z (x) 1 or 1 (x) z, traced over the compressed leg.
CMatrix partial_scalar(const CMatrix& e, Index k, const CMatrix& z, Index na, Index nb, bool first_leg) {
  const double rz = z.trace().real();
  if (!(rz > 0.5)) fail(ErrorKind::InvalidInput, "augmentation projection is zero");
  const Index keep = first_leg ? nb : na;
  CMatrix out = CMatrix::Zero(k * keep, k * keep);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      for (Index s = 0; s < keep; ++s)
        for (Index t = 0; t < keep; ++t) {
          cplx acc = 0.0;
          for (Index x = 0; x < (first_leg ? na : nb); ++x)
            for (Index y = 0; y < (first_leg ? na : nb); ++y) {
              Index r = first_leg ? i * na * nb + x * nb + s : i * na * nb + s * nb + x;
              Index c = first_leg ? j * na * nb + y * nb + t : j * na * nb + t * nb + y;
              acc += z(y, x) * e(r, c);
            }
          out(i * keep + s, j * keep + t) = acc / rz;
        }
  return out;
}

K0Vec sum_classes(const std::vector<CMatrix>& pos, const std::vector<CMatrix>& neg, const WedderburnData& w,
                  const std::function<CMatrix(const CMatrix&)>& image) {
  K0Vec total;
  bool started = false;
  auto add = [&](const CMatrix& e, long long sign) {
    K0Vec c = k0_class(image(e), w).scaled(sign);
    total = started ? total + c : c;
    started = true;
  };
  for (const auto& e : pos) add(e, 1);
  for (const auto& e : neg) add(e, -1);
  if (!started) {
    total.blocks = w.blocks;
    total.entries.assign(w.blocks.size(), 0);
    total.augmentation = w.augmentation;
  }
  return total;
}

}  // namespace

CMatrix box_times(const CMatrix& u, const CMatrix& p, const Tol& tol) {
  require_idempotent(p);
  const Index m = p.rows();
  const CMatrix one = identity(u.rows()), q = identity(m) - p;
  CMatrix out = kron(u, p) + kron(one, q);
  CMatrix inv = kron(invert(u, tol), p) + kron(one, q);
  double res = op_norm(out * inv - identity(out.rows()));
  if (res > 1e-8 * std::max(1.0, op_norm(out) * op_norm(inv)))
    fail(ErrorKind::NotInvertible, "box_times: inverse check failed", res);
  return out;
}

LoopElem box_times(const LoopElem& u, const CMatrix& p, const Tol& tol) {
  require_idempotent(p);
  const Index m = p.rows();
  const LoopElem one = identity_like(u);
  const CMatrix q = identity(m) - p;
  LoopElem out = kron_right(u, p) + kron_right(one, q);
  LoopElem inv = kron_right(inverse(u, tol), p) + kron_right(one, q);
  double res = norm(out * inv - identity_like(out));
  if (res > 1e-8 * std::max(1.0, norm(out) * norm(inv)))
    fail(ErrorKind::NotInvertible, "box_times: inverse check failed", res);
  long long wu = winding_k1(u).windings.at(0);
  long long wo = winding_k1(out).windings.at(0);
  if (wo != wu * rank_of(p))
    fail(ErrorKind::ExactnessViolation, "box_times: winding " + std::to_string(wo) + " is not winding(u) rank(p)");
  return out;
}

CMatrix tensor_elements(const CMatrix& p, Index na, const CMatrix& q, Index nb) {
  if (p.rows() % na != 0 || q.rows() % nb != 0) fail(ErrorKind::InvalidInput, "tensor_elements: size mismatch");
  const Index k = p.rows() / na, l = q.rows() / nb;
  const Index n = na * nb;
  CMatrix out(k * l * n, k * l * n);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < l; ++j)
      for (Index i2 = 0; i2 < k; ++i2)
        for (Index j2 = 0; j2 < l; ++j2) {
          CMatrix blk = kron(p.block(i * na, i2 * na, na, na), q.block(j * nb, j2 * nb, nb, nb));
          out.block((i * l + j) * n, (i2 * l + j2) * n, n, n) = blk;
        }
  return out;
}

K0Vec k0_product(const CMatrix& p, const WedderburnData& wa, const CMatrix& q, const WedderburnData& wb) {
  WedderburnData w = product_wedderburn(wa, wb);
  K0Vec cls = k0_class(tensor_elements(p, wa.ambient_dim, q, wb.ambient_dim), w);
  K0Vec ka = k0_class(p, wa), kb = k0_class(q, wb);
  for (size_t i = 0; i < ka.entries.size(); ++i)
    for (size_t j = 0; j < kb.entries.size(); ++j)
      if (cls.entries[i * kb.entries.size() + j] != ka.entries[i] * kb.entries[j])
        fail(ErrorKind::ExactnessViolation, "k0_product: class is not the product of the factor classes");
  return cls;
}

template <class S>
ProductCheck<S> boundary_product_check(const S& s, const LiftCert<S>& cert, const CMatrix& p) {
  const Index m = p.rows();
  const S t = s.tensored(m);
  ProductCheck<S> out{{}, {}, false, s.intersection_gap(m),
                      certify_lift(t, box_times(cert.u, p, s.tol()), box_times(cert.v, p, s.tol()),
                                   box_times(cert.v_inv, p, s.tol()))};
  K0Vec d = boundary_class(s, cert);
  out.lhs = d.scaled(rank_of(p));
  for (auto& b : out.lhs.blocks) b.d *= m;
  out.rhs = boundary_class(t, out.cert);
  out.equal = out.lhs == out.rhs;
  return out;
}

template ProductCheck<MatrixSetting> boundary_product_check(const MatrixSetting&, const LiftCert<MatrixSetting>&,
                                                            const CMatrix&);
template ProductCheck<LoopSetting> boundary_product_check(const LoopSetting&, const LiftCert<LoopSetting>&,
                                                          const CMatrix&);

CMatrix augmentation_value(const CMatrix& x, const UnitizedFactor& f) {
  const Index n = f.w.ambient_dim;
  if (x.rows() % n != 0) fail(ErrorKind::InvalidInput, "augmentation_value: size mismatch");
  const Index k = x.rows() / n;
  const double rz = f.z.trace().real();
  CMatrix out(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) out(i, j) = (f.z * x.block(i * n, j * n, n, n)).trace() / rz;
  return out;
}

NonunitalCheck nonunital_class_check(const std::vector<CMatrix>& pos, const std::vector<CMatrix>& neg,
                                     const UnitizedFactor& a, const UnitizedFactor& b) {
  const Index na = a.w.ambient_dim, nb = b.w.ambient_dim;
  auto k_of = [&](const CMatrix& e) {
    if (e.rows() % (na * nb) != 0) fail(ErrorKind::InvalidInput, "nonunital_class_check: size mismatch");
    return e.rows() / (na * nb);
  };
  NonunitalCheck out;
  out.image_a = sum_classes(pos, neg, b.w, [&](const CMatrix& e) {
    return partial_scalar(e, k_of(e), a.z, na, nb, true);
  });
  out.image_b = sum_classes(pos, neg, a.w, [&](const CMatrix& e) {
    return partial_scalar(e, k_of(e), b.z, na, nb, false);
  });
  out.in_kernel = out.image_a.is_zero() && out.image_b.is_zero();
  return out;
}

}  // namespace approxk
