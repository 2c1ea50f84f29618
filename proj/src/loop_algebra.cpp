#include "approxk/loop_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "approxk/functional_calculus.hpp"

namespace approxk {

namespace {

constexpr double kAngleSlack = 1e-9;

double wrap2(double t) {
  double r = std::fmod(t, 2.0);
  return r < 0 ? r + 2.0 : r;
}

void same_grid(const LoopElem& a, const LoopElem& b) {
  if (a.grid() != b.grid() || a.fiber() != b.fiber())
    fail(ErrorKind::InvalidInput, "loop elements on different grids or fibers");
}

// Maximal runs of supported samples, following increasing angle; a run that
// crosses j = 0 is reported once, starting at its first sample.
std::vector<std::vector<Index>> support_runs(const LoopAlg& a) {
  std::vector<std::vector<Index>> runs;
  const Index m = a.grid;
  Index start = -1;
  for (Index j = 0; j < m; ++j) {
    if (!a.in_support(j)) { start = j; break; }
  }
  if (start < 0) return {};
  std::vector<Index> cur;
  for (Index s = 1; s <= m; ++s) {
    Index j = (start + s) % m;
    if (a.in_support(j)) {
      cur.push_back(j);
    } else if (!cur.empty()) {
      runs.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) runs.push_back(cur);
  return runs;
}

}  // namespace

CMatrix scalar_part(const CMatrix& x, Index n, Index k, Index q) {
  if (x.rows() != n * k * q) fail(ErrorKind::InvalidInput, "scalar_part: size mismatch");
  // Index (i, a, b) -> (i k + a) q + b; average over a.
  CMatrix s = CMatrix::Zero(n * q, n * q);
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < n; ++l)
      for (Index a = 0; a < k; ++a)
        s.block(i * q, l * q, q, q) += x.block((i * k + a) * q, (l * k + a) * q, q, q);
  s /= double(k);
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < n; ++l)
      for (Index a = 0; a < k; ++a) out.block((i * k + a) * q, (l * k + a) * q, q, q) = s.block(i * q, l * q, q, q);
  return out;
}

double theta(Index j, Index grid) { return 2.0 * std::numbers::pi * double(j) / double(grid); }

LoopElem::LoopElem(std::vector<CMatrix> samples) : samples_(std::move(samples)) {
  for (const auto& s : samples_) {
    require_square(s, "LoopElem");
    if (s.rows() != samples_[0].rows()) fail(ErrorKind::InvalidInput, "loop samples of different sizes");
  }
}

LoopElem LoopElem::constant(Index grid, const CMatrix& value) {
  return LoopElem(std::vector<CMatrix>(static_cast<size_t>(grid), value));
}

LoopElem LoopElem::scalar(Index grid, Index fiber, const std::function<cplx(double)>& f) {
  std::vector<CMatrix> s(static_cast<size_t>(grid));
  for (Index j = 0; j < grid; ++j) s[j] = f(theta(j, grid)) * identity(fiber);
  return LoopElem(std::move(s));
}

LoopElem LoopElem::from_function(Index grid, const std::function<CMatrix(double)>& f) {
  std::vector<CMatrix> s(static_cast<size_t>(grid));
  for (Index j = 0; j < grid; ++j) s[j] = f(theta(j, grid));
  return LoopElem(std::move(s));
}

LoopElem LoopElem::map(const std::function<CMatrix(const CMatrix&)>& f) const {
  std::vector<CMatrix> out(samples_.size());
  for (size_t j = 0; j < samples_.size(); ++j) out[j] = f(samples_[j]);
  return LoopElem(std::move(out));
}

LoopElem operator+(const LoopElem& a, const LoopElem& b) {
  same_grid(a, b);
  return LoopElem(kernels::parallel::add(a.samples(), b.samples()));
}

LoopElem operator-(const LoopElem& a, const LoopElem& b) {
  same_grid(a, b);
  return LoopElem(kernels::parallel::add(a.samples(), b.samples(), -1.0));
}

LoopElem operator-(const LoopElem& a) { return cplx(-1.0) * a; }

LoopElem operator*(const LoopElem& a, const LoopElem& b) {
  same_grid(a, b);
  return LoopElem(kernels::parallel::mul(a.samples(), b.samples()));
}

LoopElem operator*(cplx s, const LoopElem& a) {
  return a.map([s](const CMatrix& x) { return CMatrix(s * x); });
}

LoopElem operator*(const LoopElem& a, cplx s) { return s * a; }
LoopElem operator*(double s, const LoopElem& a) { return cplx(s) * a; }

Index dim(const LoopElem& x) { return x.fiber(); }
double norm(const LoopElem& x) { return kernels::parallel::sup_norm(x.samples()); }
LoopElem identity_like(const LoopElem& x) { return LoopElem::constant(x.grid(), identity(x.fiber())); }
LoopElem zeros_like(const LoopElem& x) { return LoopElem::constant(x.grid(), zeros(x.fiber())); }

LoopElem inverse(const LoopElem& x, const Tol& tol) {
  return LoopElem(kernels::parallel::inverse(x.samples(), tol));
}

LoopElem adjoint(const LoopElem& x) {
  return x.map([](const CMatrix& s) { return CMatrix(s.adjoint()); });
}

LoopElem sub_block(const LoopElem& x, Index r, Index c, Index rows, Index cols) {
  return x.map([=](const CMatrix& s) { return CMatrix(s.block(r, c, rows, cols)); });
}

LoopElem block2x2(const LoopElem& a, const LoopElem& b, const LoopElem& c, const LoopElem& d) {
  std::vector<CMatrix> out(static_cast<size_t>(a.grid()));
  for (Index j = 0; j < a.grid(); ++j) out[j] = block2x2(a[j], b[j], c[j], d[j]);
  return LoopElem(std::move(out));
}

LoopElem direct_sum(const LoopElem& a, const LoopElem& b) {
  std::vector<CMatrix> out(static_cast<size_t>(a.grid()));
  for (Index j = 0; j < a.grid(); ++j) out[j] = direct_sum(a[j], b[j]);
  return LoopElem(std::move(out));
}

LoopElem direct_sum(std::span<const LoopElem> parts) {
  if (parts.empty()) fail(ErrorKind::InvalidInput, "direct_sum of nothing");
  std::vector<CMatrix> out(static_cast<size_t>(parts[0].grid()));
  std::vector<CMatrix> tmp(parts.size());
  for (Index j = 0; j < parts[0].grid(); ++j) {
    for (size_t i = 0; i < parts.size(); ++i) tmp[i] = parts[i][j];
    out[j] = direct_sum(std::span<const CMatrix>(tmp));
  }
  return LoopElem(std::move(out));
}

LoopElem amplify_diag(const LoopElem& h, Index n) {
  return h.map([n](const CMatrix& s) { return kron(identity(n), s); });
}

LoopElem kron_right(const LoopElem& x, const CMatrix& p) {
  return x.map([&p](const CMatrix& s) { return kron(s, p); });
}

LoopElem constant_like(const LoopElem& like, const CMatrix& p) { return LoopElem::constant(like.grid(), p); }

bool LoopAlg::in_support(Index j) const {
  return mask.empty() ? true : mask[static_cast<size_t>(j)] != 0;
}

Index LoopAlg::support_count() const {
  if (mask.empty()) return grid;
  return static_cast<Index>(std::count(mask.begin(), mask.end(), 1));
}

bool LoopAlg::is_full() const { return support_count() == grid; }

std::vector<char> LoopAlg::off_support() const {
  std::vector<char> off(static_cast<size_t>(grid));
  for (Index j = 0; j < grid; ++j) off[j] = in_support(j) ? 0 : 1;
  return off;
}

void LoopAlg::validate() const {
  if (grid < 16) fail(ErrorKind::InvalidInput, "loop grid must have at least 16 samples");
  if (fiber < 1) fail(ErrorKind::InvalidInput, "loop fiber must be positive");
  if (free < 1 || fiber % free != 0) fail(ErrorKind::InvalidInput, "free factor must divide the fiber");
  if (mask.empty()) return;
  if (static_cast<Index>(mask.size()) != grid) fail(ErrorKind::InvalidInput, "mask size differs from grid");
  auto runs = support_runs(*this);
  if (runs.size() > 2) fail(ErrorKind::InvalidInput, "support mask has more than two arcs");
  if (runs.size() == 2) {
    Index a_end = runs[0].back(), b_start = runs[1].front();
    Index b_end = runs[1].back(), a_start = runs[0].front();
    Index gap1 = (b_start - a_end - 1 + grid) % grid;
    Index gap2 = (a_start - b_end - 1 + grid) % grid;
    if (gap1 < 2 || gap2 < 2) fail(ErrorKind::InvalidInput, "support arcs separated by fewer than two samples");
  }
}

LoopAlg loop_ambient(Index grid, Index fiber, std::optional<Index> basepoint) {
  LoopAlg a;
  a.grid = grid;
  a.fiber = fiber;
  a.basepoint = basepoint;
  if (basepoint) {
    if (*basepoint < 0 || *basepoint >= grid) fail(ErrorKind::InvalidInput, "basepoint outside the grid");
    a.mask.assign(static_cast<size_t>(grid), 1);
    a.mask[static_cast<size_t>(*basepoint)] = 0;
  }
  a.validate();
  return a;
}

LoopAlg arc_ideal(const LoopAlg& a, double start_pi, double end_pi) {
  LoopAlg out = a;
  out.unitized = false;
  const double width = end_pi - start_pi;
  out.mask.assign(static_cast<size_t>(a.grid), 0);
  for (Index j = 0; j < a.grid; ++j) {
    bool inside;
    if (width >= 2.0) {
      inside = true;
    } else if (width <= 0.0) {
      inside = false;
    } else {
      double t = wrap2(2.0 * double(j) / double(a.grid) - start_pi);
      inside = t > kAngleSlack && t < width - kAngleSlack;
    }
    out.mask[j] = (inside && a.in_support(j)) ? 1 : 0;
  }
  if (out.is_full()) out.mask.clear();
  out.validate();
  return out;
}

LoopAlg intersect(const LoopAlg& a, const LoopAlg& b) {
  if (a.grid != b.grid || a.fiber != b.fiber) fail(ErrorKind::InvalidInput, "intersect: different loop algebras");
  LoopAlg out = a;
  out.unitized = false;
  out.mask.assign(static_cast<size_t>(a.grid), 0);
  for (Index j = 0; j < a.grid; ++j) out.mask[j] = (a.in_support(j) && b.in_support(j)) ? 1 : 0;
  if (out.is_full()) out.mask.clear();
  out.validate();
  return out;
}

LoopAlg unitize(const LoopAlg& a) {
  LoopAlg out = a;
  out.unitized = true;
  return out;
}

LoopAlg tensor_with_full(const LoopAlg& a, Index m) {
  if (m < 1) fail(ErrorKind::InvalidInput, "tensor_with_full: m must be positive");
  LoopAlg out = a;
  out.fiber = a.fiber * m;
  out.free = a.free * m;
  return out;
}

LoopElem bump(const LoopAlg& a, double plateau_start_pi, double plateau_end_pi, double ramp_pi) {
  const double width = plateau_end_pi - plateau_start_pi;
  if (ramp_pi < 0) fail(ErrorKind::InvalidInput, "bump ramp must be non-negative");
  std::vector<CMatrix> s(static_cast<size_t>(a.grid));
  for (Index j = 0; j < a.grid; ++j) {
    double h;
    if (width >= 2.0) {
      h = 1.0;
    } else {
      double t = wrap2(2.0 * double(j) / double(a.grid) - plateau_start_pi);
      double d = t <= width + kAngleSlack ? 0.0 : std::min(t - width, 2.0 - t);
      if (d <= kAngleSlack) h = 1.0;
      else if (ramp_pi <= 0.0) h = 0.0;
      else h = std::max(0.0, 1.0 - d / ramp_pi);
      if (h < 1e-12) h = 0.0;
      if (h > 1.0 - 1e-12) h = 1.0;
    }
    s[j] = h * identity(a.fiber);
  }
  return LoopElem(std::move(s));
}

LoopElem power_z(Index grid, int n, Index fiber) {
  return LoopElem::scalar(grid, fiber, [n](double t) { return std::polar(1.0, n * t); });
}

LoopNearest nearest_amplified(const LoopElem& x, const LoopAlg& a) {
  if (x.grid() != a.grid) fail(ErrorKind::InvalidInput, "nearest: grid mismatch");
  if (x.fiber() % a.fiber != 0) fail(ErrorKind::InvalidInput, "nearest: fiber is not a multiple");
  const Index n = x.fiber() / a.fiber;
  LoopNearest out;
  std::vector<char> off = a.off_support();
  std::vector<CMatrix> proj = x.samples();
  CMatrix fill = zeros(x.fiber());
  if (a.unitized) {
    CMatrix mean = zeros(x.fiber());
    Index count = 0;
    for (Index j = 0; j < a.grid; ++j)
      if (off[j]) { mean += x[j]; ++count; }
    if (count > 0) fill = scalar_part(mean / double(count), n, a.fiber / a.free, a.free);
  }
  std::vector<CMatrix> diff(static_cast<size_t>(a.grid));
  for (Index j = 0; j < a.grid; ++j) {
    if (off[j]) {
      proj[j] = fill;
      diff[j] = x[j] - fill;
    } else {
      diff[j] = zeros(x.fiber());
    }
  }
  out.proj = LoopElem(std::move(proj));
  out.resid_op = kernels::parallel::sup_norm_masked(diff, off);
  return out;
}

LoopEpsIn loop_eps_in(const LoopElem& x, const LoopAlg& a, double eps) {
  LoopNearest n = nearest_amplified(x, a);
  return {n.resid_op <= eps, n.proj, n.resid_op};
}

K1Vec winding_k1(const LoopElem& u, const std::vector<Index>& block_sizes) {
  std::vector<Index> sizes = block_sizes;
  if (sizes.empty()) sizes.push_back(u.fiber());
  Index total = 0;
  for (Index s : sizes) total += s;
  if (total != u.fiber()) fail(ErrorKind::InvalidInput, "winding_k1: block sizes do not cover the fiber");
  K1Vec out;
  Index off = 0;
  for (Index s : sizes) {
    LoopElem blk = sub_block(u, off, off, s, s);
    off += s;
    std::vector<double> steps = kernels::parallel::det_phase_steps(blk.samples());
    double sum = 0.0;
    for (size_t j = 0; j < steps.size(); ++j) {
      if (!(std::abs(steps[j]) < std::numbers::pi / 2)) {
        fail(ErrorKind::GridTooCoarse, "determinant phase step at sample " + std::to_string(j), double(j));
      }
      sum += steps[j];
    }
    double w = sum / (2.0 * std::numbers::pi);
    long long r = std::llround(w);
    if (std::abs(w - double(r)) > 1e-3) fail(ErrorKind::NotQuantized, "winding " + std::to_string(w), w);
    out.windings.push_back(r);
  }
  return out;
}

LoopElem riesz_loop(const LoopElem& e, const Tol& tol) {
  return e.map([&tol](const CMatrix& s) { return riesz_idempotent(s, tol).chi; });
}

ArcTrivialization arc_k0_trivialize(const LoopElem& e, const LoopAlg& cap, const Tol& tol) {
  if (e.grid() != cap.grid || e.fiber() % cap.fiber != 0)
    fail(ErrorKind::InvalidInput, "arc_k0_trivialize: element does not live over the ideal");
  std::vector<char> off = cap.off_support();
  Index count = std::count(off.begin(), off.end(), 1);
  if (count == 0) fail(ErrorKind::InvalidInput, "arc_k0_trivialize needs a proper ideal");
  const Index k = cap.fiber / cap.free;
  const Index fib = e.fiber();
  ArcTrivialization out;

  LoopNearest scal = nearest_amplified(e, unitize(cap));
  if (scal.resid_op > 1e-6) fail(ErrorKind::InvalidInput, "idempotent is not scalar off the support");
  CMatrix finf = riesz_idempotent(scal.proj[static_cast<Index>(std::find(off.begin(), off.end(), 1) - off.begin())], tol).chi;
  out.scalar_value = finf;
  double tr = finf.trace().real() / double(k);
  out.scalar_rank = std::llround(tr);

  const CMatrix one = identity(fib);
  std::vector<CMatrix> conj(static_cast<size_t>(e.grid()), one);
  for (const auto& run : support_runs(cap)) {
    // Refined chain f_inf -> e(run) -> f_inf; owner[p] is the sample index of
    // chain point p, or -1 for inserted points.
    std::vector<CMatrix> pts{finf};
    std::vector<Index> owner{-1};
    for (Index j : run) { pts.push_back(e[j]); owner.push_back(j); }
    pts.push_back(finf);
    owner.push_back(-1);
    double m0 = 0.0;
    for (const auto& p : pts) m0 = std::max(m0, op_norm(2.0 * p - one));
    const double target = 0.25 / m0;
    std::vector<CMatrix> chain{pts[0]};
    std::vector<Index> chain_owner{owner[0]};
    for (size_t p = 0; p + 1 < pts.size(); ++p) {
      double step = op_norm(pts[p + 1] - pts[p]);
      int pieces = std::max(1, static_cast<int>(std::ceil(step / target)));
      for (int r = 1; r < pieces; ++r) {
        double s = double(r) / pieces;
        CMatrix mid = (1.0 - s) * pts[p] + s * pts[p + 1];
        try {
          chain.push_back(riesz_idempotent(mid, tol).chi);
        } catch (const Error&) {
          fail(ErrorKind::PathTooCoarse, "interpolated idempotent path breaks down", double(p));
        }
        chain_owner.push_back(-1);
      }
      chain.push_back(pts[p + 1]);
      chain_owner.push_back(owner[p + 1]);
    }
    double m1 = 0.0;
    for (const auto& p : chain) m1 = std::max(m1, op_norm(2.0 * p - one));
    std::vector<CMatrix> z(chain.size());
    z[0] = one;
    for (size_t p = 0; p + 1 < chain.size(); ++p) {
      if (!(op_norm(chain[p + 1] - chain[p]) < 1.0 / (2.0 * m1)))
        fail(ErrorKind::PathTooCoarse, "idempotent path step too large", double(p));
      z[p + 1] = similarity_step(chain[p], chain[p + 1]) * z[p];
    }
    // z.back() commutes with f_inf; unwind it along the path with a
    // logarithm so the conjugator returns to 1 at both ends.
    CMatrix lg = matrix_log(invert(z.back(), tol));
    const double last = double(chain.size() - 1);
    for (size_t p = 1; p + 1 < chain.size(); ++p) {
      if (chain_owner[p] < 0) continue;
      conj[chain_owner[p]] = z[p] * matrix_exp((double(p) / last) * lg);
    }
    out.path_points += static_cast<Index>(chain.size());
  }
  out.conjugator = LoopElem(std::move(conj));
  double worst = 0.0;
  for (Index j = 0; j < e.grid(); ++j) {
    const CMatrix& zj = out.conjugator[j];
    worst = std::max(worst, op_norm(zj * finf * invert(zj, tol) - e[j]));
  }
  out.residual = worst;
  return out;
}

}  // namespace approxk
