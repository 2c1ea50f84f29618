#include "approxk/wedderburn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace approxk {

namespace {

// Orthonormal basis of the range of a Hermitian projection-like matrix.
CMatrix range_basis(const CMatrix& p, double cut = 0.5) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (p + p.adjoint()));
  std::vector<Index> keep;
  for (Index k = 0; k < p.rows(); ++k)
    if (es.eigenvalues()(k) > cut) keep.push_back(k);
  CMatrix out(p.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
  return out;
}

// Orthonormal basis of the column space via SVD, keeping singular values > cut.
CMatrix column_space(const CMatrix& x, double cut) {
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU);
  Index r = 0;
  for (Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

Index subspace_rank(const std::vector<CMatrix>& elems, Index n, double rel) {
  if (elems.empty()) return 0;
  CMatrix m(n * n, static_cast<Index>(elems.size()));
  for (size_t i = 0; i < elems.size(); ++i) m.col(static_cast<Index>(i)) = vec(elems[i]);
  Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0 || s(0) < 1e-14) return 0;
  Index r = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > rel * s(0)) ++r;
  return r;
}

struct Attempt {
  bool ok = false;
  WedderburnData data;
};

Attempt try_decompose(const Subalg& s, const Tol& tol, Rng& rng) {
  Attempt out;
  const Index n = s.ambient_dim();
  const Index d = s.dim();
  const auto& basis = s.basis();
  out.data.ambient_dim = n;

  // Center: elements of S commuting with two random elements and their adjoints.
  CMatrix r1 = s.random_element(rng), r2 = s.random_element(rng);
  std::vector<CMatrix> probes{r1, r1.adjoint(), r2, r2.adjoint()};
  CMatrix eqs(4 * n * n, d);
  for (Index j = 0; j < d; ++j) {
    for (size_t p = 0; p < probes.size(); ++p)
      eqs.block(static_cast<Index>(p) * n * n, j, n * n, 1) = vec(commutator(basis[j], probes[p]));
  }
  Eigen::JacobiSVD<CMatrix> svd(eqs, Eigen::ComputeFullV);
  Eigen::VectorXd sv = Eigen::VectorXd::Zero(d);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  double top = sv.size() ? sv.maxCoeff() : 0.0;
  std::vector<CMatrix> center;
  for (Index k = 0; k < d; ++k) {
    if (top < 1e-12 || sv(k) <= tol.rank_rel_tol * top) center.push_back(s.element(svd.matrixV().col(k)));
  }
  for (const auto& z : center)
    for (const auto& b : basis)
      if (op_norm(commutator(z, b)) > 1e-8) return out;

  // Random self-adjoint central element, split on range(1_S).
  CMatrix c = zeros(n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const auto& z : center) {
    double coef = g(rng);
    c += coef * 0.5 * (z + z.adjoint());
  }
  CMatrix r = range_basis(s.unit());
  CMatrix cr = r.adjoint() * c * r;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (cr + cr.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<std::vector<Index>> clusters;
  for (Index k = 0; k < ev.size(); ++k) {
    if (k == 0 || ev(k) - ev(k - 1) > 1e-6 * scale) clusters.emplace_back();
    clusters.back().push_back(k);
  }
  if (clusters.size() != center.size()) return out;

  struct Block {
    CMatrix z;
    BlockSig sig;
    CMatrix iso;
    Index first;
    double trace;
  };
  std::vector<Block> blocks;
  for (const auto& cl : clusters) {
    CMatrix v(r.cols(), static_cast<Index>(cl.size()));
    for (size_t j = 0; j < cl.size(); ++j) v.col(static_cast<Index>(j)) = es.eigenvectors().col(cl[j]);
    CMatrix rv = r * v;
    Block b;
    b.z = rv * rv.adjoint();
    Index rank = static_cast<Index>(cl.size());
    std::vector<CMatrix> comp;
    for (const auto& x : basis) comp.push_back(b.z * x * b.z);
    Index dim_block = subspace_rank(comp, n, tol.rank_rel_tol);
    Index di = static_cast<Index>(std::llround(std::sqrt(double(dim_block))));
    if (di < 1 || di * di != dim_block || rank % di != 0) return out;
    b.sig = {di, rank / di};

    // Matrix units from a random self-adjoint element's eigenspaces inside the block.
    CMatrix a = s.random_element(rng);
    a = CMatrix(0.5 * (a + a.adjoint()));
    CMatrix ar = rv.adjoint() * a * rv;
    Eigen::SelfAdjointEigenSolver<CMatrix> bes(0.5 * (ar + ar.adjoint()));
    const Eigen::VectorXd& bev = bes.eigenvalues();
    const Index m = b.sig.m;
    double bscale = std::max(1.0, bev.cwiseAbs().maxCoeff());
    for (Index j = 0; j < di; ++j) {
      double spread = bev(j * m + m - 1) - bev(j * m);
      if (spread > 1e-8 * bscale) return out;
      if (j > 0 && bev(j * m) - bev(j * m - 1) < 1e-6 * bscale) return out;
    }
    CMatrix bmat = s.random_element(rng);
    CMatrix e1 = rv * bes.eigenvectors().leftCols(m);
    b.iso = CMatrix(n, di * m);
    b.iso.leftCols(m) = e1;
    for (Index j = 1; j < di; ++j) {
      CMatrix ej = rv * bes.eigenvectors().middleCols(j * m, m);
      CMatrix mj = ej.adjoint() * bmat * e1;
      Eigen::VectorXd msv = Eigen::JacobiSVD<CMatrix>(mj).singularValues();
      if (msv(msv.size() - 1) < 1e-6 * std::max(1e-300, msv(0))) return out;
      b.iso.middleCols(j * m, m) = ej * polar_part(mj);
    }
    for (const auto& x : basis) {
      CMatrix y = b.iso.adjoint() * x * b.iso;
      CMatrix beta(di, di);
      for (Index j = 0; j < di; ++j)
        for (Index l = 0; l < di; ++l) beta(j, l) = y.block(j * m, l * m, m, m).trace() / double(m);
      if (op_norm(y - kron(beta, identity(m))) > 1e-8) return out;
    }
    b.first = n;
    for (Index i = 0; i < n; ++i)
      if (std::abs(b.z(i, i)) > 1e-6) { b.first = i; break; }
    b.trace = b.z.trace().real();
    blocks.push_back(std::move(b));
  }
  std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.trace < b.trace;
  });

  Index dim_sum = 0;
  for (const auto& b : blocks) {
    out.data.blocks.push_back(b.sig);
    out.data.central_projections.push_back(b.z);
    out.data.block_isometries.push_back(b.iso);
    dim_sum += b.sig.d * b.sig.d;
  }
  if (dim_sum != d) return out;
  for (const auto& x : basis) {
    CMatrix rec = zeros(n);
    for (const auto& z : out.data.central_projections) rec += z * x * z;
    if (op_norm(rec - x) > 1e-8) return out;
  }
  out.ok = true;
  return out;
}

}  // namespace

bool K0Vec::is_zero() const {
  return std::all_of(entries.begin(), entries.end(), [](long long v) { return v == 0; });
}

K0Vec K0Vec::restricted() const {
  K0Vec out;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (augmentation && *augmentation == i) continue;
    out.entries.push_back(entries[i]);
    if (i < blocks.size()) out.blocks.push_back(blocks[i]);
  }
  return out;
}

long long K0Vec::augmentation_entry() const { return augmentation ? entries.at(*augmentation) : 0; }

std::string K0Vec::to_string() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < entries.size(); ++i) os << (i ? ", " : "") << entries[i];
  os << ")";
  return os.str();
}

K0Vec K0Vec::operator+(const K0Vec& o) const {
  if (entries.size() != o.entries.size() || blocks != o.blocks)
    fail(ErrorKind::InvalidInput, "K0Vec arithmetic over different block structures");
  K0Vec out = *this;
  for (size_t i = 0; i < entries.size(); ++i) out.entries[i] += o.entries[i];
  return out;
}

K0Vec K0Vec::operator-(const K0Vec& o) const { return *this + (-o); }

K0Vec K0Vec::operator-() const { return scaled(-1); }

K0Vec K0Vec::scaled(long long k) const {
  K0Vec out = *this;
  for (auto& v : out.entries) v *= k;
  return out;
}

WedderburnData decompose(const Subalg& s, const Tol& tol, std::uint64_t seed) {
  if (s.dim() == 0) {
    WedderburnData w;
    w.ambient_dim = s.ambient_dim();
    return w;
  }
  for (int attempt = 0; attempt <= 5; ++attempt) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    Attempt a = try_decompose(s, tol, rng);
    if (a.ok) return a.data;
  }
  fail(ErrorKind::DecompositionFailure, "central element spectrum unresolved after 5 reseeds");
}

WedderburnData decompose_unitized(const Subalg& s, const Tol& tol, std::uint64_t seed) {
  WedderburnData w = decompose(unitize(s, tol), tol, seed);
  if (!s.is_unital_in_ambient()) {
    CMatrix aug = identity(s.ambient_dim()) - s.unit();
    for (size_t i = 0; i < w.central_projections.size(); ++i) {
      if (op_norm(w.central_projections[i] - aug) < 1e-8) w.augmentation = i;
    }
    if (!w.augmentation) fail(ErrorKind::DecompositionFailure, "augmentation block not found");
  }
  return w;
}

K0Vec k0_class(const CMatrix& e, const WedderburnData& w) {
  require_square(e, "k0_class");
  const Index n = w.ambient_dim;
  if (n == 0 || e.rows() % n != 0) fail(ErrorKind::InvalidInput, "k0_class: size is not a multiple of N");
  const Index k = e.rows() / n;
  if (op_norm(e * e - e) > 1e-6) fail(ErrorKind::InvalidInput, "k0_class: not an idempotent");
  K0Vec out;
  out.blocks = w.blocks;
  out.augmentation = w.augmentation;
  const CMatrix ik = identity(k);
  double scale = std::max(1.0, op_norm(e));
  for (size_t i = 0; i < w.blocks.size(); ++i) {
    CMatrix z = kron(ik, w.central_projections[i]);
    if (op_norm(z * e - e * z) > 1e-6 * scale)
      fail(ErrorKind::NotAClass, "idempotent does not commute with the central projections");
    cplx t = (z * e).trace();
    double v = t.real() / double(w.blocks[i].m);
    long long r = std::llround(v);
    if (std::abs(v - double(r)) > 1e-6 || std::abs(t.imag()) > 1e-6)
      fail(ErrorKind::NotAClass, "normalized rank " + std::to_string(v) + " is not an integer", v);
    out.entries.push_back(r);
  }
  return out;
}

SimilarityWitness similarity_witness(const CMatrix& e, const CMatrix& f, const WedderburnData& w) {
  K0Vec ce = k0_class(e, w), cf = k0_class(f, w);
  if (!(ce == cf)) fail(ErrorKind::NotEquivalent, "classes differ: " + ce.to_string() + " vs " + cf.to_string());
  const Index n = w.ambient_dim;
  const Index k = e.rows() / n;
  const CMatrix one = identity(e.rows());
  SimilarityWitness out;

  double scale = std::max({1.0, op_norm(e), op_norm(f)});
  auto check = [&](const CMatrix& z) {
    CMatrix zi = invert(z);
    out.residual = op_norm(z * e * zi - f);
    return out.residual <= 1e-8 * scale;
  };

  // Nearby idempotents: z = fe + (1-f)(1-e).
  if (op_norm(e - f) * 2.0 * op_norm(2.0 * e - one) < 1.0) {
    CMatrix z = similarity_step(e, f);
    if (check(z)) {
      out.w = z;
      return out;
    }
  }

  CMatrix wtot = one;
  CMatrix rest = one;
  for (size_t i = 0; i < w.blocks.size(); ++i) {
    const Index d = w.blocks[i].d, m = w.blocks[i].m;
    CMatrix u = kron(identity(k), w.block_isometries[i]);
    CMatrix eb = u.adjoint() * e * u, fb = u.adjoint() * f * u;
    const Index kd = k * d;
    CMatrix es(kd, kd), fs(kd, kd);
    for (Index a = 0; a < kd; ++a)
      for (Index b = 0; b < kd; ++b) {
        es(a, b) = eb(a * m, b * m);
        fs(a, b) = fb(a * m, b * m);
      }
    auto adapted = [&](const CMatrix& p) {
      CMatrix ran = column_space(p, 0.5);
      CMatrix ker = column_space(identity(kd) - p, 0.5);
      if (ran.cols() + ker.cols() != kd) fail(ErrorKind::NotAClass, "block compression is not an idempotent");
      CMatrix t(kd, kd);
      t << ran, ker;
      return std::pair{t, ran.cols()};
    };
    auto [te, re] = adapted(es);
    auto [tf, rf] = adapted(fs);
    if (re != rf) fail(ErrorKind::NotEquivalent, "block ranks differ");
    CMatrix wb = tf * invert(te);
    CMatrix ub = u * kron(wb - identity(kd), identity(m)) * u.adjoint();
    wtot += ub;
  }
  if (!check(wtot)) {
    fail(ErrorKind::NotEquivalent, "similarity residual " + std::to_string(out.residual), out.residual);
  }
  out.w = wtot;
  return out;
}

CMatrix similarity_step(const CMatrix& e, const CMatrix& f) {
  const CMatrix one = identity(e.rows());
  return 0.5 * ((2.0 * f - one) * (2.0 * e - one) + one);
}

CMatrix path_to_similarity(std::span<const CMatrix> path) {
  if (path.empty()) fail(ErrorKind::InvalidInput, "path_to_similarity: empty path");
  const CMatrix one = identity(path[0].rows());
  double worst = 0.0;
  for (const auto& e : path) worst = std::max(worst, op_norm(2.0 * e - one));
  const double step_cap = 1.0 / (2.0 * worst);
  CMatrix z = one;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    if (!(op_norm(path[i + 1] - path[i]) < step_cap)) {
      fail(ErrorKind::PathTooCoarse, "step " + std::to_string(i) + " exceeds the similarity radius", double(i));
    }
    z = similarity_step(path[i], path[i + 1]) * z;
  }
  double scale = std::max(1.0, op_norm(path.back()));
  if (op_norm(z * path.front() * invert(z) - path.back()) > 1e-6 * scale) {
    fail(ErrorKind::PathTooCoarse, "telescoped conjugator residual too large");
  }
  return z;
}

}  // namespace approxk
