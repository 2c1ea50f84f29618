#include "approxk/loop_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

namespace approxk::kernels {

namespace {

int g_threads = 0;

void same_size(const Samples& a, const Samples& b) {
  if (a.size() != b.size()) fail(ErrorKind::InvalidInput, "loop samples of different grid sizes");
}

double phase_step(const CMatrix& a, const CMatrix& b) {
  cplx da = a.determinant(), db = b.determinant();
  if (std::abs(da) == 0.0 || std::abs(db) == 0.0) fail(ErrorKind::NotInvertible, "singular loop sample");
  return std::arg(db / da);
}

// Runs body(j) for all j in parallel; the first exception (lowest index) is
// rethrown after the loop.
template <class F>
void parallel_for(long n, F&& body) {
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
  const int nt = g_threads > 0 ? g_threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long j = 0; j < n; ++j) {
    try {
      body(j);
    } catch (...) {
      errs[static_cast<size_t>(j)] = std::current_exception();
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void set_threads(int n) { g_threads = n; }
int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

namespace serial {

Samples mul(const Samples& a, const Samples& b) {
  same_size(a, b);
  Samples out(a.size());
  for (size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

Samples add(const Samples& a, const Samples& b, cplx alpha) {
  same_size(a, b);
  Samples out(a.size());
  for (size_t j = 0; j < a.size(); ++j) out[j] = a[j] + alpha * b[j];
  return out;
}

Samples inverse(const Samples& a, const Tol& tol) {
  Samples out(a.size());
  for (size_t j = 0; j < a.size(); ++j) out[j] = invert(a[j], tol);
  return out;
}

double sup_norm(const Samples& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, op_norm(x));
  return m;
}

double sup_norm_masked(const Samples& a, const std::vector<char>& keep) {
  double m = 0.0;
  for (size_t j = 0; j < a.size(); ++j)
    if (keep[j]) m = std::max(m, op_norm(a[j]));
  return m;
}

std::vector<double> det_phase_steps(const Samples& a) {
  const size_t n = a.size();
  std::vector<double> out(n);
  for (size_t j = 0; j < n; ++j) out[j] = phase_step(a[j], a[(j + 1) % n]);
  return out;
}

}  // namespace serial

namespace parallel {

Samples mul(const Samples& a, const Samples& b) {
  same_size(a, b);
  Samples out(a.size());
  parallel_for(static_cast<long>(a.size()), [&](long j) { out[j] = a[j] * b[j]; });
  return out;
}

Samples add(const Samples& a, const Samples& b, cplx alpha) {
  same_size(a, b);
  Samples out(a.size());
  parallel_for(static_cast<long>(a.size()), [&](long j) { out[j] = a[j] + alpha * b[j]; });
  return out;
}

Samples inverse(const Samples& a, const Tol& tol) {
  Samples out(a.size());
  parallel_for(static_cast<long>(a.size()), [&](long j) { out[j] = invert(a[j], tol); });
  return out;
}

double sup_norm(const Samples& a) {
  std::vector<double> norms(a.size());
  parallel_for(static_cast<long>(a.size()), [&](long j) { norms[j] = op_norm(a[j]); });
  double m = 0.0;
  for (double v : norms) m = std::max(m, v);
  return m;
}

double sup_norm_masked(const Samples& a, const std::vector<char>& keep) {
  std::vector<double> norms(a.size(), 0.0);
  parallel_for(static_cast<long>(a.size()), [&](long j) {
    if (keep[j]) norms[j] = op_norm(a[j]);
  });
  double m = 0.0;
  for (double v : norms) m = std::max(m, v);
  return m;
}

std::vector<double> det_phase_steps(const Samples& a) {
  const long n = static_cast<long>(a.size());
  std::vector<double> out(a.size());
  parallel_for(n, [&](long j) { out[j] = phase_step(a[j], a[(j + 1) % n]); });
  return out;
}

}  // namespace parallel

}  // namespace approxk::kernels
