#pragma once

#include <vector>

#include "approxk/matrix.hpp"

// Per-sample kernels for sampled loops. `parallel` is what the library uses;
// `serial` is the reference the tests compare against. Both produce identical
// results: per-sample work is independent and reductions are done in a fixed
// order (max is order-free, sums are accumulated serially).
namespace approxk::kernels {

using Samples = std::vector<CMatrix>;

namespace serial {
Samples mul(const Samples& a, const Samples& b);
Samples add(const Samples& a, const Samples& b, cplx alpha = 1.0);
Samples inverse(const Samples& a, const Tol& tol);
double sup_norm(const Samples& a);
double sup_norm_masked(const Samples& a, const std::vector<char>& keep);
// arg(det a_{j+1} / det a_j) for j = 0..m-1, cyclically.
std::vector<double> det_phase_steps(const Samples& a);
}  // namespace serial

namespace parallel {
Samples mul(const Samples& a, const Samples& b);
Samples add(const Samples& a, const Samples& b, cplx alpha = 1.0);
Samples inverse(const Samples& a, const Tol& tol);
double sup_norm(const Samples& a);
double sup_norm_masked(const Samples& a, const std::vector<char>& keep);
std::vector<double> det_phase_steps(const Samples& a);
}  // namespace parallel

// Worker count for the parallel kernels; 0 leaves the OpenMP default.
void set_threads(int n);
int threads();

}  // namespace approxk::kernels
