#pragma once

#include <cstdint>

#include "approxk/settings.hpp"

// Ready-made pairs used by the CLI, the tests and the acceptance run.
namespace approxk {

// M_2 (x) M_r with C = M_2 (x) 1, D = w C w* for w = e11 (x) 1 + e22 (x) W.
struct BlockPair {
  MatrixSetting s;
  CMatrix w;
  CMatrix p, q;    // e11 (x) 1 and e22 (x) 1
  CMatrix swap;    // (e12 + e21) (x) 1, carries p to q inside C
};

BlockPair block_pair(const CMatrix& twist, const Tol& tol = {}, std::uint64_t seed = 1);
// W = R(angle), angle in units of pi.
BlockPair twisted_pair(double angle_pi = 0.2, const Tol& tol = {});
// Random r x r twist, everything conjugated by a random unitary of M_2r.
BlockPair random_block_pair(Index r, std::uint64_t seed, const Tol& tol = {});

// C(S^1) with C, D the functions vanishing off two overlapping arcs.
struct CircleSplit {
  LoopSetting s;
  LoopElem h;  // 1 near 0, 0 near pi
  LoopElem u;  // z
};

CircleSplit circle_split(Index grid = 720, const Tol& tol = {});

// Corners p M_4 p and q M_4 q with principal angle theta (radians) between the
// ranges; the intersection is zero.
MatrixSetting hereditary_pair(double theta, const Tol& tol = {});
CMatrix hereditary_q(double theta);

}  // namespace approxk
