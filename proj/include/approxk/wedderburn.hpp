#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "approxk/matrix.hpp"
#include "approxk/star_algebra.hpp"

namespace approxk {

struct BlockSig {
  Index d = 0;  // matrix size of the block
  Index m = 0;  // multiplicity
  bool operator==(const BlockSig&) const = default;
  auto operator<=>(const BlockSig&) const = default;
};

struct WedderburnData {
  Index ambient_dim = 0;
  std::vector<BlockSig> blocks;
  std::vector<CMatrix> central_projections;
  // N x (d m) isometry per block; column j*m + s is the s-th copy of the j-th
  // basis vector, so z_i S z_i = U (M_d (x) 1_m) U^*.
  std::vector<CMatrix> block_isometries;
  // Index of the block 1_N - 1_S when this is the decomposition of the
  // unitization of a non-unital S.
  std::optional<size_t> augmentation;
};

struct K0Vec {
  std::vector<long long> entries;
  std::vector<BlockSig> blocks;
  std::optional<size_t> augmentation;

  bool is_zero() const;
  // Entries outside the augmentation block.
  K0Vec restricted() const;
  long long augmentation_entry() const;
  std::string to_string() const;

  K0Vec operator+(const K0Vec& o) const;
  K0Vec operator-(const K0Vec& o) const;
  K0Vec operator-() const;
  K0Vec scaled(long long k) const;
  bool operator==(const K0Vec& o) const { return entries == o.entries && blocks == o.blocks; }
};

// K1 classes: per-block winding numbers (empty for finite-dimensional algebras).
struct K1Vec {
  std::vector<long long> windings;
  bool operator==(const K1Vec&) const = default;
};

WedderburnData decompose(const Subalg& s, const Tol& tol, std::uint64_t seed);
// decompose(unitize(s)) with the augmentation block marked.
WedderburnData decompose_unitized(const Subalg& s, const Tol& tol, std::uint64_t seed);

// e is an idempotent in M_k of the decomposed algebra (k = rows / N).
K0Vec k0_class(const CMatrix& e, const WedderburnData& w);

struct SimilarityWitness {
  CMatrix w;
  Index l = 0;
  double residual = 0.0;
};

// w with w e w^-1 = f inside the amplified algebra decomposed by `w`.
SimilarityWitness similarity_witness(const CMatrix& e, const CMatrix& f, const WedderburnData& w);

// ((2f-1)(2e-1)+1)/2 = fe + (1-f)(1-e): intertwines e and f, invertible when
// ||e - f|| < 1 / ||2e - 1||.
CMatrix similarity_step(const CMatrix& e, const CMatrix& f);

// Telescoped conjugator z with z e_0 z^-1 = e_last.
CMatrix path_to_similarity(std::span<const CMatrix> path);

}  // namespace approxk
