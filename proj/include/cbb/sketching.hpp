#pragma once

#include <cstddef>
#include <cstdint>

#include "cbb/dense.hpp"

namespace cbb {

/**
 * Block sparse Johnson-Lindenstrauss transform Pi (sketch_size x input_length).
 *
 * The c rows are split into D contiguous blocks of c/D rows. Column i has one
 * nonzero per block k, at row k*(c/D) + h(i,k), with value sign(i,k)/sqrt(D).
 * Hash targets and signs are drawn lazily from a counter stream keyed by
 * (seed, i, k), so Pi is never materialized when applied.
 *
 * D = 1 is the plain CountSketch.
 */
class SjltSketch {
 public:
  SjltSketch(std::size_t sketch_size, std::size_t num_blocks, std::size_t input_length,
             std::uint64_t seed);

  std::size_t sketch_size() const noexcept { return sketch_size_; }
  std::size_t num_blocks() const noexcept { return num_blocks_; }
  std::size_t block_rows() const noexcept { return sketch_size_ / num_blocks_; }
  std::size_t input_length() const noexcept { return input_length_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Absolute row of the nonzero of `column` inside `block`.
  std::size_t row(std::size_t column, std::size_t block) const noexcept;
  /// Signed value (+-1/sqrt(D)) of that nonzero.
  double value(std::size_t column, std::size_t block) const noexcept;

  /// Pi * A in O(n d D); A must have input_length rows.
  Matrix apply(const Matrix& a) const;
  /// Pi * v; v must have input_length entries.
  Vector apply(const Vector& v) const;

  /// Dense Pi, for tests and small instances only.
  Matrix materialize() const;

 private:
  std::uint64_t entry_bits(std::size_t column, std::size_t block) const noexcept;

  std::size_t sketch_size_;
  std::size_t num_blocks_;
  std::size_t input_length_;
  std::uint64_t seed_;
  double scale_;
};

inline SjltSketch new_sjlt(std::size_t sketch_size, std::size_t num_blocks,
                           std::size_t input_length, std::uint64_t seed) {
  return SjltSketch(sketch_size, num_blocks, input_length, seed);
}

inline Matrix sketch_matrix(const SjltSketch& sk, const Matrix& a) { return sk.apply(a); }
inline Vector sketch_vector(const SjltSketch& sk, const Vector& v) { return sk.apply(v); }

}  // namespace cbb
