#include "cbb/sketching.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cbb/counter_rng.hpp"

namespace cbb {

SjltSketch::SjltSketch(std::size_t sketch_size, std::size_t num_blocks,
                       std::size_t input_length, std::uint64_t seed)
    : sketch_size_(sketch_size),
      num_blocks_(num_blocks),
      input_length_(input_length),
      seed_(seed),
      scale_(0.0) {
  if (num_blocks == 0 || sketch_size == 0) {
    throw std::invalid_argument("sjlt: sketch size and number of blocks must be positive");
  }
  if (sketch_size < num_blocks) {
    throw std::invalid_argument("sjlt: sketch size " + std::to_string(sketch_size) +
                                " is smaller than number of blocks " +
                                std::to_string(num_blocks));
  }
  if (sketch_size % num_blocks != 0) {
    throw std::invalid_argument("sjlt: sketch size " + std::to_string(sketch_size) +
                                " is not divisible by number of blocks " +
                                std::to_string(num_blocks));
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(num_blocks));
}

std::uint64_t SjltSketch::entry_bits(std::size_t column, std::size_t block) const noexcept {
  return rng::derive(seed_, column, block);
}

std::size_t SjltSketch::row(std::size_t column, std::size_t block) const noexcept {
  const std::uint64_t bits = entry_bits(column, block);
  return block * block_rows() + rng::to_range(rng::mix64(bits), block_rows());
}

double SjltSketch::value(std::size_t column, std::size_t block) const noexcept {
  const std::uint64_t bits = entry_bits(column, block);
  return (bits >> 63) != 0 ? -scale_ : scale_;
}

Matrix SjltSketch::apply(const Matrix& a) const {
  if (static_cast<std::size_t>(a.rows()) != input_length_) {
    throw std::invalid_argument("sjlt: input has " + std::to_string(a.rows()) +
                                " rows, sketch expects " + std::to_string(input_length_));
  }
  require_finite(a, "sjlt input");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(sketch_size_), a.cols());
  for (std::size_t i = 0; i < input_length_; ++i) {
    const auto src = a.row(static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < num_blocks_; ++k) {
      out.row(static_cast<Eigen::Index>(row(i, k))) += value(i, k) * src;
    }
  }
  return out;
}

Vector SjltSketch::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != input_length_) {
    throw std::invalid_argument("sjlt: input has " + std::to_string(v.size()) +
                                " entries, sketch expects " + std::to_string(input_length_));
  }
  require_finite(v, "sjlt input");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(sketch_size_));
  for (std::size_t i = 0; i < input_length_; ++i) {
    for (std::size_t k = 0; k < num_blocks_; ++k) {
      out(static_cast<Eigen::Index>(row(i, k))) += value(i, k) * v(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

Matrix SjltSketch::materialize() const {
  Matrix pi = Matrix::Zero(static_cast<Eigen::Index>(sketch_size_),
                           static_cast<Eigen::Index>(input_length_));
  for (std::size_t i = 0; i < input_length_; ++i) {
    for (std::size_t k = 0; k < num_blocks_; ++k) {
      pi(static_cast<Eigen::Index>(row(i, k)), static_cast<Eigen::Index>(i)) = value(i, k);
    }
  }
  return pi;
}

}  // namespace cbb
