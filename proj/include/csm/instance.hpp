#pragma once

// Random constrained-matching instances.
//
// n men and n women. Each pair (man i, woman j) is admissible independently
// with probability p. Man i ranks women by increasing x(i, j); woman j ranks
// men by increasing y(i, j). Scores are independent uniforms on (0, 1).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "csm/rng.hpp"

namespace csm {

enum class Side { men, women };

constexpr Side opposite(Side s) { return s == Side::men ? Side::women : Side::men; }
const char* to_string(Side s);

class DenseInstance {
 public:
  /// Takes ownership of row-major n*n arrays (row = man, column = woman).
  /// Throws std::invalid_argument when shapes, probabilities or scores are
  /// invalid, or when a row of x or a column of y contains a tie.
  DenseInstance(std::size_t n, double p, std::vector<std::uint8_t> adm, std::vector<double> x,
                std::vector<double> y);

  std::size_t n() const { return n_; }
  double p() const { return p_; }

  bool admissible(std::size_t man, std::size_t woman) const { return adm_[man * n_ + woman] != 0; }
  /// Man's score of a woman; lower is better.
  double man_score(std::size_t man, std::size_t woman) const { return x_[man * n_ + woman]; }
  /// Woman's score of a man; lower is better.
  double woman_score(std::size_t man, std::size_t woman) const { return y_[man * n_ + woman]; }

  std::size_t admissible_count() const;

  std::span<const std::uint8_t> adm_data() const { return adm_; }
  std::span<const double> x_data() const { return x_; }
  std::span<const double> y_data() const { return y_; }

  friend bool operator==(const DenseInstance&, const DenseInstance&) = default;

 private:
  struct Unchecked {};
  DenseInstance(Unchecked, std::size_t n, double p, std::vector<std::uint8_t> adm,
                std::vector<double> x, std::vector<double> y)
      : n_(n), p_(p), adm_(std::move(adm)), x_(std::move(x)), y_(std::move(y)) {}
  friend DenseInstance generate_dense(std::size_t, double, StreamSpec);

  std::size_t n_;
  double p_;
  std::vector<std::uint8_t> adm_;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Fully materialized random instance, reproducible from `spec`.
/// Draw order: all admissibility coins, then x row by row, then y row by row;
/// exact ties in a row of x or a column of y are redrawn from the same stream.
DenseInstance generate_dense(std::size_t n, double p, StreamSpec spec);

/// Fixture text format: "n p", n lines of 0/1 characters (adm), n lines of x,
/// n lines of y; decimals carry 17 significant digits.
void write_instance(std::ostream& out, const DenseInstance& inst);
DenseInstance read_instance(std::istream& in);
DenseInstance load_instance(const std::string& path);

}  // namespace csm
