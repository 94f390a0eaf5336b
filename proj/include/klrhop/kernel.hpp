#pragma once

// Bipolar patterns, the RBF kernel and Gram matrix construction.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace klrhop {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state or memory in {-1, +1}^N. Entries are validated on construction,
/// so every live BipolarVector satisfies the bipolar invariant.
class BipolarVector {
 public:
  BipolarVector() = default;
  explicit BipolarVector(std::vector<std::int8_t> values);
  BipolarVector(std::initializer_list<int> values);

  static BipolarVector filled(std::size_t n, int value);
  static BipolarVector random(std::size_t n, std::mt19937_64& rng);

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }

  void flip(std::size_t i) { values_[i] = static_cast<std::int8_t>(-values_[i]); }
  BipolarVector negated() const;

  bool operator==(const BipolarVector&) const = default;

 private:
  std::vector<std::int8_t> values_;
};

struct KernelParams {
  double gamma = 0.1;

  KernelParams() = default;
  explicit KernelParams(double g);
};

/// The P stored memories of one network, all of length n.
class PatternSet {
 public:
  PatternSet(std::size_t n, std::vector<BipolarVector> patterns);

  /// i.i.d. uniform +-1 bits.
  static PatternSet random(std::size_t n, std::size_t p, std::mt19937_64& rng);

  std::size_t dimension() const { return n_; }
  std::size_t size() const { return patterns_.size(); }
  const BipolarVector& operator[](std::size_t mu) const { return patterns_[mu]; }
  auto begin() const { return patterns_.begin(); }
  auto end() const { return patterns_.end(); }

  bool operator==(const PatternSet&) const = default;

 private:
  std::size_t n_;
  std::vector<BipolarVector> patterns_;
};

std::size_t hamming_distance(const BipolarVector& x, const BipolarVector& y);

/// Sum of squared coordinate differences; 4 * Hamming for bipolar inputs.
double squared_distance(const BipolarVector& x, const BipolarVector& y);

double rbf_kernel(const BipolarVector& x, const BipolarVector& y, const KernelParams& params);

/// (1/N) sum_i a_i b_i.
double overlap(const BipolarVector& a, const BipolarVector& b);

/// exp(-gamma * 4d) for d = 0..n. Entries are produced by the same expression
/// rbf_kernel uses, so a table lookup and a fresh evaluation agree bit for bit.
class KernelTable {
 public:
  KernelTable(std::size_t n, const KernelParams& params);
  double operator[](std::size_t hamming) const { return values_[hamming]; }
  std::size_t dimension() const { return values_.size() - 1; }

 private:
  std::vector<double> values_;
};

/// Symmetric P x P Gram matrix, unit diagonal. Rows are distributed over
/// OpenMP threads; every entry is computed once and mirrored.
Eigen::MatrixXd gram_matrix(const PatternSet& ps, const KernelParams& params);

/// Single-threaded reference that calls rbf_kernel for every pair.
Eigen::MatrixXd gram_matrix_serial(const PatternSet& ps, const KernelParams& params);

}  // namespace klrhop
