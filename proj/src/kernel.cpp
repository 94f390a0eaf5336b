#include "klrhop/kernel.hpp"

#include <cmath>
#include <string>

namespace klrhop {

namespace {

void require_same_length(const BipolarVector& x, const BipolarVector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("bipolar length mismatch: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  }
}

}  // namespace

BipolarVector::BipolarVector(std::vector<std::int8_t> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != 1 && values_[i] != -1) {
      throw std::invalid_argument("bipolar entry " + std::to_string(i) + " is " +
                                  std::to_string(values_[i]) + ", expected -1 or +1");
    }
  }
}

BipolarVector::BipolarVector(std::initializer_list<int> values) {
  values_.reserve(values.size());
  for (int v : values) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("bipolar entry " + std::to_string(v) + ", expected -1 or +1");
    }
    values_.push_back(static_cast<std::int8_t>(v));
  }
}

BipolarVector BipolarVector::filled(std::size_t n, int value) {
  return BipolarVector(std::vector<std::int8_t>(n, static_cast<std::int8_t>(value)));
}

BipolarVector BipolarVector::random(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::int8_t> v(n);
  // One bit per draw keeps the stream layout independent of n.
  for (auto& x : v) x = (rng() >> 63) ? 1 : -1;
  return BipolarVector(std::move(v));
}

BipolarVector BipolarVector::negated() const {
  BipolarVector out = *this;
  for (auto& x : out.values_) x = static_cast<std::int8_t>(-x);
  return out;
}

KernelParams::KernelParams(double g) : gamma(g) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw std::invalid_argument("kernel gamma must be a positive finite number");
  }
}

PatternSet::PatternSet(std::size_t n, std::vector<BipolarVector> patterns)
    : n_(n), patterns_(std::move(patterns)) {
  if (n_ == 0) throw std::invalid_argument("pattern dimension must be positive");
  if (patterns_.empty()) throw std::invalid_argument("pattern set must hold at least one pattern");
  for (std::size_t mu = 0; mu < patterns_.size(); ++mu) {
    if (patterns_[mu].size() != n_) {
      throw DimensionError("pattern " + std::to_string(mu) + " has length " +
                           std::to_string(patterns_[mu].size()) + ", expected " +
                           std::to_string(n_));
    }
  }
}

PatternSet PatternSet::random(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::vector<BipolarVector> patterns;
  patterns.reserve(p);
  for (std::size_t mu = 0; mu < p; ++mu) patterns.push_back(BipolarVector::random(n, rng));
  return PatternSet(n, std::move(patterns));
}

std::size_t hamming_distance(const BipolarVector& x, const BipolarVector& y) {
  require_same_length(x, y);
  auto a = x.values();
  auto b = y.values();
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

double squared_distance(const BipolarVector& x, const BipolarVector& y) {
  return 4.0 * static_cast<double>(hamming_distance(x, y));
}

double rbf_kernel(const BipolarVector& x, const BipolarVector& y, const KernelParams& params) {
  return std::exp(-params.gamma * squared_distance(x, y));
}

double overlap(const BipolarVector& a, const BipolarVector& b) {
  require_same_length(a, b);
  if (a.size() == 0) throw DimensionError("overlap of empty vectors");
  long dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return static_cast<double>(dot) / static_cast<double>(a.size());
}

KernelTable::KernelTable(std::size_t n, const KernelParams& params) : values_(n + 1) {
  for (std::size_t d = 0; d <= n; ++d) {
    values_[d] = std::exp(-params.gamma * (4.0 * static_cast<double>(d)));
  }
}

Eigen::MatrixXd gram_matrix(const PatternSet& ps, const KernelParams& params) {
  const auto p = static_cast<std::ptrdiff_t>(ps.size());
  const KernelTable table(ps.dimension(), params);
  Eigen::MatrixXd k(p, p);
  // Row mu touches only entries (mu, nu >= mu) and their mirrors, so rows
  // never overlap. Dynamic schedule balances the triangular work.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t mu = 0; mu < p; ++mu) {
    k(mu, mu) = 1.0;
    for (std::ptrdiff_t nu = mu + 1; nu < p; ++nu) {
      const double v = table[hamming_distance(ps[mu], ps[nu])];
      k(mu, nu) = v;
      k(nu, mu) = v;
    }
  }
  return k;
}

Eigen::MatrixXd gram_matrix_serial(const PatternSet& ps, const KernelParams& params) {
  const auto p = static_cast<Eigen::Index>(ps.size());
  Eigen::MatrixXd k(p, p);
  for (Eigen::Index mu = 0; mu < p; ++mu) {
    for (Eigen::Index nu = mu; nu < p; ++nu) {
      const double v = rbf_kernel(ps[mu], ps[nu], params);
      k(mu, nu) = v;
      k(nu, mu) = v;
    }
  }
  return k;
}

}  // namespace klrhop
