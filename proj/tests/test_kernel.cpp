#include <doctest.h>

#include <cmath>
#include <random>

#include "klrhop/kernel.hpp"
#include "test_util.hpp"

using namespace klrhop;
using klrhop::testing::with_flips;

namespace {

// exp(-0.4) and exp(-4.0) from a 30-digit calculator.
constexpr double kExpMinus04 = 0.670320046035639285860337945617;
constexpr double kExpMinus4 = 0.0183156388887341802937180212732;

double summed_squares(const BipolarVector& x, const BipolarVector& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = double(x[i]) - double(y[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

TEST_CASE("bipolar vectors reject non +-1 entries") {
  CHECK_THROWS_AS(BipolarVector({1, 0, -1}), std::invalid_argument);
  CHECK_THROWS_AS(BipolarVector(std::vector<std::int8_t>{2}), std::invalid_argument);
  CHECK_NOTHROW(BipolarVector({1, -1, 1}));
}

TEST_CASE("squared distance") {
  std::mt19937_64 rng(1);
  const auto x = BipolarVector::random(50, rng);
  CHECK(squared_distance(x, x) == 0.0);
  CHECK(squared_distance(x, x.negated()) == 200.0);
  CHECK(squared_distance(x, with_flips(x, 3)) == summed_squares(x, with_flips(x, 3)));
  CHECK(squared_distance(x, with_flips(x, 3)) == 12.0);
  CHECK_THROWS_AS(squared_distance(x, BipolarVector::random(49, rng)), DimensionError);
}

TEST_CASE("squared distance is four times Hamming on random pairs") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 80;
    const auto x = BipolarVector::random(n, rng);
    const auto y = BipolarVector::random(n, rng);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < n; ++i) diff += x[i] != y[i];
    CHECK(hamming_distance(x, y) == diff);
    CHECK(squared_distance(x, y) == 4.0 * double(diff));
    CHECK(squared_distance(x, y) == summed_squares(x, y));
  }
}

TEST_CASE("rbf kernel values") {
  std::mt19937_64 rng(3);
  const auto x = BipolarVector::random(50, rng);
  const KernelParams g(0.1);
  CHECK(rbf_kernel(x, x, g) == 1.0);
  CHECK(rbf_kernel(x, with_flips(x, 1), g) == doctest::Approx(kExpMinus04).epsilon(1e-14));
  CHECK(rbf_kernel(x, with_flips(x, 10), g) == doctest::Approx(kExpMinus4).epsilon(1e-14));
  CHECK_THROWS_AS(rbf_kernel(x, BipolarVector::random(3, rng), g), DimensionError);
}

TEST_CASE("rbf kernel stays in (0, 1]") {
  // gamma * 4N stays below the double underflow point of exp.
  std::mt19937_64 rng(4);
  for (double gamma : {0.02, 0.1, 0.5, 2.0}) {
    for (int t = 0; t < 50; ++t) {
      const auto x = BipolarVector::random(60, rng);
      const auto y = BipolarVector::random(60, rng);
      const double k = rbf_kernel(x, y, KernelParams(gamma));
      CHECK(k > 0.0);
      CHECK(k <= 1.0);
    }
  }
}

TEST_CASE("kernel params reject non-positive gamma") {
  CHECK_THROWS(KernelParams(0.0));
  CHECK_THROWS(KernelParams(-1.0));
  CHECK_THROWS(KernelParams(std::nan("")));
}

TEST_CASE("kernel table matches fresh evaluation bit for bit") {
  std::mt19937_64 rng(5);
  const KernelParams g(0.1);
  const KernelTable table(40, g);
  const auto x = BipolarVector::random(40, rng);
  for (std::size_t d = 0; d <= 40; ++d) {
    CHECK(table[d] == rbf_kernel(x, with_flips(x, d), g));
  }
}

TEST_CASE("overlap") {
  std::mt19937_64 rng(6);
  const auto x = BipolarVector::random(50, rng);
  CHECK(overlap(x, x) == 1.0);
  CHECK(overlap(x, x.negated()) == -1.0);
  for (std::size_t d : {0u, 1u, 7u, 25u, 50u}) {
    CHECK(overlap(x, with_flips(x, d)) == doctest::Approx(1.0 - 2.0 * double(d) / 50.0));
  }
  CHECK_THROWS_AS(overlap(x, BipolarVector::random(10, rng)), DimensionError);
}

TEST_CASE("gram matrix small cases") {
  std::mt19937_64 rng(7);
  const auto x = BipolarVector::random(30, rng);
  const KernelParams g(0.1);

  const auto k1 = gram_matrix(PatternSet(30, {x}), g);
  REQUIRE(k1.rows() == 1);
  CHECK(k1(0, 0) == 1.0);

  for (std::size_t d : {1u, 4u, 10u}) {
    const auto k2 = gram_matrix(PatternSet(30, {x, with_flips(x, d)}), g);
    CHECK(k2(0, 1) == doctest::Approx(std::exp(-0.4 * double(d))).epsilon(1e-14));
    CHECK(k2(1, 0) == k2(0, 1));
  }
}

TEST_CASE("gram matrix is symmetric, unit-diagonal and PSD") {
  std::mt19937_64 rng(8);
  for (std::size_t p : {2u, 10u, 25u, 50u}) {
    const auto ps = PatternSet::random(40, p, rng);
    const auto k = gram_matrix(ps, KernelParams(0.1));
    for (Eigen::Index a = 0; a < k.rows(); ++a) {
      CHECK(k(a, a) == 1.0);
      for (Eigen::Index b = 0; b < k.cols(); ++b) REQUIRE(k(a, b) == k(b, a));
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("parallel gram matches the serial reference") {
  std::mt19937_64 rng(9);
  const auto ps = PatternSet::random(50, 300, rng);
  const KernelParams g(0.1);
  CHECK(gram_matrix(ps, g) == gram_matrix_serial(ps, g));
}

TEST_CASE("pattern set validates dimensions") {
  std::mt19937_64 rng(10);
  CHECK_THROWS_AS(PatternSet(5, {BipolarVector::random(5, rng), BipolarVector::random(4, rng)}),
                  DimensionError);
}
