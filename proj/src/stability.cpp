#include "klrhop/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace klrhop {

namespace {

void check_index(const DualWeights& w, std::size_t i) {
  if (i >= w.n()) {
    throw std::out_of_range("neuron index " + std::to_string(i) + " out of range for N=" +
                            std::to_string(w.n()));
  }
}

}  // namespace

double local_margin(const DualWeights& w, const NetworkState& state, std::size_t i) {
  return 2.0 * std::abs(local_field(w, state, i));
}

double interference_bound(const DualWeights& w, std::size_t i) {
  check_index(w, i);
  double total = 0.0;
  for (Eigen::Index j = 0; j < w.alpha.cols(); ++j) {
    if (static_cast<std::size_t>(j) == i) continue;
    for (Eigen::Index mu = 0; mu < w.alpha.rows(); ++mu) total += std::abs(w.alpha(mu, j));
  }
  return total;
}

FlipDecomposition decompose_flip(const DualWeights& w, const NetworkState& state, std::size_t i) {
  check_index(w, i);
  NetworkState flipped = state;
  flipped.flip(i);

  const Eigen::VectorXd before = local_fields(w, state);
  const Eigen::VectorXd after = local_fields(w, flipped);
  const auto ii = static_cast<Eigen::Index>(i);
  const int s_i = state.state()[i];

  FlipDecomposition d;
  d.delta_v = pseudo_energy(w, flipped) - pseudo_energy(w, state);
  d.local = 2.0 * s_i * before[ii];
  for (Eigen::Index j = 0; j < before.size(); ++j) {
    const double term = -flipped.state()[static_cast<std::size_t>(j)] * (after[j] - before[j]);
    if (j == ii) {
      d.self_feedback = term;
    } else {
      d.cross_others += term;
    }
  }
  d.cross = d.cross_others + d.self_feedback;
  return d;
}

double exact_interference(const DualWeights& w, const NetworkState& state, std::size_t i) {
  return decompose_flip(w, state, i).cross;
}

MarginReport stability_report(const DualWeights& w, const NetworkState& state) {
  const std::size_t n = w.n();
  const Eigen::VectorXd h = local_fields(w, state);

  MarginReport r;
  r.margins.resize(n);
  r.interference_bounds.resize(n);
  r.exact_cross.resize(n);
  r.condition_satisfied.resize(n);
  r.exact_condition_satisfied.resize(n);
  std::size_t ok = 0, exact_ok = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    r.margins[i] = 2.0 * std::abs(h[ii]);
    const double bound = interference_bound(w, i);
    r.interference_bounds[i] = bound;
    r.exact_cross[i] = std::abs(exact_interference(w, state, i));
    r.condition_satisfied[i] = r.margins[i] > bound;
    r.exact_condition_satisfied[i] = r.margins[i] > r.exact_cross[i];
    ok += r.condition_satisfied[i];
    exact_ok += r.exact_condition_satisfied[i];
  }
  r.max_interference_bound =
      n ? *std::max_element(r.interference_bounds.begin(), r.interference_bounds.end()) : 0.0;
  r.fraction_satisfied = static_cast<double>(ok) / static_cast<double>(n);
  r.fraction_exact_satisfied = static_cast<double>(exact_ok) / static_cast<double>(n);
  return r;
}

}  // namespace klrhop
