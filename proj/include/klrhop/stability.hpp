#pragma once

// Margin / interference diagnostics for single-neuron flips.
//
// Flipping neuron i changes the pseudo-energy by
//
//   dV = dV_local + dV_cross,   dV_local = -(s_i' - s_i) h_i(s) = 2 s_i h_i(s),
//   dV_cross = -sum_j s_j' (h_j(s') - h_j(s)),
//
// where the cross term includes the flipped neuron's own field change.
// For a corrective flip (s_i h_i < 0) dV_local = -2|h_i|. Since 0 < K <= 1,
// each |dh_j| <= sum_mu |alpha_{mu j}|, giving the conservative bound
// I_max(i) = sum_{j != i} sum_mu |alpha_{mu j}|; 2|h_i| > I_max(i) is then
// sufficient for the flip to lower V.

#include <cstddef>
#include <vector>

#include "klrhop/dynamics.hpp"

namespace klrhop {

struct FlipDecomposition {
  double delta_v = 0.0;        // V(s') - V(s), from two energy evaluations
  double local = 0.0;          // 2 s_i h_i(s)
  double cross = 0.0;          // -sum_j s_j' dh_j, all j
  double cross_others = 0.0;   // j != i part of cross
  double self_feedback = 0.0;  // j == i part of cross
};

double local_margin(const DualWeights& w, const NetworkState& state, std::size_t i);

double interference_bound(const DualWeights& w, std::size_t i);

/// Actual cross term for a hypothetical flip of neuron i (see FlipDecomposition::cross).
double exact_interference(const DualWeights& w, const NetworkState& state, std::size_t i);

FlipDecomposition decompose_flip(const DualWeights& w, const NetworkState& state, std::size_t i);

struct MarginReport {
  std::vector<double> margins;             // 2|h_i(s)|
  std::vector<double> interference_bounds; // I_max(i)
  std::vector<double> exact_cross;         // |dV_cross| for flipping i
  std::vector<bool> condition_satisfied;   // margins[i] > interference_bounds[i]
  std::vector<bool> exact_condition_satisfied;  // margins[i] > exact_cross[i]
  double max_interference_bound = 0.0;
  double fraction_satisfied = 0.0;
  double fraction_exact_satisfied = 0.0;
};

MarginReport stability_report(const DualWeights& w, const NetworkState& state);

}  // namespace klrhop
