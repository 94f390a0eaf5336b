#pragma once

// Retrieval dynamics of a trained network:
//
//   h_i(s) = sum_mu alpha_{mu i} K(s, xi^mu),   V(s) = -sum_i s_i h_i(s),
//
// with synchronous steps (all neurons from the previous state) and
// asynchronous epochs (N single-neuron updates in a permutation order).
// sign(0) = +1 throughout.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "klrhop/kernel.hpp"
#include "klrhop/trainer.hpp"

namespace klrhop {

enum class UpdateScheme { Synchronous, Asynchronous };

const char* to_string(UpdateScheme scheme);
UpdateScheme parse_scheme(std::string_view text);

inline int sign_of(double h) { return h >= 0.0 ? 1 : -1; }

/// Current state s together with a cache of K(s, xi^mu) for every stored
/// pattern. The cache is kept as integer Hamming distances plus a lookup
/// table, so flipping a neuron costs O(P) and never drifts from a full
/// recomputation.
///
/// Holds a reference to the weights; they must outlive the state.
class NetworkState {
 public:
  NetworkState(const DualWeights& w, BipolarVector s);

  const BipolarVector& state() const { return s_; }
  const Eigen::VectorXd& kernels() const { return kernels_; }
  std::span<const std::uint32_t> distances() const { return distances_; }
  const DualWeights& weights() const { return *w_; }

  /// Negates s_i and updates every cached kernel.
  void flip(std::size_t i);

  /// Replaces the whole state and rebuilds the cache (O(NP)).
  void assign(BipolarVector s);

  /// Largest |cached - rbf_kernel(s, xi^mu)| over mu, with fresh evaluations.
  double max_cache_deviation() const;

 private:
  void rebuild();

  const DualWeights* w_;
  KernelTable table_;
  BipolarVector s_;
  std::vector<std::uint32_t> distances_;
  Eigen::VectorXd kernels_;
};

struct FlipEvent {
  int epoch;  // 1-based epoch / step in which the flip happened
  std::size_t neuron;
  int old_sign;

  bool operator==(const FlipEvent&) const = default;
};

enum class Convergence { None, FixedPoint, TwoCycle };

const char* to_string(Convergence c);

struct RetrievalTrace {
  std::vector<double> overlaps;  // index 0 is the initial state
  std::vector<double> energies;
  std::vector<FlipEvent> events;
  Convergence outcome = Convergence::None;
  int epochs_run = 0;
  BipolarVector final_state;

  bool converged() const { return outcome != Convergence::None; }
  std::size_t total_events() const { return events.size(); }
};

struct RetrievalOptions {
  int max_epochs = 100;
  /// Compare the incremental cache with a full recomputation after every
  /// epoch and throw if they differ by more than cache_tolerance.
  bool check_cache = false;
  double cache_tolerance = 1e-9;
};

double local_field(const DualWeights& w, const NetworkState& state, std::size_t i);

/// All N fields at once: alpha^T k.
Eigen::VectorXd local_fields(const DualWeights& w, const NetworkState& state);

/// Straight-line field evaluation with fresh kernels, no cache. Test oracle
/// and reference path.
double local_field_uncached(const DualWeights& w, const BipolarVector& s, std::size_t i);

double pseudo_energy(const DualWeights& w, const NetworkState& state);

/// Applies s_i <- sign(h_i(s)) to every neuron from the pre-step state.
/// Returns the number of flips; flips are appended to events when given.
std::size_t sync_step(const DualWeights& w, NetworkState& state,
                      std::vector<FlipEvent>* events = nullptr, int epoch = 1);

/// Visits neurons in `order` (a permutation of 0..N-1), each update seeing
/// the state as already modified in this epoch.
std::size_t async_epoch(const DualWeights& w, NetworkState& state,
                        std::span<const std::size_t> order,
                        std::vector<FlipEvent>* events = nullptr, int epoch = 1);

/// Iterates the chosen scheme from s0 until a zero-flip epoch, a period-2
/// cycle (synchronous only) or max_epochs. Asynchronous epochs draw a fresh
/// permutation from rng each time.
RetrievalTrace run_retrieval(const DualWeights& w, const BipolarVector& s0,
                             const BipolarVector& target, UpdateScheme scheme,
                             std::mt19937_64& rng, const RetrievalOptions& opts = {});

}  // namespace klrhop
