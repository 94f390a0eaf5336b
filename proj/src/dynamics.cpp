#include "klrhop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace klrhop {

const char* to_string(UpdateScheme scheme) {
  return scheme == UpdateScheme::Synchronous ? "sync" : "async";
}

UpdateScheme parse_scheme(std::string_view text) {
  if (text == "sync" || text == "synchronous") return UpdateScheme::Synchronous;
  if (text == "async" || text == "asynchronous") return UpdateScheme::Asynchronous;
  throw std::invalid_argument("unknown update scheme '" + std::string(text) + "'");
}

const char* to_string(Convergence c) {
  switch (c) {
    case Convergence::FixedPoint: return "fixed_point";
    case Convergence::TwoCycle: return "two_cycle";
    case Convergence::None: break;
  }
  return "none";
}

NetworkState::NetworkState(const DualWeights& w, BipolarVector s)
    : w_(&w), table_(w.n(), w.params), s_(std::move(s)) {
  if (s_.size() != w.n()) {
    throw DimensionError("state length " + std::to_string(s_.size()) +
                         " does not match network size " + std::to_string(w.n()));
  }
  rebuild();
}

void NetworkState::rebuild() {
  const auto& ps = w_->patterns;
  distances_.resize(ps.size());
  kernels_.resize(static_cast<Eigen::Index>(ps.size()));
  for (std::size_t mu = 0; mu < ps.size(); ++mu) {
    distances_[mu] = static_cast<std::uint32_t>(hamming_distance(s_, ps[mu]));
    kernels_[static_cast<Eigen::Index>(mu)] = table_[distances_[mu]];
  }
}

void NetworkState::assign(BipolarVector s) {
  if (s.size() != w_->n()) throw DimensionError("state length does not match network size");
  s_ = std::move(s);
  rebuild();
}

void NetworkState::flip(std::size_t i) {
  const int old = s_[i];
  const auto& ps = w_->patterns;
  // Agreeing bits become disagreements and vice versa: d_mu moves by -+1.
  for (std::size_t mu = 0; mu < ps.size(); ++mu) {
    auto& d = distances_[mu];
    d = ps[mu][i] == old ? d + 1 : d - 1;
    kernels_[static_cast<Eigen::Index>(mu)] = table_[d];
  }
  s_.flip(i);
}

double NetworkState::max_cache_deviation() const {
  const auto& ps = w_->patterns;
  double worst = 0.0;
  for (std::size_t mu = 0; mu < ps.size(); ++mu) {
    const double fresh = rbf_kernel(s_, ps[mu], w_->params);
    worst = std::max(worst, std::abs(fresh - kernels_[static_cast<Eigen::Index>(mu)]));
  }
  return worst;
}

double local_field(const DualWeights& w, const NetworkState& state, std::size_t i) {
  if (i >= w.n()) {
    throw std::out_of_range("neuron index " + std::to_string(i) + " out of range for N=" +
                            std::to_string(w.n()));
  }
  return w.alpha.col(static_cast<Eigen::Index>(i)).dot(state.kernels());
}

Eigen::VectorXd local_fields(const DualWeights& w, const NetworkState& state) {
  return w.alpha.transpose() * state.kernels();
}

double local_field_uncached(const DualWeights& w, const BipolarVector& s, std::size_t i) {
  if (i >= w.n()) throw std::out_of_range("neuron index out of range");
  double h = 0.0;
  for (std::size_t mu = 0; mu < w.p(); ++mu) {
    h += w.alpha(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(i)) *
         rbf_kernel(s, w.patterns[mu], w.params);
  }
  return h;
}

double pseudo_energy(const DualWeights& w, const NetworkState& state) {
  const Eigen::VectorXd h = local_fields(w, state);
  double v = 0.0;
  for (std::size_t i = 0; i < w.n(); ++i) v -= state.state()[i] * h[static_cast<Eigen::Index>(i)];
  return v;
}

std::size_t sync_step(const DualWeights& w, NetworkState& state, std::vector<FlipEvent>* events,
                      int epoch) {
  const Eigen::VectorXd h = local_fields(w, state);
  std::vector<std::int8_t> next(w.n());
  std::size_t flips = 0;
  for (std::size_t i = 0; i < w.n(); ++i) {
    next[i] = static_cast<std::int8_t>(sign_of(h[static_cast<Eigen::Index>(i)]));
    if (next[i] != state.state()[i]) {
      ++flips;
      if (events) events->push_back({epoch, i, state.state()[i]});
    }
  }
  if (flips > 0) state.assign(BipolarVector(std::move(next)));
  return flips;
}

std::size_t async_epoch(const DualWeights& w, NetworkState& state,
                        std::span<const std::size_t> order, std::vector<FlipEvent>* events,
                        int epoch) {
  const std::size_t n = w.n();
  if (order.size() != n) {
    throw std::invalid_argument("update order has " + std::to_string(order.size()) +
                                " entries, expected a permutation of " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    if (i >= n || seen[i]) throw std::invalid_argument("update order is not a permutation");
    seen[i] = true;
  }

  std::size_t flips = 0;
  for (std::size_t i : order) {
    const int next = sign_of(local_field(w, state, i));
    const int old = state.state()[i];
    if (next != old) {
      if (events) events->push_back({epoch, i, old});
      state.flip(i);
      ++flips;
    }
  }
  return flips;
}

RetrievalTrace run_retrieval(const DualWeights& w, const BipolarVector& s0,
                             const BipolarVector& target, UpdateScheme scheme,
                             std::mt19937_64& rng, const RetrievalOptions& opts) {
  if (opts.max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (target.size() != w.n()) throw DimensionError("target length does not match network size");

  NetworkState state(w, s0);
  RetrievalTrace trace;
  trace.overlaps.push_back(overlap(state.state(), target));
  trace.energies.push_back(pseudo_energy(w, state));

  std::vector<std::size_t> order(w.n());
  BipolarVector two_back;  // state before the previous step (sync only)
  BipolarVector one_back = state.state();

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    std::size_t flips = 0;
    if (scheme == UpdateScheme::Synchronous) {
      flips = sync_step(w, state, &trace.events, epoch);
    } else {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      flips = async_epoch(w, state, order, &trace.events, epoch);
    }
    if (opts.check_cache) {
      const double dev = state.max_cache_deviation();
      if (!(dev <= opts.cache_tolerance)) {
        throw std::logic_error("kernel cache deviates from recomputation by " +
                               std::to_string(dev) + " after epoch " + std::to_string(epoch));
      }
    }
    trace.epochs_run = epoch;
    trace.overlaps.push_back(overlap(state.state(), target));
    trace.energies.push_back(pseudo_energy(w, state));

    if (flips == 0) {
      trace.outcome = Convergence::FixedPoint;
      break;
    }
    if (scheme == UpdateScheme::Synchronous) {
      if (epoch >= 2 && state.state() == two_back) {
        trace.outcome = Convergence::TwoCycle;
        break;
      }
      two_back = std::move(one_back);
      one_back = state.state();
    }
  }
  trace.final_state = state.state();
  return trace;
}

}  // namespace klrhop
