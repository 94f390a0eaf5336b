#include "klrhop/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include <omp.h>

namespace klrhop {

namespace {

enum StreamTag : std::uint64_t { kPatterns = 1, kNoise = 2, kRetrieval = 3 };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Neumaier-compensated sum, so e.g. fifty copies of 0.6 average to 0.6.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Population standard deviation (ddof = 0).
template <typename Range, typename Fn>
MeanStd mean_std(const Range& items, Fn value) {
  MeanStd out;
  CompensatedSum total;
  std::size_t count = 0;
  for (const auto& x : items) {
    total.add(value(x));
    ++count;
  }
  if (count == 0) return out;
  out.mean = total.value() / static_cast<double>(count);
  CompensatedSum ss;
  for (const auto& x : items) {
    const double d = value(x) - out.mean;
    ss.add(d * d);
  }
  out.std = std::sqrt(ss.value() / static_cast<double>(count));
  return out;
}

struct TrainedTrial {
  DualWeights weights;
  std::size_t target = 0;
};

TrainedTrial prepare_trial(const ExperimentConfig& cfg, int trial) {
  const std::size_t p = cfg.patterns();
  std::mt19937_64 rng(derive_seed(cfg.master_seed, {kPatterns, cfg.n, p,
                                                    static_cast<std::uint64_t>(trial)}));
  PatternSet ps = PatternSet::random(cfg.n, p, rng);
  DualWeights w = train_network(ps, KernelParams(cfg.gamma), cfg.train);
  return {std::move(w), static_cast<std::size_t>(trial) % p};
}

std::vector<TrialResult> retrieve_schemes(const ExperimentConfig& cfg, const TrainedTrial& tt,
                                          int trial, double noise) {
  const std::size_t p = cfg.patterns();
  const auto noise_tag = std::bit_cast<std::uint64_t>(noise);
  const auto t = static_cast<std::uint64_t>(trial);
  const BipolarVector& target = tt.weights.patterns[tt.target];

  std::mt19937_64 noise_rng(derive_seed(cfg.master_seed, {kNoise, cfg.n, p, t, noise_tag}));
  auto [start, flipped] = inject_noise(target, noise, noise_rng);

  RetrievalOptions opts;
  opts.max_epochs = cfg.max_epochs;
  opts.check_cache = cfg.check_cache;

  std::vector<TrialResult> out;
  for (UpdateScheme scheme : cfg.schemes) {
    std::mt19937_64 rng(derive_seed(cfg.master_seed, {kRetrieval, cfg.n, p, t, noise_tag,
                                                      static_cast<std::uint64_t>(scheme)}));
    RetrievalTrace trace = run_retrieval(tt.weights, start, target, scheme, rng, opts);
    TrialResult r;
    r.trial = trial;
    r.scheme = scheme;
    r.target_index = tt.target;
    r.initial_hamming = flipped;
    r.success = trace.final_state == target;
    r.total_events = trace.total_events();
    r.overlaps = std::move(trace.overlaps);
    r.energies = std::move(trace.energies);
    r.epochs_run = trace.epochs_run;
    r.outcome = trace.outcome;
    out.push_back(std::move(r));
  }
  return out;
}

SchemeAggregate aggregate(UpdateScheme scheme, const std::vector<const TrialResult*>& runs,
                          int horizon) {
  SchemeAggregate a;
  a.scheme = scheme;
  a.trials = runs.size();
  for (const auto* r : runs) a.successes += r->success;
  const auto acc = mean_std(runs, [](const TrialResult* r) { return r->success ? 1.0 : 0.0; });
  const auto ev = mean_std(runs, [](const TrialResult* r) { return double(r->total_events); });
  const auto ham = mean_std(runs, [](const TrialResult* r) { return double(r->initial_hamming); });
  a.accuracy = acc.mean;
  a.accuracy_std = acc.std;
  a.events_mean = ev.mean;
  a.events_std = ev.std;
  a.initial_hamming_mean = ham.mean;
  a.initial_hamming_std = ham.std;

  a.epochs.resize(static_cast<std::size_t>(horizon) + 1);
  for (int e = 0; e <= horizon; ++e) {
    const auto ov = mean_std(
        runs, [e](const TrialResult* r) { return trace_value_at(r->overlaps, r->outcome, e); });
    const auto en = mean_std(
        runs, [e](const TrialResult* r) { return trace_value_at(r->energies, r->outcome, e); });
    a.epochs[static_cast<std::size_t>(e)] = {ov.mean, ov.std, en.mean};
  }
  return a;
}

std::vector<SchemeAggregate> aggregate_all(const std::vector<UpdateScheme>& schemes,
                                           const std::vector<TrialResult>& trials) {
  int horizon = 0;
  for (const auto& r : trials) horizon = std::max(horizon, r.epochs_run);
  std::vector<SchemeAggregate> out;
  for (UpdateScheme scheme : schemes) {
    std::vector<const TrialResult*> runs;
    for (const auto& r : trials) {
      if (r.scheme == scheme) runs.push_back(&r);
    }
    out.push_back(aggregate(scheme, runs, horizon));
  }
  return out;
}

// Runs body(t) for t in [0, trials) across OpenMP threads. The first failing
// trial (by index) is rethrown as a TrialError.
template <typename Body>
void for_each_trial(int trials, int threads, Body body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (int t = 0; t < trials; ++t) {
    try {
      body(t);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (int t = 0; t < trials; ++t) {
    if (!errors[static_cast<std::size_t>(t)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(t)]);
    } catch (const std::exception& e) {
      throw TrialError(t, e.what());
    }
  }
}

}  // namespace

std::size_t ExperimentConfig::patterns() const {
  return static_cast<std::size_t>(std::llround(load * static_cast<double>(n)));
}

void ExperimentConfig::validate() const {
  if (n == 0) throw std::invalid_argument("network size must be positive");
  if (!(load > 0.0) || patterns() == 0) throw std::invalid_argument("load must give P >= 1");
  (void)KernelParams(gamma);
  train.validate();
  if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0)) {
    throw std::invalid_argument("noise fraction must lie in [0, 1]");
  }
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (schemes.empty()) throw std::invalid_argument("at least one update scheme is required");
}

const SchemeAggregate& AggregateResult::at(UpdateScheme scheme) const {
  for (const auto& s : schemes) {
    if (s.scheme == scheme) return s;
  }
  throw std::out_of_range(std::string("no results for scheme ") + to_string(scheme));
}

TrialError::TrialError(int trial, const std::string& what)
    : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

std::pair<BipolarVector, std::size_t> inject_noise(const BipolarVector& pattern, double fraction,
                                                   std::mt19937_64& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("noise fraction must lie in [0, 1]");
  }
  const std::size_t n = pattern.size();
  const auto d = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first d slots become a uniform d-subset.
  for (std::size_t k = 0; k < d; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  BipolarVector out = pattern;
  for (std::size_t k = 0; k < d; ++k) out.flip(idx[k]);
  return {std::move(out), d};
}

double trace_value_at(const std::vector<double>& values, Convergence outcome, int epoch) {
  const int last = static_cast<int>(values.size()) - 1;
  if (epoch <= last) return values[static_cast<std::size_t>(epoch)];
  if (outcome == Convergence::TwoCycle && last >= 1) {
    return values[static_cast<std::size_t>(last - (epoch - last) % 2)];
  }
  return values.back();
}

AggregateResult run_condition(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(cfg.trials));
  for_each_trial(cfg.trials, cfg.threads, [&](int t) {
    const TrainedTrial tt = prepare_trial(cfg, t);
    per_trial[static_cast<std::size_t>(t)] = retrieve_schemes(cfg, tt, t, cfg.noise_fraction);
  });

  AggregateResult result;
  result.config = cfg;
  for (auto& runs : per_trial) {
    for (auto& r : runs) result.trials.push_back(std::move(r));
  }
  result.schemes = aggregate_all(cfg.schemes, result.trials);
  return result;
}

AggregateResult run_dynamics_experiment(const ExperimentConfig& cfg) {
  const bool has_sync = std::count(cfg.schemes.begin(), cfg.schemes.end(),
                                   UpdateScheme::Synchronous) > 0;
  const bool has_async = std::count(cfg.schemes.begin(), cfg.schemes.end(),
                                    UpdateScheme::Asynchronous) > 0;
  if (!has_sync || !has_async) {
    throw std::invalid_argument("dynamics experiment needs both update schemes");
  }
  return run_condition(cfg);
}

std::vector<CapacityCell> run_capacity_experiment(const ExperimentConfig& base,
                                                  const std::vector<std::size_t>& sizes,
                                                  const std::vector<double>& loads) {
  if (!std::is_sorted(loads.begin(), loads.end())) {
    throw std::invalid_argument("capacity loads must be sorted ascending");
  }
  if (sizes.empty() || loads.empty()) throw std::invalid_argument("empty capacity grid");
  std::vector<CapacityCell> cells;
  for (std::size_t n : sizes) {
    for (double load : loads) {
      ExperimentConfig cfg = base;
      cfg.n = n;
      cfg.load = load;
      cells.push_back({n, load, run_condition(cfg)});
    }
  }
  return cells;
}

EfficiencyResult run_efficiency_experiment(const ExperimentConfig& base,
                                           const std::vector<double>& noise_grid) {
  ExperimentConfig cfg = base;
  cfg.schemes = {UpdateScheme::Asynchronous};
  cfg.validate();
  if (noise_grid.empty()) throw std::invalid_argument("empty noise grid");
  for (double f : noise_grid) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("noise levels must lie in [0, 1]");
  }

  const std::size_t levels = noise_grid.size();
  std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(cfg.trials));
  for_each_trial(cfg.trials, cfg.threads, [&](int t) {
    const TrainedTrial tt = prepare_trial(cfg, t);
    auto& slot = per_trial[static_cast<std::size_t>(t)];
    for (double f : noise_grid) {
      auto runs = retrieve_schemes(cfg, tt, t, f);
      slot.push_back(std::move(runs.front()));
    }
  });

  EfficiencyResult result;
  result.config = cfg;
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<TrialResult> level;
    for (auto& runs : per_trial) level.push_back(runs[k]);
    EfficiencyPoint point;
    point.noise_fraction = noise_grid[k];
    point.stats = aggregate_all(cfg.schemes, level).front();
    result.points.push_back(std::move(point));
    for (auto& r : level) result.trials.push_back(std::move(r));
  }
  return result;
}

std::vector<double> default_load_grid() {
  return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30};
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw std::invalid_argument("bad grid '" + spec + "': expected start:stop:step");
    }
    parts.push_back(v);
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw std::invalid_argument("bad grid '" + spec + "': expected start:stop:step");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    double v = parts[0] + k * parts[2];
    if (v > parts[1] + 1e-9 * parts[2]) break;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

}  // namespace klrhop
