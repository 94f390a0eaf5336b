#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "klrhop/experiments.hpp"

using namespace klrhop;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 24;
  cfg.load = 2.0;
  cfg.trials = 6;
  cfg.noise_fraction = 0.125;
  cfg.train.iterations = 120;
  cfg.master_seed = 99;
  return cfg;
}

bool same_trial(const TrialResult& a, const TrialResult& b) {
  return a.trial == b.trial && a.scheme == b.scheme && a.target_index == b.target_index &&
         a.initial_hamming == b.initial_hamming && a.success == b.success &&
         a.total_events == b.total_events && a.overlaps == b.overlaps &&
         a.energies == b.energies && a.epochs_run == b.epochs_run && a.outcome == b.outcome;
}

}  // namespace

TEST_CASE("noise injection flips an exact count of distinct bits") {
  std::mt19937_64 rng(70);
  const auto x = BipolarVector::random(50, rng);

  auto [same, d0] = inject_noise(x, 0.0, rng);
  CHECK(d0 == 0);
  CHECK(same == x);

  for (int t = 0; t < 50; ++t) {
    auto [y, d] = inject_noise(x, 0.2, rng);
    CHECK(d == 10);
    CHECK(hamming_distance(x, y) == 10);
    CHECK(overlap(x, y) == doctest::Approx(0.6));
  }

  auto [inv, dn] = inject_noise(x, 1.0, rng);
  CHECK(dn == 50);
  CHECK(inv == x.negated());
  CHECK(overlap(x, inv) == -1.0);

  CHECK(inject_noise(x, 0.25, rng).second == 13);  // round(12.5) away from zero
  CHECK_THROWS(inject_noise(x, -0.1, rng));
  CHECK_THROWS(inject_noise(x, 1.5, rng));
}

TEST_CASE("noise positions are spread uniformly") {
  std::mt19937_64 rng(71);
  const auto x = BipolarVector::filled(10, 1);
  std::vector<int> hits(10, 0);
  const int draws = 20000;
  for (int t = 0; t < draws; ++t) {
    const auto [y, d] = inject_noise(x, 0.3, rng);
    for (std::size_t i = 0; i < 10; ++i) hits[i] += y[i] < 0;
  }
  // Each position is hit with probability 0.3; 5 sigma is about 0.016.
  for (int h : hits) CHECK(std::abs(double(h) / draws - 0.3) < 0.016);
}

TEST_CASE("seed derivation separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 4; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(7, {a, b}));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(8, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
}

TEST_CASE("trace extension past convergence") {
  const std::vector<double> fp{0.2, 0.8, 1.0};
  CHECK(trace_value_at(fp, Convergence::FixedPoint, 1) == 0.8);
  CHECK(trace_value_at(fp, Convergence::FixedPoint, 9) == 1.0);
  const std::vector<double> cyc{0.5, -0.3, 0.7};
  CHECK(trace_value_at(cyc, Convergence::TwoCycle, 3) == -0.3);
  CHECK(trace_value_at(cyc, Convergence::TwoCycle, 4) == 0.7);
  CHECK(trace_value_at(cyc, Convergence::TwoCycle, 5) == -0.3);
}

TEST_CASE("grids") {
  const auto g = parse_grid("0.05:0.40:0.05");
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 0.05);
  CHECK(g[3] == 0.2);
  CHECK(g.back() == 0.4);
  CHECK(parse_grid("1:1:1") == std::vector<double>{1.0});
  CHECK_THROWS(parse_grid("0.1:0.05:0.01"));
  CHECK_THROWS(parse_grid("0:1"));
  CHECK_THROWS(parse_grid("0:1:0"));
  CHECK_THROWS(parse_grid("a:b:c"));
  const auto loads = default_load_grid();
  CHECK(loads.size() == 15);
  CHECK(loads.back() == 30.0);
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK(cfg.patterns() == 48);
  cfg.load = 3.0;
  cfg.n = 50;
  CHECK(cfg.patterns() == 150);
  cfg.noise_fraction = 1.2;
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.schemes = {UpdateScheme::Synchronous};
  CHECK_THROWS(run_dynamics_experiment(cfg));
  CHECK_THROWS(run_capacity_experiment(small_config(), {24}, {3.0, 1.0}));
}

TEST_CASE("aggregates agree with the per-trial records") {
  const auto r = run_dynamics_experiment(small_config());
  REQUIRE(r.trials.size() == 12);
  for (const auto& agg : r.schemes) {
    double succ = 0, events = 0, ham = 0, ov0 = 0;
    for (const auto& t : r.trials) {
      if (t.scheme != agg.scheme) continue;
      succ += t.success;
      events += double(t.total_events);
      ham += double(t.initial_hamming);
      ov0 += t.overlaps.front();
      CHECK(t.target_index == std::size_t(t.trial) % 48);
      CHECK(t.initial_hamming == 3);
      if (t.success) CHECK(t.total_events >= t.initial_hamming);
    }
    CHECK(agg.trials == 6);
    CHECK(agg.accuracy == doctest::Approx(succ / 6));
    CHECK(agg.events_mean == doctest::Approx(events / 6));
    CHECK(agg.initial_hamming_mean == 3.0);
    CHECK(agg.initial_hamming_std == 0.0);
    CHECK(agg.epochs.front().overlap_mean == doctest::Approx(ov0 / 6));
    CHECK(agg.epochs.front().overlap_mean == 0.75);
  }
  CHECK(r.at(UpdateScheme::Synchronous).epochs.size() == r.at(UpdateScheme::Asynchronous).epochs.size());
}

TEST_CASE("population standard deviation") {
  auto cfg = small_config();
  cfg.trials = 8;
  const auto r = run_condition(cfg);
  for (const auto& agg : r.schemes) {
    std::vector<double> ev;
    for (const auto& t : r.trials)
      if (t.scheme == agg.scheme) ev.push_back(double(t.total_events));
    double m = 0;
    for (double v : ev) m += v;
    m /= double(ev.size());
    double ss = 0;
    for (double v : ev) ss += (v - m) * (v - m);
    CHECK(agg.events_std == doctest::Approx(std::sqrt(ss / double(ev.size()))));
  }
}

TEST_CASE("results are reproducible and independent of scheduling") {
  auto cfg = small_config();
  cfg.threads = 1;
  const auto a = run_condition(cfg);
  cfg.threads = 4;
  const auto b = run_condition(cfg);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t k = 0; k < a.trials.size(); ++k) CHECK(same_trial(a.trials[k], b.trials[k]));
  CHECK(a.schemes[0].accuracy == b.schemes[0].accuracy);
  CHECK(a.schemes[1].epochs.back().energy_mean == b.schemes[1].epochs.back().energy_mean);

  // Dropping trials does not disturb the ones that remain.
  cfg.trials = 3;
  const auto c = run_condition(cfg);
  for (std::size_t k = 0; k < c.trials.size(); ++k) CHECK(same_trial(a.trials[k], c.trials[k]));
}

TEST_CASE("noise-free retrieval is perfect") {
  auto cfg = small_config();
  cfg.noise_fraction = 0.0;
  cfg.train.iterations = 500;
  const auto r = run_dynamics_experiment(cfg);
  for (const auto& t : r.trials) {
    CHECK(t.success);
    CHECK(t.total_events == 0);
    CHECK(t.epochs_run == 1);
    CHECK(t.outcome == Convergence::FixedPoint);
  }
  for (const auto& agg : r.schemes) {
    CHECK(agg.accuracy == 1.0);
    for (const auto& e : agg.epochs) CHECK(e.overlap_mean == 1.0);
  }
}

TEST_CASE("capacity grid covers every cell") {
  auto cfg = small_config();
  cfg.trials = 2;
  const auto cells = run_capacity_experiment(cfg, {16, 24}, {1.0, 2.0});
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].n == 16);
  CHECK(cells[1].load == 2.0);
  CHECK(cells[3].result.config.patterns() == 48);
  CHECK(cells[2].result.schemes.size() == 2);
}

TEST_CASE("efficiency experiment") {
  auto cfg = small_config();
  cfg.n = 50;
  cfg.load = 1.0;
  cfg.trials = 4;
  const auto r = run_efficiency_experiment(cfg, {0.0, 0.2, 0.4});
  REQUIRE(r.points.size() == 3);
  CHECK(r.config.schemes == std::vector<UpdateScheme>{UpdateScheme::Asynchronous});
  CHECK(r.points[0].stats.events_mean == 0.0);
  CHECK(r.points[1].stats.initial_hamming_mean == 10.0);
  CHECK(r.points[2].stats.initial_hamming_mean == 20.0);
  REQUIRE(r.trials.size() == 12);
  for (const auto& t : r.trials) {
    CHECK(t.scheme == UpdateScheme::Asynchronous);
    if (t.success) CHECK(t.total_events >= t.initial_hamming);
  }
  CHECK_THROWS(run_efficiency_experiment(cfg, {}));
  CHECK_THROWS(run_efficiency_experiment(cfg, {0.5, 1.5}));
}

TEST_CASE("training failures carry the trial index") {
  auto cfg = small_config();
  cfg.train = TrainConfig{1e3, 10.0, 500};
  try {
    run_condition(cfg);
    FAIL("expected failure");
  } catch (const TrialError& e) {
    CHECK(e.trial() == 0);
    CHECK(std::string(e.what()).find("diverged") != std::string::npos);
  }
}
