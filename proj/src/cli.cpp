#include "klrhop/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "klrhop/dynamics.hpp"
#include "klrhop/experiments.hpp"
#include "klrhop/model_io.hpp"
#include "klrhop/results_csv.hpp"
#include "klrhop/stability.hpp"

namespace klrhop {

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

int default_threads() {
  if (const char* env = std::getenv("KLR_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 0;
}

struct TrainFlags {
  std::size_t n = 50;
  double load = 3.0;
  std::size_t patterns = 0;
  double gamma = 0.1;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::string out;
};

struct RetrieveFlags {
  std::string model;
  std::size_t target_index = 0;
  double noise = 0.2;
  std::string scheme = "async";
  int max_epochs = 100;
  std::uint64_t seed = 0;
  bool check_cache = false;
};

struct ExperimentFlags {
  ExperimentConfig cfg;
  std::string out;
  bool plot_script = false;
  std::vector<std::size_t> sizes{50};
  std::vector<double> loads = default_load_grid();
  std::string noise_grid = "0.05:0.40:0.05";
};

struct StabilityFlags {
  std::string model;
  std::size_t at_pattern = 0;
  std::string state_file;
  std::string format = "csv";
  std::string out = "-";
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f, bool with_noise) {
  cmd->add_option("--n", f.cfg.n, "Network size N")->check(CLI::PositiveNumber);
  cmd->add_option("--load", f.cfg.load, "Storage load P/N")->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", f.cfg.gamma, "RBF locality parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", f.cfg.train.weight_decay, "Weight decay");
  cmd->add_option("--lr", f.cfg.train.learning_rate, "Learning rate");
  cmd->add_option("--iters", f.cfg.train.iterations, "Training iterations");
  if (with_noise) {
    cmd->add_option("--noise", f.cfg.noise_fraction, "Fraction of bits flipped")
        ->check(CLI::Range(0.0, 1.0));
  }
  cmd->add_option("--trials", f.cfg.trials, "Independent trials")->check(CLI::PositiveNumber);
  cmd->add_option("--max-epochs", f.cfg.max_epochs, "Epoch limit per retrieval")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.cfg.master_seed, "Master seed");
  cmd->add_option("--threads", f.cfg.threads, "Worker threads (default: KLR_THREADS or all)");
  cmd->add_option("--out", f.out, "Output CSV path")->required();
  cmd->add_flag("--emit-plotscript", f.plot_script, "Also write <out>.gp for gnuplot");
  cmd->add_flag("--check-cache", f.cfg.check_cache, "Verify kernel caches every epoch");
}

BipolarVector read_state_file(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open state file '" + path + "'");
  std::vector<std::int8_t> bits;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int v = 0;
    while (ss >> v) {
      if (v != 1 && v != -1) throw std::runtime_error("state file entries must be +-1");
      bits.push_back(static_cast<std::int8_t>(v));
    }
    if (!ss.eof()) throw std::runtime_error("state file holds a non-integer token");
  }
  if (bits.size() != n) {
    throw std::runtime_error("state file has " + std::to_string(bits.size()) +
                             " entries, model has N=" + std::to_string(n));
  }
  return BipolarVector(std::move(bits));
}

void write_plot_script_for(const std::string& csv, ExperimentKind kind, std::ostream& out) {
  const std::string script = csv + ".gp";
  write_file(script, [&](std::ostream& s) { write_plot_script(s, kind, csv); });
  out << "wrote " << script << '\n';
}

int run_train(const TrainFlags& f, std::ostream& out) {
  const std::size_t p =
      f.patterns > 0 ? f.patterns
                     : static_cast<std::size_t>(std::llround(f.load * static_cast<double>(f.n)));
  if (p == 0) throw std::invalid_argument("pattern count must be positive");
  std::mt19937_64 rng(derive_seed(f.seed, {f.n, p}));
  PatternSet ps = PatternSet::random(f.n, p, rng);
  ModelFile model{kModelFormatVersion, f.train, f.seed,
                  train_network(ps, KernelParams(f.gamma), f.train)};
  save_model(model, f.out);

  std::size_t fixed = 0;
  for (const auto& pattern : model.weights.patterns) {
    NetworkState st(model.weights, pattern);
    fixed += sync_step(model.weights, st) == 0;
  }
  out << "trained N=" << f.n << " P=" << p << " gamma=" << f.gamma << " -> " << f.out << '\n'
      << "stored patterns that are fixed points: " << fixed << '/' << p << '\n';
  return 0;
}

int run_retrieve(const RetrieveFlags& f, std::ostream& out) {
  const ModelFile model = load_model(f.model);
  const auto& w = model.weights;
  if (f.target_index >= w.p()) {
    throw std::out_of_range("target index " + std::to_string(f.target_index) +
                            " out of range for P=" + std::to_string(w.p()));
  }
  const UpdateScheme scheme = parse_scheme(f.scheme);
  const BipolarVector& target = w.patterns[f.target_index];
  std::mt19937_64 noise_rng(derive_seed(f.seed, {1, f.target_index}));
  auto [start, flipped] = inject_noise(target, f.noise, noise_rng);
  std::mt19937_64 rng(derive_seed(f.seed, {2, f.target_index}));
  RetrievalOptions opts;
  opts.max_epochs = f.max_epochs;
  opts.check_cache = f.check_cache;
  const RetrievalTrace trace = run_retrieval(w, start, target, scheme, rng, opts);

  out << "scheme: " << to_string(scheme) << '\n'
      << "initial_hamming: " << flipped << '\n'
      << "epochs_run: " << trace.epochs_run << '\n'
      << "outcome: " << to_string(trace.outcome) << '\n'
      << "events: " << trace.total_events() << '\n'
      << "success: " << (trace.final_state == target ? "true" : "false") << '\n'
      << "final_overlap: " << format_double(trace.overlaps.back()) << '\n'
      << "overlaps:";
  for (double m : trace.overlaps) out << ' ' << format_double(m);
  out << "\nenergies:";
  for (double v : trace.energies) out << ' ' << format_double(v);
  out << '\n';
  return 0;
}

int run_stability(const StabilityFlags& f, std::ostream& out) {
  const ModelFile model = load_model(f.model);
  const auto& w = model.weights;
  Metadata meta{{"tool", "klrhop"}, {"code_version", kCodeVersion}, {"model", f.model}};
  BipolarVector state;
  if (!f.state_file.empty()) {
    state = read_state_file(f.state_file, w.n());
    meta.emplace_back("state_file", f.state_file);
  } else {
    if (f.at_pattern >= w.p()) {
      throw std::out_of_range("pattern index " + std::to_string(f.at_pattern) +
                              " out of range for P=" + std::to_string(w.p()));
    }
    state = w.patterns[f.at_pattern];
    meta.emplace_back("at_pattern", std::to_string(f.at_pattern));
  }
  const NetworkState st(w, state);
  const MarginReport report = stability_report(w, st);
  auto emit = [&](std::ostream& s) {
    if (f.format == "json") {
      write_stability_json(s, report, meta);
    } else {
      write_stability_csv(s, report, meta);
    }
  };
  if (f.out == "-") {
    emit(out);
  } else {
    write_file(f.out, emit);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel logistic regression Hopfield memories: training, retrieval, experiments",
               "klrhop"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a network on random patterns");
  train->add_option("--n", tf.n, "Network size N")->check(CLI::PositiveNumber);
  auto* load_opt = train->add_option("--load", tf.load, "Storage load P/N")
                       ->check(CLI::PositiveNumber);
  auto* pat_opt = train->add_option("--patterns", tf.patterns, "Number of patterns P")
                      ->check(CLI::PositiveNumber);
  load_opt->excludes(pat_opt);
  train->add_option("--gamma", tf.gamma, "RBF locality parameter")->check(CLI::PositiveNumber);
  train->add_option("--lambda", tf.train.weight_decay, "Weight decay");
  train->add_option("--lr", tf.train.learning_rate, "Learning rate");
  train->add_option("--iters", tf.train.iterations, "Training iterations");
  train->add_option("--seed", tf.seed, "Pattern seed");
  train->add_option("--out", tf.out, "Model output path")->required();

  RetrieveFlags rf;
  auto* retrieve = app.add_subcommand("retrieve", "Retrieve a stored pattern from a noisy cue");
  retrieve->add_option("--model", rf.model, "Model file")->required();
  retrieve->add_option("--target-index", rf.target_index, "Stored pattern to corrupt");
  retrieve->add_option("--noise", rf.noise, "Fraction of bits flipped")
      ->check(CLI::Range(0.0, 1.0));
  retrieve->add_option("--scheme", rf.scheme, "sync or async")
      ->check(CLI::IsMember({"sync", "async"}));
  retrieve->add_option("--max-epochs", rf.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
  retrieve->add_option("--seed", rf.seed, "Noise / permutation seed");
  retrieve->add_flag("--check-cache", rf.check_cache, "Verify kernel cache every epoch");

  auto* experiment = app.add_subcommand("experiment", "Run a trial-averaged experiment");
  experiment->require_subcommand(1);
  ExperimentFlags dyn, cap, eff;
  dyn.cfg.threads = cap.cfg.threads = eff.cfg.threads = default_threads();
  cap.cfg.noise_fraction = 0.1;
  auto* dynamics = experiment->add_subcommand("dynamics", "Overlap trajectories, both schemes");
  add_experiment_flags(dynamics, dyn, true);
  auto* capacity = experiment->add_subcommand("capacity", "Recall accuracy versus load");
  add_experiment_flags(capacity, cap, true);
  capacity->add_option("--sizes", cap.sizes, "Network sizes")->delimiter(',');
  capacity->add_option("--loads", cap.loads, "Ascending loads P/N")->delimiter(',');
  auto* efficiency = experiment->add_subcommand("efficiency", "Asynchronous event counts");
  add_experiment_flags(efficiency, eff, false);
  efficiency->add_option("--noise-grid", eff.noise_grid, "start:stop:step noise levels");

  StabilityFlags sf;
  auto* stability = app.add_subcommand("stability", "Margin / interference report");
  stability->add_option("--model", sf.model, "Model file")->required();
  auto* at_opt = stability->add_option("--at-pattern", sf.at_pattern, "Evaluate at stored pattern");
  auto* file_opt = stability->add_option("--state-file", sf.state_file, "Evaluate at state in file");
  at_opt->excludes(file_opt);
  stability->add_option("--format", sf.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  stability->add_option("--out", sf.out, "Output path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*train) return run_train(tf, out);
    if (*retrieve) return run_retrieve(rf, out);
    if (*stability) return run_stability(sf, out);
    if (*dynamics) {
      const AggregateResult r = run_dynamics_experiment(dyn.cfg);
      emit_csv(r, dyn.out);
      out << "wrote " << dyn.out << '\n';
      for (const auto& s : r.schemes) {
        out << to_string(s.scheme) << ": final overlap "
            << format_double(s.epochs.back().overlap_mean) << ", accuracy "
            << format_double(s.accuracy) << '\n';
      }
      if (dyn.plot_script) write_plot_script_for(dyn.out, ExperimentKind::Dynamics, out);
      return 0;
    }
    if (*capacity) {
      const auto cells = run_capacity_experiment(cap.cfg, cap.sizes, cap.loads);
      emit_csv(cap.cfg, cells, cap.out);
      out << "wrote " << cap.out << '\n';
      if (cap.plot_script) write_plot_script_for(cap.out, ExperimentKind::Capacity, out);
      return 0;
    }
    if (*efficiency) {
      const EfficiencyResult r = run_efficiency_experiment(eff.cfg, parse_grid(eff.noise_grid));
      emit_csv(r, eff.out);
      out << "wrote " << eff.out << '\n';
      if (eff.plot_script) write_plot_script_for(eff.out, ExperimentKind::Efficiency, out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace klrhop
