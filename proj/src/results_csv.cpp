#include "klrhop/results_csv.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "klrhop/model_io.hpp"

namespace klrhop {

namespace {

std::string join_schemes(const std::vector<UpdateScheme>& schemes) {
  std::string out;
  for (auto s : schemes) {
    if (!out.empty()) out += ';';
    out += to_string(s);
  }
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ';';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v);
    } else {
      out += std::to_string(v);
    }
  }
  return out;
}

std::string f(double v) { return format_double(v); }

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Dynamics: return "dynamics";
    case ExperimentKind::Capacity: return "capacity";
    case ExperimentKind::Efficiency: return "efficiency";
  }
  return "unknown";
}

Metadata experiment_metadata(const ExperimentConfig& cfg, ExperimentKind kind) {
  Metadata m{
      {"tool", "klrhop"},
      {"code_version", kCodeVersion},
      {"experiment", to_string(kind)},
      {"n", std::to_string(cfg.n)},
      {"load", format_double(cfg.load)},
      {"patterns", std::to_string(cfg.patterns())},
      {"gamma", format_double(cfg.gamma)},
      {"lambda", format_double(cfg.train.weight_decay)},
      {"learning_rate", format_double(cfg.train.learning_rate)},
      {"iterations", std::to_string(cfg.train.iterations)},
      {"noise_fraction", format_double(cfg.noise_fraction)},
      {"trials", std::to_string(cfg.trials)},
      {"schemes", join_schemes(cfg.schemes)},
      {"max_epochs", std::to_string(cfg.max_epochs)},
      {"master_seed", std::to_string(cfg.master_seed)},
      {"training", "full-batch gradient descent, fixed step, alpha initialised to zero, no early stop"},
      {"async_order", "fresh uniform permutation per epoch"},
      {"convergence", "zero-flip epoch; synchronous period-2 cycle flagged separately"},
      {"overlap", "(1/N) sum_i s_i xi_i"},
      {"noise", "exactly round(f*N) distinct bits flipped"},
      {"target", "pattern index = trial mod P"},
      {"std", "population (ddof=0)"},
  };
  return m;
}

void write_metadata(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

void write_dynamics_csv(std::ostream& out, const AggregateResult& result) {
  write_metadata(out, experiment_metadata(result.config, ExperimentKind::Dynamics));
  out << "scheme,epoch,overlap_mean,overlap_std,energy_mean\n";
  for (const auto& s : result.schemes) {
    for (std::size_t e = 0; e < s.epochs.size(); ++e) {
      const auto& st = s.epochs[e];
      out << to_string(s.scheme) << ',' << e << ',' << f(st.overlap_mean) << ',';
      out << f(st.overlap_std) << ',';
      out << f(st.energy_mean) << '\n';
    }
  }
}

void write_capacity_csv(std::ostream& out, const ExperimentConfig& base,
                        const std::vector<CapacityCell>& cells) {
  std::vector<std::size_t> sizes;
  std::vector<double> loads;
  for (const auto& c : cells) {
    if (std::find(sizes.begin(), sizes.end(), c.n) == sizes.end()) sizes.push_back(c.n);
    if (std::find(loads.begin(), loads.end(), c.load) == loads.end()) loads.push_back(c.load);
  }
  Metadata meta = experiment_metadata(base, ExperimentKind::Capacity);
  meta.emplace_back("sizes", join_numbers(sizes));
  meta.emplace_back("loads", join_numbers(loads));
  write_metadata(out, meta);
  out << "n,load,scheme,accuracy_mean,accuracy_std\n";
  for (const auto& c : cells) {
    for (const auto& s : c.result.schemes) {
      out << c.n << ',' << f(c.load) << ',' << to_string(s.scheme) << ',';
      out << f(s.accuracy) << ',';
      out << f(s.accuracy_std) << '\n';
    }
  }
}

void write_efficiency_csv(std::ostream& out, const EfficiencyResult& result) {
  std::vector<double> grid;
  for (const auto& p : result.points) grid.push_back(p.noise_fraction);
  Metadata meta = experiment_metadata(result.config, ExperimentKind::Efficiency);
  meta.emplace_back("noise_grid", join_numbers(grid));
  meta.emplace_back("events", "mean over all trials, successful or not");
  write_metadata(out, meta);
  out << "noise_fraction,mean_events,std_events,mean_initial_hamming,success_rate\n";
  for (const auto& p : result.points) {
    out << f(p.noise_fraction) << ',';
    out << f(p.stats.events_mean) << ',';
    out << f(p.stats.events_std) << ',';
    out << f(p.stats.initial_hamming_mean) << ',';
    out << f(p.stats.accuracy) << '\n';
  }
}

void write_stability_csv(std::ostream& out, const MarginReport& report, const Metadata& meta) {
  Metadata m = meta;
  m.emplace_back("max_interference_bound", format_double(report.max_interference_bound));
  m.emplace_back("fraction_satisfied", format_double(report.fraction_satisfied));
  m.emplace_back("fraction_exact_satisfied", format_double(report.fraction_exact_satisfied));
  write_metadata(out, m);
  out << "neuron,margin,interference_bound,exact_cross,condition_satisfied,"
         "exact_condition_satisfied\n";
  for (std::size_t i = 0; i < report.margins.size(); ++i) {
    out << i << ',' << f(report.margins[i]) << ',';
    out << f(report.interference_bounds[i]) << ',';
    out << f(report.exact_cross[i]) << ',' << int(report.condition_satisfied[i]) << ','
        << int(report.exact_condition_satisfied[i]) << '\n';
  }
}

void write_stability_json(std::ostream& out, const MarginReport& report, const Metadata& meta) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta) m[k] = v;
  j["metadata"] = m;
  j["margins"] = report.margins;
  j["interference_bounds"] = report.interference_bounds;
  j["exact_cross"] = report.exact_cross;
  j["condition_satisfied"] = report.condition_satisfied;
  j["exact_condition_satisfied"] = report.exact_condition_satisfied;
  j["max_interference_bound"] = report.max_interference_bound;
  j["fraction_satisfied"] = report.fraction_satisfied;
  j["fraction_exact_satisfied"] = report.fraction_exact_satisfied;
  out << j.dump(2) << '\n';
}

void write_plot_script(std::ostream& out, ExperimentKind kind, const std::string& csv_path) {
  out << "# gnuplot script for " << csv_path << "\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n"
      << "set grid\n";
  switch (kind) {
    case ExperimentKind::Dynamics:
      out << "set xlabel 'step / epoch'\nset ylabel 'overlap'\nset yrange [0:1.05]\n"
          << "plot '" << csv_path << "' using (strcol(1) eq 'sync' ? $2 : 1/0):3:4 with yerrorlines "
          << "title 'synchronous', \\\n     '" << csv_path
          << "' using (strcol(1) eq 'async' ? $2 : 1/0):3:4 with yerrorlines title 'asynchronous'\n";
      break;
    case ExperimentKind::Capacity:
      out << "set xlabel 'P/N'\nset ylabel 'recall accuracy'\nset yrange [0:1.05]\n"
          << "plot '" << csv_path << "' using (strcol(3) eq 'sync' ? $2 : 1/0):4:5 with yerrorlines "
          << "title 'synchronous', \\\n     '" << csv_path
          << "' using (strcol(3) eq 'async' ? $2 : 1/0):4:5 with yerrorlines title 'asynchronous'\n";
      break;
    case ExperimentKind::Efficiency:
      out << "set xlabel 'initial noise'\nset ylabel 'bit flips'\n"
          << "set y2label 'success rate'\nset y2range [0:1.05]\nset y2tics\n"
          << "plot '" << csv_path << "' using 1:2:3 with yerrorlines title 'actual flips', \\\n"
          << "     '" << csv_path << "' using 1:4 with lines dt 2 title 'initial errors', \\\n"
          << "     '" << csv_path << "' using 1:5 axes x1y2 with linespoints title 'success rate'\n";
      break;
  }
}

void emit_csv(const AggregateResult& dynamics, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) { write_dynamics_csv(out, dynamics); });
}

void emit_csv(const ExperimentConfig& base, const std::vector<CapacityCell>& capacity,
              const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) { write_capacity_csv(out, base, capacity); });
}

void emit_csv(const EfficiencyResult& efficiency, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) { write_efficiency_csv(out, efficiency); });
}

}  // namespace klrhop
