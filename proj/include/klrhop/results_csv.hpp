#pragma once

// CSV emission for experiment results and stability reports. Every file
// starts with '#'-prefixed key=value lines that echo the configuration, so
// a file is enough to reproduce itself. Numbers use 17 significant digits.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "klrhop/experiments.hpp"
#include "klrhop/stability.hpp"

namespace klrhop {

inline constexpr const char* kCodeVersion = "1.0.0";

using Metadata = std::vector<std::pair<std::string, std::string>>;

enum class ExperimentKind { Dynamics, Capacity, Efficiency };

const char* to_string(ExperimentKind kind);

/// Config echo plus the modelling choices the output depends on.
Metadata experiment_metadata(const ExperimentConfig& cfg, ExperimentKind kind);

void write_metadata(std::ostream& out, const Metadata& meta);

/// scheme,epoch,overlap_mean,overlap_std,energy_mean
void write_dynamics_csv(std::ostream& out, const AggregateResult& result);

/// n,load,scheme,accuracy_mean,accuracy_std
void write_capacity_csv(std::ostream& out, const ExperimentConfig& base,
                        const std::vector<CapacityCell>& cells);

/// noise_fraction,mean_events,std_events,mean_initial_hamming,success_rate
void write_efficiency_csv(std::ostream& out, const EfficiencyResult& result);

/// neuron,margin,interference_bound,exact_cross,condition_satisfied,exact_condition_satisfied
void write_stability_csv(std::ostream& out, const MarginReport& report, const Metadata& meta);
void write_stability_json(std::ostream& out, const MarginReport& report, const Metadata& meta);

/// gnuplot script that plots `csv_path` for the given experiment kind.
void write_plot_script(std::ostream& out, ExperimentKind kind, const std::string& csv_path);

/// Writes via `writer` to `path`, turning stream failures into
/// std::runtime_error naming the path.
template <typename Writer>
void write_file(const std::filesystem::path& path, Writer writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void emit_csv(const AggregateResult& dynamics, const std::filesystem::path& path);
void emit_csv(const ExperimentConfig& base, const std::vector<CapacityCell>& capacity,
              const std::filesystem::path& path);
void emit_csv(const EfficiencyResult& efficiency, const std::filesystem::path& path);

}  // namespace klrhop
