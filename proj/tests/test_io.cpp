#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "klrhop/model_io.hpp"
#include "klrhop/results_csv.hpp"
#include "test_util.hpp"

using namespace klrhop;

namespace {

ModelFile small_model() {
  return ModelFile{kModelFormatVersion, TrainConfig{0.1, 0.01, 40}, 7,
                   klrhop::testing::trained(6, 4, 7, 0.1, TrainConfig{0.1, 0.01, 40})};
}

std::string serialise(const ModelFile& m) {
  std::ostringstream out;
  write_model(m, out);
  return out.str();
}

std::string replace_line(const std::string& text, int line, const std::string& with) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string l;
  for (int k = 1; std::getline(in, l); ++k) out << (k == line ? with : l) << '\n';
  return out.str();
}

ModelFormatError read_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_model(in);
  } catch (const ModelFormatError& e) {
    return e;
  }
  FAIL("expected a ModelFormatError");
  return ModelFormatError(ModelFormatError::Kind::Io, 0, "");
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("klrhop_test_" + name);
}

}  // namespace

TEST_CASE("format_double is lossless") {
  std::mt19937_64 rng(80);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng) * std::pow(10.0, double(int(rng() % 40) - 20));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
        std::numeric_limits<double>::denorm_min());
}

TEST_CASE("model round trip is bit exact") {
  const auto m = small_model();
  const std::string text = serialise(m);
  CHECK(text.rfind("format_version=1\n", 0) == 0);
  CHECK(text.find("\nPATTERNS\n") != std::string::npos);
  CHECK(text.find("\nALPHA\n") != std::string::npos);

  std::istringstream in(text);
  const auto back = read_model(in);
  CHECK(back.format_version == kModelFormatVersion);
  CHECK(back.seed == 7);
  CHECK(back.train.iterations == 40);
  CHECK(back.train.learning_rate == 0.1);
  CHECK(back.train.weight_decay == 0.01);
  CHECK(back.weights.params.gamma == 0.1);
  CHECK(back.weights.patterns == m.weights.patterns);
  CHECK(back.weights.alpha == m.weights.alpha);
  CHECK(serialise(back) == text);
}

TEST_CASE("save and load through the filesystem") {
  const auto m = small_model();
  const auto path = temp_path("model.txt");
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back.weights.alpha == m.weights.alpha);
  std::filesystem::remove(path);
  try {
    load_model(path);
    FAIL("expected an error");
  } catch (const ModelFormatError& e) {
    CHECK(e.kind() == ModelFormatError::Kind::Io);
    CHECK(std::string(e.what()).find(path.string()) != std::string::npos);
  }
}

TEST_CASE("model format errors name the kind and line") {
  const std::string text = serialise(small_model());
  // Lines: 8 header lines, PATTERNS on 9, pattern rows 10-13, ALPHA on 14, alpha rows 15-18.

  SUBCASE("version") {
    const auto e = read_error(replace_line(text, 1, "format_version=2"));
    CHECK(e.kind() == ModelFormatError::Kind::Version);
    CHECK(e.line() == 1);
  }
  SUBCASE("short pattern row") {
    const auto e = read_error(replace_line(text, 11, "1 -1 1 1 -1"));
    CHECK(e.kind() == ModelFormatError::Kind::Dimension);
    CHECK(e.line() == 11);
    CHECK(std::string(e.what()).find("11") != std::string::npos);
  }
  SUBCASE("non-bipolar pattern entry") {
    const auto e = read_error(replace_line(text, 10, "1 -1 1 1 -1 0"));
    CHECK(e.line() == 10);
  }
  SUBCASE("malformed alpha") {
    const auto e = read_error(replace_line(text, 16, "0.5 0.25 zzz 1 2 3"));
    CHECK(e.kind() == ModelFormatError::Kind::Numeric);
    CHECK(e.line() == 16);
  }
  SUBCASE("non-finite alpha") {
    const auto e = read_error(replace_line(text, 17, "0.5 0.25 nan 1 2 3"));
    CHECK(e.kind() == ModelFormatError::Kind::Numeric);
    CHECK(e.line() == 17);
  }
  SUBCASE("truncated file") {
    std::string cut = text.substr(0, text.find("ALPHA"));
    const auto e = read_error(cut);
    CHECK(e.line() > 0);
  }
  SUBCASE("missing block marker") {
    const auto e = read_error(replace_line(text, 9, "PATTERN"));
    CHECK(e.kind() == ModelFormatError::Kind::Syntax);
    CHECK(e.line() == 9);
  }
  SUBCASE("bad header number") {
    const auto e = read_error(replace_line(text, 4, "gamma=abc"));
    CHECK(e.kind() == ModelFormatError::Kind::Numeric);
    CHECK(e.line() == 4);
  }
}

TEST_CASE("dynamics csv") {
  ExperimentConfig cfg;
  cfg.trials = 4;
  cfg.master_seed = 7;
  const auto r = run_dynamics_experiment(cfg);
  std::ostringstream a, b;
  write_dynamics_csv(a, r);
  write_dynamics_csv(b, run_dynamics_experiment(cfg));
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  std::string line;
  bool saw_seed = false, saw_header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# master_seed=7", 0) == 0) saw_seed = true;
    if (line == "scheme,epoch,overlap_mean,overlap_std,energy_mean") saw_header = true;
    if (line.rfind("sync,0,", 0) == 0 || line.rfind("async,0,", 0) == 0) {
      CHECK(line.find(",0.59999999999999998,") != std::string::npos);
    }
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(saw_seed);
  CHECK(saw_header);
  CHECK(rows == 1 + 2 * int(r.schemes[0].epochs.size()));
}

TEST_CASE("efficiency and capacity csv") {
  ExperimentConfig cfg;
  cfg.load = 1.0;
  cfg.trials = 3;
  std::ostringstream eff;
  write_efficiency_csv(eff, run_efficiency_experiment(cfg, {0.2}));
  CHECK(eff.str().find("noise_fraction,mean_events,std_events,mean_initial_hamming,success_rate\n") !=
        std::string::npos);
  const auto row_at = eff.str().find("\n0.20000000000000001,");
  REQUIRE(row_at != std::string::npos);
  std::istringstream row(eff.str().substr(row_at + 1));
  std::vector<std::string> fields;
  for (std::string cell; fields.size() < 5 && std::getline(row, cell, ',');) fields.push_back(cell);
  REQUIRE(fields.size() == 5);
  CHECK(fields[3] == "10");
  std::ostringstream cap;
  cfg.trials = 1;
  write_capacity_csv(cap, cfg, run_capacity_experiment(cfg, {20}, {1.0}));
  CHECK(cap.str().find("n,load,scheme,accuracy_mean,accuracy_std\n20,1,sync,") != std::string::npos);
  CHECK(cap.str().find("# sizes=20\n") != std::string::npos);
}

TEST_CASE("stability report serialisations") {
  const auto w = klrhop::testing::trained(8, 5, 81);
  const NetworkState st(w, w.patterns[0]);
  const auto rep = stability_report(w, st);
  std::ostringstream csv, json;
  write_stability_csv(csv, rep, {{"model", "m.txt"}});
  write_stability_json(json, rep, {{"model", "m.txt"}});
  CHECK(csv.str().rfind("# model=m.txt\n", 0) == 0);
  CHECK(csv.str().find("neuron,margin,interference_bound,exact_cross,condition_satisfied,"
                       "exact_condition_satisfied\n0,") != std::string::npos);
  CHECK(json.str().find("\"fraction_satisfied\"") != std::string::npos);
  CHECK(json.str().find("\"model\": \"m.txt\"") != std::string::npos);
}

TEST_CASE("write_file reports the failing path") {
  try {
    write_file("/nonexistent-dir/x.csv", [](std::ostream& o) { o << "x"; });
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
  }
}
