#pragma once

// Plain-text model container:
//
//   format_version=1
//   n=50
//   p=150
//   gamma=...            (17 significant digits)
//   lambda=...
//   learning_rate=...
//   iterations=500
//   seed=7
//   PATTERNS
//   <p rows of n space-separated +-1>
//   ALPHA
//   <p rows of n space-separated reals, 17 significant digits>
//
// Doubles round-trip bit-exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "klrhop/trainer.hpp"

namespace klrhop {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  int format_version = kModelFormatVersion;
  TrainConfig train;
  std::uint64_t seed = 0;
  DualWeights weights;
};

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { Io, Version, Dimension, Numeric, Syntax };

  ModelFormatError(Kind kind, int line, const std::string& detail, const std::string& source = {});
  Kind kind() const { return kind_; }
  int line() const { return line_; }  // 1-based, 0 when not tied to a line
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  int line_;
  std::string detail_;
};

void write_model(const ModelFile& model, std::ostream& out);
ModelFile read_model(std::istream& in);

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// printf("%.17g"); lossless for every finite double.
std::string format_double(double v);

}  // namespace klrhop
