#include "klrhop/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

namespace klrhop {

namespace {

using Kind = ModelFormatError::Kind;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, int line, const char* what) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ModelFormatError(Kind::Numeric, line,
                           std::string("malformed ") + what + " '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ModelFormatError(Kind::Numeric, line, std::string("non-finite ") + what);
    }
  }
  return value;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line, trimmed.
  std::optional<std::string_view> next() {
    while (std::getline(in_, buf_)) {
      ++line_;
      std::string_view t = trim(buf_);
      if (!t.empty()) return t;
    }
    return std::nullopt;
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string buf_;
  int line_ = 0;
};

}  // namespace

ModelFormatError::ModelFormatError(Kind kind, int line, const std::string& detail,
                                   const std::string& source)
    : std::runtime_error((source.empty() ? std::string() : source + ": ") +
                         (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         detail),
      kind_(kind),
      line_(line),
      detail_(detail) {}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_model(const ModelFile& model, std::ostream& out) {
  const auto& w = model.weights;
  out << "format_version=" << model.format_version << '\n'
      << "n=" << w.n() << '\n'
      << "p=" << w.p() << '\n'
      << "gamma=" << format_double(w.params.gamma) << '\n'
      << "lambda=" << format_double(model.train.weight_decay) << '\n'
      << "learning_rate=" << format_double(model.train.learning_rate) << '\n'
      << "iterations=" << model.train.iterations << '\n'
      << "seed=" << model.seed << '\n'
      << "PATTERNS\n";
  for (const auto& pattern : w.patterns) {
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (i) out << ' ';
      out << pattern[i];
    }
    out << '\n';
  }
  out << "ALPHA\n";
  for (Eigen::Index mu = 0; mu < w.alpha.rows(); ++mu) {
    for (Eigen::Index i = 0; i < w.alpha.cols(); ++i) {
      if (i) out << ' ';
      out << format_double(w.alpha(mu, i));
    }
    out << '\n';
  }
}

ModelFile read_model(std::istream& in) {
  LineReader reader(in);
  std::map<std::string, std::pair<std::string, int>, std::less<>> header;
  static const char* const kKeys[] = {"format_version", "n",          "p",    "gamma",
                                      "lambda",         "learning_rate", "iterations", "seed"};

  for (;;) {
    auto line = reader.next();
    if (!line) throw ModelFormatError(Kind::Syntax, reader.line(), "missing PATTERNS block");
    if (*line == "PATTERNS") break;
    const auto eq = line->find('=');
    if (eq == std::string_view::npos) {
      throw ModelFormatError(Kind::Syntax, reader.line(),
                             "expected key=value, got '" + std::string(*line) + "'");
    }
    std::string key(trim(line->substr(0, eq)));
    std::string value(trim(line->substr(eq + 1)));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ModelFormatError(Kind::Syntax, reader.line(), "unknown header key '" + key + "'");
    }
    if (key == "format_version") {
      const int v = parse_number<int>(value, reader.line(), "format_version");
      if (v != kModelFormatVersion) {
        throw ModelFormatError(Kind::Version, reader.line(),
                               "unsupported format_version " + std::to_string(v) +
                                   " (expected " + std::to_string(kModelFormatVersion) + ")");
      }
    }
    if (!header.emplace(key, std::make_pair(value, reader.line())).second) {
      throw ModelFormatError(Kind::Syntax, reader.line(), "duplicate header key '" + key + "'");
    }
  }
  for (const char* key : kKeys) {
    if (!header.count(key)) {
      throw ModelFormatError(Kind::Syntax, reader.line(),
                             std::string("missing header key '") + key + "'");
    }
  }
  auto field = [&](const char* key) -> const std::pair<std::string, int>& {
    return header.find(key)->second;
  };
  auto as_size = [&](const char* key) {
    const auto& [text, line] = field(key);
    const auto v = parse_number<std::size_t>(text, line, key);
    if (v == 0) throw ModelFormatError(Kind::Dimension, line, std::string(key) + " must be positive");
    return v;
  };
  auto as_double = [&](const char* key) {
    const auto& [text, line] = field(key);
    return parse_number<double>(text, line, key);
  };

  TrainConfig train;
  const std::size_t n = as_size("n");
  const std::size_t p = as_size("p");
  const double gamma = as_double("gamma");
  train.weight_decay = as_double("lambda");
  train.learning_rate = as_double("learning_rate");
  train.iterations =
      parse_number<int>(field("iterations").first, field("iterations").second, "iterations");
  const auto seed = parse_number<std::uint64_t>(field("seed").first, field("seed").second, "seed");

  std::vector<BipolarVector> patterns;
  patterns.reserve(p);
  for (std::size_t mu = 0; mu < p; ++mu) {
    auto line = reader.next();
    if (!line || *line == "ALPHA") {
      throw ModelFormatError(Kind::Dimension, reader.line(),
                             "expected " + std::to_string(p) + " pattern rows, found " +
                                 std::to_string(mu));
    }
    const auto cols = split_ws(*line);
    if (cols.size() != n) {
      throw ModelFormatError(Kind::Dimension, reader.line(),
                             "pattern row has " + std::to_string(cols.size()) +
                                 " entries, header says n=" + std::to_string(n));
    }
    std::vector<std::int8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int v = parse_number<int>(cols[i], reader.line(), "pattern entry");
      if (v != 1 && v != -1) {
        throw ModelFormatError(Kind::Numeric, reader.line(),
                               "pattern entry " + std::to_string(v) + " is not +-1");
      }
      bits[i] = static_cast<std::int8_t>(v);
    }
    patterns.emplace_back(std::move(bits));
  }

  auto marker = reader.next();
  if (!marker || *marker != "ALPHA") {
    throw ModelFormatError(Kind::Dimension, reader.line(),
                           "expected ALPHA after " + std::to_string(p) + " pattern rows");
  }
  Eigen::MatrixXd alpha(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
  for (std::size_t mu = 0; mu < p; ++mu) {
    auto line = reader.next();
    if (!line) {
      throw ModelFormatError(Kind::Dimension, reader.line(),
                             "expected " + std::to_string(p) + " alpha rows, found " +
                                 std::to_string(mu));
    }
    const auto cols = split_ws(*line);
    if (cols.size() != n) {
      throw ModelFormatError(Kind::Dimension, reader.line(),
                             "alpha row has " + std::to_string(cols.size()) +
                                 " entries, header says n=" + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      alpha(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(i)) =
          parse_number<double>(cols[i], reader.line(), "alpha entry");
    }
  }
  if (auto extra = reader.next()) {
    throw ModelFormatError(Kind::Dimension, reader.line(), "unexpected content after ALPHA block");
  }

  KernelParams params;
  try {
    params = KernelParams(gamma);
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(Kind::Numeric, field("gamma").second, e.what());
  }
  return ModelFile{kModelFormatVersion, train, seed,
                   DualWeights{PatternSet(n, std::move(patterns)), std::move(alpha), params}};
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelFormatError(Kind::Io, 0, "cannot open '" + path.string() + "' for writing");
  write_model(model, out);
  out.flush();
  if (!out) throw ModelFormatError(Kind::Io, 0, "write to '" + path.string() + "' failed");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError(Kind::Io, 0, "cannot open model '" + path.string() + "'");
  try {
    return read_model(in);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.kind(), e.line(), e.detail(), path.string());
  }
}

}  // namespace klrhop
