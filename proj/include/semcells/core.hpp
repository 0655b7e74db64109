#pragma once

// Domain types shared by every semcells module: chromosomes, cells,
// co-existence units, corpora and the model configuration.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace semcells {

enum class ErrorCode {
  DimensionNotDivisible,
  AlphaOutOfRange,
  EpsilonOutOfRange,
  InvalidParameter,
  NonFiniteGene,
  ShapeMismatch,
  MalformedLine,
  InconsistentDimension,
  EmptyFile,
  DimensionMismatch,
  UnknownItem,
  EmptyUnit,
  SampleVarianceUndefined,
  TooFewSamples,
  InvalidTrajectory,
  MalformedJson,
  EmptyTextField,
  EmptyBasketLine,
  MissingSenseLabels,
  UnknownSenseInBlockOrder,
  InvalidBlockOrder,
  InvalidSpec,
  MalformedCsv,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionNotDivisible: return "DimensionNotDivisible";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonFiniteGene: return "NonFiniteGene";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::EmptyUnit: return "EmptyUnit";
    case ErrorCode::SampleVarianceUndefined: return "SampleVarianceUndefined";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::EmptyTextField: return "EmptyTextField";
    case ErrorCode::EmptyBasketLine: return "EmptyBasketLine";
    case ErrorCode::MissingSenseLabels: return "MissingSenseLabels";
    case ErrorCode::UnknownSenseInBlockOrder: return "UnknownSenseInBlockOrder";
    case ErrorCode::InvalidBlockOrder: return "InvalidBlockOrder";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure raised by the library. `line` is 1-based and set for
// errors that originate in a file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, message, line)),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " at line " + std::to_string(*line);
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class InfluenceMode { constant, inverse_square };
enum class DistanceMetric { euclidean, cosine };
enum class VarianceMode { population, sample };
enum class OffSegmentSign { positive, negative };
// What init_cells does with items that have no embedding.
enum class MissingItemPolicy { synthesize, error };

struct ModelConfig {
  std::size_t d = 50;
  std::size_t g = 5;
  std::size_t rounds = 1;
  double alpha = 0.2;
  double epsilon = 0.01;
  InfluenceMode influence_mode = InfluenceMode::constant;
  DistanceMetric distance_metric = DistanceMetric::euclidean;
  VarianceMode variance_mode = VarianceMode::population;
  OffSegmentSign off_segment_sign = OffSegmentSign::positive;
  std::uint64_t rng_seed = 0;
  MissingItemPolicy missing_items = MissingItemPolicy::synthesize;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline ModelConfig default_config() { return ModelConfig{}; }

struct ConfigIssue {
  ErrorCode code;
  std::string message;
};

// Empty result means the configuration is valid.
inline std::vector<ConfigIssue> validate_config(const ModelConfig& config) {
  std::vector<ConfigIssue> issues;
  if (config.d == 0) {
    issues.push_back({ErrorCode::InvalidParameter, "d must be positive"});
  }
  if (config.g < 2) {
    issues.push_back({ErrorCode::InvalidParameter, "g must be at least 2"});
  }
  if (config.d != 0 && config.g != 0 && config.d % config.g != 0) {
    issues.push_back({ErrorCode::DimensionNotDivisible,
                      "d=" + std::to_string(config.d) +
                          " is not divisible by g=" + std::to_string(config.g)});
  }
  if (config.rounds == 0) {
    issues.push_back({ErrorCode::InvalidParameter, "rounds must be positive"});
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    issues.push_back({ErrorCode::AlphaOutOfRange, "alpha must lie in [0, 1]"});
  }
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    issues.push_back(
        {ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1)"});
  }
  return issues;
}

// Throws the first issue, with every issue listed in the message.
inline void require_valid(const ModelConfig& config) {
  const auto issues = validate_config(config);
  if (issues.empty()) return;
  std::string message;
  for (const auto& issue : issues) {
    if (!message.empty()) message += "; ";
    message += std::string(to_string(issue.code)) + " (" + issue.message + ")";
  }
  throw Error(issues.front().code, message);
}

// ---------------------------------------------------------------------------
// Chromosomes and cells
// ---------------------------------------------------------------------------

class Chromosome {
 public:
  Chromosome() = default;
  explicit Chromosome(std::vector<double> genes) : genes_(std::move(genes)) {
    for (double gene : genes_) {
      if (!std::isfinite(gene)) {
        throw Error(ErrorCode::NonFiniteGene, "chromosome gene is not finite");
      }
    }
  }

  std::size_t size() const noexcept { return genes_.size(); }
  double operator[](std::size_t k) const { return genes_[k]; }
  std::span<const double> genes() const noexcept { return genes_; }

  friend bool operator==(const Chromosome&, const Chromosome&) = default;

 private:
  std::vector<double> genes_;
};

class Cell {
 public:
  Cell() = default;
  Cell(std::string item, std::vector<Chromosome> chromosomes)
      : item_(std::move(item)), chromosomes_(std::move(chromosomes)) {
    if (chromosomes_.empty()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "cell '" + item_ + "' has no chromosomes");
    }
    const auto d = chromosomes_.front().size();
    for (const auto& chromosome : chromosomes_) {
      if (chromosome.size() != d || d == 0) {
        throw Error(ErrorCode::ShapeMismatch,
                    "cell '" + item_ + "' has ragged chromosomes");
      }
    }
  }

  const std::string& item() const noexcept { return item_; }
  std::size_t chromosome_count() const noexcept { return chromosomes_.size(); }
  std::size_t dimension() const noexcept {
    return chromosomes_.empty() ? 0 : chromosomes_.front().size();
  }
  const Chromosome& chromosome(std::size_t j) const { return chromosomes_[j]; }
  std::span<const Chromosome> chromosomes() const noexcept {
    return chromosomes_;
  }

  // Replaces one chromosome; shape must match.
  void replace(std::size_t j, Chromosome chromosome) {
    if (chromosome.size() != dimension()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "replacement chromosome has the wrong length");
    }
    chromosomes_.at(j) = std::move(chromosome);
  }

  friend bool operator==(const Cell&, const Cell&) = default;

 private:
  std::string item_;
  std::vector<Chromosome> chromosomes_;
};

// ---------------------------------------------------------------------------
// Co-existence units and corpora
// ---------------------------------------------------------------------------

struct CoexistenceUnit {
  std::size_t id = 0;
  std::vector<std::string> items;  // deduplicated, first-occurrence order
  std::optional<int> sense_label;
  std::optional<std::string> raw_text;
  std::optional<std::string> external_id;

  friend bool operator==(const CoexistenceUnit&,
                         const CoexistenceUnit&) = default;
};

// Collapses repeated identifiers, keeping the first occurrence.
inline std::vector<std::string> dedupe_items(std::vector<std::string> items) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& item : items) {
    if (seen.insert(item).second) out.push_back(std::move(item));
  }
  return out;
}

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<CoexistenceUnit> units) : units_(std::move(units)) {
    std::unordered_set<std::string> seen;
    for (auto& unit : units_) {
      unit.items = dedupe_items(std::move(unit.items));
      if (unit.items.empty()) {
        throw Error(ErrorCode::EmptyUnit,
                    "unit " + std::to_string(unit.id) + " has no items");
      }
      for (const auto& item : unit.items) {
        if (seen.insert(item).second) vocabulary_.push_back(item);
      }
    }
  }

  std::span<const CoexistenceUnit> units() const noexcept { return units_; }
  std::size_t size() const noexcept { return units_.size(); }
  bool empty() const noexcept { return units_.empty(); }
  const CoexistenceUnit& operator[](std::size_t i) const { return units_[i]; }

  // First-occurrence order over the unit stream.
  std::span<const std::string> vocabulary() const noexcept {
    return vocabulary_;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<CoexistenceUnit> units_;
  std::vector<std::string> vocabulary_;
};

}  // namespace semcells
