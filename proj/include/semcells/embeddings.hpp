#pragma once

// Base vectors for items: text-format embedding files plus deterministic
// synthetic tables for tests and generated corpora.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semcells/core.hpp"
#include "semcells/random.hpp"
#include "semcells/text.hpp"

namespace semcells {

// Insertion-ordered map from item to a fixed-dimension vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) {
      throw Error(ErrorCode::InvalidParameter,
                  "embedding dimension must be positive");
    }
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  bool contains(std::string_view item) const {
    return index_.contains(std::string(item));
  }

  std::optional<std::span<const double>> find(std::string_view item) const {
    const auto it = index_.find(std::string(item));
    if (it == index_.end()) return std::nullopt;
    return std::span<const double>(vectors_[it->second]);
  }

  // Later writes to an existing item overwrite its vector in place.
  void insert_or_assign(const std::string& item, std::vector<double> vector) {
    if (vector.size() != dimension_) {
      throw Error(ErrorCode::InconsistentDimension,
                  "vector for '" + item + "' has " +
                      std::to_string(vector.size()) + " components, expected " +
                      std::to_string(dimension_));
    }
    for (double v : vector) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteGene,
                    "vector for '" + item + "' has a non-finite component");
      }
    }
    const auto [it, inserted] = index_.try_emplace(item, items_.size());
    if (inserted) {
      items_.push_back(item);
      vectors_.push_back(std::move(vector));
    } else {
      vectors_[it->second] = std::move(vector);
    }
  }

  std::span<const std::string> items() const noexcept { return items_; }
  std::span<const double> vector(std::size_t i) const { return vectors_[i]; }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.dimension_ == b.dimension_ && a.items_ == b.items_ &&
           a.vectors_ == b.vectors_;
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> items_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && text::is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !text::is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view field) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline std::optional<std::size_t> parse_count(std::string_view field) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace detail

// Text format: optional "<count> <dim>" header, then "token v1 ... vdim".
inline EmbeddingTable parse_embedding_text(std::istream& in) {
  std::optional<EmbeddingTable> table;
  std::string raw;
  std::size_t line_no = 0;
  bool saw_content = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto fields = detail::split_whitespace(raw);
    if (fields.empty()) continue;
    if (!saw_content) {
      saw_content = true;
      if (fields.size() == 2) {
        const auto count = detail::parse_count(fields[0]);
        const auto dim = detail::parse_count(fields[1]);
        if (count && dim) {
          if (*dim == 0) {
            throw Error(ErrorCode::MalformedLine, "header declares dimension 0",
                        line_no);
          }
          table.emplace(*dim);
          continue;
        }
      }
    }
    if (fields.size() < 2) {
      throw Error(ErrorCode::MalformedLine,
                  "expected a token followed by vector components", line_no);
    }
    if (!table) table.emplace(fields.size() - 1);
    if (fields.size() - 1 != table->dimension()) {
      throw Error(ErrorCode::InconsistentDimension,
                  "found " + std::to_string(fields.size() - 1) +
                      " components, expected " +
                      std::to_string(table->dimension()),
                  line_no);
    }
    std::vector<double> vector;
    vector.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto value = detail::parse_double(fields[i]);
      if (!value) {
        throw Error(ErrorCode::MalformedLine,
                    "'" + std::string(fields[i]) + "' is not a finite number",
                    line_no);
      }
      vector.push_back(*value);
    }
    table->insert_or_assign(std::string(fields[0]), std::move(vector));
  }
  if (!table || table->empty()) {
    throw Error(ErrorCode::EmptyFile, "no embedding vectors found");
  }
  return std::move(*table);
}

inline EmbeddingTable load_embedding_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_embedding_text(in);
}

// Writes the header line and one line per item, components in shortest
// round-trip form, LF endings.
inline void write_embedding_text(const EmbeddingTable& table,
                                 std::ostream& out) {
  out << table.size() << ' ' << table.dimension() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.items()[i];
    for (double v : table.vector(i)) out << ' ' << text::format_double(v);
    out << '\n';
  }
}

inline void save_embedding_text(const EmbeddingTable& table,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  write_embedding_text(table, out);
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

// Pure function of (item, dimension, seed); components uniform in
// [-0.5, 0.5]. Component k is keyed independently so prefixes agree
// across dimensions.
inline std::vector<double> synthetic_embedding(std::string_view item,
                                               std::size_t dimension,
                                               std::uint64_t seed) {
  const std::uint64_t key = random::mix(seed, random::hash_bytes(item));
  std::vector<double> out(dimension);
  for (std::size_t k = 0; k < dimension; ++k) {
    const auto bits = random::mix(key, static_cast<std::uint64_t>(k));
    out[k] = random::unit_interval(bits) - 0.5;
  }
  return out;
}

// One center per sense vocabulary; each item sits at the mean of the
// centers of every vocabulary it appears in, plus uniform per-coordinate
// noise in [-spread, spread]. Items are inserted in first-appearance order.
// Fewer dimensions than senses still works but centers become nearly
// collinear, so a warning is appended to `warnings` when given.
inline EmbeddingTable clustered_embeddings(
    std::span<const std::vector<std::string>> sense_vocabularies,
    std::size_t dimension, double spread, std::uint64_t seed,
    std::vector<std::string>* warnings = nullptr) {
  if (dimension == 0) {
    throw Error(ErrorCode::InvalidParameter, "dimension must be positive");
  }
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw Error(ErrorCode::InvalidParameter, "spread must be positive");
  }
  if (dimension < sense_vocabularies.size() && warnings != nullptr) {
    warnings->push_back("DimensionTooSmall: " + std::to_string(dimension) +
                        " dimensions for " +
                        std::to_string(sense_vocabularies.size()) +
                        " sense centers");
  }

  const std::uint64_t center_seed = random::mix(seed, 0xce47e5ULL);
  const std::uint64_t noise_seed = random::mix(seed, 0x9015eULL);

  std::vector<std::vector<double>> centers;
  centers.reserve(sense_vocabularies.size());
  for (std::size_t s = 0; s < sense_vocabularies.size(); ++s) {
    centers.push_back(synthetic_embedding("#center/" + std::to_string(s),
                                          dimension, center_seed));
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> memberships;
  for (std::size_t s = 0; s < sense_vocabularies.size(); ++s) {
    for (const auto& item : sense_vocabularies[s]) {
      auto& senses = memberships[item];
      if (senses.empty()) order.push_back(item);
      if (senses.empty() || senses.back() != s) senses.push_back(s);
    }
  }

  EmbeddingTable table(dimension);
  for (const auto& item : order) {
    const auto& senses = memberships.at(item);
    const auto noise = synthetic_embedding(item, dimension, noise_seed);
    std::vector<double> vector(dimension, 0.0);
    for (std::size_t k = 0; k < dimension; ++k) {
      double sum = 0.0;
      for (auto s : senses) sum += centers[s][k];
      vector[k] = sum / static_cast<double>(senses.size()) +
                  2.0 * spread * noise[k];
    }
    table.insert_or_assign(item, std::move(vector));
  }
  return table;
}

}  // namespace semcells
