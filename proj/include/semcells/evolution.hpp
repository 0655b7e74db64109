#pragma once

// The Semantic Cells evolution loop: delta-initialized chromosome
// populations that drift toward per-unit centroids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semcells/core.hpp"
#include "semcells/embeddings.hpp"

namespace semcells {

struct UnitCentroid {
  std::vector<double> vector;
};

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// 1 - cos(a, b). A zero vector is at distance 1 from anything non-zero and
// at distance 0 from another zero vector.
inline double cosine_distance(std::span<const double> a,
                              std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double distance(std::span<const double> a, std::span<const double> b,
                       DistanceMetric metric) {
  return metric == DistanceMetric::euclidean ? euclidean_distance(a, b)
                                             : cosine_distance(a, b);
}

// Builds the g chromosomes of one cell from its base vector. Chromosome i
// owns genes k (1-based) with d*i/g < k <= d*(i+1)/g and gets +epsilon
// there; every other gene gets sign * epsilon / (g - 1).
inline Cell initial_cell(const std::string& item, std::span<const double> base,
                         const ModelConfig& config) {
  const std::size_t d = config.d;
  const std::size_t g = config.g;
  if (base.size() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "base vector for '" + item + "' has " +
                    std::to_string(base.size()) + " components, expected " +
                    std::to_string(d));
  }
  const double sign =
      config.off_segment_sign == OffSegmentSign::positive ? 1.0 : -1.0;
  const double off = sign * config.epsilon / static_cast<double>(g - 1);

  std::vector<Chromosome> chromosomes;
  chromosomes.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    std::vector<double> genes(d);
    for (std::size_t k = 1; k <= d; ++k) {
      const bool owned = d * i < k * g && k * g <= d * (i + 1);
      genes[k - 1] = base[k - 1] + (owned ? config.epsilon : off);
    }
    chromosomes.emplace_back(std::move(genes));
  }
  return Cell(item, std::move(chromosomes));
}

// Item -> Cell map bound to one configuration. Cells for unseen items are
// created on demand from the attached embedding table.
class CellPopulation {
 public:
  CellPopulation(ModelConfig config,
                 std::shared_ptr<const EmbeddingTable> embeddings)
      : config_(config), embeddings_(std::move(embeddings)) {
    require_valid(config_);
    if (embeddings_ && !embeddings_->empty() &&
        embeddings_->dimension() != config_.d) {
      throw Error(ErrorCode::DimensionMismatch,
                  "embedding dimension " +
                      std::to_string(embeddings_->dimension()) +
                      " does not match d=" + std::to_string(config_.d));
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool contains(const std::string& item) const { return cells_.contains(item); }

  const Cell& cell(const std::string& item) const {
    const auto it = cells_.find(item);
    if (it == cells_.end()) {
      throw Error(ErrorCode::UnknownItem, "no cell for '" + item + "'");
    }
    return it->second;
  }

  // Sorted by item.
  const std::map<std::string, Cell>& cells() const noexcept { return cells_; }

  const Cell& ensure(const std::string& item) {
    auto it = cells_.find(item);
    if (it != cells_.end()) return it->second;
    return cells_.emplace(item, initial_cell(item, base_vector(item), config_))
        .first->second;
  }

  // Replaces an existing cell; shape must match the configuration.
  void assign(Cell cell) {
    if (cell.chromosome_count() != config_.g || cell.dimension() != config_.d) {
      throw Error(ErrorCode::ShapeMismatch,
                  "cell '" + cell.item() + "' does not match g x d");
    }
    auto key = cell.item();
    cells_.insert_or_assign(std::move(key), std::move(cell));
  }

  friend bool operator==(const CellPopulation& a, const CellPopulation& b) {
    return a.config_ == b.config_ && a.cells_ == b.cells_;
  }

 private:
  std::vector<double> base_vector(const std::string& item) const {
    if (embeddings_) {
      if (auto found = embeddings_->find(item)) {
        return {found->begin(), found->end()};
      }
    }
    if (config_.missing_items == MissingItemPolicy::error) {
      throw Error(ErrorCode::UnknownItem,
                  "no embedding for '" + item + "'");
    }
    return synthetic_embedding(item, config_.d, config_.rng_seed);
  }

  ModelConfig config_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::map<std::string, Cell> cells_;
};

inline CellPopulation init_cells(
    std::shared_ptr<const EmbeddingTable> embeddings,
    std::span<const std::string> vocabulary, const ModelConfig& config) {
  CellPopulation population(config, std::move(embeddings));
  for (const auto& item : vocabulary) population.ensure(item);
  return population;
}

inline CellPopulation init_cells(const EmbeddingTable& embeddings,
                                 std::span<const std::string> vocabulary,
                                 const ModelConfig& config) {
  return init_cells(std::make_shared<const EmbeddingTable>(embeddings),
                    vocabulary, config);
}

// Component-wise mean of all g*|S| chromosomes of the unit's cells.
inline UnitCentroid unit_centroid(const CellPopulation& population,
                                  const CoexistenceUnit& unit) {
  if (unit.items.empty()) {
    throw Error(ErrorCode::EmptyUnit,
                "unit " + std::to_string(unit.id) + " has no items");
  }
  const std::size_t d = population.config().d;
  std::vector<double> sum(d, 0.0);
  std::size_t count = 0;
  for (const auto& item : unit.items) {
    for (const auto& chromosome : population.cell(item).chromosomes()) {
      for (std::size_t k = 0; k < d; ++k) sum[k] += chromosome[k];
      ++count;
    }
  }
  for (auto& v : sum) v /= static_cast<double>(count);
  return {std::move(sum)};
}

// argmin_j distance(chromosome j, centroid); lowest index wins ties.
inline std::size_t select_chromosome(const Cell& cell,
                                     const UnitCentroid& centroid,
                                     DistanceMetric metric) {
  std::size_t best = 0;
  double best_distance = 0.0;
  for (std::size_t j = 0; j < cell.chromosome_count(); ++j) {
    const auto genes = cell.chromosome(j).genes();
    // Squared euclidean keeps near-ties apart that sqrt would merge.
    double r = 0.0;
    if (metric == DistanceMetric::euclidean) {
      for (std::size_t k = 0; k < genes.size(); ++k) {
        const double diff = genes[k] - centroid.vector[k];
        r += diff * diff;
      }
    } else {
      r = cosine_distance(genes, centroid.vector);
    }
    if (j == 0 || r < best_distance) {
      best = j;
      best_distance = r;
    }
  }
  return best;
}

// Interpolation weight for one crossover.
inline double influence(double alpha, double r, InfluenceMode mode) {
  if (mode == InfluenceMode::constant) return alpha;
  if (r == 0.0) return 1.0;
  return std::min(1.0, alpha / (r * r));
}

// Moves the chromosome nearest the centroid to (1-a)*old + a*centroid.
inline Cell crossover_step(Cell cell, const UnitCentroid& centroid,
                           const ModelConfig& config) {
  const std::size_t j0 =
      select_chromosome(cell, centroid, config.distance_metric);
  const auto old = cell.chromosome(j0).genes();
  const double r = config.influence_mode == InfluenceMode::constant
                       ? 0.0
                       : distance(old, centroid.vector, config.distance_metric);
  const double a = influence(config.alpha, r, config.influence_mode);
  if (a == 0.0) return cell;
  if (a == 1.0) {
    cell.replace(j0, Chromosome(centroid.vector));
    return cell;
  }
  std::vector<double> genes(old.size());
  for (std::size_t k = 0; k < old.size(); ++k) {
    genes[k] = old[k] + a * (centroid.vector[k] - old[k]);
  }
  cell.replace(j0, Chromosome(std::move(genes)));
  return cell;
}

// One co-existence unit: the centroid is frozen from the pre-update
// population, then every cell of the unit takes one crossover step toward
// it in unit order.
inline void process_unit(CellPopulation& population,
                         const CoexistenceUnit& unit) {
  if (unit.items.empty()) {
    throw Error(ErrorCode::EmptyUnit,
                "unit " + std::to_string(unit.id) + " has no items");
  }
  for (const auto& item : unit.items) population.ensure(item);
  const UnitCentroid centroid = unit_centroid(population, unit);
  for (const auto& item : unit.items) {
    population.assign(
        crossover_step(population.cell(item), centroid, population.config()));
  }
}

struct StepInfo {
  std::size_t round = 0;    // 1-based
  std::size_t unit_id = 0;  // CoexistenceUnit::id
  std::size_t step = 0;     // (round-1)*|units| + ordinal, ordinal 1-based
};

using StepObserver =
    std::function<void(const StepInfo&, const CellPopulation&)>;

// R passes over the corpus in corpus order.
inline CellPopulation run(CellPopulation population, const Corpus& corpus,
                          const StepObserver& observer = {}) {
  const std::size_t n = corpus.size();
  for (std::size_t round = 1; round <= population.config().rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& unit = corpus[i];
      try {
        process_unit(population, unit);
      } catch (const Error& e) {
        throw Error(e.code(), "round " + std::to_string(round) + ", unit " +
                                  std::to_string(unit.id) + ": " + e.what());
      }
      if (observer) observer({round, unit.id, (round - 1) * n + i + 1}, population);
    }
  }
  return population;
}

}  // namespace semcells
