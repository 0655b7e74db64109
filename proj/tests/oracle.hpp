#pragma once

// Naive reference model used only by tests. It shares no code with the
// engine: plain nested vectors, segment ownership by integer division and
// squared-distance selection. The centroid is a forward double sum: a
// single-item unit puts every chromosome at exactly the same distance, so any
// other summation order breaks those ties differently.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "semcells/core.hpp"

namespace oracle {

using Genes = std::vector<double>;
using NaiveCell = std::vector<Genes>;
using NaivePopulation = std::map<std::string, NaiveCell>;

inline NaiveCell init_cell(const Genes& base, std::size_t g, double epsilon,
                           bool negative) {
  const std::size_t d = base.size();
  const std::size_t segment = d / g;
  NaiveCell cell(g, base);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t owner = k / segment;
      double delta = epsilon / static_cast<double>(g - 1);
      if (negative) delta = -delta;
      if (owner == i) delta = epsilon;
      cell[i][k] += delta;
    }
  }
  return cell;
}

inline Genes centroid(const NaivePopulation& population,
                      const std::vector<std::string>& items) {
  const std::size_t d = population.at(items.front()).front().size();
  std::vector<double> sum(d, 0.0);
  std::size_t count = 0;
  for (auto it = items.begin(); it != items.end(); ++it) {
    for (const auto& chromosome : population.at(*it)) {
      for (std::size_t k = 0; k < d; ++k) sum[k] += chromosome[k];
      ++count;
    }
  }
  Genes out(d);
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = sum[k] / static_cast<double>(count);
  }
  return out;
}

inline std::size_t nearest(const NaiveCell& cell, const Genes& target) {
  std::size_t best = 0;
  double best_sq = INFINITY;
  for (std::size_t j = 0; j < cell.size(); ++j) {
    double sq = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      sq += (cell[j][k] - target[k]) * (cell[j][k] - target[k]);
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return best;
}

// Constant influence, euclidean selection.
inline void process(NaivePopulation& population,
                    const std::vector<std::string>& items, double alpha) {
  const Genes c = centroid(population, items);
  for (const auto& item : items) {
    auto& cell = population.at(item);
    auto& chosen = cell[nearest(cell, c)];
    for (std::size_t k = 0; k < c.size(); ++k) {
      chosen[k] += alpha * (c[k] - chosen[k]);
    }
  }
}

inline double polysemy(const NaiveCell& cell) {
  const std::size_t g = cell.size();
  double total = 0.0;
  for (std::size_t k = 0; k < cell.front().size(); ++k) {
    long double s = 0.0L, sq = 0.0L;
    for (const auto& chromosome : cell) {
      s += chromosome[k];
      sq += static_cast<long double>(chromosome[k]) * chromosome[k];
    }
    const long double mean = s / g;
    total += static_cast<double>(sq / g - mean * mean);
  }
  return total;
}

// Closed-form initial polysemy: per dimension one chromosome holds epsilon
// and g-1 hold sign*epsilon/(g-1); the shared base cancels.
inline double initial_polysemy(std::size_t d, std::size_t g, double epsilon,
                               bool negative) {
  const double on = epsilon;
  const double off = (negative ? -1.0 : 1.0) * epsilon / (g - 1.0);
  const double mean = (on + (g - 1.0) * off) / g;
  const double variance =
      ((on - mean) * (on - mean) + (g - 1.0) * (off - mean) * (off - mean)) / g;
  return d * variance;
}

}  // namespace oracle
