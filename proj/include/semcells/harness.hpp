#pragma once

// Corpus ingestion, synthetic sense corpora, unit orderings and the
// trajectory experiment driver.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semcells/core.hpp"
#include "semcells/embeddings.hpp"
#include "semcells/evolution.hpp"
#include "semcells/metrics.hpp"
#include "semcells/random.hpp"
#include "semcells/text.hpp"

namespace semcells {

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

// One JSON object per line: "text" (required), "sense" and "id" optional.
// Blank lines are skipped; unit ids are assigned in file order.
inline Corpus parse_jsonl(std::istream& in) {
  std::vector<CoexistenceUnit> units;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedJson, e.what(), line_no);
    }
    if (!object.is_object()) {
      throw Error(ErrorCode::MalformedJson, "expected a JSON object", line_no);
    }
    const auto text_it = object.find("text");
    if (text_it == object.end() || !text_it->is_string()) {
      throw Error(ErrorCode::MalformedJson, "missing string field \"text\"",
                  line_no);
    }
    CoexistenceUnit unit;
    unit.id = units.size();
    unit.raw_text = text_it->get<std::string>();
    unit.items = text::tokenize(*unit.raw_text);
    if (unit.items.empty()) {
      throw Error(ErrorCode::EmptyTextField, "\"text\" has no tokens", line_no);
    }
    if (const auto it = object.find("sense"); it != object.end()) {
      if (!it->is_number_integer()) {
        throw Error(ErrorCode::MalformedJson, "\"sense\" must be an integer",
                    line_no);
      }
      unit.sense_label = it->get<int>();
    }
    if (const auto it = object.find("id"); it != object.end()) {
      if (!it->is_string()) {
        throw Error(ErrorCode::MalformedJson, "\"id\" must be a string",
                    line_no);
      }
      unit.external_id = it->get<std::string>();
    }
    units.push_back(std::move(unit));
  }
  return Corpus(std::move(units));
}

inline Corpus ingest_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_jsonl(in);
}

// Units without raw text are written as their items joined by spaces.
inline void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& unit : corpus.units()) {
    nlohmann::json object;
    if (unit.raw_text) {
      object["text"] = *unit.raw_text;
    } else {
      std::string joined;
      for (const auto& item : unit.items) {
        if (!joined.empty()) joined += ' ';
        joined += item;
      }
      object["text"] = joined;
    }
    if (unit.sense_label) object["sense"] = *unit.sense_label;
    if (unit.external_id) object["id"] = *unit.external_id;
    out << object.dump() << '\n';
  }
}

// One basket per line, comma-separated item identifiers.
inline Corpus parse_baskets(std::istream& in) {
  std::vector<CoexistenceUnit> units;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> items;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const auto field = text::trim(rest.substr(0, comma));
      if (!field.empty()) items.emplace_back(field);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (items.empty()) {
      throw Error(ErrorCode::EmptyBasketLine, "basket has no items", line_no);
    }
    CoexistenceUnit unit;
    unit.id = units.size();
    unit.items = dedupe_items(std::move(items));
    units.push_back(std::move(unit));
  }
  return Corpus(std::move(units));
}

inline Corpus ingest_baskets(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_baskets(in);
}

// ---------------------------------------------------------------------------
// Synthetic sense corpora
// ---------------------------------------------------------------------------

struct SenseSpec {
  int sense_id = 0;
  std::vector<std::string> context;
  std::vector<std::string> bridge_to_next;  // shared with the next sense
};

struct SenseCorpusSpec {
  std::string target_item = "spring";
  // Ordered along the derivation chain; bridges link neighbours.
  std::vector<SenseSpec> senses;
  std::size_t sentences_per_sense = 100;
  std::size_t min_context = 4;  // context words per sentence, inclusive
  std::size_t max_context = 8;
  double bridge_probability = 0.2;
  std::size_t dimension = 50;
  double spread = 0.1;
  std::uint64_t seed = 0;
};

// Named vocabularies: "s<id>_w<k>" for context words and "b<a>_<b>_w<k>"
// for bridges between consecutive senses of `chain`.
inline SenseCorpusSpec make_sense_spec(std::span<const int> chain,
                                       std::size_t vocab_per_sense,
                                       std::size_t bridges_per_pair,
                                       std::string target) {
  SenseCorpusSpec spec;
  spec.target_item = std::move(target);
  for (std::size_t s = 0; s < chain.size(); ++s) {
    SenseSpec sense;
    sense.sense_id = chain[s];
    const auto id = std::to_string(chain[s]);
    for (std::size_t k = 0; k < vocab_per_sense; ++k) {
      sense.context.push_back("s" + id + "_w" + std::to_string(k));
    }
    if (s + 1 < chain.size()) {
      const auto next = std::to_string(chain[s + 1]);
      for (std::size_t k = 0; k < bridges_per_pair; ++k) {
        sense.bridge_to_next.push_back("b" + id + "_" + next + "_w" +
                                       std::to_string(k));
      }
    }
    spec.senses.push_back(std::move(sense));
  }
  return spec;
}

inline void validate_sense_spec(const SenseCorpusSpec& spec) {
  auto fail = [](const std::string& message) {
    throw Error(ErrorCode::InvalidSpec, message);
  };
  if (spec.target_item.empty()) fail("target item is empty");
  if (spec.senses.size() < 2) fail("at least two senses are required");
  if (spec.sentences_per_sense < 1) fail("sentences_per_sense must be >= 1");
  if (spec.min_context > spec.max_context) fail("min_context > max_context");
  if (!(spec.bridge_probability >= 0.0 && spec.bridge_probability <= 1.0)) {
    fail("bridge_probability must lie in [0, 1]");
  }
  std::set<int> ids;
  std::set<std::string> words;
  for (const auto& sense : spec.senses) {
    if (!ids.insert(sense.sense_id).second) {
      fail("duplicate sense id " + std::to_string(sense.sense_id));
    }
    for (const auto& word : sense.context) {
      if (word == spec.target_item || !words.insert(word).second) {
        fail("context word '" + word + "' is not unique to one sense");
      }
    }
    for (const auto& word : sense.bridge_to_next) {
      if (word == spec.target_item || !words.insert(word).second) {
        fail("bridge word '" + word + "' is not unique");
      }
    }
  }
  if (!spec.senses.back().bridge_to_next.empty()) {
    fail("the last sense has no successor to bridge to");
  }
}

struct GeneratedCorpus {
  Corpus corpus;
  EmbeddingTable embeddings;
  std::vector<std::string> warnings;
};

// Senses are emitted in chain order. Each sentence is the target item, a
// seeded sample of the sense's context words and, with bridge_probability,
// one bridge word shared with an adjacent sense.
inline GeneratedCorpus generate_sense_corpus(const SenseCorpusSpec& spec) {
  validate_sense_spec(spec);
  random::Rng rng(random::mix(spec.seed, 0x5e47e9ceULL));

  std::vector<CoexistenceUnit> units;
  for (std::size_t s = 0; s < spec.senses.size(); ++s) {
    const auto& sense = spec.senses[s];
    std::vector<std::string> bridges;
    if (s > 0) {
      const auto& prev = spec.senses[s - 1].bridge_to_next;
      bridges.insert(bridges.end(), prev.begin(), prev.end());
    }
    bridges.insert(bridges.end(), sense.bridge_to_next.begin(),
                   sense.bridge_to_next.end());

    for (std::size_t n = 0; n < spec.sentences_per_sense; ++n) {
      CoexistenceUnit unit;
      unit.id = units.size();
      unit.sense_label = sense.sense_id;
      unit.items.push_back(spec.target_item);
      const auto length = static_cast<std::size_t>(
          rng.between(static_cast<std::int64_t>(spec.min_context),
                      static_cast<std::int64_t>(spec.max_context)));
      for (auto k : rng.sample_indices(sense.context.size(), length)) {
        unit.items.push_back(sense.context[k]);
      }
      if (!bridges.empty() && rng.bernoulli(spec.bridge_probability)) {
        unit.items.push_back(bridges[rng.below(bridges.size())]);
      }
      std::string raw;
      for (const auto& item : unit.items) {
        if (!raw.empty()) raw += ' ';
        raw += item;
      }
      unit.raw_text = std::move(raw);
      units.push_back(std::move(unit));
    }
  }

  // Each sense vocabulary includes the target and every adjacent bridge, so
  // shared items land between the centers they belong to.
  std::vector<std::vector<std::string>> vocabularies;
  for (std::size_t s = 0; s < spec.senses.size(); ++s) {
    std::vector<std::string> vocab{spec.target_item};
    const auto& sense = spec.senses[s];
    vocab.insert(vocab.end(), sense.context.begin(), sense.context.end());
    if (s > 0) {
      const auto& prev = spec.senses[s - 1].bridge_to_next;
      vocab.insert(vocab.end(), prev.begin(), prev.end());
    }
    vocab.insert(vocab.end(), sense.bridge_to_next.begin(),
                 sense.bridge_to_next.end());
    vocabularies.push_back(std::move(vocab));
  }

  GeneratedCorpus out;
  out.embeddings = clustered_embeddings(vocabularies, spec.dimension,
                                        spec.spread,
                                        random::mix(spec.seed, 0xe3bedULL),
                                        &out.warnings);
  out.corpus = Corpus(std::move(units));
  return out;
}

// ---------------------------------------------------------------------------
// Orderings
// ---------------------------------------------------------------------------

enum class OrderingKind { file, blocked, shuffled, interleaved };

struct OrderingSpec {
  OrderingKind kind = OrderingKind::file;
  std::vector<int> block_order;
  std::uint64_t seed = 0;

  friend bool operator==(const OrderingSpec&, const OrderingSpec&) = default;
};

// "file", "shuffled:<seed>", "interleaved:<seed>", "blocked:<s1,s2,...>"
// or "blocked:<s1,...>@<seed>".
inline std::string to_string(const OrderingSpec& ordering) {
  switch (ordering.kind) {
    case OrderingKind::file:
      return "file";
    case OrderingKind::shuffled:
      return "shuffled:" + std::to_string(ordering.seed);
    case OrderingKind::interleaved:
      return "interleaved:" + std::to_string(ordering.seed);
    case OrderingKind::blocked: {
      std::string out = "blocked:";
      for (std::size_t i = 0; i < ordering.block_order.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ordering.block_order[i]);
      }
      if (ordering.seed != 0) out += "@" + std::to_string(ordering.seed);
      return out;
    }
  }
  return "file";
}

namespace detail {

template <typename T>
std::optional<T> parse_integer(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace detail

inline OrderingSpec parse_ordering(std::string_view text) {
  auto bad = [&] {
    return Error(ErrorCode::InvalidParameter,
                 "invalid ordering '" + std::string(text) + "'");
  };
  if (text == "file") return {};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw bad();
  const auto kind = text.substr(0, colon);
  auto rest = text.substr(colon + 1);
  OrderingSpec spec;
  if (kind == "shuffled" || kind == "interleaved") {
    spec.kind = kind == "shuffled" ? OrderingKind::shuffled
                                   : OrderingKind::interleaved;
    const auto seed = detail::parse_integer<std::uint64_t>(rest);
    if (!seed) throw bad();
    spec.seed = *seed;
    return spec;
  }
  if (kind != "blocked") throw bad();
  spec.kind = OrderingKind::blocked;
  if (const auto at = rest.find('@'); at != std::string_view::npos) {
    const auto seed = detail::parse_integer<std::uint64_t>(rest.substr(at + 1));
    if (!seed) throw bad();
    spec.seed = *seed;
    rest = rest.substr(0, at);
  }
  while (true) {
    const auto comma = rest.find(',');
    const auto id = detail::parse_integer<int>(rest.substr(0, comma));
    if (!id) throw bad();
    spec.block_order.push_back(*id);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return spec;
}

// Splits a comma-separated list of ordering specs. Bare integers continue
// the block list of a preceding "blocked:" entry.
inline std::vector<OrderingSpec> parse_ordering_list(std::string_view text) {
  std::vector<std::string> entries;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto token = text::trim(rest.substr(0, comma));
    const bool continues_block =
        !entries.empty() && entries.back().rfind("blocked:", 0) == 0 &&
        entries.back().find('@') == std::string::npos &&
        !token.empty() &&
        token.find_first_not_of("-0123456789@") == std::string_view::npos;
    if (continues_block) {
      entries.back() += ",";
      entries.back() += token;
    } else if (!token.empty()) {
      entries.emplace_back(token);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  std::vector<OrderingSpec> out;
  for (const auto& entry : entries) out.push_back(parse_ordering(entry));
  return out;
}

// Returns a permutation of `corpus`; unit ids are preserved.
inline Corpus apply_ordering(const Corpus& corpus,
                             const OrderingSpec& ordering) {
  const auto units = corpus.units();
  if (ordering.kind == OrderingKind::file) return corpus;

  random::Rng rng(ordering.seed);
  std::vector<CoexistenceUnit> out;
  out.reserve(units.size());

  if (ordering.kind == OrderingKind::shuffled) {
    out.assign(units.begin(), units.end());
    rng.shuffle(out);
    return Corpus(std::move(out));
  }

  std::map<int, std::vector<CoexistenceUnit>> by_sense;
  for (const auto& unit : units) {
    if (!unit.sense_label) {
      throw Error(ErrorCode::MissingSenseLabels,
                  "unit " + std::to_string(unit.id) + " has no sense label");
    }
    by_sense[*unit.sense_label].push_back(unit);
  }

  if (ordering.kind == OrderingKind::blocked) {
    std::set<int> used;
    for (int sense : ordering.block_order) {
      if (!by_sense.contains(sense)) {
        throw Error(ErrorCode::UnknownSenseInBlockOrder,
                    "sense " + std::to_string(sense) +
                        " does not occur in the corpus");
      }
      if (!used.insert(sense).second) {
        throw Error(ErrorCode::InvalidBlockOrder,
                    "sense " + std::to_string(sense) + " listed twice");
      }
    }
    if (used.size() != by_sense.size()) {
      throw Error(ErrorCode::InvalidBlockOrder,
                  "block order must name every sense in the corpus");
    }
    for (int sense : ordering.block_order) {
      auto& block = by_sense[sense];
      rng.shuffle(block);
      out.insert(out.end(), block.begin(), block.end());
    }
    return Corpus(std::move(out));
  }

  // Interleaved: shuffle within each sense, then round-robin in sense-id
  // order until every sense is exhausted.
  std::vector<std::vector<CoexistenceUnit>*> queues;
  for (auto& [sense, block] : by_sense) {
    rng.shuffle(block);
    queues.push_back(&block);
  }
  for (std::size_t i = 0; out.size() < units.size(); ++i) {
    for (auto* queue : queues) {
      if (i < queue->size()) out.push_back((*queue)[i]);
    }
  }
  return Corpus(std::move(out));
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentResult {
  OrderingSpec ordering;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  TrajectorySummary summary;
  ModelConfig config;
};

inline std::string tracked_label(std::span<const std::string> tracked) {
  std::string label;
  for (const auto& item : tracked) {
    if (!label.empty()) label += '+';
    label += item;
  }
  return label;
}

namespace detail {

inline double tracked_polysemy(const CellPopulation& population,
                               std::span<const std::string> tracked) {
  double total = 0.0;
  for (const auto& item : tracked) {
    total += polysemy(population.cell(item), population.config().variance_mode);
  }
  return total;
}

}  // namespace detail

// Orders the corpus, initializes cells for its vocabulary plus the tracked
// items, and samples the summed polysemy of the tracked items at step 0
// and after every processed unit.
inline ExperimentResult run_experiment(
    const Corpus& corpus, std::shared_ptr<const EmbeddingTable> embeddings,
    const OrderingSpec& ordering, const ModelConfig& config,
    std::span<const std::string> tracked) {
  require_valid(config);
  if (tracked.empty()) {
    throw Error(ErrorCode::InvalidParameter, "no tracked items");
  }
  const Corpus ordered = apply_ordering(corpus, ordering);

  std::vector<std::string> vocabulary(ordered.vocabulary().begin(),
                                      ordered.vocabulary().end());
  vocabulary.insert(vocabulary.end(), tracked.begin(), tracked.end());
  CellPopulation population = init_cells(std::move(embeddings), vocabulary, config);

  ExperimentResult result;
  result.ordering = ordering;
  result.seed = config.rng_seed;
  result.config = config;
  result.trajectory = Trajectory(tracked_label(tracked));
  result.trajectory.add(0, detail::tracked_polysemy(population, tracked));
  run(std::move(population), ordered,
      [&](const StepInfo& info, const CellPopulation& current) {
        result.trajectory.add(info.step,
                              detail::tracked_polysemy(current, tracked));
      });
  result.summary = summarize(result.trajectory);
  return result;
}

inline ExperimentResult run_experiment(const Corpus& corpus,
                                       const EmbeddingTable& embeddings,
                                       const OrderingSpec& ordering,
                                       const ModelConfig& config,
                                       std::span<const std::string> tracked) {
  return run_experiment(corpus, std::make_shared<const EmbeddingTable>(embeddings),
                        ordering, config, tracked);
}

struct Stat {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct OrderingStats {
  OrderingSpec ordering;
  Stat decrease_count;
  Stat monotonicity_ratio;
  Stat max_drawdown;
  Stat final_polysemy;
};

struct ComparisonReport {
  std::vector<ExperimentResult> runs;  // ordering-major, then seed
  std::vector<OrderingStats> stats;    // one per ordering
};

namespace detail {

inline Stat stat_of(const std::vector<double>& values) {
  Stat s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    s.mean += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(values.size());
  return s;
}

// The per-run ordering seed combines the ordering's own seed with the run
// seed so every (ordering, seed) cell draws an independent permutation.
inline OrderingSpec seeded(OrderingSpec ordering, std::uint64_t seed) {
  if (ordering.kind != OrderingKind::file) {
    ordering.seed = random::mix(ordering.seed, seed);
  }
  return ordering;
}

}  // namespace detail

// Runs every (ordering, seed) pair. Runs execute concurrently; the report
// order is fixed by (ordering index, seed index).
inline ComparisonReport compare_orderings(
    const Corpus& corpus, std::shared_ptr<const EmbeddingTable> embeddings,
    std::span<const OrderingSpec> orderings, const ModelConfig& config,
    std::span<const std::string> tracked, std::span<const std::uint64_t> seeds,
    bool parallel = true) {
  if (orderings.size() < 2) {
    throw Error(ErrorCode::InvalidParameter,
                "comparison needs at least two orderings");
  }
  if (seeds.empty()) {
    throw Error(ErrorCode::InvalidParameter, "comparison needs a seed");
  }

  auto one = [&](std::size_t o, std::size_t s) {
    ModelConfig run_config = config;
    run_config.rng_seed = seeds[s];
    ExperimentResult result =
        run_experiment(corpus, embeddings,
                       detail::seeded(orderings[o], seeds[s]), run_config,
                       tracked);
    result.ordering = orderings[o];
    return result;
  };

  ComparisonReport report;
  report.runs.reserve(orderings.size() * seeds.size());
  if (parallel) {
    std::vector<std::future<ExperimentResult>> pending;
    for (std::size_t o = 0; o < orderings.size(); ++o) {
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        pending.push_back(std::async(std::launch::async, one, o, s));
      }
    }
    for (auto& f : pending) report.runs.push_back(f.get());
  } else {
    for (std::size_t o = 0; o < orderings.size(); ++o) {
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        report.runs.push_back(one(o, s));
      }
    }
  }

  for (std::size_t o = 0; o < orderings.size(); ++o) {
    std::vector<double> decreases, ratios, drawdowns, finals;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& summary = report.runs[o * seeds.size() + s].summary;
      decreases.push_back(static_cast<double>(summary.decrease_count));
      ratios.push_back(summary.monotonicity_ratio);
      drawdowns.push_back(summary.max_drawdown);
      finals.push_back(summary.final);
    }
    report.stats.push_back({orderings[o], detail::stat_of(decreases),
                            detail::stat_of(ratios), detail::stat_of(drawdowns),
                            detail::stat_of(finals)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTrajectoryHeader =
    "ordering,seed,step,item,polysemy";
inline constexpr std::string_view kSummaryHeader =
    "ordering,seed,initial,final,decrease_count,monotonicity_ratio,max_drawdown";

inline void write_trajectory_csv(std::span<const ExperimentResult> results,
                                 std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : results) {
    const auto ordering = text::csv_field(to_string(r.ordering));
    const auto item = text::csv_field(r.trajectory.item());
    for (const auto& sample : r.trajectory.samples()) {
      out << ordering << ',' << r.seed << ',' << sample.step << ',' << item
          << ',' << text::format_double(sample.polysemy) << '\n';
    }
  }
}

inline void write_summary_csv(std::span<const ExperimentResult> results,
                              std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& r : results) {
    const auto& s = r.summary;
    out << text::csv_field(to_string(r.ordering)) << ',' << r.seed << ','
        << text::format_double(s.initial) << ','
        << text::format_double(s.final) << ',' << s.decrease_count << ','
        << text::format_double(s.monotonicity_ratio) << ','
        << text::format_double(s.max_drawdown) << '\n';
  }
}

}  // namespace semcells
