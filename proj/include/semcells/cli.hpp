#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 internal error. stdout carries CSV only; diagnostics go to the
// error stream.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcells/core.hpp"
#include "semcells/embeddings.hpp"
#include "semcells/evolution.hpp"
#include "semcells/harness.hpp"
#include "semcells/metrics.hpp"
#include "semcells/plot.hpp"

namespace semcells::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Flag-level problems discovered after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct InputFlags {
  std::string corpus;
  std::string baskets;
  std::string embeddings;
  std::vector<std::string> track;
  bool strict_embeddings = false;
};

struct ModelFlags {
  ModelConfig config = default_config();
  std::string influence = "constant";
  std::string distance = "euclidean";
  std::string variance = "population";
  std::string delta_sign = "positive";
  CLI::Option* dim = nullptr;
};

inline void add_input_flags(CLI::App& app, InputFlags& in) {
  auto* corpus = app.add_option("--corpus", in.corpus, "Corpus JSONL file");
  auto* baskets =
      app.add_option("--baskets", in.baskets, "Basket file, one basket per line");
  corpus->excludes(baskets);
  baskets->excludes(corpus);
  app.add_option("--embeddings", in.embeddings,
                 "Text-format embedding file (synthetic vectors when absent)");
  app.add_option("--track", in.track, "Item whose polysemy is sampled (repeatable)");
  app.add_flag("--strict-embeddings", in.strict_embeddings,
               "Fail on items missing from the embedding file");
}

inline void add_model_flags(CLI::App& app, ModelFlags& m) {
  auto& c = m.config;
  m.dim = app.add_option("--dim", c.d, "Embedding dimension d")
              ->check(CLI::PositiveNumber);
  app.add_option("--chromosomes", c.g, "Chromosomes per cell g")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  app.add_option("--rounds", c.rounds, "Passes over the corpus R")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", c.alpha, "Crossover influence")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--epsilon", c.epsilon, "Initial differentiation");
  app.add_option("--influence", m.influence, "constant | inverse-square")
      ->check(CLI::IsMember({"constant", "inverse-square"}));
  app.add_option("--distance", m.distance, "euclidean | cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  app.add_option("--variance", m.variance, "population | sample")
      ->check(CLI::IsMember({"population", "sample"}));
  app.add_option("--delta-sign", m.delta_sign, "positive | negative")
      ->check(CLI::IsMember({"positive", "negative"}));
  app.add_option("--seed", c.rng_seed, "Seed for synthetic embeddings");
}

inline ModelConfig finish_config(const ModelFlags& m) {
  ModelConfig c = m.config;
  c.influence_mode = m.influence == "constant" ? InfluenceMode::constant
                                               : InfluenceMode::inverse_square;
  c.distance_metric = m.distance == "euclidean" ? DistanceMetric::euclidean
                                                : DistanceMetric::cosine;
  c.variance_mode = m.variance == "population" ? VarianceMode::population
                                               : VarianceMode::sample;
  c.off_segment_sign = m.delta_sign == "positive" ? OffSegmentSign::positive
                                                  : OffSegmentSign::negative;
  return c;
}

struct LoadedInputs {
  Corpus corpus;
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::vector<std::string> tracked;
  ModelConfig config;
};

// Item present in the most units; first occurrence breaks ties.
inline std::string most_frequent_item(const Corpus& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& unit : corpus.units()) {
    for (const auto& item : unit.items) ++counts[item];
  }
  std::string best;
  std::size_t best_count = 0;
  for (const auto& item : corpus.vocabulary()) {
    if (counts[item] > best_count) {
      best = item;
      best_count = counts[item];
    }
  }
  return best;
}

inline LoadedInputs load_inputs(const InputFlags& in, const ModelFlags& m) {
  if (in.corpus.empty() && in.baskets.empty()) {
    throw UsageError("one of --corpus or --baskets is required");
  }
  LoadedInputs out;
  out.config = finish_config(m);
  if (in.strict_embeddings) out.config.missing_items = MissingItemPolicy::error;
  if (!in.embeddings.empty()) {
    auto table =
        std::make_shared<const EmbeddingTable>(load_embedding_text(in.embeddings));
    // Without an explicit --dim the file decides the dimension.
    if (m.dim->count() == 0) out.config.d = table->dimension();
    out.embeddings = std::move(table);
  } else if (in.strict_embeddings) {
    throw UsageError("--strict-embeddings requires --embeddings");
  }
  const auto issues = validate_config(out.config);
  if (!issues.empty()) {
    std::string message;
    for (const auto& issue : issues) {
      if (!message.empty()) message += "; ";
      message += std::string(to_string(issue.code)) + ": " + issue.message;
    }
    throw UsageError(message);
  }
  out.corpus = in.corpus.empty() ? ingest_baskets(in.baskets)
                                 : ingest_jsonl(in.corpus);
  if (out.corpus.empty()) throw Error(ErrorCode::EmptyFile, "corpus has no units");
  out.tracked = in.track;
  if (out.tracked.empty()) out.tracked.push_back(most_frequent_item(out.corpus));
  out.tracked = dedupe_items(std::move(out.tracked));
  return out;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  file << content;
  file.flush();
  if (!file) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

inline bool verbose() {
  const char* level = std::getenv("SEMCELLS_LOG");
  return level != nullptr &&
         (std::string(level) == "info" || std::string(level) == "debug");
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Semantic Cells: polysemy evolution over co-existence streams",
               "semcells"};
  app.require_subcommand(1);

  // run
  detail::InputFlags run_in;
  detail::ModelFlags run_model;
  std::string run_ordering = "file";
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Trajectory of one ordering");
  detail::add_input_flags(*run_cmd, run_in);
  detail::add_model_flags(*run_cmd, run_model);
  run_cmd->add_option("--ordering", run_ordering,
                      "file | shuffled:<seed> | interleaved:<seed> | "
                      "blocked:<s1,s2,...>[@<seed>]");
  run_cmd->add_option("--out", run_out, "Trajectory CSV (stdout when absent)");

  // compare
  detail::InputFlags cmp_in;
  detail::ModelFlags cmp_model;
  std::string cmp_orderings;
  std::vector<std::uint64_t> cmp_seeds;
  std::string cmp_out, cmp_summary_out;
  bool cmp_serial = false;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare several orderings");
  detail::add_input_flags(*cmp_cmd, cmp_in);
  detail::add_model_flags(*cmp_cmd, cmp_model);
  cmp_cmd->add_option("--orderings", cmp_orderings,
                      "Comma-separated ordering specs")
      ->required();
  cmp_cmd->add_option("--seeds", cmp_seeds, "Run seeds")->delimiter(',');
  cmp_cmd->add_option("--out", cmp_out, "Trajectory CSV");
  cmp_cmd->add_option("--summary-out", cmp_summary_out, "Summary CSV");
  cmp_cmd->add_flag("--serial", cmp_serial, "Run experiments one at a time");

  // gen-corpus
  std::size_t gen_senses = 4, gen_per_sense = 100, gen_vocab = 20,
              gen_bridges = 5, gen_min = 4, gen_max = 8, gen_dim = 50;
  std::string gen_target = "spring";
  std::vector<int> gen_chain;
  double gen_spread = 0.1, gen_bridge_prob = 0.2;
  std::uint64_t gen_seed = 0;
  std::string gen_out_corpus, gen_out_embeddings;
  auto* gen_cmd =
      app.add_subcommand("gen-corpus", "Generate a labeled multi-sense corpus");
  gen_cmd->add_option("--senses", gen_senses, "Number of senses")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  gen_cmd->add_option("--per-sense", gen_per_sense, "Sentences per sense")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--target", gen_target, "Target item");
  gen_cmd->add_option("--vocab-per-sense", gen_vocab, "Context words per sense")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--bridges", gen_bridges, "Bridge words per adjacent pair");
  gen_cmd->add_option("--chain", gen_chain,
                      "Sense ids in derivation order (default 1..n)")
      ->delimiter(',');
  gen_cmd->add_option("--min-context", gen_min, "Minimum context words per sentence");
  gen_cmd->add_option("--max-context", gen_max, "Maximum context words per sentence");
  gen_cmd->add_option("--bridge-prob", gen_bridge_prob,
                      "Probability a sentence carries a bridge word")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--dim", gen_dim, "Embedding dimension")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--spread", gen_spread, "Per-coordinate noise bound")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("--out-corpus", gen_out_corpus, "Corpus JSONL path")
      ->required();
  gen_cmd->add_option("--out-embeddings", gen_out_embeddings,
                      "Embedding text path")
      ->required();

  // plot
  std::string plot_in, plot_out;
  int plot_width = 800, plot_height = 500;
  auto* plot_cmd = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
  plot_cmd->add_option("--in", plot_in, "Trajectory CSV")->required();
  plot_cmd->add_option("--out", plot_out, "SVG path")->required();
  plot_cmd->add_option("--width", plot_width, "Width in pixels")
      ->check(CLI::Range(200, 20000));
  plot_cmd->add_option("--height", plot_height, "Height in pixels")
      ->check(CLI::Range(150, 20000));

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("semcells");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kUsage;
  }

  const bool log = detail::verbose();
  try {
    if (*run_cmd) {
      const auto ordering = [&] {
        try {
          return parse_ordering(run_ordering);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }();
      auto inputs = detail::load_inputs(run_in, run_model);
      if (log) err << "run: " << inputs.corpus.size() << " units\n";
      const auto result = run_experiment(inputs.corpus, inputs.embeddings,
                                         ordering, inputs.config, inputs.tracked);
      std::ostringstream csv;
      write_trajectory_csv(std::span(&result, 1), csv);
      if (run_out.empty()) {
        out << csv.str();
      } else {
        detail::write_text(run_out, csv.str());
      }
      return kOk;
    }

    if (*cmp_cmd) {
      const auto orderings = [&] {
        try {
          return parse_ordering_list(cmp_orderings);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }();
      if (orderings.size() < 2) {
        throw UsageError("--orderings needs at least two entries");
      }
      if (cmp_seeds.empty()) cmp_seeds.push_back(0);
      auto inputs = detail::load_inputs(cmp_in, cmp_model);
      if (log) {
        err << "compare: " << orderings.size() << " orderings x "
            << cmp_seeds.size() << " seeds\n";
      }
      const auto report =
          compare_orderings(inputs.corpus, inputs.embeddings, orderings,
                            inputs.config, inputs.tracked, cmp_seeds, !cmp_serial);
      std::ostringstream trajectories, summaries;
      write_trajectory_csv(report.runs, trajectories);
      write_summary_csv(report.runs, summaries);
      if (!cmp_out.empty()) detail::write_text(cmp_out, trajectories.str());
      if (!cmp_summary_out.empty()) {
        detail::write_text(cmp_summary_out, summaries.str());
      }
      // Whatever is not routed to a file goes to stdout, summary first.
      if (cmp_summary_out.empty()) {
        out << summaries.str();
      } else if (cmp_out.empty()) {
        out << trajectories.str();
      }
      return kOk;
    }

    if (*gen_cmd) {
      std::vector<int> chain = gen_chain;
      if (chain.empty()) {
        for (std::size_t s = 1; s <= gen_senses; ++s) {
          chain.push_back(static_cast<int>(s));
        }
      } else if (chain.size() != gen_senses && gen_cmd->count("--senses") > 0) {
        throw UsageError("--chain must list exactly --senses ids");
      }
      if (chain.size() < 2) throw UsageError("at least two senses are required");
      if (gen_min > gen_max) {
        throw UsageError("--min-context exceeds --max-context");
      }
      auto spec = make_sense_spec(chain, gen_vocab, gen_bridges, gen_target);
      spec.sentences_per_sense = gen_per_sense;
      spec.min_context = gen_min;
      spec.max_context = gen_max;
      spec.bridge_probability = gen_bridge_prob;
      spec.dimension = gen_dim;
      spec.spread = gen_spread;
      spec.seed = gen_seed;
      GeneratedCorpus generated;
      try {
        generated = generate_sense_corpus(spec);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSpec) throw UsageError(e.what());
        throw;
      }
      for (const auto& warning : generated.warnings) err << warning << '\n';
      std::ostringstream corpus_text, embedding_text;
      write_jsonl(generated.corpus, corpus_text);
      write_embedding_text(generated.embeddings, embedding_text);
      detail::write_text(gen_out_corpus, corpus_text.str());
      detail::write_text(gen_out_embeddings, embedding_text.str());
      return kOk;
    }

    if (*plot_cmd) {
      std::ifstream file(plot_in, std::ios::binary);
      if (!file) throw Error(ErrorCode::Io, "cannot open '" + plot_in + "'");
      const auto series = plot::parse_trajectory_csv(file);
      detail::write_text(plot_out,
                         plot::render_svg(series, plot_width, plot_height));
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace semcells::cli
