#include <sstream>

#include <gtest/gtest.h>

#include "semcells/embeddings.hpp"
#include "semcells/evolution.hpp"
#include "semcells/random.hpp"

using namespace semcells;

namespace {

EmbeddingTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_embedding_text(in);
}

ErrorCode parse_error(const std::string& text, std::optional<std::size_t>* line = nullptr) {
  try {
    parse(text);
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.code();
  }
  ADD_FAILURE() << "expected a parse error";
  return ErrorCode::Io;
}

double mean_pairwise(const EmbeddingTable& table,
                     const std::vector<std::string>& a,
                     const std::vector<std::string>& b, bool same) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = same ? i + 1 : 0; j < b.size(); ++j) {
      sum += euclidean_distance(*table.find(a[i]), *table.find(b[j]));
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST(LoadEmbeddingText, ParsesHeaderedFile) {
  const auto table = parse("2 3\napple 1.0 0.0 0.5\nbanana 0.0 1.0 0.5");
  EXPECT_EQ(table.dimension(), 3u);
  ASSERT_EQ(table.size(), 2u);
  const auto apple = *table.find("apple");
  EXPECT_EQ(std::vector<double>(apple.begin(), apple.end()),
            (std::vector<double>{1.0, 0.0, 0.5}));
  const auto banana = *table.find("banana");
  EXPECT_EQ(std::vector<double>(banana.begin(), banana.end()),
            (std::vector<double>{0.0, 1.0, 0.5}));
}

TEST(LoadEmbeddingText, InfersDimensionWithoutHeader) {
  const auto table = parse("a 1.0 2.0\n");
  EXPECT_EQ(table.dimension(), 2u);
  EXPECT_TRUE(table.contains("a"));
}

TEST(LoadEmbeddingText, ToleratesCrlfAndBlankLines) {
  const auto table = parse("1 2\r\n\r\nx 0.5 -1e-3\r\n");
  EXPECT_EQ(table.dimension(), 2u);
  EXPECT_DOUBLE_EQ((*table.find("x"))[1], -1e-3);
}

TEST(LoadEmbeddingText, LaterDuplicatesOverwrite) {
  const auto table = parse("w 1 1\nv 0 0\nw 2 2\n");
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.items()[0], "w");
  EXPECT_DOUBLE_EQ((*table.find("w"))[0], 2.0);
}

TEST(LoadEmbeddingText, ReportsShortLineAsInconsistentDimension) {
  std::optional<std::size_t> line;
  EXPECT_EQ(parse_error("2 3\napple 1 0 0.5\nbanana 0 1\n", &line),
            ErrorCode::InconsistentDimension);
  EXPECT_EQ(line, 3u);
}

TEST(LoadEmbeddingText, ReportsMalformedLines) {
  std::optional<std::size_t> line;
  EXPECT_EQ(parse_error("1 2\nlonely\n", &line), ErrorCode::MalformedLine);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(parse_error("1 2\nx 1.0 abc\n", &line), ErrorCode::MalformedLine);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(parse_error("x 1.0 nan\n", &line), ErrorCode::MalformedLine);
}

TEST(LoadEmbeddingText, RejectsEmptyFiles) {
  EXPECT_EQ(parse_error(""), ErrorCode::EmptyFile);
  EXPECT_EQ(parse_error("\n\n"), ErrorCode::EmptyFile);
  EXPECT_EQ(parse_error("3 4\n"), ErrorCode::EmptyFile);
}

TEST(LoadEmbeddingText, MissingFileIsIoError) {
  EXPECT_THROW(load_embedding_text("/nonexistent/vectors.txt"), Error);
}

TEST(LoadEmbeddingText, SerializeParseIsAFixedPoint) {
  random::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + rng.below(12);
    EmbeddingTable table(dim);
    const std::size_t n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.between(-8, 3));
      table.insert_or_assign("tok" + std::to_string(rng.below(40)), v);
    }
    std::ostringstream once;
    write_embedding_text(table, once);
    const auto reparsed = parse(once.str());
    EXPECT_EQ(reparsed, table);
    std::ostringstream twice;
    write_embedding_text(reparsed, twice);
    EXPECT_EQ(once.str(), twice.str());
  }
}

TEST(SyntheticEmbedding, IsDeterministicAndSeedSensitive) {
  const auto a = synthetic_embedding("spring", 50, 7);
  EXPECT_EQ(a, synthetic_embedding("spring", 50, 7));
  EXPECT_NE(a, synthetic_embedding("spring", 50, 8));
  EXPECT_NE(a, synthetic_embedding("sprint", 50, 7));
  EXPECT_EQ(a.size(), 50u);
}

TEST(SyntheticEmbedding, StaysInRange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double c : synthetic_embedding("item" + std::to_string(seed), 64, seed)) {
      EXPECT_GE(c, -0.5);
      EXPECT_LE(c, 0.5);
    }
  }
}

TEST(SyntheticEmbedding, PrefixesAgreeAcrossDimensions) {
  const auto short_v = synthetic_embedding("x", 5, 3);
  const auto long_v = synthetic_embedding("x", 9, 3);
  EXPECT_TRUE(std::equal(short_v.begin(), short_v.end(), long_v.begin()));
}

TEST(ClusteredEmbeddings, SeparatesSenses) {
  std::vector<std::vector<std::string>> vocabs(2);
  for (int i = 0; i < 10; ++i) {
    vocabs[0].push_back("a" + std::to_string(i));
    vocabs[1].push_back("b" + std::to_string(i));
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto table = clustered_embeddings(vocabs, 50, 0.1, seed);
    const double within_a = mean_pairwise(table, vocabs[0], vocabs[0], true);
    const double within_b = mean_pairwise(table, vocabs[1], vocabs[1], true);
    const double between = mean_pairwise(table, vocabs[0], vocabs[1], false);
    EXPECT_LT(within_a, between);
    EXPECT_LT(within_b, between);
  }
}

TEST(ClusteredEmbeddings, SingleSenseStaysWithinTwiceSpread) {
  std::vector<std::vector<std::string>> vocabs{{"p", "q", "r", "s", "t"}};
  const double spread = 0.1;
  const auto table = clustered_embeddings(vocabs, 20, spread, 4);
  for (const auto& a : vocabs[0]) {
    for (const auto& b : vocabs[0]) {
      const auto va = *table.find(a);
      const auto vb = *table.find(b);
      for (std::size_t k = 0; k < 20; ++k) {
        EXPECT_LE(std::abs(va[k] - vb[k]), 2 * spread);
      }
    }
  }
}

TEST(ClusteredEmbeddings, SharedItemsSitBetweenCenters) {
  std::vector<std::vector<std::string>> vocabs{{"shared", "a1", "a2"},
                                               {"shared", "b1", "b2"}};
  const auto table = clustered_embeddings(vocabs, 40, 0.01, 9);
  const auto shared = *table.find("shared");
  const auto a = *table.find("a1");
  const auto b = *table.find("b1");
  for (std::size_t k = 0; k < 40; ++k) {
    EXPECT_NEAR(shared[k], 0.5 * (a[k] + b[k]), 0.04);
  }
}

TEST(ClusteredEmbeddings, IsDeterministic) {
  std::vector<std::vector<std::string>> vocabs{{"x", "y"}, {"z"}};
  const auto a = clustered_embeddings(vocabs, 8, 0.2, 5);
  const auto b = clustered_embeddings(vocabs, 8, 0.2, 5);
  std::ostringstream sa, sb;
  write_embedding_text(a, sa);
  write_embedding_text(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(ClusteredEmbeddings, WarnsWhenDimensionIsTooSmall) {
  std::vector<std::vector<std::string>> vocabs{{"a"}, {"b"}, {"c"}};
  std::vector<std::string> warnings;
  const auto table = clustered_embeddings(vocabs, 2, 0.1, 0, &warnings);
  EXPECT_EQ(table.size(), 3u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("DimensionTooSmall"), std::string::npos);
}
