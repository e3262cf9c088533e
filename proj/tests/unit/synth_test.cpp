#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "proxkit/error.hpp"
#include "proxkit/keyvalue.hpp"
#include "proxkit/proxemics.hpp"
#include "proxkit/rng.hpp"
#include "proxkit/stats.hpp"
#include "proxkit/synth.hpp"

namespace proxkit {
namespace {

std::string dump(const SyntheticSession& s) {
  std::string out = write_annotation_file(s.annotation);
  out += write_session_meta(s.annotation.meta);
  for (const auto& [track, b] : s.ground_truth_bonding) out += track + "=" + std::to_string(b) + "\n";
  SurveyFile f;
  f.canvas_width_mm = f.canvas_height_mm = 300;
  f.records = s.survey;
  out += write_survey_file(f, GeneratorConfig{}.scale);
  return out;
}

TEST(Rng, SplitmixReferenceValues) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(state), 0x6e789e6aa1b965f4ULL);
}

TEST(Rng, FnvReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, Mt19937Reference) {
  // 10000th output of a default-constructed mt19937_64 is fixed by the standard.
  Rng r(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = r.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Rng, VariatesStayInRange) {
  auto r = Rng::substream(1, "x");
  const std::vector<double> w{0.0, 0.5, 0.0, 0.5};
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
    const auto d = r.discrete(w);
    ASSERT_TRUE(d == 1 || d == 3);
  }
}

TEST(Matrix, BlendStaysRowStochastic) {
  const auto base = dwell_matrix(0.85);
  for (double w : {0.0, 0.1, 0.5, 0.99, 1.0}) {
    const auto m = blend_toward_intimate(base, w);
    for (const auto& row : m) {
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
      for (double p : row) EXPECT_GE(p, 0.0);
    }
    EXPECT_DOUBLE_EQ(m[1][0], (1 - w) * base[1][0] + w);
  }
}

TEST(Generator, DeterministicPerSeed) {
  GeneratorConfig c;
  EXPECT_EQ(dump(generate_session(c, "s0001")), dump(generate_session(c, "s0001")));
  c.seed = 188;
  GeneratorConfig d;
  EXPECT_NE(dump(generate_session(c, "s0001")), dump(generate_session(d, "s0001")));
}

TEST(Generator, SessionsIndependentOfCorpusSize) {
  GeneratorConfig c;
  const auto small = generate_corpus(c, 1);
  const auto big = generate_corpus(c, 5);
  EXPECT_EQ(dump(small[0]), dump(generate_session(c, "s0001")));
  EXPECT_EQ(dump(small[0]), dump(big[0]));
}

TEST(Generator, OutputValidatesAndLinks) {
  GeneratorConfig c;
  c.recode_rate = 0.1;
  for (const auto& s : generate_corpus(c, 20)) {
    EXPECT_TRUE(validate_annotation_set(s.annotation).ok());
    const auto& m = s.annotation.meta;
    EXPECT_GE(m.group_size, 1);
    EXPECT_LE(m.group_size, 4);
    EXPECT_EQ(s.survey.size(), static_cast<std::size_t>(m.group_size));
    EXPECT_EQ(s.link.size(), s.survey.size());
    EXPECT_EQ(s.annotation.records.size(), static_cast<std::size_t>(m.group_size) * 40 * 2);
    for (const auto& rec : s.survey) {
      EXPECT_EQ(rec.gas_responses.size(), 10u);
      EXPECT_NO_THROW(canvas_bonding(rec));
    }
    for (const auto& [t, b] : s.ground_truth_bonding) {
      EXPECT_GE(b, 0.0);
      EXPECT_LT(b, 1.0);
    }
  }
}

TEST(Generator, GroupSizeFrequencies) {
  GeneratorConfig c;
  std::array<int, 4> hist{};
  const int n = 4000;
  for (int i = 1; i <= n; ++i) ++hist[generate_session(c, corpus_session_id(i)).annotation.meta.group_size - 1];
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(hist[k] / double(n), c.group_size_weights[k], 0.03);
  }
}

/// Spearman(ground-truth bonding, intimate share) over roughly 200 members.
double bonding_rho(double coupling) {
  GeneratorConfig c;
  c.coupling = coupling;
  std::vector<double> b, share;
  for (int i = 1; b.size() < 200; ++i) {
    const auto s = generate_session(c, corpus_session_id(i));
    const auto m = session_metrics(s.annotation, {c.coder_id, 1});
    EXPECT_TRUE(m.skipped.empty());
    for (const auto& [track, metrics] : m.tracks) {
      b.push_back(s.ground_truth_bonding.at(track));
      share.push_back(metrics.shares.intimate);
    }
  }
  return stats::spearman(b, share);
}

TEST(Generator, CouplingPlantsMonotoneLink) {
  EXPECT_GE(bonding_rho(1.0), 0.6);
  EXPECT_LT(std::abs(bonding_rho(0.0)), 0.1);
}

TEST(Generator, DefaultCorpusSurvivesPipeline) {
  const GeneratorConfig c;
  std::size_t tracks = 0;
  for (const auto& s : generate_corpus(c, c.n_sessions)) {
    const auto m = session_metrics(s.annotation, {c.coder_id, 1});
    EXPECT_TRUE(m.skipped.empty());
    tracks += m.tracks.size();
    for (const auto& rec : s.survey) EXPECT_NO_THROW(bonding_measure(rec, c.scale));
  }
  EXPECT_GT(tracks, 187u);
}

TEST(Config, ApplyWriteRoundTrip) {
  GeneratorConfig c;
  EXPECT_TRUE(c.apply("seed", "18446744073709551615"));
  EXPECT_TRUE(c.apply("coupling", "0.25"));
  EXPECT_TRUE(c.apply("gas_reversed", "1,2"));
  EXPECT_FALSE(c.apply("window", "3"));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);

  GeneratorConfig d;
  const auto kv = KeyValueFile::parse(c.write());
  for (const auto& [key, entry] : kv.entries()) ASSERT_TRUE(d.apply(key, entry.value)) << key;
  EXPECT_EQ(d.write(), c.write());
}

TEST(Config, ValidationErrors) {
  auto expect_invalid = [](auto mutate) {
    GeneratorConfig c;
    mutate(c);
    try {
      c.validate();
      ADD_FAILURE() << "expected InvalidConfig";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidConfig);
    }
  };
  expect_invalid([](GeneratorConfig& c) { c.coupling = 1.5; });
  expect_invalid([](GeneratorConfig& c) { c.group_size_weights = {0.5, 0.4}; });
  expect_invalid([](GeneratorConfig& c) { c.base_transition[0][0] = 0.9; });
  expect_invalid([](GeneratorConfig& c) { c.session_frames = 4; });
  expect_invalid([](GeneratorConfig& c) { c.canvas_mm = 100; });
}

TEST(Study, WritesReadableFiles) {
  testing::TempDir dir("study");
  GeneratorConfig c;
  const auto corpus = generate_corpus(c, 3);
  write_study(dir.path(), c, corpus);
  for (const auto& s : corpus) {
    const auto loaded = load_annotation(dir.path() / "sessions" / (s.annotation.meta.session_id + ".csv"));
    EXPECT_EQ(loaded.set.records, s.annotation.records);
  }
  const auto survey = parse_survey_file(read_text_file(dir.path() / "survey.csv"), c.scale);
  EXPECT_EQ(survey.records.size(), corpus[0].survey.size() + corpus[1].survey.size() +
                                       corpus[2].survey.size());
  EXPECT_NO_THROW(LinkTable::parse(read_text_file(dir.path() / "link.csv")));
}

}  // namespace
}  // namespace proxkit
