#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "fixtures.hpp"
#include "proxkit/annotation.hpp"
#include "proxkit/error.hpp"
#include "proxkit/tools/cli.hpp"

namespace proxkit {
namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {}
  std::string path(const std::string& name) const { return (dir_.path() / name).string(); }

  void write_demo() {
    write_text_file(path("demo.csv"),
                    "coder_id,pass_id,frame_index,track_id,zone,note\n"
                    "c1,1,0,t1,x,\nc1,1,4,t1,s,\nc1,1,8,t1,p,\nc1,1,12,t1,p,\nc1,1,16,t1,i,\n"
                    "c1,1,0,t2,s,\nc1,1,4,t2,s,\nc1,1,8,t2,p,\nc1,1,12,t2,s,\nc1,1,16,t2,s,\n"
                    "c2,1,0,t1,x,\nc2,1,4,t1,s,\nc2,1,8,t1,p,\nc2,1,12,t1,i,\nc2,1,16,t1,i,\n");
    write_text_file(path("demo.csv.meta"),
                    "session_id=demo\nagent_type=robot\ngroup_size=2\nframe_stride=4\nfps=25\n");
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).status, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"metrics"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"metrics", "a.csv", "--bogus"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"reliability", "a.csv", "--a", "c1:1"}).status, cli::kExitUsage);
  const auto r = run({"metrics"});
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"--help"}).status, cli::kExitOk);
}

TEST_F(CliTest, MetricsOneRowPerTrack) {
  write_demo();
  const auto r = run({"metrics", path("demo.csv"), "--slice", "c1:1", "--out", path("m.csv")});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = parse_metrics_csv(read_text_file(path("m.csv")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].track_id, "t1");
  EXPECT_EQ(rows[1].predominant, Zone::Social);

  const auto all = run({"metrics", path("demo.csv")});
  ASSERT_EQ(all.status, 0);
  EXPECT_EQ(parse_metrics_csv(all.out).size(), 3u);
}

TEST_F(CliTest, MetricsFlagsOverrideConfig) {
  write_demo();
  write_text_file(path("p.conf"), "smoothing_window = 0\n");
  const auto a = run({"metrics", path("demo.csv"), "--slice", "c1:1", "--config", path("p.conf")});
  const auto b = run({"metrics", path("demo.csv"), "--slice", "c1:1", "--config", path("p.conf"),
                      "--window", "3"});
  const auto c = run({"metrics", path("demo.csv"), "--slice", "c1:1"});
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(b.out, c.out);
  EXPECT_EQ(run({"metrics", path("demo.csv"), "--window", "4"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"metrics", path("demo.csv"), "--tie-break", "up"}).status, cli::kExitUsage);
}

TEST_F(CliTest, ConfigFromEnvironment) {
  write_demo();
  write_text_file(path("bad.conf"), "nonsense = 1\n");
  ::setenv("PROXKIT_CONFIG", path("bad.conf").c_str(), 1);
  const auto r = run({"metrics", path("demo.csv")});
  ::unsetenv("PROXKIT_CONFIG");
  EXPECT_EQ(r.status, cli::kExitUsage);
  EXPECT_NE(r.err.find("nonsense"), std::string::npos);
}

TEST_F(CliTest, ValidateReportsDuplicateKey) {
  write_demo();
  write_text_file(path("bad.csv"), "coder_id,pass_id,frame_index,track_id,zone,note\n"
                                   "c1,1,0,t1,s,\nc1,1,0,t1,p,\n");
  write_text_file(path("bad.csv.meta"), "session_id=bad\nagent_type=robot\ngroup_size=1\n");
  const auto bad = run({"validate", path("bad.csv")});
  EXPECT_EQ(bad.status, cli::kExitInvalid);
  EXPECT_NE(bad.err.find("DuplicateKey"), std::string::npos);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos);
  EXPECT_EQ(run({"validate", path("demo.csv")}).status, 0);
}

TEST_F(CliTest, Reliability) {
  write_demo();
  const auto r = run({"reliability", path("demo.csv"), "--a", "c1:1", "--b", "c2:1", "--out",
                      path("r.csv")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("pairs:              5"), std::string::npos);
  EXPECT_EQ(run({"reliability", path("demo.csv"), "--a", "c1:1", "--b", "c9:1"}).status,
            cli::kExitInvalid);
  EXPECT_EQ(run({"reliability", path("demo.csv"), "--a", "c1", "--b", "c2:1"}).status,
            cli::kExitUsage);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  write_text_file(path("g.conf"), "n_sessions = 5\nseed = 3\n");
  ASSERT_EQ(run({"generate", "--config", path("g.conf"), "--out-dir", path("a")}).status, 0);
  ASSERT_EQ(run({"generate", "--config", path("g.conf"), "--out-dir", path("b")}).status, 0);
  for (const char* f : {"survey.csv", "link.csv", "ground_truth.csv", "sessions/s0005.csv"}) {
    EXPECT_EQ(read_text_file(dir_.path() / "a" / f), read_text_file(dir_.path() / "b" / f)) << f;
  }
  write_text_file(path("bad.conf"), "coupling = 2\n");
  EXPECT_EQ(run({"generate", "--config", path("bad.conf"), "--out-dir", path("c")}).status,
            cli::kExitUsage);
}

TEST_F(CliTest, PipelineRecoversPlantedCoupling) {
  const auto d = dir_.path() / "study";
  ASSERT_EQ(run({"generate", "--config", "default", "--out-dir", d.string()}).status, 0);
  std::vector<std::string> metrics{"metrics"};
  for (const auto& e : std::filesystem::directory_iterator(d / "sessions")) {
    if (e.path().extension() == ".csv") metrics.push_back(e.path().string());
  }
  metrics.insert(metrics.end(), {"--out", (d / "m.csv").string()});
  ASSERT_EQ(run(metrics).status, 0);
  ASSERT_EQ(run({"survey", (d / "survey.csv").string(), "--scale", (d / "scale.txt").string(),
                 "--out", (d / "b.csv").string()})
                .status,
            0);
  ASSERT_EQ(run({"join", "--metrics", (d / "m.csv").string(), "--bonding",
                 (d / "b.csv").string(), "--link", (d / "link.csv").string(), "--out",
                 (d / "t.csv").string()})
                .status,
            0);
  const auto c = run({"correlate", (d / "t.csv").string(), "--pairs",
                      "intimate_share:distance_to_agent_mm"});
  ASSERT_EQ(c.status, 0) << c.err;
  const auto line = c.out.substr(c.out.find('\n') + 1);
  const double rho = std::stod(line.substr(line.rfind(',') + 1));
  EXPECT_LE(rho, -0.6);
}

TEST(CliConfig, ParsesKeys) {
  const auto cfg = cli::CliConfig::parse(
      "# pipeline\nsmoothing_window = 5\ntie_break = farthest\ndenominator = total\n"
      "scale = gas.txt\ncoupling = 0.5\n",
      "/data");
  EXPECT_EQ(cfg.metrics.smoothing_window, 5);
  EXPECT_EQ(cfg.metrics.tie_break, TieBreak::Farthest);
  EXPECT_EQ(cfg.metrics.denominator, ShareDenominator::Total);
  EXPECT_EQ(*cfg.scale_path, std::filesystem::path("/data/gas.txt"));
  EXPECT_DOUBLE_EQ(cfg.generator.coupling, 0.5);
  try {
    cli::CliConfig::parse("a = 1\nsmoothing_window = 2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
    EXPECT_EQ(e.line(), 1u);
  }
}

}  // namespace
}  // namespace proxkit
