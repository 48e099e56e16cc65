#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "gradcheck_fixture.hpp"
#include "run_config.hpp"

using namespace par;
using namespace par::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("par_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string value_of(const RunConfig& c, const std::string& key) {
  for (const auto& [k, v] : c.resolved())
    if (k == key) return v;
  return "<missing>";
}

}  // namespace

TEST(RunConfig, ParsesFileWithComments) {
  const auto dir = scratch("parse");
  {
    std::ofstream f(dir / "run.conf");
    f << "# comment\nseed = 7\nhidden = 32   # trailing\nvariant = plain\nactivation = relu\n\nlr=0.05\n";
  }
  RunConfig c;
  c.load_file(dir / "run.conf");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train.model.hidden, 32u);
  EXPECT_EQ(c.train.model.variant, EncoderVariant::plain);
  EXPECT_EQ(c.train.model.activation, Activation::relu);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.05);
  fs::remove_all(dir);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  RunConfig c;
  try {
    c.set("hiden", "3");
    FAIL() << "accepted unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hiden"), std::string::npos);
  }
  EXPECT_THROW(c.set("hidden", "many"), ConfigError);
  EXPECT_THROW(c.set("variant", "deep"), ConfigError);
  EXPECT_THROW(c.set("ablate_relations", "R9"), ConfigError);
  const auto dir = scratch("badline");
  {
    std::ofstream f(dir / "run.conf");
    f << "seed 7\n";
  }
  EXPECT_THROW(c.load_file(dir / "run.conf"), ConfigError);
  fs::remove_all(dir);
}

TEST(RunConfig, ExplicitLambdasWinOverPresetInAnyOrder) {
  RunConfig a;
  a.set("lambda1", "0.5");
  a.set("preset", "appendixB3");
  EXPECT_EQ(a.train.weights.expert, 0.5);
  EXPECT_EQ(a.train.weights.consistency, appendix_b3_weights().consistency);
  RunConfig b;
  b.set("preset", "appendixB3");
  b.set("lambda1", "0.5");
  EXPECT_EQ(b.train.weights.expert, 0.5);
  RunConfig c;
  EXPECT_EQ(c.train.weights.expert, table8_weights().expert);
  EXPECT_THROW(c.set("preset", "table9"), ConfigError);
}

TEST(RunConfig, ResolvedListsEveryKeyAndRoundTrips) {
  RunConfig c;
  c.set("seed", "11");
  c.set("hidden", "24");
  c.set("ablate_relations", "R1,R3");
  const auto keys = config_keys();
  const auto resolved = c.resolved();
  ASSERT_EQ(resolved.size(), keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_EQ(resolved[i].first, keys[i]);
  const auto dir = scratch("resolved");
  c.write_resolved(dir / "config.resolved");
  RunConfig back;
  back.load_file(dir / "config.resolved");
  EXPECT_EQ(back.resolved(), resolved);
  EXPECT_EQ(value_of(back, "hidden"), "24");
  fs::remove_all(dir);
}

TEST(RunConfig, SeedPropagatesToEveryComponent) {
  RunConfig c;
  c.set("seed", "9");
  c.apply_seed();
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_EQ(c.synth.seed, 9u);
  EXPECT_EQ(c.planted.seed, 9u);
  EXPECT_EQ(c.vote.seed, 9u);
}

TEST(Cli, ModuleNames) {
  EXPECT_EQ(module_of(GraphError("x")), "hin-core");
  EXPECT_EQ(module_of(IngestError("x")), "ingest");
  EXPECT_EQ(module_of(num::NumericError("x")), "numkit");
  EXPECT_EQ(module_of(LossError("x")), "objectives");
  EXPECT_EQ(module_of(TrainError("x")), "trainer");
  EXPECT_EQ(module_of(AnalysisError("x")), "analysis");
  EXPECT_EQ(module_of(vote::VoteError("x")), "vote-downstream");
  EXPECT_EQ(module_of(ConfigError("x")), "cli");
}

TEST(Cli, GradcheckCommandSucceeds) {
  const auto dir = scratch("gradcheck");
  EXPECT_EQ(run({"gradcheck", "--out", dir.string(), "--quiet"}), 0);
  EXPECT_TRUE(fs::exists(dir / "gradcheck.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.resolved"));
  fs::remove_all(dir);
}

TEST(Cli, SchemaViolationReportsOneErrorLine) {
  const auto dir = scratch("schema");
  {
    std::ofstream n(dir / "nodes.csv");
    n << "id,kind,name\n0,legislator,A\n1,state,S\n";
    std::ofstream e(dir / "edges.csv");
    e << "src,dst,relation\n0,1,R1\n";
  }
  testing::internal::CaptureStderr();
  const int code = run({"validate-graph", "--nodes", (dir / "nodes.csv").string(), "--edges",
                        (dir / "edges.csv").string(), "--out", (dir / "out").string(), "--quiet"});
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 1);
  EXPECT_EQ(err.rfind("error: ", 0), 0u) << err;
  EXPECT_NE(err.find("R1"), std::string::npos) << err;
  EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1) << err;
  fs::remove_all(dir);
}

TEST(Cli, UnknownSetKeyFailsCleanly) {
  const auto dir = scratch("unknown");
  testing::internal::CaptureStderr();
  const int code = run({"gradcheck", "--set", "bogus=1", "--out", dir.string()});
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 1);
  EXPECT_NE(err.find("error: cli: unknown key 'bogus'"), std::string::npos) << err;
  EXPECT_EQ(run({"no-such-command"}), 1);
  fs::remove_all(dir);
}

TEST(Cli, SynthThenTrainIsReproducible) {
  const auto dir = scratch("train");
  const auto data = dir / "data";
  ASSERT_EQ(run({"synth", "--out", data.string(), "--seed", "3", "--quiet", "--set", "synth_actors=40", "synth_context=6",
                 "synth_d_in=8"}),
            0);
  for (const char* f : {"nodes.csv", "edges.csv", "features.csv", "scores.csv"}) EXPECT_TRUE(fs::exists(data / f)) << f;
  const std::vector<std::string> common{"--nodes", (data / "nodes.csv").string(), "--edges", (data / "edges.csv").string(),
                                        "--features", (data / "features.csv").string(), "--scores",
                                        (data / "scores.csv").string(), "--seed", "3", "--quiet", "--set", "hidden=6",
                                        "max_epochs=3", "batch_size=16"};
  std::vector<std::string> a{"train", "--out", (dir / "a").string()};
  std::vector<std::string> b{"train", "--out", (dir / "b").string()};
  a.insert(a.end(), common.begin(), common.end());
  b.insert(b.end(), common.begin(), common.end());
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "a" / "training_log.csv"), slurp(dir / "b" / "training_log.csv"));
  EXPECT_FALSE(slurp(dir / "a" / "metrics.csv").empty());
  fs::remove_all(dir);
}

TEST(GradcheckFixture, SmallRelativeError) {
  const auto r = model_gradcheck(0);
  EXPECT_LT(r.max_relative_error, 1e-4);
  EXPECT_GT(r.coordinates, 0u);
}
