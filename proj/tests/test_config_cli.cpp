#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "d2ibc/d2ibc.hpp"

using namespace d2ibc;
namespace fs = std::filesystem;

namespace {

ErrorCode config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a config error for:\n" << text;
  return ErrorCode::Parse;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(D2IBC_TOOL) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return -1;
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  const int status = pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::current_path() / ("cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int tool(const std::string& cmd, const fs::path& config, const std::string& extra = "",
           std::string* out = nullptr) {
    return run_tool(cmd + " --config " + config.string() + " " + extra, out);
  }

  fs::path dir_;
};

// exact base model of the default residue plant, first-order PI
const char* kScenario = R"(seed = 7
[plant]
xi_bar = 0.01
[dataset]
length = 400
noise = true
[model]
use_plant_base = true
[sim]
T = 200
reference = "sinusoid"
amplitude = [0.5]
r_bar = 0.5
xi_bar = 0.01
[stability]
lp_samples = 300
check_trace = true
)";

}  // namespace

TEST(ParseConfig, Defaults) {
  RunConfig c = parse_config("");
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.plant_name, "model-plus-residue");
  EXPECT_EQ(c.T, 200);
  EXPECT_EQ(c.grid_points, 33);
  EXPECT_EQ(c.lp_samples, 2000);
  EXPECT_EQ(c.pid_mode, LinearInputMode::Replay);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.inversion(1, 1).zeta[0], 1.0);
  EXPECT_EQ(c.reference_model(1).poles[0], 0.5);
}

TEST(ParseConfig, ReadsValuesAndResolvesPaths) {
  RunConfig c = parse_config(R"(seed = 42
[plant]
name = "mimo-poly"
u_bar = 2.0
[dataset]
path = "runs/d.csv"
kind = "multisine"
[inversion]
mu = [0.1, 0.2]
[sim]
reference = "table"
table = [[0, 0.1, 0.2], [10, 0.0, -0.1]]
)",
                             "/tmp/base");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.plant().n_u, 2);
  EXPECT_EQ(c.plant().u_bar, 2.0);
  EXPECT_EQ(c.dataset_path, "/tmp/base/runs/d.csv");
  EXPECT_EQ(c.excitation.kind, ExcitationKind::Multisine);
  EXPECT_EQ(c.inversion(2, 2).mu[1], 0.2);
  SimConfig s = c.sim(2);
  ASSERT_EQ(s.reference.table.size(), 2u);
  EXPECT_EQ(s.reference.table[1].second[1], -0.1);
  EXPECT_NO_THROW(c.validate());
}

TEST(ParseConfig, RejectsUnknownAndMalformed) {
  EXPECT_EQ(config_error("sed = 1\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("[plant]\nnmae = \"x\"\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("[plnat]\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("seed = -1\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("[sim]\nT = \"long\"\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("[sim]\nreference = \"ramp\"\n"), ErrorCode::Config);
  EXPECT_EQ(config_error("seed = \n"), ErrorCode::Config);
}

TEST(ParseConfig, CrossSectionChecks) {
  EXPECT_THROW(parse_config("[inversion]\nzeta = [1.0, 1.0]\n").validate(), Error);
  EXPECT_THROW(parse_config("[reference_model]\npoles = [1.5]\n").validate(), Error);
  EXPECT_THROW(parse_config("[sim]\nxi_bar = 0.1\n").validate(), Error);  // plant xi_bar is 0
  EXPECT_THROW(parse_config("[plant]\nname = \"scalar-linear\"\n[model]\nuse_plant_base = true\n").validate(), Error);
  try {
    parse_config("[dataset]\namplitude = 2.0\n").validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Bound);
    EXPECT_NE(std::string(e.what()).find("u_bar"), std::string::npos);
  }
}

TEST(ExitStatus, Mapping) {
  EXPECT_EQ(exit_status_for(ErrorCode::PlantDivergence), kExitDivergence);
  EXPECT_EQ(exit_status_for(ErrorCode::Config), kExitError);
  EXPECT_EQ(kExitOk, 0);
  EXPECT_EQ(kExitAssumptions, 3);
  EXPECT_EQ(kExitBoundViolated, 4);
}

TEST_F(Workspace, HelpListsEveryKeyRead) {
  for (const char* cmd : {"collect", "identify", "tune", "simulate", "certify"}) {
    std::string out;
    EXPECT_EQ(run_tool(std::string(cmd) + " --help", &out), 0);
    int listed = 0;
    for (const auto& k : config_keys()) {
      if ((std::string(",") + k.commands + ",").find(std::string(",") + cmd + ",") == std::string::npos) continue;
      const std::string name = k.section[0] ? std::string("[") + k.section + "] " + k.key : k.key;
      EXPECT_NE(out.find(name + " ("), std::string::npos) << cmd << " --help misses " << name;
      ++listed;
    }
    EXPECT_GT(listed, 0);
  }
}

TEST_F(Workspace, MissingConfigAndUnknownKey) {
  EXPECT_NE(run_tool("collect --config " + (dir_ / "none.toml").string()), 0);
  std::string out;
  EXPECT_EQ(tool("collect", write("bad.toml", "[plant]\nnmae = 1\n"), "", &out), 1);
  EXPECT_NE(out.find("nmae"), std::string::npos) << out;
}

TEST_F(Workspace, CollectBoundErrorAndDeterminism) {
  std::string out;
  EXPECT_EQ(tool("collect", write("amp.toml", "[dataset]\namplitude = 1.5\n"), "--out " + (dir_ / "x.csv").string(), &out), 1);
  EXPECT_NE(out.find("u_bar"), std::string::npos) << out;

  const fs::path cfg = write("c.toml", "seed = 3\n[plant]\nxi_bar = 0.05\n[dataset]\nlength = 50\nnoise = true\n");
  ASSERT_EQ(tool("collect", cfg, "--out " + (dir_ / "a.csv").string()), 0);
  ASSERT_EQ(tool("collect", cfg, "--out " + (dir_ / "b.csv").string()), 0);
  ASSERT_EQ(tool("collect", cfg, "--seed 4 --out " + (dir_ / "c.csv").string()), 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "c.csv"));
  std::istringstream in(slurp(dir_ / "a.csv"));
  EXPECT_EQ(parse_csv(in, "a.csv").L(), 50);
}

TEST_F(Workspace, PipelineCertifiesAndFlagsBadTrace) {
  const fs::path cfg = write("run.toml", kScenario);
  ASSERT_EQ(tool("collect", cfg), 0);
  ASSERT_EQ(tool("identify", cfg), 0);
  ASSERT_EQ(tool("tune", cfg), 0);
  ASSERT_EQ(tool("simulate", cfg), 0);
  std::string out;
  ASSERT_EQ(tool("certify", cfg, "", &out), 0) << out;
  const auto cert = nlohmann::json::parse(slurp(dir_ / "certificate.json"));
  EXPECT_TRUE(cert["assumptions"]["verdict"].get<bool>());
  EXPECT_TRUE(cert["bound_check"]["satisfied"].get<bool>());
  const auto summary = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_FALSE(summary["diverged"].get<bool>());

  // push one error sample past any sane bound
  std::istringstream in(slurp(dir_ / "trace.csv"));
  std::ostringstream bad;
  std::string line;
  for (int k = 0; std::getline(in, line); ++k) {
    if (k == 50) line = line.substr(0, line.rfind(',')) + ",1000";
    bad << line << "\n";
  }
  write("bad_trace.csv", bad.str());
  EXPECT_EQ(tool("certify", cfg, "--trace " + (dir_ / "bad_trace.csv").string() + " --out " + (dir_ / "bad.json").string(), &out), 4) << out;
  EXPECT_NE(out.find("bound violated"), std::string::npos) << out;
}

TEST_F(Workspace, AssumptionFailureExitsThree) {
  // stable pole 0.7, but the residue slope alone is 1.5
  const fs::path cfg = write("rough.toml", R"([plant]
a = -0.8
c_y = 1.5
[model]
use_plant_base = true
[dataset]
length = 60
amplitude = 0.05
[sim]
r_bar = 0.5
[stability]
y_bar = 2.0
lp_samples = 50
)");
  ASSERT_EQ(tool("identify", cfg), 0);
  ASSERT_EQ(tool("collect", cfg), 0);
  ASSERT_EQ(tool("tune", cfg), 0);
  std::string out;
  EXPECT_EQ(tool("certify", cfg, "", &out), 3) << out;
  EXPECT_NE(out.find("model-accuracy"), std::string::npos) << out;
  const auto cert = nlohmann::json::parse(slurp(dir_ / "certificate.json"));
  EXPECT_FALSE(cert["assumptions"]["a2_model_accuracy"]["holds"].get<bool>());
}

TEST_F(Workspace, DivergenceExitsTwoWithPartialTrace) {
  // base model y+ = 1.5 y + u under a plant with an extra 0.5 y: saturated
  // inputs cannot hold y0 = 5
  const fs::path cfg = write("blow.toml", R"([plant]
a = 1.5
c_y = 0.5
[model]
use_plant_base = true
[sim]
y0 = [5.0]
r_bar = 5.0
T = 200
)");
  ASSERT_EQ(tool("identify", cfg), 0);
  write("pid.json", to_json(PidGains::zero(1, 1, 1)).dump());
  std::string out;
  EXPECT_EQ(tool("simulate", cfg, "", &out), 2) << out;
  const auto summary = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_TRUE(summary["diverged"].get<bool>());
  std::istringstream in(slurp(dir_ / "trace.csv"));
  const SimulationTrace tr = trace_from_csv(in);
  EXPECT_GT(tr.T(), 1);
  EXPECT_LT(tr.T(), 200);
}

TEST_F(Workspace, IdentifyRidgeOverrideAndSingularFit) {
  const fs::path cfg = write("id.toml", "[plant]\nname = \"scalar-linear\"\n[dataset]\nlength = 80\n");
  ASSERT_EQ(tool("collect", cfg), 0);
  ASSERT_EQ(tool("identify", cfg, "--out " + (dir_ / "m0.json").string()), 0);
  ASSERT_EQ(tool("identify", cfg, "--ridge 10 --out " + (dir_ / "m1.json").string()), 0);
  const auto m0 = nlohmann::json::parse(slurp(dir_ / "m0.json"));
  const auto m1 = nlohmann::json::parse(slurp(dir_ / "m1.json"));
  EXPECT_NE(m0.dump(), m1.dump());

  write("flat.csv", "t,u1,y1\n0,0,0\n1,0,0\n2,0,0\n3,0,0\n4,0,0\n5,0,0\n");
  std::string out;
  EXPECT_EQ(tool("identify", cfg, "--data " + (dir_ / "flat.csv").string() + " --out " + (dir_ / "m2.json").string(), &out), 1) << out;
}
