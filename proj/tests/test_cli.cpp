// Golden-file integration tests for the command-line tool. The binary path
// arrives via the CONVSCALE_CLI environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

std::string cli_path() {
  const char* env = std::getenv("CONVSCALE_CLI");
  REQUIRE_MESSAGE(env != nullptr, "CONVSCALE_CLI must point at the built binary");
  return env;
}

RunResult run(const std::string& args) {
  const std::string command = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buffer;
  size_t n;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    result.output.append(buffer.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path specs_dir() { return fs::path(CONVSCALE_SOURCE_DIR) / "specs"; }

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "convscale-cli-tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generate matches the golden spec document") {
  const RunResult r = run("generate efficientnet-b0");
  CHECK(r.exit_code == 0);
  CHECK(r.output == read_file(specs_dir() / "efficientnet-b0.json"));
}

TEST_CASE("generate writes to a file and profile reads it back") {
  const fs::path spec = temp_dir() / "b0.json";
  CHECK(run("generate efficientnet-b0 -o " + spec.string()).exit_code == 0);

  const RunResult text = run("profile " + spec.string());
  CHECK(text.exit_code == 0);
  CHECK(text.output.find("total params: 5288548") != std::string::npos);
  CHECK(text.output.find("total flops (MACs): 385814752") != std::string::npos);

  const RunResult csv1 = run("profile " + spec.string() + " --format csv");
  const RunResult csv2 = run("profile " + spec.string() + " --format csv");
  CHECK(csv1.exit_code == 0);
  CHECK(csv1.output == csv2.output);  // machine output is byte-stable
  CHECK(csv1.output.rfind("stage,layer,op,", 0) == 0);
}

TEST_CASE("scale --d 4 then profile lands on the frozen depth-scaled cost") {
  const fs::path spec = temp_dir() / "b0d4-src.json";
  const fs::path scaled = temp_dir() / "b0d4.json";
  REQUIRE(run("generate efficientnet-b0 -o " + spec.string()).exit_code == 0);
  REQUIRE(run("scale " + spec.string() + " --d 4 -o " + scaled.string()).exit_code == 0);

  const RunResult doc = run("profile " + scaled.string() + " --format doc");
  CHECK(doc.exit_code == 0);
  const auto j = nlohmann::json::parse(doc.output);
  CHECK(j.at("total_flops").get<long long>() == 1'575'132'640);
}

TEST_CASE("scale compound flags follow the coefficient curve") {
  const fs::path spec = temp_dir() / "b0c-src.json";
  const fs::path scaled = temp_dir() / "b0c.json";
  REQUIRE(run("generate efficientnet-b0 -o " + spec.string()).exit_code == 0);
  const RunResult r = run("scale " + spec.string() +
                          " --alpha 1.2 --beta 1.1 --gamma 1.15 --phi 1 -o " +
                          scaled.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(scaled));
  CHECK(j.at("input_resolution").get<int>() == 258);
}

TEST_CASE("scale rejects mixing triple and compound flags with a usage error") {
  const fs::path spec = temp_dir() / "b0mix.json";
  REQUIRE(run("generate efficientnet-b0 -o " + spec.string()).exit_code == 0);
  CHECK(run("scale " + spec.string() + " --d 2 --alpha 1.2").exit_code == 2);
  CHECK(run("scale " + spec.string()).exit_code == 2);
  CHECK(run("scale " + spec.string() + " --d 2 --depth-rounding sideways").exit_code == 2);
}

TEST_CASE("verify --dump-trace prints the trace table before the verdict") {
  const fs::path spec = temp_dir() / "b0trace.json";
  REQUIRE(run("generate mobilenet-v1 -o " + spec.string()).exit_code == 0);
  const RunResult r = run("verify " + spec.string() + " --dump-trace");
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("layer,in_h,in_w,in_c,", 0) == 0);
  CHECK(r.output.find("\nequal\n") != std::string::npos);
}

TEST_CASE("profile on a missing file exits 1 with a diagnostic") {
  const RunResult r = run("profile missing.spec");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("file not found") != std::string::npos);
}

TEST_CASE("profile on a malformed document names the field") {
  const fs::path bad = temp_dir() / "bad.json";
  std::ofstream(bad) << R"({"name":"x","input_resolution":8,"input_channels":3,)"
                     << R"("num_classes":2})";
  const RunResult r = run("profile " + bad.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("$.stages") != std::string::npos);
}

TEST_CASE("verify reports exact analyzer/interpreter agreement") {
  for (const char* name : {"efficientnet-b0", "mobilenet-v2", "resnet-50"}) {
    const fs::path spec = temp_dir() / (std::string(name) + ".json");
    REQUIRE(run(std::string("generate ") + name + " -o " + spec.string()).exit_code == 0);
    const RunResult r = run("verify " + spec.string());
    CAPTURE(name);
    CHECK(r.exit_code == 0);
    CHECK(r.output == "equal\n");
  }
}

TEST_CASE("zoo list enumerates the built-in networks") {
  const RunResult r = run("zoo list");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("efficientnet-b0\n") != std::string::npos);
  CHECK(r.output.find("efficientnet-b7\n") != std::string::npos);
  CHECK(r.output.find("mobilenet-v1\n") != std::string::npos);
  CHECK(r.output.find("resnet-50\n") != std::string::npos);
}

TEST_CASE("search runs from a config document and recovers the peak") {
  const fs::path config = temp_dir() / "search.json";
  std::ofstream(config) << R"({
    "alpha": {"lo": 1.0, "hi": 1.5, "step": 0.05},
    "beta":  {"lo": 1.0, "hi": 1.3, "step": 0.05},
    "gamma": {"lo": 1.0, "hi": 1.3, "step": 0.05},
    "constraint_tolerance": 0.1,
    "phi_for_eval": 1.0,
    "evaluator": {"name": "synthetic-peak", "alpha": 1.2, "beta": 1.1, "gamma": 1.15}
  })";
  const RunResult parallel = run("search " + config.string());
  CHECK(parallel.exit_code == 0);
  CHECK(parallel.output.find("best: alpha=1.200000 beta=1.100000 gamma=1.150000") !=
        std::string::npos);
  const RunResult serial = run("search " + config.string() + " --serial");
  CHECK(serial.output == parallel.output);
}

TEST_CASE("sweep emits the scaling-methods table") {
  const fs::path spec = temp_dir() / "b0sweep.json";
  const fs::path config = temp_dir() / "sweep.json";
  REQUIRE(run("generate efficientnet-b0 -o " + spec.string()).exit_code == 0);
  std::ofstream(config)
      << R"({"ratios":[4.0],"configs":[{"alpha":1.4,"beta":1.2,"gamma":1.3,"phi":1.0}]})";
  const RunResult r = run("sweep " + spec.string() + " " + config.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("method,d,w,r,params,flops,score", 0) == 0);
  CHECK(r.output.find("compound") != std::string::npos);
  CHECK(r.output.find("1800091280") != std::string::npos);
}

TEST_CASE("calibrate-family re-derives the checked-in constants") {
  const RunResult r = run("calibrate-family");
  CHECK(r.exit_code == 0);
  const std::string expected = read_file(fs::path(CONVSCALE_SOURCE_DIR) / "src" /
                                         "family_constants.inc");
  // every emitted row appears verbatim in the versioned constants file
  std::istringstream lines(r.output);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("{\"", 0) != 0) continue;
    CAPTURE(line);
    CHECK(expected.find(line) != std::string::npos);
    ++rows;
  }
  CHECK(rows == 7);
}

TEST_CASE("reproduce-tables output is byte-stable") {
  const RunResult a = run("reproduce-tables");
  const RunResult b = run("reproduce-tables");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("# family costs") != std::string::npos);
  CHECK(a.output.find("# scaled baselines") != std::string::npos);
  CHECK(a.output.find("# b0 scaling methods") != std::string::npos);
  CHECK(a.output.find("efficientnet-b7,66839006,37848191472") != std::string::npos);
}
