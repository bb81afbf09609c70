#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairprobe-cli-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + FAIRPROBE_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  json j;
  in >> j;
  return j;
}

void write_audit_fixture(const TempDir& dir) {
  write_text(dir.file("taxonomy.json"),
             R"({"attribute_name":"attr","segments":["alpha","beta"]})");
  write_text(dir.file("labels.csv"),
             "image_id,identity_id,true_segment\n"
             "a,id1,alpha\n"
             "b,id1,alpha\n"
             "c,id2,beta\n"
             "d,id2,beta\n");
  write_text(dir.file("preds.csv"),
             "image_id,identity_id,predicted_segment\n"
             "a,id1,alpha\n"
             "b,id1,beta\n"
             "c,id2,beta\n"
             "d,id2,beta\n");
}

}  // namespace

TEST_CASE("audit subcommand computes hand-countable metrics") {
  TempDir dir;
  write_audit_fixture(dir);
  const std::string out = dir.file("report.json");
  const int rc = run_cli("audit --taxonomy " + dir.file("taxonomy.json") +
                         " --labels " + dir.file("labels.csv") + " --preds " +
                         dir.file("preds.csv") + " --out " + out);
  REQUIRE(rc == 0);
  const json report = read_json(out);
  // 3 of 4 correct
  CHECK(report["accuracy"]["micro_pct"].get<double>() == doctest::Approx(75.0));
  // per-group: alpha 1/2, beta 2/2 -> DoB = population std of (50, 100) = 25
  CHECK(report["fairness"]["dob_pct"].get<double>() == doctest::Approx(25.0));
  CHECK(report["robustness"]["identities_used"].get<int>() == 2);
  CHECK(report.contains("input_digests"));
}

TEST_CASE("audit output is byte-identical across repeated runs") {
  TempDir dir;
  write_audit_fixture(dir);
  const std::string out1 = dir.file("r1.json");
  const std::string out2 = dir.file("r2.json");
  const std::string base = "audit --taxonomy " + dir.file("taxonomy.json") +
                           " --labels " + dir.file("labels.csv") +
                           " --preds " + dir.file("preds.csv") + " --out ";
  REQUIRE(run_cli(base + out1) == 0);
  REQUIRE(run_cli(base + out2) == 0);
  CHECK(read_bytes(out1) == read_bytes(out2));
}

TEST_CASE("simulate subcommand verifies the identity-confusion model") {
  TempDir dir;
  write_text(dir.file("config.json"), R"({
    "model": {
      "pi": [0.5, 0.5],
      "p": [0.9, 0.7],
      "confusion": {"entries": [[1.0, 0.0], [0.0, 1.0]]}
    },
    "identities_per_run": 5000,
    "replications": 8,
    "seed": 17
  })");
  const std::string out = dir.file("sim.json");
  const int rc = run_cli("simulate --config " + dir.file("config.json") +
                         " --out " + out + " --prop 1");
  REQUIRE(rc == 0);
  const json report = read_json(out);
  CHECK(report["verdicts"]["prop1_ok"].get<bool>());
  CHECK(report["verdicts"]["bound_ok"].get<bool>());
  CHECK(report["population_m"][0].get<double>() == doctest::Approx(0.9));

  SUBCASE("repeat run is byte-identical") {
    const std::string out2 = dir.file("sim2.json");
    REQUIRE(run_cli("simulate --config " + dir.file("config.json") +
                    " --out " + out2 + " --prop 1") == 0);
    CHECK(read_bytes(out) == read_bytes(out2));
  }
}

TEST_CASE("missing required flag exits with code 2") {
  CHECK(run_cli("audit --labels nowhere.csv") == 2);
}

TEST_CASE("domain errors exit with code 2") {
  TempDir dir;
  write_audit_fixture(dir);
  write_text(dir.file("bad_preds.csv"),
             "image_id,identity_id,predicted_segment\n"
             "zzz,idX,alpha\n");
  const int rc = run_cli("audit --taxonomy " + dir.file("taxonomy.json") +
                         " --labels " + dir.file("labels.csv") + " --preds " +
                         dir.file("bad_preds.csv") + " --out " +
                         dir.file("never.json"));
  CHECK(rc == 2);
}

TEST_CASE("correct subcommand recovers p from population-exact inputs") {
  TempDir dir;
  // hand model: m = (0.88, 0.72), tau = (0.5, 0.5). Feed trials whose
  // plug-in estimate hits those values exactly: 100 trials, 50 per group,
  // 44 and 36 successes.
  std::string trials = "identity_id,y,g_hat\n";
  for (int g = 0; g < 2; ++g) {
    const int successes = g == 0 ? 44 : 36;
    for (int i = 0; i < 50; ++i)
      trials += "id" + std::to_string(g * 50 + i) + "," +
                (i < successes ? "1" : "0") + "," + std::to_string(g) + "\n";
  }
  write_text(dir.file("trials.csv"), trials);
  write_text(dir.file("confusion.json"),
             R"({"entries": [[0.9, 0.1], [0.1, 0.9]]})");
  write_text(dir.file("pi.json"), R"({"pi": [0.5, 0.5]})");
  const std::string out = dir.file("corrected.json");
  const int rc = run_cli("correct --trials " + dir.file("trials.csv") +
                         " --confusion " + dir.file("confusion.json") +
                         " --pi " + dir.file("pi.json") + " --out " + out);
  REQUIRE(rc == 0);
  const json result = read_json(out);
  CHECK(result["corrected_p"][0].get<double>() == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(result["corrected_p"][1].get<double>() == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(result["inflation_factor"].get<double>() ==
        doctest::Approx(1.5625).epsilon(1e-9));
}
