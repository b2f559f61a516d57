#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;
using namespace testing_support;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome cli(const std::string& args) {
  const fs::path dir = scratch_dir("cli-capture");
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + AGIBENCH_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = read_text(out);
  o.err = read_text(err);
  return o;
}

std::string config(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  write_text(p, body);
  return "\"" + p.string() + "\"";
}

const std::string kSmall =
    "synthetic.participants = 6\n"
    "synthetic.days = 20\n"
    "synthetic.seed = 2\n"
    "models = logistic, gbdt-hist\n"
    "imbalance = class-weights\n"
    "split = stratified-5-fold\n"
    "seed = 4\n"
    "explain.instances = 30\n"
    "explain.background = 20\n"
    "explain.permutations = 16\n"
    "explain.repeats = 2\n"
    "output_dir = out\n";

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("validate accepts a minimal config") {
  const fs::path dir = scratch_dir("cli-validate");
  const auto o = cli("validate " + config(dir, "ok.conf", "synthetic.participants = 3\nmodels = logistic\noutput_dir = out\n"));
  CHECK(o.code == 0);
  CHECK(o.out.find("valid:") != std::string::npos);
  const auto shipped = cli("validate \"" + std::string(AGIBENCH_SOURCE_DIR) + "/configs/quickstart.conf\"");
  CHECK(shipped.code == 0);
}

TEST_CASE("config errors exit 2 with a message naming the key") {
  const fs::path dir = scratch_dir("cli-bad");
  auto o = cli("validate " + config(dir, "both.conf",
                                    "synthetic.participants = 3\noutput_dir = out\nmodels = logistic\nimbalance = smote, class-weights\n"));
  CHECK(o.code == 2);
  CHECK(o.err.find("imbalance") != std::string::npos);
  CHECK(o.err.find("mutually exclusive") != std::string::npos);

  o = cli("validate " + config(dir, "res.conf", "synthetic.participants = 3\noutput_dir = out\nmodels = logistic\nresolution_hours = 8\n"));
  CHECK(o.code == 2);
  CHECK(o.err.find("resolution") != std::string::npos);

  o = cli("validate " + config(dir, "key.conf", "synthetic.participants = 3\noutput_dir = out\nmodels = logistic\nmodles = gbdt-hist\n"));
  CHECK(o.code == 2);
  CHECK(o.err.find("modles") != std::string::npos);

  o = cli("validate " + config(dir, "model.conf", "synthetic.participants = 3\noutput_dir = out\nmodels = random-forest\n"));
  CHECK(o.code == 2);

  o = cli("validate \"" + (dir / "absent.conf").string() + "\"");
  CHECK(o.code == 2);

  o = cli("frobnicate");
  CHECK(o.code == 2);
}

TEST_CASE("missing data files exit 3") {
  const fs::path dir = scratch_dir("cli-data");
  const auto o = cli("run " + config(dir, "d.conf",
                                     "data.activity = nowhere/activity.csv\n"
                                     "data.physiology = nowhere/physiology.csv\n"
                                     "data.labels = nowhere/labels.csv\n"
                                     "models = logistic\n"
                                     "output_dir = out\n"));
  CHECK(o.code == 3);
  CHECK(o.err.find("activity.csv") != std::string::npos);
}

TEST_CASE("synth writes a cohort that run can read back") {
  const fs::path dir = scratch_dir("cli-synth");
  auto o = cli("synth --out \"" + (dir / "cohort").string() + "\" --participants 5 --days 20 --seed 3");
  REQUIRE(o.code == 0);
  for (const char* f : {"activity.csv", "physiology.csv", "labels.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "cohort" / f));
  }
  o = cli("summarize " + config(dir, "s.conf",
                                "data.activity = cohort/activity.csv\n"
                                "data.physiology = cohort/physiology.csv\n"
                                "data.labels = cohort/labels.csv\n"
                                "models = logistic\n"
                                     "output_dir = out\n"));
  CHECK(o.code == 0);
  CHECK(o.out.find("\"participants\": 5") != std::string::npos);
}

TEST_CASE("run then explain writes the expected files") {
  const fs::path dir = scratch_dir("cli-run");
  const auto cfg = config(dir, "small.conf", kSmall);
  auto o = cli("run " + cfg);
  REQUIRE(o.code == 0);
  for (const char* f : {"fold-metrics.csv", "summary.txt", "manifest.json", "artifact-logistic.json",
                        "artifact-gbdt-hist.json"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  CHECK(o.out.find("gbdt-hist") != std::string::npos);

  const std::string model = " --model \"" + (dir / "out" / "artifact-gbdt-hist.json").string() + "\"";
  o = cli("explain " + cfg + model);
  REQUIRE(o.code == 0);
  const auto summary = read_text(dir / "out" / "explain" / "shap-summary.csv");
  CHECK(line_count(summary) == 1 + 24);
  CHECK(fs::exists(dir / "out" / "explain" / "attribution.json"));
  CHECK(fs::exists(dir / "out" / "explain" / "permutation-importance.csv"));

  o = cli("explain " + cfg + model + " --top-m 1");
  REQUIRE(o.code == 0);
  CHECK(line_count(read_text(dir / "out" / "explain" / "shap-summary.csv")) == 2);

  o = cli("explain " + cfg + " --model \"" + (dir / "nothing.json").string() + "\"");
  CHECK(o.code != 0);
}
