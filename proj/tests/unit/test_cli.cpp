#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cli/csv_writer.hpp"
#include "eelstm/cli.hpp"
#include "eelstm/errors.hpp"

using namespace eelstm;
using namespace eelstm::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(system:
  name: logistic
  stride: 1
dataset:
  input_steps: 2
  sizes: [160, 40, 60]
models:
  - {name: bench, kind: vanilla, h: 2, d: 1}
  - name: tn
    kind: tensorized
    h: 2
    d: 1
    tn: {kind: mera, L: 4, P: 2, dims: [2, 2]}
training:
  epochs: 2
  batch_size: 32
  replicates: 2
evaluation:
  horizons: [1, 2]
  alphas: [1, 2]
seed: 3
)";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("eelstm_unit_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spit(const std::string& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("CSV writer") {
  TempDir dir("csv");
  {
    CsvWriter w(dir / "a.csv", {"name", "value", "n"});
    w.cell("x").cell(0.5).cell(std::size_t{3});
    w.end_row();
    w.cell("y");
    CHECK_THROWS_AS(w.end_row(), ShapeError);
  }
  CHECK(slurp(dir / "a.csv").rfind("name,value,n\nx,0.5,3\n", 0) == 0);
  CHECK_THROWS_AS(CsvWriter(dir / "missing/b.csv", {"a"}), IoError);
  write_text_file(dir / "t.txt", "hello\n");
  CHECK(slurp(dir / "t.txt") == "hello\n");
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(kSmall);
  REQUIRE(c.system.has_value());
  CHECK(c.system->name == "logistic");
  CHECK(c.dataset.input_steps == 2);
  CHECK(c.dataset.sizes.train == 160);
  REQUIRE(c.models.size() == 2);
  CHECK(c.models[1].spec.kind == CellKind::Tensorized);
  CHECK(c.models[1].spec.tn.dims == std::vector<std::size_t>{2, 2});
  CHECK(c.training.replicates == 2);
  CHECK(c.horizons == std::vector<std::size_t>{1, 2});
  CHECK(c.seed == 3);
  CHECK(replicate_seed(c, 0) != replicate_seed(c, 1));
  CHECK(train_config(c, c.models[0].spec, 7).seed == 7);

  CHECK(config_hash(c) == config_hash(parse_config(kSmall)));
  CHECK(config_hash(c).size() == 16);
  ExperimentConfig moved = c;
  moved.output = "elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  moved.seed = 4;
  CHECK(config_hash(moved) != config_hash(c));
}

TEST_CASE("config errors list every problem") {
  const std::string msg = config_error(R"(system: {name: lorenzz, dt: -1}
dataset: {input_steps: 0, sizes: [1, 2]}
models:
  - {kind: vanila, h: 2, d: 1}
training: {epochs: 0, colour: red}
)");
  CHECK(msg.find("system.name") != std::string::npos);
  CHECK(msg.find("system.dt") != std::string::npos);
  CHECK(msg.find("dataset.input_steps") != std::string::npos);
  CHECK(msg.find("dataset.sizes") != std::string::npos);
  CHECK(msg.find("models[0].kind") != std::string::npos);
  CHECK(msg.find("training.epochs") != std::string::npos);
  CHECK(msg.find("training.colour") != std::string::npos);
  CHECK(msg.find("problems") != std::string::npos);

  CHECK_FALSE(config_error("models: [{kind: vanilla, h: 2, d: 1}]\n").empty());
  CHECK_FALSE(config_error("[1, 2").empty());
  CHECK_FALSE(config_error(std::string(kSmall) + "extra: 1\n").empty());
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : fs::directory_iterator(EELSTM_CONFIG_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ShapeError("x")) == 2);
  CHECK(exit_code_for(NumericError("x")) == 3);
  CHECK(exit_code_for(DomainError("x")) == 3);
  CHECK(exit_code_for(IoError("x")) == 4);
  CHECK(exit_code_for(ParseError("x")) == 4);

  TempDir dir("exit");
  CHECK(run({}) == 2);
  CHECK(run({"bogus"}) == 2);
  CHECK(run({"generate", "--config", dir / "absent.yaml"}) == 4);
  spit(dir / "bad.yaml", "models: [{kind: nope}]\n");
  CHECK(run({"generate", "--config", dir / "bad.yaml"}) == 2);
  CHECK(run({"lyapunov", "logistic", "--set", "r=12", "--n", "10000"}) == 3);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("commands write deterministic artifacts") {
  TempDir dir("cmd");
  spit(dir / "small.yaml", kSmall);
  const std::string cfg = dir / "small.yaml";
  for (const char* out : {"a", "b"}) {
    const std::string o = dir / out;
    REQUIRE(run({"generate", "--config", cfg, "--out", o}) == 0);
    REQUIRE(run({"train", "--config", cfg, "--out", o}) == 0);
    REQUIRE(run({"eval", "--config", cfg, "--out", o}) == 0);
    REQUIRE(run({"entropy", "--config", cfg, "--out", o}) == 0);
    REQUIRE(run({"lyapunov", "logistic", "--n", "10000", "--out", o}) == 0);
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "a")) {
    ++files;
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(dir.path / "b" / e.path().filename()));
  }
  CHECK(files >= 10);
  for (const char* name : {"dataset.csv", "dataset.json", "rmse_summary.csv", "bench_s3_curve.csv",
                           "eval_rmse.csv", "entropy.csv", "entropy_fit.csv", "lyapunov.csv"}) {
    CAPTURE(std::string(name));
    CHECK(fs::exists(dir.path / "a" / name));
  }
  const std::string summary = slurp(dir.path / "a" / "rmse_summary.csv");
  CHECK(summary.rfind("model,kind,seed,parameters,best_epoch,val_rmse,test_rmse,config_hash\n", 0) == 0);
  CHECK(summary.find("\nbench,vanilla,") != std::string::npos);

  REQUIRE(run({"generate", "--config", cfg, "--out", dir / "c", "--seed", "99"}) == 0);
  CHECK(slurp(dir.path / "c" / "dataset.json") != slurp(dir.path / "a" / "dataset.json"));
}
