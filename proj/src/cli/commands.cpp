#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "csv_writer.hpp"
#include "eelstm/cli.hpp"
#include "eelstm/errors.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSeriesFile = "dataset.csv";
constexpr const char* kSidecarFile = "dataset.json";

bool default_standardize(const ExperimentConfig& c) {
  if (c.dataset.standardize) return *c.dataset.standardize;
  if (c.system->name == "csv") return true;
  return make_system(parse_system_name(c.system->name), c.system->parameters).kind == SystemKind::Flow;
}

RawSeries apply_standardization(const RawSeries& s, const Standardization& st) {
  RawSeries out = s;
  const std::size_t d = s.dim();
  for (std::size_t t = 0; t < s.length(); ++t) {
    for (std::size_t j = 0; j < d; ++j) out.data(t, j) = (s.data(t, j) - st.mean[j]) / st.std[j];
  }
  return out;
}

WindowedDataset map_dataset(const ExperimentConfig& c, const SystemDef& sys) {
  const SystemBlock& b = *c.system;
  const std::size_t steps = c.dataset.input_steps;
  const auto& z = c.dataset.sizes;
  const auto orbit = [&](const std::vector<double>& ic, std::size_t windows) {
    const std::size_t rows = windows + steps;
    return resample(iterate_map(sys, ic, b.stride * (rows - 1)), b.stride);
  };
  RawSeries train = orbit(b.train_ic.value_or(sys.train_ic), z.train + z.validation);
  RawSeries test = orbit(b.test_ic.value_or(sys.test_ic), z.test);
  Standardization st;
  const bool standardized = default_standardize(c);
  if (standardized) {
    st = standardize(train).second;
    train = apply_standardization(train, st);
    test = apply_standardization(test, st);
  }
  WindowedDataset ds = window_discrete(train, test, steps, c.seed);
  if (ds.validation.size() != z.validation) {
    throw ConfigError("dataset.sizes: validation must be " + std::to_string(ds.validation.size()) +
                      " for a pool of " + std::to_string(z.train + z.validation));
  }
  if (standardized) {
    ds.standardization = st;
    ds.raw_unit_errors = true;
  }
  return ds;
}

WindowedDataset finish_continuous(const ExperimentConfig& c, const RawSeries& raw) {
  if (!default_standardize(c)) return window_continuous(raw, c.dataset.input_steps, c.dataset.sizes, c.seed);
  auto [z, st] = standardize(raw);
  WindowedDataset ds = window_continuous(z, c.dataset.input_steps, c.dataset.sizes, c.seed);
  ds.standardization = st;
  return ds;
}

WindowedDataset flow_dataset(const ExperimentConfig& c, const SystemDef& sys) {
  const SystemBlock& b = *c.system;
  const std::size_t rows = c.dataset.sizes.total() + c.dataset.input_steps;
  const RawSeries raw =
      resample(integrate(sys, b.train_ic.value_or(sys.train_ic), b.dt, b.stride * (rows - 1)), b.stride);
  return finish_continuous(c, raw);
}

// ---- dataset files ----

std::vector<double> parse_row(const std::string& line, std::size_t lineno, const std::string& path) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t end = std::min(line.find(',', pos), line.size());
    double v = 0.0;
    const auto r = std::from_chars(line.data() + pos, line.data() + end, v);
    if (r.ec != std::errc() || r.ptr != line.data() + end) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

json windows_json(const std::vector<Window>& ws) {
  json a = json::array();
  for (const Window& w : ws) a.push_back({w.orbit, w.start});
  return a;
}

std::vector<Window> windows_from(const json& a) {
  std::vector<Window> out;
  for (const auto& e : a) out.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
  return out;
}

void write_dataset(const std::string& dir, const WindowedDataset& ds, const std::string& hash,
                   std::uint64_t seed) {
  const std::size_t d = ds.dim();
  std::vector<std::string> header{"orbit", "row"};
  for (std::size_t j = 0; j < d; ++j) header.push_back("x" + std::to_string(j));
  CsvWriter csv(dir + "/" + kSeriesFile, header);
  json orbits = json::array();
  for (std::size_t o = 0; o < ds.orbits.size(); ++o) {
    const Tensor& t = ds.orbits[o];
    orbits.push_back(t.extent(0));
    for (std::size_t r = 0; r < t.extent(0); ++r) {
      csv.cell(o).cell(r);
      for (std::size_t j = 0; j < d; ++j) csv.cell(t(r, j));
      csv.end_row();
    }
  }
  csv.close();
  json side = {{"config_hash", hash},
               {"seed", seed},
               {"dim", d},
               {"input_steps", ds.input_steps},
               {"orbit_rows", orbits},
               {"window_counts",
                {{"train", ds.train.size()},
                 {"validation", ds.validation.size()},
                 {"test", ds.test.size()},
                 {"total", ds.train.size() + ds.validation.size() + ds.test.size()}}},
               {"standardization", {{"mean", ds.standardization.mean}, {"std", ds.standardization.std}}},
               {"raw_unit_errors", ds.raw_unit_errors},
               {"train", windows_json(ds.train)},
               {"validation", windows_json(ds.validation)},
               {"test", windows_json(ds.test)}};
  write_text_file(dir + "/" + kSidecarFile, side.dump(1) + "\n");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

WindowedDataset read_dataset(const std::string& dir) {
  json side;
  const std::string side_path = dir + "/" + kSidecarFile;
  try {
    side = json::parse(read_file(side_path));
  } catch (const json::exception& e) {
    throw ParseError(side_path + ": " + e.what());
  }
  WindowedDataset ds;
  try {
    const std::size_t d = side.at("dim").get<std::size_t>();
    ds.input_steps = side.at("input_steps").get<std::size_t>();
    for (const auto& rows : side.at("orbit_rows")) ds.orbits.emplace_back(Shape{rows.get<std::size_t>(), d});
    ds.standardization.mean = side.at("standardization").at("mean").get<std::vector<double>>();
    ds.standardization.std = side.at("standardization").at("std").get<std::vector<double>>();
    ds.raw_unit_errors = side.at("raw_unit_errors").get<bool>();
    ds.train = windows_from(side.at("train"));
    ds.validation = windows_from(side.at("validation"));
    ds.test = windows_from(side.at("test"));
  } catch (const json::exception& e) {
    throw ParseError(side_path + ": " + e.what());
  }

  const std::string path = dir + "/" + kSeriesFile;
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::size_t lineno = 1, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto v = parse_row(line, lineno, path);
    const std::size_t o = static_cast<std::size_t>(v.at(0)), r = static_cast<std::size_t>(v.at(1));
    if (o >= ds.orbits.size() || v.size() != 2 + ds.dim() || r >= ds.orbits[o].extent(0)) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": row does not match " + kSidecarFile);
    }
    for (std::size_t j = 0; j < ds.dim(); ++j) ds.orbits[o](r, j) = v[2 + j];
    ++count;
  }
  std::size_t expected = 0;
  for (const Tensor& t : ds.orbits) expected += t.extent(0);
  if (count != expected) throw ParseError(path + ": expected " + std::to_string(expected) + " rows");
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    for (const Window& w : *split) {
      if (w.orbit >= ds.orbits.size() || w.start + ds.input_steps >= ds.orbits[w.orbit].extent(0)) {
        throw ParseError(side_path + ": window outside its orbit");
      }
    }
  }
  return ds;
}

// ---- run layout ----

std::string run_stem(const std::string& out, const NamedModel& m, std::uint64_t seed) {
  return out + "/" + m.name + "_s" + std::to_string(seed);
}

void log_line(const std::string& s) {
  std::printf("%s\n", s.c_str());
  std::fflush(stdout);
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- commands ----

void cmd_generate(const ExperimentConfig& c, const std::string& out) {
  if (!c.system) throw ConfigError("generate: a system block is required");
  const WindowedDataset ds = build_dataset(c);
  fs::create_directories(out);
  write_dataset(out, ds, config_hash(c), c.seed);
  log_line("windows: " + std::to_string(ds.train.size()) + " train, " + std::to_string(ds.validation.size()) +
           " validation, " + std::to_string(ds.test.size()) + " test -> " + out);
}

void cmd_train(const ExperimentConfig& c, const std::string& out) {
  const WindowedDataset ds = build_dataset(c);
  const std::string hash = config_hash(c);
  fs::create_directories(out);
  CsvWriter summary(out + "/rmse_summary.csv", {"model", "kind", "seed", "parameters", "best_epoch", "val_rmse",
                                                 "test_rmse", "config_hash"});
  for (const NamedModel& m : c.models) {
    for (std::size_t r = 0; r < c.training.replicates; ++r) {
      const std::uint64_t seed = replicate_seed(c, r);
      TrainResult res;
      try {
        res = train(train_config(c, m.spec, seed), ds);
      } catch (const NumericError& e) {
        throw NumericError("model '" + m.name + "' seed " + std::to_string(seed) + ": " + e.what());
      }
      const std::string stem = run_stem(out, m, seed);
      CsvWriter curve(stem + "_curve.csv",
                      {"epoch", "train_loss", "val_loss", "val_rmse", "config_hash", "seed"});
      for (const CurvePoint& p : res.curve) {
        curve.cell(p.epoch).cell(p.train_loss).cell(p.val_loss).cell(p.val_rmse).cell(hash).cell(
            std::to_string(seed));
        curve.end_row();
      }
      curve.close();

      Checkpoint ck;
      ck.model = res.best;
      ck.standardization = ds.standardization;
      ck.epoch = res.best_epoch;
      ck.val_loss = res.best_val_loss;
      ck.seed = seed;
      save_checkpoint(stem + ".ckpt.json", ck);

      const double test_rmse = evaluate(res.best, ds, ds.test);
      const std::size_t n_params = count_parameters(m.spec);
      summary.cell(m.name).cell(to_string(m.spec.kind)).cell(std::to_string(seed)).cell(n_params);
      summary.cell(res.best_epoch).cell(std::sqrt(res.best_val_loss)).cell(test_rmse).cell(hash);
      summary.end_row();
      log_line(m.name + " seed " + std::to_string(seed) + ": " + std::to_string(n_params) + " params, best epoch " +
               std::to_string(res.best_epoch) + ", test RMSE " + fixed(test_rmse));
    }
  }
  summary.close();
}

Checkpoint load_for(const std::string& path, const NamedModel* m) {
  Checkpoint ck = load_checkpoint(path);
  if (m != nullptr && !(ck.model.spec == m->spec)) {
    throw ConfigError("checkpoint '" + path + "' does not match model '" + m->name + "' in the config");
  }
  return ck;
}

struct Run {
  std::string model;
  std::uint64_t seed;
  std::string path;
  const NamedModel* named;
  std::string stem;  // output prefix
};

std::vector<Run> runs_of(const ExperimentConfig& c, const std::string& out, const std::string& checkpoint) {
  std::vector<Run> runs;
  if (!checkpoint.empty()) {
    const std::string name = fs::path(checkpoint).stem().stem().string();
    runs.push_back({name, 0, checkpoint, nullptr, out + "/" + name});
    return runs;
  }
  for (const NamedModel& m : c.models) {
    for (std::size_t r = 0; r < c.training.replicates; ++r) {
      const std::uint64_t seed = replicate_seed(c, r);
      const std::string stem = run_stem(out, m, seed);
      runs.push_back({m.name, seed, stem + ".ckpt.json", &m, stem});
    }
  }
  return runs;
}

void cmd_eval(const ExperimentConfig& c, const std::string& out, const std::string& checkpoint) {
  const WindowedDataset ds = build_dataset(c);
  const std::string hash = config_hash(c);
  std::vector<Run> runs = runs_of(c, out, checkpoint);
  std::vector<Checkpoint> cks;
  for (Run& r : runs) {
    cks.push_back(load_for(r.path, r.named));
    if (r.named == nullptr) r.seed = cks.back().seed;
    if (cks.back().model.spec.d != ds.dim()) {
      throw ShapeError("checkpoint '" + r.path + "' has d=" + std::to_string(cks.back().model.spec.d) +
                       " but the data has " + std::to_string(ds.dim()) + " dimensions");
    }
  }
  fs::create_directories(out);
  const std::size_t max_h = *std::max_element(c.horizons.begin(), c.horizons.end());
  CsvWriter table(out + "/eval_rmse.csv", {"model", "seed", "horizon", "windows", "rmse", "config_hash"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& r = runs[i];
    const Model& model = cks[i].model;
    const RolloutPredictions rp = rollout_predictions(model, ds, ds.test, max_h);
    const std::vector<double> rmse = rollout_rmse(model, ds, ds.test, c.horizons);

    CsvWriter pred(r.stem + "_predictions.csv",
                   {"orbit", "start", "horizon", "dim", "prediction", "target", "config_hash", "seed"});
    for (std::size_t h : c.horizons) {
      for (std::size_t w = 0; w < rp.windows.size(); ++w) {
        const Tensor target = ds.target(rp.windows[w], h - 1);
        for (std::size_t j = 0; j < ds.dim(); ++j) {
          pred.cell(std::size_t{rp.windows[w].orbit}).cell(std::size_t{rp.windows[w].start}).cell(h).cell(j);
          pred.cell(rp.steps[h - 1](w, j)).cell(target[j]).cell(hash).cell(std::to_string(r.seed));
          pred.end_row();
        }
      }
    }
    pred.close();

    std::string line = r.model + " seed " + std::to_string(r.seed) + ":";
    for (std::size_t k = 0; k < c.horizons.size(); ++k) {
      table.cell(r.model).cell(std::to_string(r.seed)).cell(c.horizons[k]).cell(rp.windows.size());
      table.cell(rmse[k]).cell(hash);
      table.end_row();
      line += " " + std::to_string(c.horizons[k]) + "-step " + fixed(rmse[k]);
    }
    log_line(line);
  }
  table.close();
}

void cmd_entropy(const ExperimentConfig& c, const std::string& out, const std::string& checkpoint) {
  const std::string hash = config_hash(c);
  std::vector<Run> runs = runs_of(c, out, checkpoint);
  std::vector<Checkpoint> cks;
  for (Run& r : runs) {
    cks.push_back(load_for(r.path, r.named));
    if (r.named == nullptr) r.seed = cks.back().seed;
  }
  fs::create_directories(out);
  CsvWriter prof(out + "/entropy.csv", {"model", "seed", "alpha", "cut", "entropy", "config_hash"});
  CsvWriter fit(out + "/entropy_fit.csv", {"model", "seed", "alpha", "C", "C_prime", "config_hash"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& r = runs[i];
    const CellSpec& spec = cks[i].model.spec;
    if (spec.kind != CellKind::Tensorized) {
      log_line(r.model + ": not tensorized, skipped");
      continue;
    }
    for (double alpha : c.alphas) {
      const auto profile = ee_scaling_profile(spec.tn, cks[i].model.params, alpha);
      for (const auto& [cut, s] : profile) {
        prof.cell(r.model).cell(std::to_string(r.seed)).cell(alpha).cell(cut).cell(s).cell(hash);
        prof.end_row();
      }
      if (profile.size() >= 2) {
        const LogFit f = fit_log_scaling(profile);
        fit.cell(r.model).cell(std::to_string(r.seed)).cell(alpha).cell(f.c).cell(f.c_prime).cell(hash);
        fit.end_row();
        log_line(r.model + " seed " + std::to_string(r.seed) + " alpha " + format_number(alpha) + ": C " +
                 fixed(f.c) + ", C' " + fixed(f.c_prime));
      }
    }
  }
  prof.close();
  fit.close();
}

struct LyapunovArgs {
  std::string system;
  std::vector<std::string> set;
  std::size_t n = 0;
  std::size_t burn_in = 0;
};

void cmd_lyapunov(const std::optional<ExperimentConfig>& c, const LyapunovArgs& a, const std::string& out) {
  std::string name = a.system;
  std::map<std::string, double> overrides;
  std::optional<std::vector<double>> ic;
  if (c) {
    if (!c->system || c->system->name == "csv") throw ConfigError("lyapunov: the config needs a system block");
    if (name.empty()) name = c->system->name;
    overrides = c->system->parameters;
    ic = c->system->train_ic;
  }
  if (name.empty()) throw ConfigError("lyapunov: give a system name or --config");
  for (const std::string& kv : a.set) {
    const auto eq = kv.find('=');
    double v = 0.0;
    const char* first = kv.data() + eq + 1;
    const auto r = eq == std::string::npos ? std::from_chars_result{first, std::errc::invalid_argument}
                                           : std::from_chars(first, kv.data() + kv.size(), v);
    if (eq == std::string::npos || r.ec != std::errc() || r.ptr != kv.data() + kv.size()) {
      throw ConfigError("lyapunov: --set expects key=value, got '" + kv + "'");
    }
    overrides[kv.substr(0, eq)] = v;
  }
  const SystemDef sys = make_system(parse_system_name(name), overrides);
  LyapunovOptions opt;
  if (a.n > 0) opt.n = a.n;
  if (a.burn_in > 0) opt.burn_in = a.burn_in;
  const std::vector<double> spectrum = lyapunov(sys, ic.value_or(sys.train_ic), opt);

  const char* unit = sys.kind == SystemKind::Map ? "iterations" : "time units";
  log_line(to_string(sys.name) + ": n = " + std::to_string(opt.n) + " " + unit + ", burn-in = " +
           std::to_string(opt.burn_in));
  for (std::size_t i = 0; i < spectrum.size(); ++i) log_line("  lambda" + std::to_string(i + 1) + " = " + fixed(spectrum[i]));
  if (!out.empty()) {
    fs::create_directories(out);
    CsvWriter csv(out + "/lyapunov.csv", {"system", "index", "exponent", "n", "burn_in", "config_hash", "seed"});
    const std::string hash = c ? config_hash(*c) : "";
    const std::string seed = c ? std::to_string(c->seed) : "";
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      csv.cell(to_string(sys.name)).cell(i + 1).cell(spectrum[i]).cell(opt.n).cell(opt.burn_in).cell(hash).cell(seed);
      csv.end_row();
    }
    csv.close();
  }
}

}  // namespace

WindowedDataset build_dataset(const ExperimentConfig& c) {
  if (!c.dataset_path.empty()) {
    WindowedDataset ds = read_dataset(c.dataset_path);
    if (ds.input_steps != c.dataset.input_steps) {
      throw ConfigError("dataset_path: input_steps " + std::to_string(ds.input_steps) + " differs from the config");
    }
    return ds;
  }
  if (!c.system) throw ConfigError("no dataset: give a system block or dataset_path");
  const SystemBlock& b = *c.system;
  if (b.name == "csv") return finish_continuous(c, regroup(ingest_csv(b.csv_path), b.regroup));
  const SystemDef sys = make_system(parse_system_name(b.name), b.parameters);
  return sys.kind == SystemKind::Map ? map_dataset(c, sys) : flow_dataset(c, sys);
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    if (dynamic_cast<const NumericError*>(err) || dynamic_cast<const DomainError*>(err)) return 3;
    if (dynamic_cast<const IoError*>(err) || dynamic_cast<const ParseError*>(err)) return 4;
    return 2;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 4;
  return 1;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Tensorized LSTM experiments on chaotic series", "eelstm"};
  app.require_subcommand(1);
  std::string config_path, out_dir, checkpoint;
  std::optional<std::uint64_t> seed;
  LyapunovArgs lya;

  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "experiment config (YAML)");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
  };
  auto* gen = app.add_subcommand("generate", "write the windowed dataset");
  common(gen, true);
  auto* tr = app.add_subcommand("train", "train every model and replicate");
  common(tr, true);
  auto* ev = app.add_subcommand("eval", "per-horizon rollout RMSE on the test windows");
  common(ev, true);
  ev->add_option("--checkpoint", checkpoint, "evaluate this checkpoint only");
  auto* en = app.add_subcommand("entropy", "entanglement entropy profiles of trained tensorizers");
  common(en, true);
  en->add_option("--checkpoint", checkpoint, "analyse this checkpoint only");
  auto* ly = app.add_subcommand("lyapunov", "Lyapunov spectrum of a system");
  common(ly, false);
  ly->add_option("system", lya.system, "system name");
  ly->add_option("--set", lya.set, "parameter override key=value");
  ly->add_option("--n", lya.n, "iterations (maps) or time units (flows)");
  ly->add_option("--burn-in", lya.burn_in, "discarded iterations or time units");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::optional<ExperimentConfig> cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      if (seed) cfg->seed = *seed;
    }
    const std::string out = !out_dir.empty() ? out_dir : cfg ? cfg->output : "";
    if (*gen) cmd_generate(*cfg, out);
    if (*tr) cmd_train(*cfg, out);
    if (*ev) cmd_eval(*cfg, out, checkpoint);
    if (*en) cmd_entropy(*cfg, out, checkpoint);
    if (*ly) cmd_lyapunov(cfg, lya, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
}

}  // namespace eelstm::cli
