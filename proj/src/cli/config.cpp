#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include "eelstm/cli.hpp"
#include "eelstm/errors.hpp"
#include "eelstm/rng.hpp"

namespace eelstm::cli {

namespace {

// Collects every problem before failing.
class Reader {
 public:
  void error(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

  void keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n) return;
    if (!n.IsMap()) {
      error(path, "expected a mapping");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) error(path.empty() ? key : path + "." + key, "unknown key");
    }
  }

  template <typename T>
  void get(const YAML::Node& n, const std::string& path, T& out) {
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      error(path, "wrong type");
    }
  }

  template <typename T>
  void get(const YAML::Node& n, const std::string& path, std::optional<T>& out) {
    if (!n) return;
    T v{};
    try {
      v = n.as<T>();
      out = v;
    } catch (const YAML::Exception&) {
      error(path, "wrong type");
    }
  }

  void get_size(const YAML::Node& n, const std::string& path, std::size_t& out) {
    if (!n) return;
    long long v = 0;
    try {
      v = n.as<long long>();
    } catch (const YAML::Exception&) {
      error(path, "expected an integer");
      return;
    }
    if (v < 0) {
      error(path, "must be >= 0");
      return;
    }
    out = static_cast<std::size_t>(v);
  }

  template <typename Fn>
  void parse_enum(const YAML::Node& n, const std::string& path, Fn fn) {
    if (!n) return;
    try {
      fn(n.as<std::string>());
    } catch (const YAML::Exception&) {
      error(path, "expected a string");
    } catch (const Error& e) {
      error(path, e.what());
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

void read_tn(Reader& r, const YAML::Node& n, const std::string& path, TensorizerSpec& tn) {
  r.keys(n, path, {"kind", "L", "P", "dims", "translation_symmetric_level1", "dilation_symmetric",
                   "normalized_layers", "mps_boundary", "expand_init"});
  if (!n) return;
  r.parse_enum(n["kind"], path + ".kind", [&](const std::string& s) { tn.kind = parse_tn_kind(s); });
  r.get_size(n["L"], path + ".L", tn.L);
  r.get_size(n["P"], path + ".P", tn.P);
  r.get(n["dims"], path + ".dims", tn.dims);
  r.get(n["translation_symmetric_level1"], path + ".translation_symmetric_level1", tn.translation_symmetric_level1);
  r.get(n["dilation_symmetric"], path + ".dilation_symmetric", tn.dilation_symmetric);
  r.get(n["normalized_layers"], path + ".normalized_layers", tn.normalized_layers);
  r.parse_enum(n["mps_boundary"], path + ".mps_boundary",
               [&](const std::string& s) { tn.mps_boundary = parse_mps_boundary(s); });
  r.get(n["expand_init"], path + ".expand_init", tn.expand_init);
}

NamedModel read_model(Reader& r, const YAML::Node& n, const std::string& path) {
  NamedModel m;
  r.keys(n, path, {"name", "kind", "h", "d", "site", "output", "depth", "order", "power", "bond", "zero_gate_bias", "tn"});
  if (!n || !n.IsMap()) return m;
  r.get(n["name"], path + ".name", m.name);
  CellSpec& s = m.spec;
  r.parse_enum(n["kind"], path + ".kind", [&](const std::string& v) { s.kind = parse_cell_kind(v); });
  r.get_size(n["h"], path + ".h", s.h);
  r.get_size(n["d"], path + ".d", s.d);
  r.parse_enum(n["site"], path + ".site", [&](const std::string& v) { s.site = parse_site(v); });
  r.parse_enum(n["output"], path + ".output", [&](const std::string& v) { s.output = parse_output_activation(v); });
  r.get_size(n["depth"], path + ".depth", s.depth);
  r.get_size(n["order"], path + ".order", s.order);
  r.get_size(n["power"], path + ".power", s.power);
  r.get_size(n["bond"], path + ".bond", s.bond);
  r.get(n["zero_gate_bias"], path + ".zero_gate_bias", s.zero_gate_bias);
  read_tn(r, n["tn"], path + ".tn", s.tn);
  if (m.name.empty()) m.name = to_string(s.kind);
  return m;
}

void validate(Reader& r, ExperimentConfig& c) {
  if (!c.system && c.dataset_path.empty()) {
    r.error("system", "missing: give a system block or dataset_path");
  }
  std::size_t dim = 0;
  if (c.system) {
    SystemBlock& s = *c.system;
    if (s.name == "csv") {
      if (s.csv_path.empty()) r.error("system.csv", "required when name is csv");
      if (s.regroup < 1) r.error("system.regroup", "must be >= 1");
      dim = s.regroup;
    } else {
      std::optional<SystemName> name;
      try {
        name = parse_system_name(s.name);
      } catch (const Error& e) {
        r.error("system.name", e.what());
      }
      if (name) {
        try {
          const SystemDef def = make_system(*name, s.parameters);
          dim = def.dimension;
          if (s.train_ic && s.train_ic->size() != def.state_size) r.error("system.train_ic", "wrong length");
          if (s.test_ic && s.test_ic->size() != def.state_size) r.error("system.test_ic", "wrong length");
        } catch (const Error& e) {
          r.error("system.parameters", e.what());
        }
      }
    }
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) r.error("system.dt", "must be > 0");
    if (s.stride < 1) r.error("system.stride", "must be >= 1");
  }
  if (c.dataset.input_steps < 1) r.error("dataset.input_steps", "must be >= 1");
  const auto& z = c.dataset.sizes;
  if (z.train == 0 || z.validation == 0 || z.test == 0) r.error("dataset.sizes", "three positive sizes required");
  if (z.train + z.validation > 0 &&
      static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(z.train + z.validation))) != z.validation) {
    r.error("dataset.sizes", "validation must be 20% of train + validation");
  }
  if (c.models.empty()) r.error("models", "at least one model required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const std::string path = "models[" + std::to_string(i) + "]";
    auto& m = c.models[i];
    if (m.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
        std::string::npos) {
      r.error(path + ".name", "use letters, digits, '_' or '-' only");
    }
    if (!names.insert(m.name).second) r.error(path + ".name", "duplicate model name '" + m.name + "'");
    if (dim != 0 && m.spec.d != dim) {
      r.error(path + ".d", "is " + std::to_string(m.spec.d) + " but the data has " + std::to_string(dim) + " dimensions");
    }
    try {
      m.spec.validate();
    } catch (const Error& e) {
      r.error(path, e.what());
    }
  }
  if (c.training.epochs < 1) r.error("training.epochs", "must be >= 1");
  if (c.training.batch_size < 1) r.error("training.batch_size", "must be >= 1");
  if (c.training.replicates < 1) r.error("training.replicates", "must be >= 1");
  if (!(c.training.adam.learning_rate > 0.0)) r.error("training.learning_rate", "must be > 0");
  if (!(c.training.adam.epsilon > 0.0)) r.error("training.epsilon", "must be > 0");
  if (!(c.training.adam.beta1 >= 0.0 && c.training.adam.beta1 < 1.0)) r.error("training.beta1", "must lie in [0, 1)");
  if (!(c.training.adam.beta2 >= 0.0 && c.training.adam.beta2 < 1.0)) r.error("training.beta2", "must lie in [0, 1)");
  if (c.training.clip_norm < 0.0) r.error("training.clip_norm", "must be >= 0");
  if (c.horizons.empty()) r.error("evaluation.horizons", "must not be empty");
  for (std::size_t h : c.horizons) {
    if (h < 1) r.error("evaluation.horizons", "entries must be >= 1");
  }
  if (c.alphas.empty()) r.error("evaluation.alphas", "must not be empty");
  for (double a : c.alphas) {
    if (!(a >= 1.0)) r.error("evaluation.alphas", "entries must be >= 1");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

  Reader r;
  ExperimentConfig c;
  r.keys(root, "", {"system", "dataset", "dataset_path", "model", "models", "training", "evaluation", "seed", "output"});

  if (const auto s = root["system"]) {
    r.keys(s, "system", {"name", "parameters", "train_ic", "test_ic", "dt", "stride", "csv", "regroup"});
    SystemBlock b;
    r.get(s["name"], "system.name", b.name);
    if (b.name.empty()) r.error("system.name", "required");
    r.get(s["parameters"], "system.parameters", b.parameters);
    r.get(s["train_ic"], "system.train_ic", b.train_ic);
    r.get(s["test_ic"], "system.test_ic", b.test_ic);
    r.get(s["dt"], "system.dt", b.dt);
    r.get_size(s["stride"], "system.stride", b.stride);
    r.get(s["csv"], "system.csv", b.csv_path);
    r.get_size(s["regroup"], "system.regroup", b.regroup);
    c.system = b;
  }
  r.get(root["dataset_path"], "dataset_path", c.dataset_path);

  if (const auto d = root["dataset"]) {
    r.keys(d, "dataset", {"input_steps", "sizes", "standardize"});
    r.get_size(d["input_steps"], "dataset.input_steps", c.dataset.input_steps);
    std::vector<std::size_t> sizes;
    r.get(d["sizes"], "dataset.sizes", sizes);
    if (d["sizes"] && sizes.size() != 3) {
      r.error("dataset.sizes", "expected [train, validation, test]");
    } else if (sizes.size() == 3) {
      c.dataset.sizes = {sizes[0], sizes[1], sizes[2]};
    }
    r.get(d["standardize"], "dataset.standardize", c.dataset.standardize);
  } else {
    r.error("dataset", "required");
  }

  if (root["model"] && root["models"]) r.error("model", "give either model or models, not both");
  if (const auto m = root["model"]) c.models.push_back(read_model(r, m, "model"));
  if (const auto ms = root["models"]) {
    if (!ms.IsSequence()) {
      r.error("models", "expected a list");
    } else {
      for (std::size_t i = 0; i < ms.size(); ++i) c.models.push_back(read_model(r, ms[i], "models[" + std::to_string(i) + "]"));
    }
  }

  if (const auto t = root["training"]) {
    r.keys(t, "training", {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "clip_norm", "replicates"});
    r.get_size(t["epochs"], "training.epochs", c.training.epochs);
    r.get_size(t["batch_size"], "training.batch_size", c.training.batch_size);
    r.get(t["learning_rate"], "training.learning_rate", c.training.adam.learning_rate);
    r.get(t["beta1"], "training.beta1", c.training.adam.beta1);
    r.get(t["beta2"], "training.beta2", c.training.adam.beta2);
    r.get(t["epsilon"], "training.epsilon", c.training.adam.epsilon);
    r.get(t["clip_norm"], "training.clip_norm", c.training.clip_norm);
    r.get_size(t["replicates"], "training.replicates", c.training.replicates);
  }
  if (const auto e = root["evaluation"]) {
    r.keys(e, "evaluation", {"horizons", "alphas"});
    r.get(e["horizons"], "evaluation.horizons", c.horizons);
    r.get(e["alphas"], "evaluation.alphas", c.alphas);
  }
  if (root["seed"]) {
    long long s = 0;
    try {
      s = root["seed"].as<long long>();
      if (s < 0) r.error("seed", "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } catch (const YAML::Exception&) {
      r.error("seed", "expected an integer");
    }
  }
  r.get(root["output"], "output", c.output);

  validate(r, c);
  if (!r.errors().empty()) {
    std::string msg = "invalid config (" + std::to_string(r.errors().size()) + " problem" +
                      (r.errors().size() == 1 ? "" : "s") + "):";
    for (const auto& e : r.errors()) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  ExperimentConfig c = parse_config(buf.str());
  // relative data paths resolve against the config's directory
  const auto base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  if (c.system) resolve(c.system->csv_path);
  resolve(c.dataset_path);
  return c;
}

std::string canonical_config(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  if (c.system) {
    const auto& s = *c.system;
    j["system"] = {{"name", s.name},         {"parameters", s.parameters}, {"dt", s.dt},
                   {"stride", s.stride},     {"csv", s.csv_path},          {"regroup", s.regroup},
                   {"train_ic", s.train_ic ? json(*s.train_ic) : json(nullptr)},
                   {"test_ic", s.test_ic ? json(*s.test_ic) : json(nullptr)}};
  }
  j["dataset_path"] = c.dataset_path;
  j["dataset"] = {{"input_steps", c.dataset.input_steps},
                  {"sizes", {c.dataset.sizes.train, c.dataset.sizes.validation, c.dataset.sizes.test}},
                  {"standardize", c.dataset.standardize ? json(*c.dataset.standardize) : json(nullptr)}};
  json models = json::array();
  for (const auto& m : c.models) {
    const auto& s = m.spec;
    models.push_back({{"name", m.name},
                      {"kind", to_string(s.kind)},
                      {"h", s.h},
                      {"d", s.d},
                      {"site", to_string(s.site)},
                      {"output", to_string(s.output)},
                      {"depth", s.depth},
                      {"order", s.order},
                      {"power", s.power},
                      {"bond", s.bond},
                      {"zero_gate_bias", s.zero_gate_bias},
                      {"tn",
                       {{"kind", to_string(s.tn.kind)},
                        {"L", s.tn.L},
                        {"P", s.tn.P},
                        {"dims", s.tn.dims},
                        {"tsym", s.tn.translation_symmetric_level1},
                        {"dsym", s.tn.dilation_symmetric},
                        {"norm", s.tn.normalized_layers},
                        {"boundary", to_string(s.tn.mps_boundary)},
                        {"expand_init", s.tn.expand_init}}}});
  }
  j["models"] = models;
  const auto& t = c.training;
  j["training"] = {{"epochs", t.epochs},           {"batch_size", t.batch_size}, {"lr", t.adam.learning_rate},
                   {"beta1", t.adam.beta1},        {"beta2", t.adam.beta2},      {"epsilon", t.adam.epsilon},
                   {"clip_norm", t.clip_norm},     {"replicates", t.replicates}};
  j["horizons"] = c.horizons;
  j["alphas"] = c.alphas;
  j["seed"] = c.seed;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t replicate_seed(const ExperimentConfig& c, std::size_t r) { return c.seed + r; }

TrainConfig train_config(const ExperimentConfig& c, const CellSpec& spec, std::uint64_t seed) {
  TrainConfig t;
  t.adam = c.training.adam;
  t.batch_size = c.training.batch_size;
  t.epochs = c.training.epochs;
  t.clip_norm = c.training.clip_norm;
  t.seed = seed;
  t.cell = spec;
  return t;
}

}  // namespace eelstm::cli
