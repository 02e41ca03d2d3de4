#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "eelstm/errors.hpp"
#include "eelstm/training.hpp"

namespace eelstm {

using nlohmann::json;

namespace {

json nest(const Tensor& t, std::size_t axis, std::size_t& offset) {
  json arr = json::array();
  if (axis + 1 == t.rank()) {
    for (std::size_t i = 0; i < t.extent(axis); ++i) arr.push_back(t[offset++]);
    return arr;
  }
  for (std::size_t i = 0; i < t.extent(axis); ++i) arr.push_back(nest(t, axis + 1, offset));
  return arr;
}

void unnest(const json& j, const Shape& shape, std::size_t axis, std::vector<double>& out) {
  if (!j.is_array() || j.size() != shape[axis]) throw ParseError("checkpoint: tensor data does not match shape");
  for (const auto& e : j) {
    if (axis + 1 == shape.size()) {
      if (!e.is_number()) throw ParseError("checkpoint: non-numeric tensor entry");
      out.push_back(e.get<double>());
    } else {
      unnest(e, shape, axis + 1, out);
    }
  }
}

json tensor_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape();
  if (t.rank() == 0) {
    j["data"] = t[0];
  } else {
    std::size_t off = 0;
    j["data"] = nest(t, 0, off);
  }
  return j;
}

Tensor tensor_from(const json& j) {
  const Shape shape = j.at("shape").get<Shape>();
  std::vector<double> data;
  if (shape.empty()) {
    data.push_back(j.at("data").get<double>());
  } else {
    unnest(j.at("data"), shape, 0, data);
  }
  return Tensor(shape, std::move(data));
}

json spec_json(const CellSpec& s) {
  json tn = {{"kind", to_string(s.tn.kind)},
             {"L", s.tn.L},
             {"P", s.tn.P},
             {"dims", s.tn.dims},
             {"translation_symmetric_level1", s.tn.translation_symmetric_level1},
             {"dilation_symmetric", s.tn.dilation_symmetric},
             {"normalized_layers", s.tn.normalized_layers},
             {"mps_boundary", to_string(s.tn.mps_boundary)},
             {"expand_init", s.tn.expand_init}};
  return {{"kind", to_string(s.kind)}, {"h", s.h},         {"d", s.d},
          {"site", to_string(s.site)}, {"depth", s.depth}, {"order", s.order},
          {"power", s.power},          {"bond", s.bond},   {"output", to_string(s.output)},
          {"zero_gate_bias", s.zero_gate_bias}, {"tn", tn}};
}

CellSpec spec_from(const json& j) {
  CellSpec s;
  s.kind = parse_cell_kind(j.at("kind").get<std::string>());
  s.h = j.at("h").get<std::size_t>();
  s.d = j.at("d").get<std::size_t>();
  s.site = parse_site(j.at("site").get<std::string>());
  s.depth = j.at("depth").get<std::size_t>();
  s.order = j.at("order").get<std::size_t>();
  s.power = j.at("power").get<std::size_t>();
  s.bond = j.at("bond").get<std::size_t>();
  s.output = parse_output_activation(j.at("output").get<std::string>());
  s.zero_gate_bias = j.at("zero_gate_bias").get<bool>();
  const json& tn = j.at("tn");
  s.tn.kind = parse_tn_kind(tn.at("kind").get<std::string>());
  s.tn.L = tn.at("L").get<std::size_t>();
  s.tn.P = tn.at("P").get<std::size_t>();
  s.tn.dims = tn.at("dims").get<std::vector<std::size_t>>();
  s.tn.translation_symmetric_level1 = tn.at("translation_symmetric_level1").get<bool>();
  s.tn.dilation_symmetric = tn.at("dilation_symmetric").get<bool>();
  s.tn.normalized_layers = tn.at("normalized_layers").get<bool>();
  s.tn.mps_boundary = parse_mps_boundary(tn.at("mps_boundary").get<std::string>());
  s.tn.expand_init = tn.at("expand_init").get<double>();
  return s;
}

}  // namespace

bool operator==(const CellSpec& a, const CellSpec& b) {
  return spec_json(a) == spec_json(b);
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return a.version == b.version && a.model.spec == b.model.spec && a.model.params == b.model.params &&
         a.standardization.mean == b.standardization.mean && a.standardization.std == b.standardization.std &&
         a.epoch == b.epoch && a.val_loss == b.val_loss && a.seed == b.seed;
}

std::string checkpoint_to_json(const Checkpoint& c) {
  json params = json::array();
  const ParamSet& ps = c.model.params;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    json p = tensor_json(ps.value(i));
    p["name"] = ps.name(i);
    params.push_back(std::move(p));
  }
  json j = {{"version", c.version},
            {"spec", spec_json(c.model.spec)},
            {"parameters", std::move(params)},
            {"standardization", {{"mean", c.standardization.mean}, {"std", c.standardization.std}}},
            {"training", {{"epoch", c.epoch}, {"val_loss", c.val_loss}, {"seed", c.seed}}}};
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    Checkpoint c;
    c.version = j.at("version").get<int>();
    if (c.version != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + std::to_string(c.version) + " (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    c.model.spec = spec_from(j.at("spec"));
    for (const auto& p : j.at("parameters")) c.model.params.add(p.at("name").get<std::string>(), tensor_from(p));
    c.standardization.mean = j.at("standardization").at("mean").get<std::vector<double>>();
    c.standardization.std = j.at("standardization").at("std").get<std::vector<double>>();
    const json& tr = j.at("training");
    c.epoch = tr.at("epoch").get<std::size_t>();
    c.val_loss = tr.at("val_loss").get<double>();
    c.seed = tr.at("seed").get<std::uint64_t>();

    Rng probe(0);
    const ParamSet fresh = init_cell_params(c.model.spec, probe);
    if (fresh.names() != c.model.params.names()) throw ParseError("checkpoint: parameter names do not match spec");
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (fresh.value(i).shape() != c.model.params.value(i).shape()) {
        throw ParseError("checkpoint: shape mismatch for " + fresh.name(i));
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << checkpoint_to_json(c);
    if (!f) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot rename to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace eelstm
