#include <string>

#include "eelstm/errors.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

namespace {

Var column(Tape& tape, Var columns, std::size_t l) {
  const Shape& s = tape.shape(columns);
  return tape.reshape(tape.slice(columns, 1, l, l + 1), Shape{s[0], s[2]});
}

Var full_forward(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var cols,
                 const std::string& prefix) {
  Var t = column(tape, cols, 0);
  for (std::size_t l = 1; l < spec.L; ++l) {
    t = tape.contract(t, column(tape, cols, l), {}, {{0, 0}});
  }
  std::vector<AxisPair> pairs;
  for (std::size_t l = 0; l < spec.L; ++l) pairs.push_back({l + 1, l + 1});
  return tape.contract(t, p[prefix + "full"], pairs);
}

Var mps_forward(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var cols,
                const std::string& prefix) {
  const std::string core = prefix + "mps.core";
  if (spec.mps_boundary == MpsBoundary::Open) {
    // env [B, D]
    Var env = tape.contract(column(tape, cols, 0), p[core + "0"], {{1, 1}});  // [B,1,D]
    const Shape& s = tape.shape(env);
    env = tape.reshape(env, Shape{s[0], s[2]});
    for (std::size_t l = 1; l < spec.L; ++l) {
      const Var m = tape.contract(env, p[core + std::to_string(l)], {{1, 0}});  // [B,P,D]
      env = tape.contract(m, column(tape, cols, l), {{1, 1}}, {{0, 0}});      // [B,D]
    }
    return tape.contract(env, p[prefix + "mps.w0"], {{1, 1}});
  }
  // ring: env [B, D, D]
  Var env = tape.contract(column(tape, cols, 0), p[core + "0"], {{1, 1}});
  for (std::size_t l = 1; l < spec.L; ++l) {
    const Var m = tape.contract(column(tape, cols, l), p[core + std::to_string(l)], {{1, 1}});
    env = tape.contract(env, m, {{2, 1}}, {{0, 0}});
  }
  return tape.contract(env, p[prefix + "mps.w0"], {{1, 2}, {2, 1}});
}

Var mera_forward(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var cols,
                 const std::string& prefix) {
  const std::size_t B = tape.shape(cols)[0];
  std::vector<Var> sites;
  for (std::size_t l = 0; l < spec.L; ++l) {
    sites.push_back(tape.reshape(tape.slice(cols, 1, l, l + 1), Shape{B, 1, spec.P, 1}));
  }
  const std::size_t levels = spec.mera_levels();
  Var top_state;
  for (std::size_t k = 1; k <= levels; ++k) {
    const std::size_t n = sites.size();
    const std::size_t dk = spec.dims[k - 1];
    const std::size_t dout = spec.dims[std::min(k, spec.dims.size() - 1)];

    // disentangle pairs (2i, 2i+1): theta [B, bl, o1, o2, br]
    std::vector<Var> theta(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) {
      Var t = tape.contract(sites[2 * i], sites[2 * i + 1], {{3, 1}}, {{0, 0}});
      t = tape.contract(t, p[mera_u_name(spec, k, i, prefix)], {{2, 2}, {3, 3}});
      theta[i] = tape.permute(t, {0, 1, 3, 4, 2});
    }

    if (n == 2) {
      const std::size_t bond = tape.shape(theta[0])[1];
      const Var eye = tape.constant(Tensor::identity(bond));
      const Var closed = tape.contract(theta[0], eye, {{1, 0}, {4, 1}});  // [B, l, r]
      top_state = tape.contract(closed, p[mera_w_name(spec, k, 0, prefix)], {{1, 2}, {2, 1}});
      break;
    }

    // isometry j merges (2j-1, 2j): right index of theta[j-1] with left of theta[j]
    const std::size_t m = n / 2;
    std::vector<Var> next(m);
    for (std::size_t j = 0; j < m; ++j) {
      Var r = tape.contract(theta[j], p[mera_w_name(spec, k, j, prefix)], {{2, 2}});
      r = tape.permute(r, {0, 1, 5, 4, 3, 2});  // [B, a, r_, k, b, r]
      const Shape& s = tape.shape(r);
      r = tape.reshape(r, Shape{B, s[1] * dk, dout, s[4] * dk});
      if (spec.normalized_layers) r = tape.normalize(r, 1);
      next[j] = r;
    }
    sites = std::move(next);
  }
  return tape.contract(top_state, p[prefix + "top"], {{1, 1}});
}

Tensor columns_to_batch(const Tensor& columns) {
  if (columns.rank() != 2) throw ShapeError("contract: P x L column matrix required");
  const std::size_t P = columns.extent(0), L = columns.extent(1);
  Tensor b(Shape{1, L, P});
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t mu = 0; mu < P; ++mu) b[l * P + mu] = columns(mu, l);
  }
  return b;
}

Tensor run_plain(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                 const std::string& prefix, TnKind expected, bool with_bias) {
  spec.validate();
  if (spec.kind != expected) throw ConfigError("contract: tensorizer kind mismatch");
  if (columns.rank() != 2 || columns.extent(0) != spec.P || columns.extent(1) != spec.L) {
    throw ShapeError("contract: columns " + shape_string(columns.shape()) + " do not match P x L");
  }
  Tape tape;
  const BoundParams bp(tape, params, false);
  const Var cols = tape.constant(columns_to_batch(columns));
  Var out = with_bias ? tn_contract(tape, bp, spec, cols, prefix)
                      : (spec.kind == TnKind::Full ? full_forward(tape, bp, spec, cols, prefix)
                                                   : mps_forward(tape, bp, spec, cols, prefix));
  const Tensor& v = tape.value(out);
  return v.reshaped(Shape{v.extent(1)});
}

}  // namespace

Var tn_contract(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var columns,
                const std::string& prefix) {
  const Shape& s = tape.shape(columns);
  if (s.size() != 3 || s[1] != spec.L || s[2] != spec.P) {
    throw ShapeError("tn_contract: columns " + shape_string(s) + " do not match [B,L,P]");
  }
  Var out;
  switch (spec.kind) {
    case TnKind::Full: out = full_forward(tape, p, spec, columns, prefix); break;
    case TnKind::Mps: out = mps_forward(tape, p, spec, columns, prefix); break;
    case TnKind::Mera: out = mera_forward(tape, p, spec, columns, prefix); break;
  }
  return tape.add_broadcast(out, p[prefix + "bias"]);
}

Var tn_chain(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var v,
             const std::string& prefix) {
  const Var cols = tn_expand(tape, p, spec, tape.tanh(v), prefix);
  return tape.tanh(tn_contract(tape, p, spec, cols, prefix));
}

Tensor contract_full(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                     const std::string& prefix) {
  return run_plain(columns, params, spec, prefix, TnKind::Full, false);
}

Tensor contract_mps(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                    const std::string& prefix) {
  return run_plain(columns, params, spec, prefix, TnKind::Mps, false);
}

Tensor contract_mera(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                     const std::string& prefix) {
  return run_plain(columns, params, spec, prefix, TnKind::Mera, true);
}

}  // namespace eelstm
