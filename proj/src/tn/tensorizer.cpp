#include <cmath>
#include <string>

#include "eelstm/errors.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Checked P^L; returns 0 on overflow past the guard.
std::size_t guarded_power(std::size_t p, std::size_t l) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < l; ++i) {
    if (v > kFullTensorLimit / p) return 0;
    v *= p;
  }
  return v;
}

struct ParamShape {
  std::string name;
  Shape shape;
  enum class Init { Uniform, Identity4, Isometry, MpsFirst, MpsCore, Zero } init;
  double bound = 0.0;
};

Shape repeated(std::size_t head, std::size_t p, std::size_t l) {
  Shape s{head};
  s.insert(s.end(), l, p);
  return s;
}

std::vector<ParamShape> tn_shapes(const TensorizerSpec& s, std::size_t h, const std::string& prefix) {
  s.validate();
  using I = ParamShape::Init;
  std::vector<ParamShape> out;
  out.push_back({prefix + "expand", Shape{s.L, s.P - 1, h}, I::Uniform,
                 s.expand_init > 0.0 ? s.expand_init : 1.0 / std::sqrt(static_cast<double>(h))});
  switch (s.kind) {
    case TnKind::Full: {
      const double fan = static_cast<double>(guarded_power(s.P, s.L));
      out.push_back({prefix + "full", repeated(h, s.P, s.L), I::Uniform, 1.0 / std::sqrt(fan)});
      break;
    }
    case TnKind::Mps: {
      const std::size_t d = s.dims[1];
      for (std::size_t l = 0; l < s.L; ++l) {
        const bool open_first = l == 0 && s.mps_boundary == MpsBoundary::Open;
        out.push_back({prefix + "mps.core" + std::to_string(l),
                       Shape{open_first ? 1 : d, s.P, d}, open_first ? I::MpsFirst : I::MpsCore, 0.05});
      }
      if (s.mps_boundary == MpsBoundary::Open) {
        out.push_back({prefix + "mps.w0", Shape{h, d}, I::Uniform, 1.0 / std::sqrt(static_cast<double>(d))});
      } else {
        out.push_back({prefix + "mps.w0", Shape{h, d, d}, I::Uniform, 1.0 / static_cast<double>(d)});
      }
      break;
    }
    case TnKind::Mera: {
      const std::size_t levels = s.mera_levels();
      std::size_t n = s.L;
      for (std::size_t k = 1; k <= levels; ++k, n /= 2) {
        const std::size_t dk = s.dims[k - 1];
        const std::size_t dout = s.dims[std::min(k, s.dims.size() - 1)];
        for (std::size_t i = 0; i < n / 2; ++i) {
          const std::string un = mera_u_name(s, k, i, prefix);
          bool seen = false;
          for (const auto& e : out) seen = seen || e.name == un;
          if (!seen) out.push_back({un, Shape{dk, dk, dk, dk}, I::Identity4, 0.05});
        }
        for (std::size_t i = 0; i < n / 2; ++i) {
          const std::string wn = mera_w_name(s, k, i, prefix);
          bool seen = false;
          for (const auto& e : out) seen = seen || e.name == wn;
          if (!seen) out.push_back({wn, Shape{dout, dk, dk}, I::Isometry, 0.0});
        }
      }
      const std::size_t top = s.dims.back();
      out.push_back({prefix + "top", Shape{h, top}, I::Uniform, 1.0 / std::sqrt(static_cast<double>(top))});
      break;
    }
  }
  const double bias_bound = out.back().bound;
  out.push_back({prefix + "bias", Shape{h}, I::Uniform, bias_bound});
  return out;
}

}  // namespace

std::string to_string(TnKind k) {
  switch (k) {
    case TnKind::Full: return "full";
    case TnKind::Mps: return "mps";
    case TnKind::Mera: return "mera";
  }
  return "?";
}

TnKind parse_tn_kind(const std::string& s) {
  if (s == "full") return TnKind::Full;
  if (s == "mps") return TnKind::Mps;
  if (s == "mera") return TnKind::Mera;
  throw ConfigError("unknown tensorizer kind '" + s + "' (expected full|mps|mera)");
}

std::string to_string(MpsBoundary b) { return b == MpsBoundary::Open ? "open" : "ring"; }

MpsBoundary parse_mps_boundary(const std::string& s) {
  if (s == "open") return MpsBoundary::Open;
  if (s == "ring") return MpsBoundary::Ring;
  throw ConfigError("unknown MPS boundary '" + s + "' (expected open|ring)");
}

std::size_t TensorizerSpec::mera_levels() const {
  std::size_t n = 0;
  for (std::size_t v = L; v > 1; v /= 2) ++n;
  return n;
}

void TensorizerSpec::validate() const {
  if (P < 2) throw ConfigError("tensorizer: P must be >= 2");
  if (L < 1) throw ConfigError("tensorizer: L must be >= 1");
  if (!(expand_init >= 0.0)) throw ConfigError("tensorizer: expand_init must be >= 0");
  for (std::size_t d : dims) {
    if (d < 1) throw ConfigError("tensorizer: virtual dimensions must be >= 1");
  }
  if (kind != TnKind::Full && (dims.empty() || dims[0] != P)) {
    throw ConfigError("tensorizer: first virtual dimension must equal P");
  }
  switch (kind) {
    case TnKind::Full:
      if (L > 16 || guarded_power(P, L) == 0) {
        throw CapacityError("tensorizer: full tensor P^L exceeds 2^20 entries");
      }
      break;
    case TnKind::Mps:
      if (dims.size() != 2) throw ConfigError("tensorizer: MPS needs exactly 2 virtual dimensions");
      break;
    case TnKind::Mera:
      if (L < 2 || !is_power_of_two(L)) throw ConfigError("tensorizer: MERA needs L a power of 2, L >= 2");
      if (dims.size() != mera_levels()) {
        throw ConfigError("tensorizer: MERA needs log2(L) = " + std::to_string(mera_levels()) +
                          " virtual dimensions, got " + std::to_string(dims.size()));
      }
      if (dilation_symmetric) {
        for (std::size_t i = 2; i < dims.size(); ++i) {
          if (dims[i] != dims[1]) {
            throw ConfigError("tensorizer: dilation symmetry needs equal dimensions beyond D_I");
          }
        }
      }
      break;
  }
}

namespace {

// Level-1 tensors join the shared set only when their shapes agree.
bool level_shares_dilation(const TensorizerSpec& s, std::size_t level) {
  if (!s.dilation_symmetric || s.mera_levels() < 2) return false;
  return level >= 2 || s.dims[0] == s.dims[1];
}

}  // namespace

std::string mera_u_name(const TensorizerSpec& s, std::size_t level, std::size_t i,
                        const std::string& prefix) {
  if (level_shares_dilation(s, level)) return prefix + "mera.shared.u";
  if (s.dilation_symmetric || (level == 1 && s.translation_symmetric_level1)) {
    return prefix + "mera.l" + std::to_string(level) + ".u0";
  }
  return prefix + "mera.l" + std::to_string(level) + ".u" + std::to_string(i);
}

std::string mera_w_name(const TensorizerSpec& s, std::size_t level, std::size_t i,
                        const std::string& prefix) {
  if (level_shares_dilation(s, level)) return prefix + "mera.shared.w";
  if (s.dilation_symmetric || (level == 1 && s.translation_symmetric_level1)) {
    return prefix + "mera.l" + std::to_string(level) + ".w0";
  }
  return prefix + "mera.l" + std::to_string(level) + ".w" + std::to_string(i);
}

std::size_t count_tn_parameters(const TensorizerSpec& spec, std::size_t h) {
  std::size_t n = 0;
  for (const auto& e : tn_shapes(spec, h, "")) n += shape_volume(e.shape);
  return n;
}

void init_tn_params(ParamSet& out, const TensorizerSpec& spec, std::size_t h, Rng& rng,
                    const std::string& prefix) {
  using I = ParamShape::Init;
  for (const auto& e : tn_shapes(spec, h, prefix)) {
    Tensor t(e.shape);
    switch (e.init) {
      case I::Uniform:
        t = rng.uniform_tensor(e.shape, -e.bound, e.bound);
        break;
      case I::Zero:
        break;
      case I::Identity4: {
        const std::size_t d = e.shape[0];
        t = rng.uniform_tensor(e.shape, -e.bound, e.bound);
        for (std::size_t a = 0; a < d; ++a) {
          for (std::size_t b = 0; b < d; ++b) t[((a * d + b) * d + a) * d + b] += 1.0;
        }
        break;
      }
      case I::Isometry: {
        const std::size_t out_dim = e.shape[0], in = e.shape[1] * e.shape[2];
        if (out_dim <= in) {
          const Tensor q = random_orthonormal_columns(in, out_dim, rng);
          for (std::size_t k = 0; k < out_dim; ++k) {
            for (std::size_t r = 0; r < in; ++r) t[k * in + r] = q(r, k);
          }
        } else {
          const Tensor q = random_orthonormal_columns(out_dim, in, rng);
          for (std::size_t k = 0; k < out_dim; ++k) {
            for (std::size_t r = 0; r < in; ++r) t[k * in + r] = q(k, r);
          }
        }
        break;
      }
      case I::MpsFirst:
      case I::MpsCore: {
        const std::size_t dl = e.shape[0], p = e.shape[1], dr = e.shape[2];
        t = rng.uniform_tensor(e.shape, -e.bound, e.bound);
        // identity on the constant slice, O(1/sqrt(D)) on the others
        const double spread = 0.5 / std::sqrt(static_cast<double>(dr));
        for (std::size_t a = 0; a < dl; ++a) {
          for (std::size_t mu = 1; mu < p; ++mu) {
            for (std::size_t b = 0; b < dr; ++b) t[(a * p + mu) * dr + b] = rng.uniform(-spread, spread);
          }
          if (a < dr) t[(a * p) * dr + a] += 1.0;
        }
        break;
      }
    }
    out.add(e.name, std::move(t));
  }
}

Tensor expand(const Tensor& c, const Tensor& w) {
  if (w.rank() != 3 || c.rank() != 1 || w.extent(2) != c.extent(0)) {
    throw ShapeError("expand: weights " + shape_string(w.shape()) + " incompatible with input " +
                     shape_string(c.shape()));
  }
  const std::size_t L = w.extent(0), pm1 = w.extent(1), h = w.extent(2);
  Tensor out(Shape{pm1 + 1, L});
  for (std::size_t l = 0; l < L; ++l) {
    out(0, l) = 1.0;
    for (std::size_t r = 0; r < pm1; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < h; ++j) s += w[(l * pm1 + r) * h + j] * c[j];
      out(r + 1, l) = s;
    }
  }
  return out;
}

Tensor tensorize_full(const Tensor& columns) {
  if (columns.rank() != 2) throw ShapeError("tensorize_full: P x L matrix required");
  const std::size_t P = columns.extent(0), L = columns.extent(1);
  if (L > 16 || guarded_power(P, L) == 0) {
    throw CapacityError("tensorize_full: P^L exceeds the 2^20 entry guard");
  }
  std::vector<double> acc{1.0};
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> next(acc.size() * P);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      for (std::size_t mu = 0; mu < P; ++mu) next[i * P + mu] = acc[i] * columns(mu, l);
    }
    acc = std::move(next);
  }
  return Tensor(Shape(L, P), std::move(acc));
}

Var tn_expand(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var activated,
              const std::string& prefix) {
  const Shape& s = tape.shape(activated);
  if (s.size() != 2) throw ShapeError("tn_expand: [B,h] input required");
  const Var q = tape.contract(activated, p[prefix + "expand"], {{1, 2}});
  const Var ones = tape.constant(Tensor(Shape{s[0], spec.L, 1}, 1.0));
  const Var parts[2] = {ones, q};
  const Var cols = tape.concat(parts, 2);
  return cols;
}

}  // namespace eelstm
