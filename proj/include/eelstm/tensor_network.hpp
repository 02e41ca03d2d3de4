#pragma once

// Expand / tensorize / linear layers with full, MPS and MERA realizations of
// the tensorized weight, plus entanglement-entropy analysis.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "eelstm/autodiff.hpp"
#include "eelstm/params.hpp"
#include "eelstm/rng.hpp"
#include "eelstm/tensor.hpp"

namespace eelstm {

enum class TnKind { Full, Mps, Mera };
enum class MpsBoundary { Open, Ring };

std::string to_string(TnKind k);
TnKind parse_tn_kind(const std::string& s);
std::string to_string(MpsBoundary b);
MpsBoundary parse_mps_boundary(const std::string& s);

/// Full-tensor size guard (entries).
inline constexpr std::size_t kFullTensorLimit = std::size_t{1} << 20;

struct TensorizerSpec {
  TnKind kind = TnKind::Mera;
  std::size_t L = 8;
  std::size_t P = 2;
  /// Virtual dimensions {D_I = P, D_II, ...}: 2 entries for MPS, log2(L) for MERA.
  std::vector<std::size_t> dims{2, 4, 4};
  bool translation_symmetric_level1 = true;
  bool dilation_symmetric = false;
  bool normalized_layers = false;
  MpsBoundary mps_boundary = MpsBoundary::Open;
  /// Half-width of the expand weight init; 0 means 1/sqrt(h).
  double expand_init = 0.0;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  std::size_t mera_levels() const;
};

/// Parameter names (prefix defaults to "tn.").
std::string mera_u_name(const TensorizerSpec& s, std::size_t level, std::size_t i,
                        const std::string& prefix = "tn.");
std::string mera_w_name(const TensorizerSpec& s, std::size_t level, std::size_t i,
                        const std::string& prefix = "tn.");

/// Adds expand, decomposition, readout and bias tensors to `out`.
void init_tn_params(ParamSet& out, const TensorizerSpec& spec, std::size_t h, Rng& rng,
                    const std::string& prefix = "tn.");

std::size_t count_tn_parameters(const TensorizerSpec& spec, std::size_t h);

// ---- tape forms (batched: leading axis B) ----

/// [B,h] activated cell state -> [B,L,P] columns (1, W_l c).
Var tn_expand(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var activated,
              const std::string& prefix = "tn.");

/// [B,L,P] columns -> [B,h] = W_T . tensor(columns) + bias.
Var tn_contract(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var columns,
                const std::string& prefix = "tn.");

/// tanh(readout(contract(expand(tanh v)))) for v of shape [B,h].
Var tn_chain(Tape& tape, const BoundParams& p, const TensorizerSpec& spec, Var v,
             const std::string& prefix = "tn.");

// ---- plain forms ----

/// h-vector (already activated) and weights [L,P-1,h] -> P x L matrix.
Tensor expand(const Tensor& c_activated, const Tensor& weights);

/// P x L columns -> rank-L tensor of extent P per axis. Guarded.
Tensor tensorize_full(const Tensor& columns);

/// W_T . tensor(columns), no bias. Full and MPS kinds.
Tensor contract_full(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                     const std::string& prefix = "tn.");
Tensor contract_mps(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                    const std::string& prefix = "tn.");
/// MERA contraction including the top linear map and bias.
Tensor contract_mera(const Tensor& columns, const ParamSet& params, const TensorizerSpec& spec,
                     const std::string& prefix = "tn.");

/// Explicit W_T of shape [h, P, ..., P] (normalization layers ignored). Guarded.
Tensor assemble_wt(const TensorizerSpec& spec, const ParamSet& params,
                   const std::string& prefix = "tn.");

// ---- entropy ----

double renyi_from_singular_values(const std::vector<double>& sv, double alpha);

/// alpha-Renyi entropy of the matricization at `cut`.
double renyi_entropy(const Tensor& t, std::size_t cut, double alpha);

/// (cut, S_alpha(cut)) for cut = 1..L-1, maximum over output rows of W_T.
std::vector<std::pair<std::size_t, double>> ee_scaling_profile(const TensorizerSpec& spec,
                                                               const ParamSet& params,
                                                               double alpha,
                                                               const std::string& prefix = "tn.");

struct LogFit {
  double c = 0.0;
  double c_prime = 0.0;
};

/// Least-squares fit of S = C + C' ln l.
LogFit fit_log_scaling(const std::vector<std::pair<std::size_t, double>>& profile);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// Schatten-p distance of the matricizations against the entropy-weighted
/// trace-norm gap.
BoundCheck worst_case_bound_check(const Tensor& w, const Tensor& w_approx, std::size_t cut,
                                  double p);

// ---- tensor train ----

struct TtChain {
  /// Core l has shape [r_{l-1}, n_l, r_l], r_0 = r_L = 1.
  std::vector<Tensor> cores;
  /// Discarded singular values per cut (cut l = index l-1).
  std::vector<std::vector<double>> discarded;
};

TtChain tt_svd(const Tensor& t, std::size_t max_bond);
Tensor tt_reconstruct(const TtChain& chain);

}  // namespace eelstm
