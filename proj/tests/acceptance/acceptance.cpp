// One PASS/FAIL line per acceptance criterion. With an argument N only
// criterion N runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

#include "eelstm/cells.hpp"
#include "eelstm/cli.hpp"
#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"
#include "eelstm/tensor_network.hpp"
#include "eelstm/training.hpp"

using namespace eelstm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

cli::ExperimentConfig config(const std::string& file) {
  return cli::load_config(std::string(EELSTM_CONFIG_DIR) + "/" + file);
}

const CellSpec& model_spec(const cli::ExperimentConfig& c, const std::string& name) {
  for (const auto& m : c.models) {
    if (m.name == name) return m.spec;
  }
  throw ConfigError("no model named " + name);
}

Tensor random_tensor(const Shape& shape, Rng& rng) { return rng.uniform_tensor(shape, -1.0, 1.0); }

ParamSet noisy_tn_params(const TensorizerSpec& s, std::size_t h, Rng& rng) {
  ParamSet ps;
  init_tn_params(ps, s, h, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (double& x : ps.value(i).data()) x += rng.uniform(-0.3, 0.3);
  }
  return ps;
}

double rel_diff(const Tensor& a, const Tensor& b) {
  return frobenius_norm(a - b) / std::max(frobenius_norm(b), 1e-300);
}

// ---- 1 ----
Outcome parameter_counts() {
  const auto lor = config("lorenz.yaml");
  const auto lg = config("logistic.yaml");
  const auto ga = config("gauss.yaml");
  bool ok = true;
  std::string d;
  auto exact = [&](const std::string& label, const CellSpec& s, std::size_t want) {
    const std::size_t n = count_parameters(s);
    ok = ok && n == want;
    d += (d.empty() ? "" : "; ") + label + " " + std::to_string(n) + "/" + std::to_string(want);
  };
  auto near = [&](const std::string& label, const CellSpec& s, double want) {
    const std::size_t n = count_parameters(s);
    ok = ok && std::abs(static_cast<double>(n) - want) <= 0.2 * want;
    d += "; " + label + " " + std::to_string(n) + " vs " + num(want);
  };
  exact("lorenz benchmark", model_spec(lor, "benchmark"), 332);
  exact("logistic benchmark", model_spec(lg, "benchmark"), 35);
  near("lorenz mps", model_spec(lor, "mps"), 663);
  near("lorenz mera", model_spec(lor, "mera"), 640);
  near("logistic mps", model_spec(lg, "mps"), 1231);
  near("logistic mera", model_spec(lg, "mera"), 1053);
  near("gauss ho", model_spec(ga, "ho"), 89);
  near("gauss hot", model_spec(ga, "hot"), 315);
  return {ok, d};
}

// ---- 2 ----
Outcome gradients() {
  std::vector<std::pair<std::string, CellSpec>> specs{{"vanilla", test::vanilla(3, 2)},
                                                      {"full", test::tensorized(2, 2, TnKind::Full, 3, 2, {2, 2})},
                                                      {"mps", test::tensorized(2, 1, TnKind::Mps, 4, 2, {2, 3})}};
  for (bool norm : {false, true}) {
    for (bool tsym : {false, true}) {
      for (bool dil : {false, true}) {
        CellSpec m = test::tensorized(2, 1, TnKind::Mera, 8, 2, {2, 2, 2});
        m.tn.normalized_layers = norm;
        m.tn.translation_symmetric_level1 = tsym;
        m.tn.dilation_symmetric = dil;
        specs.push_back({"mera norm=" + std::to_string(norm) + " tsym=" + std::to_string(tsym) +
                             " dil=" + std::to_string(dil),
                         m});
      }
    }
  }
  CellSpec ho = test::vanilla(2, 1);
  ho.kind = CellKind::HO;
  ho.order = 3;
  specs.push_back({"ho", ho});
  ho.kind = CellKind::HOT;
  ho.power = 2;
  specs.push_back({"hot", ho});

  double worst = 0.0;
  std::string worst_label;
  bool ok = true;
  for (const auto& [label, s] : specs) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const GradCheckReport r = test::cell_grad_check(s, seed);
      ok = ok && r.passed && r.max_rel_error < 1e-4;
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_label = label;
      }
    }
  }
  return {ok, std::to_string(specs.size()) + " cells x 5 seeds, worst relative error " + num(worst) + " (" +
                  worst_label + ")"};
}

// ---- 3 ----
Tensor full_oracle(const TensorizerSpec& s, const ParamSet& ps, const Tensor& cols) {
  const Tensor w = assemble_wt(s, ps);
  std::vector<std::size_t> aw(s.L), at(s.L);
  std::iota(aw.begin(), aw.end(), 1);
  std::iota(at.begin(), at.end(), 0);
  return contract(w, aw, tensorize_full(cols), at);
}

Outcome decompositions() {
  Rng rng(3);
  double worst = 0.0;
  for (std::size_t L : {2, 4, 8}) {
    for (std::size_t P : {2, 3}) {
      for (std::size_t D : {2, 3, 4}) {
        Tensor cols = random_tensor({P, L}, rng);
        for (std::size_t l = 0; l < L; ++l) cols(0, l) = 1.0;
        TensorizerSpec mps;
        mps.kind = TnKind::Mps;
        mps.L = L;
        mps.P = P;
        mps.dims = {P, D};
        const ParamSet pm = noisy_tn_params(mps, 3, rng);
        worst = std::max(worst, rel_diff(contract_mps(cols, pm, mps), full_oracle(mps, pm, cols)));

        TensorizerSpec mera = mps;
        mera.kind = TnKind::Mera;
        mera.dims = {P};
        for (std::size_t n = L; n > 2; n /= 2) mera.dims.push_back(D);
        for (bool tsym : {true, false}) {
          mera.translation_symmetric_level1 = tsym;
          const ParamSet pr = noisy_tn_params(mera, 3, rng);
          const Tensor want = full_oracle(mera, pr, cols) + pr["tn.bias"];
          worst = std::max(worst, rel_diff(contract_mera(cols, pr, mera), want));
        }
      }
    }
  }
  double tt = 0.0;
  for (const Shape& shape : {Shape{2, 2, 2, 2, 2, 2}, Shape{3, 2, 4, 3}, Shape{2, 3, 2, 3, 2}, Shape{4, 4, 4}}) {
    const Tensor t = random_tensor(shape, rng);
    tt = std::max(tt, rel_diff(tt_reconstruct(tt_svd(t, 1u << 12)), t));
  }
  return {worst < 1e-10 && tt < 1e-10, "grid worst " + num(worst) + ", tt_svd worst " + num(tt)};
}

// ---- 4 ----
Outcome entropy_suite() {
  Rng rng(4);
  Tensor cols = random_tensor({2, 6}, rng);
  const Tensor r1 = tensorize_full(cols);
  double rank1 = 0.0;
  for (std::size_t cut = 1; cut < 6; ++cut) rank1 = std::max(rank1, std::abs(renyi_entropy(r1, cut, 1.0)));
  const double id = std::abs(renyi_entropy(0.7 * Tensor::identity(2), 1, 1.0) - std::log(2.0));

  double mps_excess = -1e300;
  std::size_t instances = 0;
  for (int rep = 0; rep < 100; ++rep) {
    TensorizerSpec s;
    s.kind = TnKind::Mps;
    s.L = 8;
    s.P = 2;
    const std::size_t D = 2 + rng.below(3);
    s.dims = {2, D};
    s.mps_boundary = rep % 2 ? MpsBoundary::Ring : MpsBoundary::Open;
    const ParamSet ps = noisy_tn_params(s, 2, rng);
    for (const auto& [cut, e] : ee_scaling_profile(s, ps, 1.0)) {
      mps_excess = std::max(mps_excess, e - 2.0 * std::log(static_cast<double>(D)));
    }
    ++instances;
  }

  double dim_excess = -1e300;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t L = 2 + rng.below(5), P = 2 + rng.below(2);
    const Tensor t = random_tensor(Shape(L, P), rng);
    for (std::size_t cut = 1; cut < L; ++cut) {
      const double bound = static_cast<double>(std::min(cut, L - cut)) * std::log(static_cast<double>(P));
      for (double a : {1.0, 2.0}) dim_excess = std::max(dim_excess, renyi_entropy(t, cut, a) - bound);
    }
  }
  for (int rep = 0; rep < 20; ++rep) {
    TensorizerSpec s;
    s.kind = TnKind::Mera;
    s.L = 16;
    s.P = 2;
    s.dims = {2, 2, 2, 2};
    const ParamSet ps = noisy_tn_params(s, 2, rng);
    for (const auto& [cut, e] : ee_scaling_profile(s, ps, 1.0)) {
      dim_excess = std::max(dim_excess, e - static_cast<double>(std::min(cut, 16 - cut)) * std::log(2.0));
    }
  }
  const bool ok = rank1 <= 1e-12 && id <= 1e-12 && mps_excess <= 1e-9 && dim_excess <= 1e-9;
  return {ok, "rank-1 " + num(rank1) + ", identity error " + num(id) + ", MPS bound margin " + num(-mps_excess) +
                  " over " + std::to_string(instances) + " instances, dimension bound margin " + num(-dim_excess)};
}

// ---- 5 ----
Outcome worst_case_bound() {
  Rng rng(5);
  std::size_t violations = 0;
  double worst = -1e300;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t L = 2 + rng.below(4);
    Shape shape(L);
    for (auto& e : shape) e = 2 + rng.below(2);
    const Tensor w = random_tensor(shape, rng);
    Tensor approx;
    switch (rep % 3) {
      case 0:
        approx = random_tensor(shape, rng);
        break;
      case 1:
        approx = tt_reconstruct(tt_svd(w, 1 + rng.below(2)));
        break;
      default:
        approx = w + 0.1 * random_tensor(shape, rng);
        break;
    }
    const std::size_t cut = 1 + rng.below(L - 1);
    const double p = static_cast<double>(1 + rng.below(3));
    const BoundCheck b = worst_case_bound_check(w, approx, cut, p);
    worst = std::max(worst, b.rhs - b.lhs);
    if (b.rhs - b.lhs > 1e-9) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000, max rhs - lhs " + num(worst)};
}

// ---- 6 ----
Outcome jacobian_bounds() {
  Rng rng(6);
  std::size_t failed = 0;
  for (int rep = 0; rep < 100; ++rep) {
    CellSpec s = test::vanilla(1 + rng.below(6), 1 + rng.below(4));
    if (rep % 2) {
      s.kind = CellKind::HO;
      s.order = 1 + rng.below(3);
    }
    ParamSet ps = init_cell_params(s, rng);
    const double scale = rng.uniform(0.1, 5.0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (double& x : ps.value(i).data()) x = scale * rng.uniform(-1.0, 1.0);
    }
    const Tensor sv = rng.uniform_tensor({s.h}, -1.0, 1.0);
    const Tensor xv = rng.uniform_tensor({s.d}, -2.0, 2.0);
    if (!jacobian_bound_check(s, ps, sv, xv, 1e-6).holds) ++failed;
  }
  return {failed == 0, std::to_string(100 - failed) + "/100 instances within bounds"};
}

// ---- 7 ----
double best_polynomial_error(std::size_t L, Rng& rng) {
  const std::size_t N = 801, F = std::size_t{1} << L;
  Tensor weights(Shape{L, 1, 1});
  for (double& w : weights.data()) w = rng.uniform(0.5, 1.5);
  Tensor a(Shape{N, F});
  std::vector<double> y(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double x = -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(N);
    const Tensor feat = tensorize_full(expand(Tensor::vector({x}), weights));
    for (std::size_t f = 0; f < F; ++f) a(i, f) = feat[f];
    y[i] = std::sin(3.0 * x);
  }
  // least squares through the pseudo-inverse
  const SvdResult s = svd(a);
  const std::size_t k = s.singular_values.size();
  std::vector<double> fit(N, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    if (s.singular_values[j] <= 1e-12 * s.singular_values[0]) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < N; ++i) proj += s.u(i, j) * y[i];
    for (std::size_t i = 0; i < N; ++i) fit[i] += s.u(i, j) * proj;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) err += (fit[i] - y[i]) * (fit[i] - y[i]);
  return std::sqrt(2.0 * err / static_cast<double>(N));
}

Outcome approximation_trend() {
  Rng rng(7);
  std::vector<double> errs;
  std::string d = "L2 error";
  for (std::size_t L : {1, 2, 4, 8}) {
    errs.push_back(best_polynomial_error(L, rng));
    d += " L=" + std::to_string(L) + ":" + num(errs.back());
  }
  bool ok = errs.front() >= 10.0 * errs.back();
  for (std::size_t i = 1; i < errs.size(); ++i) ok = ok && errs[i] <= errs[i - 1] * (1.0 + 1e-9);
  return {ok, d};
}

// ---- 8 ----
Outcome lyapunov_regressions() {
  bool ok = true;
  std::string d;
  auto lam = [](SystemName n) {
    const SystemDef s = make_system(n);
    return lyapunov(s, s.train_ic);
  };
  auto near = [&](const std::string& label, double v, double want, double tol) {
    ok = ok && std::abs(v - want) <= tol;
    d += (d.empty() ? "" : "; ") + label + " " + num(v);
  };
  near("logistic", lam(SystemName::Logistic)[0], std::log(2.0), 0.02);
  near("henon", lam(SystemName::Henon)[0], 0.42, 0.03);
  const auto ch = lam(SystemName::Chirikov);
  near("chirikov", ch[0], 0.45, 0.05);
  near("chirikov sum", ch[0] + ch[1], 0.0, 0.05);
  near("lorenz", lam(SystemName::Lorenz)[0], 0.91, 0.1);
  near("rossler", lam(SystemName::Rossler)[0], 0.07, 0.03);
  near("thomas", lam(SystemName::Thomas)[0], 0.06, 0.02);
  return {ok, d};
}

// ---- 9 - 12 ----
struct Trained {
  std::map<std::string, std::vector<double>> one_step;  // test RMSE per seed
  std::map<std::string, std::vector<std::vector<double>>> rollout;
};

Trained train_models(const cli::ExperimentConfig& c, const std::vector<std::string>& names, bool with_rollout) {
  const WindowedDataset ds = cli::build_dataset(c);
  Trained out;
  for (const std::string& name : names) {
    const CellSpec& spec = model_spec(c, name);
    for (std::size_t r = 0; r < c.training.replicates; ++r) {
      const TrainResult res = train(cli::train_config(c, spec, cli::replicate_seed(c, r)), ds);
      out.one_step[name].push_back(evaluate(res.best, ds, ds.test));
      if (with_rollout) out.rollout[name].push_back(rollout_rmse(res.best, ds, ds.test, c.horizons));
      std::printf("  %s seed %llu: test RMSE %s\n", name.c_str(),
                  static_cast<unsigned long long>(cli::replicate_seed(c, r)), num(out.one_step[name].back()).c_str());
      std::fflush(stdout);
    }
  }
  return out;
}

Outcome logistic_reproduction() {
  const auto c = config("logistic.yaml");
  if (c.training.replicates != 5) throw ConfigError("logistic config must train 5 replicates");
  const Trained t = train_models(c, {"benchmark", "mera"}, false);
  const double b = median(t.one_step.at("benchmark")), m = median(t.one_step.at("mera"));
  const bool ok = m < 0.15 && m < 0.5 * b && b >= 0.10 && b <= 0.40;
  return {ok, "median test RMSE mera " + num(m) + ", benchmark " + num(b)};
}

Outcome lorenz_ordering() {
  const auto c = config("lorenz.yaml");
  const Trained t = train_models(c, {"benchmark", "deeper", "mps", "mera"}, false);
  const double b = median(t.one_step.at("benchmark")), dp = median(t.one_step.at("deeper"));
  const double mp = median(t.one_step.at("mps")), me = median(t.one_step.at("mera"));
  const bool ok = me < mp && mp < dp && dp < b && me < 0.15;
  return {ok, "median test RMSE mera " + num(me) + " < mps " + num(mp) + " < deeper " + num(dp) + " < benchmark " +
                  num(b)};
}

Outcome thomas_sites() {
  const auto c = config("thomas_sites.yaml");
  const Trained t = train_models(c, {"benchmark", "site_a", "site_b", "site_c", "site_d"}, false);
  const double a = median(t.one_step.at("site_a"));
  const double rest = std::min({median(t.one_step.at("site_b")), median(t.one_step.at("site_c")),
                                median(t.one_step.at("benchmark"))});
  std::string d = "median test RMSE";
  for (const char* n : {"site_a", "site_b", "site_c", "site_d", "benchmark"}) {
    d += std::string(" ") + n + " " + num(median(t.one_step.at(n)));
  }
  return {a < rest, d};
}

Outcome gauss_rollout() {
  const auto c = config("gauss.yaml");
  if (c.horizons != std::vector<std::size_t>{1, 2, 4}) throw ConfigError("gauss config must evaluate horizons 1, 2, 4");
  const Trained t = train_models(c, {"benchmark", "ho", "mera"}, true);
  auto med = [&](const std::string& n, std::size_t k) {
    std::vector<double> v;
    for (const auto& r : t.rollout.at(n)) v.push_back(r[k]);
    return median(v);
  };
  const double m1 = med("mera", 0), m2 = med("mera", 1), m4 = med("mera", 2);
  const double b1 = med("benchmark", 0), b4 = med("benchmark", 2), h4 = med("ho", 2);
  const bool ok = m1 < m2 && m2 < m4 && m1 < b1 && h4 >= b4;
  return {ok, "mera RMSE(1,2,4) " + num(m1) + ", " + num(m2) + ", " + num(m4) + "; benchmark 1-step " + num(b1) +
                  ", 4-step " + num(b4) + "; ho 4-step " + num(h4)};
}

// ---- 13 ----
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "eelstm_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (root / "config.yaml").string();
  std::ofstream(cfg) << R"(system: {name: lorenz, dt: 0.5}
dataset: {input_steps: 4, sizes: [320, 80, 100]}
models:
  - {name: vanilla, kind: vanilla, h: 3, d: 3}
  - {name: stacked, kind: stacked, h: 3, d: 3, depth: 2}
  - {name: ho, kind: ho, h: 2, d: 3, order: 2}
  - {name: hot, kind: hot, h: 2, d: 3, order: 2, power: 2, bond: 2}
  - {name: mps, kind: tensorized, h: 3, d: 3, site: B, tn: {kind: mps, L: 4, P: 2, dims: [2, 3]}}
  - {name: mera, kind: tensorized, h: 3, d: 3, tn: {kind: mera, L: 4, P: 2, dims: [2, 2], normalized_layers: true}}
training: {epochs: 3, batch_size: 32, replicates: 2}
evaluation: {horizons: [1, 3], alphas: [1, 2]}
seed: 11
)";
  std::vector<std::vector<std::string>> commands;
  for (const char* cmd : {"generate", "train", "eval", "entropy"}) commands.push_back({cmd, "--config", cfg});
  commands.push_back({"lyapunov", "henon", "--n", "20000"});
  for (const char* run : {"a", "b"}) {
    const std::string out = (root / run).string();
    for (auto args : commands) {
      args.insert(args.end(), {"--out", out});
      if (cli::run(args) != 0) return {false, "command " + args[0] + " failed"};
    }
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path twin = root / "b" / e.path().filename();
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++differing;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "b")) ++files_b;
  fs::remove_all(root);
  const bool ok = differing == 0 && files == files_b && files > 0;
  return {ok, std::to_string(files) + " files over 5 commands, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parameter counts", parameter_counts},
      {"gradient correctness", gradients},
      {"decomposition oracles", decompositions},
      {"entropy suite", entropy_suite},
      {"worst-case truncation bound", worst_case_bound},
      {"jacobian bounds", jacobian_bounds},
      {"approximation trend", approximation_trend},
      {"lyapunov regressions", lyapunov_regressions},
      {"logistic reproduction", logistic_reproduction},
      {"lorenz ordering", lorenz_ordering},
      {"thomas site ordering", thomas_sites},
      {"gauss rollout trend", gauss_rollout},
      {"determinism", determinism},
  };
  std::size_t only = 0;
  if (argc > 1) only = static_cast<std::size_t>(std::stoul(argv[1]));
  if (only > criteria.size()) {
    std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
    return 2;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu [%s]: %s (%s; %.1f s)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures ? 1 : 0;
}
