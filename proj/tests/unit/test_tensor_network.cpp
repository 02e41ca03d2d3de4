#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"
#include "eelstm/tensor_network.hpp"

using namespace eelstm;
using test::random_tensor;
using test::rel_diff;

namespace {

TensorizerSpec make_spec(TnKind kind, std::size_t L, std::size_t P, std::vector<std::size_t> dims) {
  TensorizerSpec s;
  s.kind = kind;
  s.L = L;
  s.P = P;
  s.dims = std::move(dims);
  return s;
}

ParamSet noisy_params(const TensorizerSpec& s, std::size_t h, Rng& rng) {
  ParamSet ps;
  init_tn_params(ps, s, h, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (double& x : ps.value(i).data()) x += rng.uniform(-0.3, 0.3);
  }
  return ps;
}

Tensor oracle(const TensorizerSpec& s, const ParamSet& ps, const Tensor& cols) {
  const Tensor w = assemble_wt(s, ps);
  std::vector<std::size_t> aw(s.L), at(s.L);
  std::iota(aw.begin(), aw.end(), 1);
  std::iota(at.begin(), at.end(), 0);
  return contract(w, aw, tensorize_full(cols), at);
}

Tensor random_columns(std::size_t P, std::size_t L, Rng& rng) {
  Tensor c = random_tensor({P, L}, rng);
  for (std::size_t l = 0; l < L; ++l) c(0, l) = 1.0;
  return c;
}

std::vector<std::size_t> mera_dims(std::size_t L, std::size_t P, std::size_t D) {
  std::vector<std::size_t> d{P};
  for (std::size_t n = L; n > 2; n /= 2) d.push_back(D);
  return d;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(make_spec(TnKind::Mera, 8, 2, {2, 4, 4}).validate());
  CHECK_THROWS_AS(make_spec(TnKind::Mera, 6, 2, {2, 4, 4}).validate(), ConfigError);
  CHECK_THROWS_AS(make_spec(TnKind::Mera, 8, 2, {3, 4, 4}).validate(), ConfigError);
  CHECK_THROWS_AS(make_spec(TnKind::Mera, 8, 2, {2, 4}).validate(), ConfigError);
  CHECK_THROWS_AS(make_spec(TnKind::Mps, 8, 2, {2, 4, 4}).validate(), ConfigError);
  CHECK_THROWS_AS(make_spec(TnKind::Mps, 8, 1, {1, 4}).validate(), ConfigError);
  auto s = make_spec(TnKind::Mera, 8, 2, {2, 4, 3});
  s.dilation_symmetric = true;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.expand_init = -1.0;
  s.dilation_symmetric = false;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("expand examples") {
  Rng rng(1);
  const Tensor w = random_tensor({4, 2, 3}, rng);
  const Tensor z = expand(Tensor(Shape{3}), w);
  REQUIRE(z.shape() == Shape{3, 4});
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(z(0, l) == 1.0);
    CHECK(z(1, l) == 0.0);
    CHECK(z(2, l) == 0.0);
  }
  const Tensor w2(Shape{2, 1, 1}, std::vector<double>{2, 3});
  const Tensor cols = expand(Tensor::vector({0.5}), w2);
  CHECK(cols == Tensor::matrix({{1, 1}, {1.0, 1.5}}));
  CHECK_THROWS_AS(expand(Tensor(Shape{2}), w), ShapeError);
}

TEST_CASE("tensorize_full examples") {
  Tensor e0(Shape{2, 3});
  for (std::size_t l = 0; l < 3; ++l) e0(0, l) = 1.0;
  const Tensor t = tensorize_full(e0);
  CHECK(t.shape() == Shape{2, 2, 2});
  CHECK(t[0] == 1.0);
  CHECK(std::accumulate(t.data().begin(), t.data().end(), 0.0) == 1.0);
  CHECK(tensorize_full(Tensor::matrix({{1, 1}, {2, 3}})) == Tensor::matrix({{1, 3}, {2, 6}}));
  Rng rng(2);
  const Tensor r = tensorize_full(random_columns(3, 4, rng));
  for (std::size_t cut = 1; cut < 4; ++cut) {
    const auto sv = singular_values(matricize(r, cut));
    CHECK(sv[1] / sv[0] < 1e-12);
  }
  CHECK_THROWS_AS(tensorize_full(Tensor(Shape{2, 21}, 1.0)), CapacityError);
  CHECK_THROWS_AS(tensorize_full(Tensor(Shape{4, 11}, 1.0)), CapacityError);
}

TEST_CASE("decompositions match the full-tensor oracle") {
  Rng rng(3);
  for (std::size_t L : {2, 4, 8}) {
    for (std::size_t P : {2, 3}) {
      for (std::size_t D : {2, 3, 4}) {
        CAPTURE(L);
        CAPTURE(P);
        CAPTURE(D);
        const Tensor cols = random_columns(P, L, rng);
        const auto mps = make_spec(TnKind::Mps, L, P, {P, D});
        const ParamSet pm = noisy_params(mps, 3, rng);
        CHECK(rel_diff(contract_mps(cols, pm, mps), oracle(mps, pm, cols)) < 1e-10);

        auto mera = make_spec(TnKind::Mera, L, P, mera_dims(L, P, D));
        for (bool tsym : {true, false}) {
          mera.translation_symmetric_level1 = tsym;
          const ParamSet pr = noisy_params(mera, 3, rng);
          const Tensor want = oracle(mera, pr, cols) + pr["tn.bias"];
          CHECK(rel_diff(contract_mera(cols, pr, mera), want) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("full kind contracts against the explicit tensor") {
  Rng rng(4);
  const auto s = make_spec(TnKind::Full, 3, 2, {2, 2});
  const ParamSet ps = noisy_params(s, 2, rng);
  const Tensor cols = random_columns(2, 3, rng);
  CHECK(rel_diff(contract_full(cols, ps, s), oracle(s, ps, cols)) < 1e-12);
}

TEST_CASE("ring MPS matches its oracle and the scalar closed form") {
  Rng rng(5);
  auto s = make_spec(TnKind::Mps, 4, 2, {2, 3});
  s.mps_boundary = MpsBoundary::Ring;
  const ParamSet ps = noisy_params(s, 2, rng);
  const Tensor cols = random_columns(2, 4, rng);
  CHECK(rel_diff(contract_mps(cols, ps, s), oracle(s, ps, cols)) < 1e-10);

  auto s1 = make_spec(TnKind::Mps, 3, 2, {2, 1});
  s1.mps_boundary = MpsBoundary::Ring;
  ParamSet p1 = noisy_params(s1, 2, rng);
  const Tensor c1 = random_columns(2, 3, rng);
  double prod = 1.0;
  for (std::size_t l = 0; l < 3; ++l) {
    const Tensor& core = p1["tn.mps.core" + std::to_string(l)];
    prod *= core[0] * c1(0, l) + core[1] * c1(1, l);
  }
  const Tensor got = contract_mps(c1, p1, s1);
  const Tensor& w0 = p1["tn.mps.w0"];
  for (std::size_t i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(w0[i] * prod).epsilon(1e-12));
}

TEST_CASE("zero weights give zero output") {
  Rng rng(6);
  const auto mps = make_spec(TnKind::Mps, 4, 2, {2, 3});
  ParamSet pm = noisy_params(mps, 2, rng);
  for (std::size_t i = 0; i < pm.size(); ++i) {
    if (pm.name(i).find("mps.core") != std::string::npos) pm.value(i) = Tensor(pm.value(i).shape());
  }
  const Tensor cols = random_columns(2, 4, rng);
  CHECK(contract_mps(cols, pm, mps) == Tensor(Shape{2}));

  const auto mera = make_spec(TnKind::Mera, 4, 2, {2, 2});
  ParamSet pr = noisy_params(mera, 2, rng);
  pr["tn.top"] = Tensor(pr["tn.top"].shape());
  pr["tn.bias"] = Tensor(pr["tn.bias"].shape());
  CHECK(contract_mera(cols, pr, mera) == Tensor(Shape{2}));
}

TEST_CASE("identity MERA flow selects the first readout column") {
  Rng rng(7);
  auto s = make_spec(TnKind::Mera, 8, 3, {3, 2, 2});
  ParamSet ps = noisy_params(s, 3, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string& n = ps.name(i);
    Tensor& t = ps.value(i);
    if (n.find(".u") != std::string::npos) {
      t = Tensor(t.shape());
      const std::size_t d = t.extent(0);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          const std::size_t idx[] = {a, b, a, b};
          t.at(idx) = 1.0;
        }
      }
    } else if (n.find(".w") != std::string::npos && n.find("mera") != std::string::npos) {
      t = Tensor(t.shape());
      t[0] = 1.0;
    }
  }
  Tensor cols(Shape{3, 8});
  for (std::size_t l = 0; l < 8; ++l) cols(0, l) = 1.0;
  const Tensor out = contract_mera(cols, ps, s);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i] == doctest::Approx(ps["tn.top"](i, 0) + ps["tn.bias"][i]).epsilon(1e-14));
  }
}

TEST_CASE("parameter counts") {
  CHECK(count_tn_parameters(make_spec(TnKind::Full, 3, 2, {2, 2}), 2) == 24);
  for (std::size_t D : {2, 3, 4}) {
    const auto c = [&](std::size_t L) { return count_tn_parameters(make_spec(TnKind::Mps, L, 2, {2, D}), 3); };
    CHECK(c(8) - c(4) == c(12) - c(8));
  }
  const auto dil = [](std::size_t L) {
    auto s = make_spec(TnKind::Mera, L, 2, mera_dims(L, 2, 2));
    s.dims.assign(s.dims.size(), 2);
    s.dilation_symmetric = true;
    const std::size_t h = 2;
    return count_tn_parameters(s, h) - L * (s.P - 1) * h;
  };
  CHECK(dil(4) == dil(8));
  CHECK(dil(8) == dil(16));

  auto s = make_spec(TnKind::Mera, 8, 2, {2, 4, 4});
  Rng rng(8);
  for (bool tsym : {false, true}) {
    s.translation_symmetric_level1 = tsym;
    ParamSet ps;
    init_tn_params(ps, s, 2, rng);
    CHECK(ps.scalar_count() == count_tn_parameters(s, 2));
  }
  auto untied = s;
  untied.translation_symmetric_level1 = false;
  // four level-1 disentanglers and isometries collapse into one of each
  CHECK(count_tn_parameters(untied, 2) - count_tn_parameters(s, 2) == 3 * (16 + 16));
}

TEST_CASE("expand_init sets the expand weight range") {
  auto s = make_spec(TnKind::Mera, 4, 2, {2, 2});
  s.expand_init = 5.0;
  Rng rng(9);
  ParamSet ps;
  init_tn_params(ps, s, 4, rng);
  double mx = 0.0;
  for (double x : ps["tn.expand"].data()) mx = std::max(mx, std::abs(x));
  CHECK(mx <= 5.0);
  CHECK(mx > 0.5);
}

TEST_CASE("renyi entropy examples") {
  Rng rng(10);
  const Tensor r1 = tensorize_full(random_columns(2, 4, rng));
  for (std::size_t cut = 1; cut < 4; ++cut) {
    for (double a : {1.0, 2.0, 3.5}) CHECK(std::abs(renyi_entropy(r1, cut, a)) <= 1e-12);
  }
  CHECK(renyi_entropy(Tensor::identity(2), 1, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(renyi_entropy(Tensor(Shape{2, 2}), 1, 1.0), DomainError);
  CHECK_THROWS_AS(renyi_entropy(Tensor::identity(2), 1, 0.5), DomainError);
}

TEST_CASE("renyi entropy is non-increasing in alpha and bounded by dimension") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor t = random_tensor({2, 2, 2, 2, 2, 2}, rng);
    for (std::size_t cut = 1; cut < 6; ++cut) {
      double prev = renyi_entropy(t, cut, 1.0);
      CHECK(prev <= static_cast<double>(std::min(cut, 6 - cut)) * std::log(2.0) + 1e-9);
      for (double a : {1.5, 2.0, 3.0, 5.0}) {
        const double s = renyi_entropy(t, cut, a);
        CHECK(s <= prev + 1e-9);
        prev = s;
      }
    }
  }
}

TEST_CASE("MPS entanglement is bounded by the bond dimension") {
  Rng rng(12);
  for (std::size_t D : {2, 3}) {
    for (auto boundary : {MpsBoundary::Open, MpsBoundary::Ring}) {
      auto s = make_spec(TnKind::Mps, 8, 2, {2, D});
      s.mps_boundary = boundary;
      for (int rep = 0; rep < 10; ++rep) {
        const ParamSet ps = noisy_params(s, 2, rng);
        for (const auto& [cut, e] : ee_scaling_profile(s, ps, 1.0)) {
          CAPTURE(cut);
          CHECK(e <= 2.0 * std::log(static_cast<double>(D)) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("MERA entanglement grows at most logarithmically") {
  Rng rng(13);
  const std::size_t D = 2;
  const auto s = make_spec(TnKind::Mera, 16, 2, {2, D, D, D});
  for (int rep = 0; rep < 5; ++rep) {
    const ParamSet ps = noisy_params(s, 2, rng);
    const auto prof = ee_scaling_profile(s, ps, 1.0);
    CHECK(prof.size() == 15);
    const LogFit f = fit_log_scaling(prof);
    CHECK(f.c_prime <= std::log(static_cast<double>(D)) * 1.1);
  }
}

TEST_CASE("log fit recovers exact coefficients") {
  std::vector<std::pair<std::size_t, double>> prof;
  for (std::size_t l = 1; l < 8; ++l) prof.push_back({l, 0.3 + 0.7 * std::log(static_cast<double>(l))});
  const LogFit f = fit_log_scaling(prof);
  CHECK(f.c == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.c_prime == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(fit_log_scaling({{1, 0.0}}), DomainError);
}

TEST_CASE("worst-case bound") {
  Rng rng(14);
  const Tensor w = random_tensor({2, 2, 2, 2}, rng);
  const BoundCheck same = worst_case_bound_check(w, w, 2, 2.0);
  CHECK(same.lhs == 0.0);
  CHECK(std::abs(same.rhs) <= 1e-12);
  CHECK(same.holds);
  const Tensor approx = tt_reconstruct(tt_svd(w, 1));
  for (std::size_t cut = 1; cut < 4; ++cut) CHECK(worst_case_bound_check(w, approx, cut, 2.0).holds);
  CHECK_THROWS_AS(worst_case_bound_check(w, w, 1, 0.5), DomainError);
  std::size_t violations = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Tensor a = random_tensor({2, 3, 2, 2}, rng);
    const Tensor b = random_tensor({2, 3, 2, 2}, rng);
    const std::size_t cut = 1 + rng.below(3);
    const double p = static_cast<double>(1 + rng.below(3));
    if (!worst_case_bound_check(a, b, cut, p).holds) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("tt_svd reconstruction") {
  Rng rng(15);
  const Tensor r1 = tensorize_full(random_columns(2, 5, rng));
  CHECK(rel_diff(tt_reconstruct(tt_svd(r1, 1)), r1) < 1e-10);
  const Tensor t = random_tensor({2, 2, 2, 2, 2, 2}, rng);
  const TtChain full = tt_svd(t, 8);
  CHECK(rel_diff(tt_reconstruct(full), t) < 1e-10);
  for (std::size_t l = 0; l < full.cores.size(); ++l) CHECK(full.cores[l].rank() == 3);
  const Tensor rnd3 = random_tensor({3, 2, 4, 3}, rng);
  CHECK(rel_diff(tt_reconstruct(tt_svd(rnd3, 64)), rnd3) < 1e-10);

  // truncated: error is at least the worst single-cut tail and at most the root sum of tails
  const TtChain trunc = tt_svd(t, 1);
  const double err = frobenius_norm(tt_reconstruct(trunc) - t);
  double worst = 0.0, total = 0.0;
  for (std::size_t cut = 1; cut < 6; ++cut) {
    const auto sv = singular_values(matricize(t, cut));
    double tail = 0.0;
    for (std::size_t i = 1; i < sv.size(); ++i) tail += sv[i] * sv[i];
    worst = std::max(worst, std::sqrt(tail));
  }
  for (const auto& d : trunc.discarded) {
    for (double s : d) total += s * s;
  }
  const auto sv1 = singular_values(matricize(t, 1));
  REQUIRE(trunc.discarded[0].size() == 1);
  CHECK(trunc.discarded[0][0] == doctest::Approx(sv1[1]).epsilon(1e-12));
  CHECK(err >= worst - 1e-12);
  CHECK(err <= std::sqrt(total) + 1e-12);
}
