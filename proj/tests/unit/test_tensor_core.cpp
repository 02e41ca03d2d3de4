#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"

using namespace eelstm;
using test::random_tensor;
using test::rel_diff;

TEST_CASE("tensor shape invariants") {
  Tensor t(Shape{2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(Tensor::scalar(2.5).rank() == 0);
  CHECK(Tensor::scalar(2.5).size() == 1);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  CHECK(m(1, 0) == 4);
  CHECK(m[5] == 6);
}

TEST_CASE("matricize regroups indices") {
  Rng rng(1);
  CHECK(matricize(Tensor(Shape{2, 2, 2}), 1).shape() == Shape{2, 4});
  CHECK(matricize(Tensor(Shape{2, 3, 4}), 2).shape() == Shape{6, 4});
  const Tensor m = random_tensor({2, 2}, rng);
  CHECK(matricize(m, 1) == m);
  CHECK_THROWS_AS(matricize(Tensor(Shape{2, 2, 2}), 0), RangeError);
  CHECK_THROWS_AS(matricize(Tensor(Shape{2, 2, 2}), 3), RangeError);

  const Tensor t = random_tensor({2, 3, 2, 2}, rng);
  for (std::size_t cut = 1; cut < 4; ++cut) {
    const Tensor back = matricize(t, cut).reshaped(t.shape());
    CHECK(back == t);
  }
}

TEST_CASE("contract examples") {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor v = Tensor::vector({1, -1, 2});
  const std::size_t a1[] = {1}, b0[] = {0};
  const Tensor mv = contract(m, a1, v, b0);
  CHECK(mv.shape() == Shape{2});
  CHECK(mv[0] == 5);
  CHECK(mv[1] == 11);

  const std::size_t a0[] = {0};
  CHECK(contract(Tensor::identity(3), a0, v, b0) == v);

  Rng rng(2);
  const Tensor a = random_tensor({2, 2}, rng);
  const std::size_t both[] = {0, 1};
  double ss = 0.0;
  for (double x : a.data()) ss += x * x;
  CHECK(contract(a, both, a, both).item() == doctest::Approx(ss).epsilon(1e-15));

  const std::size_t bad[] = {0};
  CHECK_THROWS_AS(contract(m, bad, v, b0), ShapeError);
}

TEST_CASE("contract surviving axes are ordered a then b") {
  Rng rng(3);
  const Tensor a = random_tensor({2, 3, 4}, rng);
  const Tensor b = random_tensor({5, 3}, rng);
  const std::size_t aa[] = {1}, bb[] = {1};
  const Tensor c = contract(a, aa, b, bb);
  REQUIRE(c.shape() == Shape{2, 4, 5});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t l = 0; l < 5; ++l) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          const std::size_t ia[] = {i, j, k}, ib[] = {l, j};
          s += a.at(ia) * b.at(ib);
        }
        const std::size_t ic[] = {i, k, l};
        CHECK(c.at(ic) == doctest::Approx(s).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("contract is bilinear") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor a = random_tensor({3, 2, 4}, rng), a2 = random_tensor({3, 2, 4}, rng);
    const Tensor b = random_tensor({4, 2, 5}, rng);
    const double alpha = rng.uniform(-2, 2);
    const std::size_t aa[] = {1, 2}, bb[] = {1, 0};
    const Tensor lhs = contract(alpha * a + a2, aa, b, bb);
    const Tensor rhs = alpha * contract(a, aa, b, bb) + contract(a2, aa, b, bb);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("tensor product examples") {
  const Tensor e0 = Tensor::vector({1, 0});
  const Tensor p = tensor_product(e0, e0);
  CHECK(p == Tensor(Shape{2, 2}, std::vector<double>{1, 0, 0, 0}));
  const Tensor v = Tensor::vector({1.5, -2, 3});
  CHECK(tensor_product(Tensor::scalar(2), v) == 2.0 * v);
  CHECK(tensor_product(Tensor::vector({1, 2}), Tensor::vector({3, 4})) == Tensor::matrix({{3, 4}, {6, 8}}));
}

TEST_CASE("tensor product is rank one at the boundary cut") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor a = random_tensor({2, 3}, rng), b = random_tensor({3, 2}, rng);
    const auto sv = singular_values(matricize(tensor_product(a, b), 2));
    REQUIRE(sv[0] > 0.0);
    CHECK(sv[1] / sv[0] < 1e-12);
  }
}

TEST_CASE("svd examples") {
  auto sv = singular_values(Tensor::matrix({{3, 0}, {0, 1}}));
  CHECK(sv[0] == doctest::Approx(3).epsilon(1e-15));
  CHECK(sv[1] == doctest::Approx(1).epsilon(1e-15));
  sv = singular_values(Tensor(Shape{2, 2}));
  CHECK(sv[0] == 0.0);
  CHECK(sv[1] == 0.0);
  sv = singular_values(Tensor::matrix({{0, 1}, {1, 0}}));
  CHECK(sv[0] == doctest::Approx(1).epsilon(1e-15));
  CHECK(sv[1] == doctest::Approx(1).epsilon(1e-15));
  Tensor bad = Tensor::matrix({{1, 0}, {0, 1}});
  bad[1] = std::nan("");
  CHECK_THROWS_AS(svd(bad), NumericError);
  CHECK_THROWS_AS(svd(Tensor(Shape{2, 2, 2})), ShapeError);
}

TEST_CASE("svd invariants on random matrices") {
  Rng rng(6);
  for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {3, 5}, {7, 2}, {16, 16}, {33, 20}, {64, 64}}) {
    const Tensor a = random_tensor({m, n}, rng);
    const SvdResult r = svd(a);
    const std::size_t k = std::min(m, n);
    REQUIRE(r.u.shape() == Shape{m, k});
    REQUIRE(r.vt.shape() == Shape{k, n});
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(r.singular_values[i] >= 0.0);
      if (i > 0) CHECK(r.singular_values[i] <= r.singular_values[i - 1]);
    }
    Tensor us = r.u;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) us(i, j) *= r.singular_values[j];
    }
    CHECK(rel_diff(matmul(us, r.vt), a) < 1e-10);
    CHECK(max_abs_diff(matmul(transpose(r.u), r.u), Tensor::identity(k)) < 1e-10);
    CHECK(max_abs_diff(matmul(r.vt, transpose(r.vt)), Tensor::identity(k)) < 1e-10);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (r.u(i, j) != 0.0) {
          CHECK(r.u(i, j) > 0.0);
          break;
        }
      }
    }
    const SvdResult again = svd(a);
    CHECK(again.u == r.u);
    CHECK(again.vt == r.vt);
    CHECK(again.singular_values == r.singular_values);
  }
}

TEST_CASE("norms") {
  const Tensor d = Tensor::matrix({{3, 0}, {0, 4}});
  CHECK(schatten_p_norm(d, 1) == doctest::Approx(7).epsilon(1e-14));
  CHECK(schatten_p_norm(d, 2) == doctest::Approx(5).epsilon(1e-14));
  CHECK(p_norm(Tensor::vector({1, -1, 1, -1}), 2) == doctest::Approx(2).epsilon(1e-15));
  CHECK_THROWS_AS(p_norm(d, 0.5), DomainError);
  CHECK_THROWS_AS(schatten_p_norm(d, 0.9), DomainError);

  Rng rng(7);
  const Tensor a = random_tensor({5, 4}, rng);
  CHECK(schatten_p_norm(a, 2) == doctest::Approx(p_norm(a, 2)).epsilon(1e-12));
}

TEST_CASE("permute and its inverse") {
  Rng rng(8);
  const Tensor t = random_tensor({2, 3, 4}, rng);
  const std::size_t perm[] = {2, 0, 1};
  const Tensor p = permute(t, perm);
  CHECK(p.shape() == Shape{4, 2, 3});
  const auto inv = detail::invert_permutation(perm);
  CHECK(permute(p, inv) == t);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  CHECK(Rng(42).uniform() != c.uniform());
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
  const Tensor q = random_orthonormal_columns(6, 3, r);
  CHECK(max_abs_diff(matmul(transpose(q), q), Tensor::identity(3)) < 1e-12);
}
