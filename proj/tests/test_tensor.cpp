#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <vector>

#include "spoofvqa/rng.hpp"
#include "spoofvqa/tensor.hpp"
#include "support/gradcheck.hpp"

using namespace spoofvqa;
using spoofvqa::testsupport::grad_check;

namespace {

// independent triple-loop oracle
std::vector<double> naive_matmul(const std::vector<double>& a,
                                 const std::vector<double>& b, std::size_t m,
                                 std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t kk = 0; kk < k; ++kk)
        c[i * n + j] += a[i * k + kk] * b[kk * n + j];
  return c;
}

// softmax evaluated in 50-decimal-digit floats
std::vector<double> mp_softmax(const std::vector<double>& x) {
  using mp = boost::multiprecision::cpp_bin_float_50;
  std::vector<mp> e(x.size());
  mp total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = exp(mp(x[i]));
    total += e[i];
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<double>(e[i] / total);
  return out;
}

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape,
                     bool requires_grad = false) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor::from_data(std::move(shape), rng.normal_vector(n),
                           requires_grad);
}

}  // namespace

TEST_CASE("matmul identity and hand-computed cases") {
  auto eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  auto b = Tensor::from_data({2, 2}, {3, 4, 5, 6});
  auto c = matmul(eye, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.values()[i] == b.values()[i]);

  auto row = Tensor::from_data({1, 2}, {1, 2});
  auto col = Tensor::from_data({2, 1}, {3, 4});
  CHECK(matmul(row, col).scalar() == 11.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(101);
  auto a = random_tensor(rng, {4, 5});
  auto b = random_tensor(rng, {5, 3});
  auto c = matmul(a, b);
  auto expect =
      naive_matmul({a.values().begin(), a.values().end()},
                   {b.values().begin(), b.values().end()}, 4, 5, 3);
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(std::fabs(c.values()[i] - expect[i]) < 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       doctest::Contains("[2x3] x [2x3]"),
                       std::invalid_argument);
}

TEST_CASE("softmax symmetry and stability") {
  auto u = softmax(Tensor::from_data({3}, {0, 0, 0}));
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  auto s = softmax(Tensor::from_data({3}, {1000, 0, 0}));
  CHECK(s.values()[0] == doctest::Approx(1.0));
  CHECK(s.values()[1] == doctest::Approx(0.0));
  CHECK(s.values()[2] == doctest::Approx(0.0));
}

TEST_CASE("softmax matches multiprecision oracle and rows sum to one") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x = rng.normal_vector(7, 0.0, 3.0);
    auto y = softmax(Tensor::from_data({7}, x));
    auto expect = mp_softmax(x);
    double total = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(std::fabs(y.values()[i] - expect[i]) < 1e-12);
      total += y.values()[i];
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("layernorm constant and two-point slices") {
  auto gain = Tensor::full({3}, 1.0);
  auto bias = Tensor::zeros({3});
  auto y = layernorm(Tensor::from_data({3}, {5, 5, 5}), gain, bias);
  for (double v : y.values()) CHECK(v == doctest::Approx(0.0));

  auto g2 = Tensor::full({2}, 1.0);
  auto b2 = Tensor::zeros({2});
  auto z = layernorm(Tensor::from_data({2}, {1, -1}), g2, b2, 1e-12);
  CHECK(z.values()[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(z.values()[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("layernorm matches direct formula oracle") {
  Rng rng(13);
  const double eps = 1e-10;
  std::vector<double> x = rng.normal_vector(9, 0.5, 2.0);
  std::vector<double> g = rng.normal_vector(9, 1.0, 0.1);
  std::vector<double> b = rng.normal_vector(9, 0.0, 0.1);
  auto y = layernorm(Tensor::from_data({9}, x), Tensor::from_data({9}, g),
                     Tensor::from_data({9}, b), eps);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= 9.0;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= 9.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double expect = (x[i] - mean) / std::sqrt(var + eps) * g[i] + b[i];
    CHECK(std::fabs(y.values()[i] - expect) < 1e-10);
  }

  // unit gain / zero bias: mean ~ 0, variance ~ 1
  auto z = layernorm(Tensor::from_data({9}, x), Tensor::full({9}, 1.0),
                     Tensor::zeros({9}), eps);
  double zm = 0.0, zv = 0.0;
  for (double v : z.values()) zm += v;
  zm /= 9.0;
  for (double v : z.values()) zv += (v - zm) * (v - zm);
  zv /= 9.0;
  CHECK(std::fabs(zm) < 1e-10);
  CHECK(std::fabs(zv - 1.0) < 1e-6);
}

TEST_CASE("backward: sum gives ones, x*x gives 2x") {
  auto x = Tensor::from_data({3}, {1, 2, 3}, true);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(x));
    for (double g : x.grad()) CHECK(g == 1.0);
  }
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(x, x)));
    CHECK(x.grad()[0] == doctest::Approx(2.0));
    CHECK(x.grad()[1] == doctest::Approx(4.0));
    CHECK(x.grad()[2] == doctest::Approx(6.0));
  }
}

TEST_CASE("backward rejects non-scalar root") {
  auto x = Tensor::from_data({2}, {1, 2}, true);
  Tape tape;
  TapeScope scope(tape);
  auto y = mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
}

TEST_CASE("non-finite results are rejected") {
  // softmax of a non-finite input cannot be produced via ops; build one
  // directly and check from_data also refuses it
  CHECK_THROWS_AS(Tensor::from_data({2}, {1.0, INFINITY}), std::domain_error);
  auto big = Tensor::full({2, 2}, 1e200);
  CHECK_THROWS_AS(matmul(big, big), std::domain_error);
}

TEST_CASE("every op passes finite-difference checks") {
  Rng rng(2024);
  auto check = [&](const char* name, auto&& fn,
                   std::vector<std::pair<std::string, Tensor>> params) {
    auto r = grad_check(fn, params);
    INFO(name << " worst " << r.worst);
    CHECK(r.max_rel_err < 1e-4);
  };

  {
    auto a = random_tensor(rng, {3, 4}, true);
    auto b = random_tensor(rng, {4, 2}, true);
    check("matmul", [&] { return sum(matmul(a, b)); },
          {{"a", a}, {"b", b}});
  }
  {
    auto a = random_tensor(rng, {3, 4}, true);
    auto b = random_tensor(rng, {3, 4}, true);
    check("add", [&] { return sum(mul(add(a, b), add(a, b))); },
          {{"a", a}, {"b", b}});
  }
  {
    auto a = random_tensor(rng, {3, 4}, true);
    auto bias = random_tensor(rng, {4}, true);
    check("add-broadcast", [&] { return sum(mul(add(a, bias), add(a, bias))); },
          {{"a", a}, {"bias", bias}});
  }
  {
    auto a = random_tensor(rng, {5}, true);
    check("softmax", [&] {
      auto s = softmax(a);
      return sum(mul(s, s));
    }, {{"a", a}});
  }
  {
    auto a = random_tensor(rng, {2, 6}, true);
    auto g = random_tensor(rng, {6}, true);
    auto b = random_tensor(rng, {6}, true);
    check("layernorm", [&] {
      auto y = layernorm(a, g, b);
      return sum(mul(y, y));
    }, {{"x", a}, {"gain", g}, {"bias", b}});
  }
  {
    auto a = random_tensor(rng, {7}, true);
    check("gelu", [&] { return sum(mul(gelu(a), gelu(a))); }, {{"a", a}});
  }
  {
    auto table = random_tensor(rng, {5, 3}, true);
    std::vector<int> ids{0, 2, 2, 4};
    check("embedding", [&] {
      auto e = embedding_lookup(table, ids);
      return sum(mul(e, e));
    }, {{"table", table}});
  }
  {
    auto logits = random_tensor(rng, {3, 6}, true);
    std::vector<int> targets{1, 0, 5};
    check("cross_entropy", [&] { return sum(cross_entropy(logits, targets)); },
          {{"logits", logits}});
  }
  {
    auto a = random_tensor(rng, {4, 3}, true);
    check("transpose-slice-concat", [&] {
      auto t = transpose(a);
      auto s = slice_rows(a, 1, 3);
      auto c = concat_rows(s, slice_rows(a, 0, 2));
      return add(sum(mul(t, t)), sum(mul(c, c)));
    }, {{"a", a}});
  }
  {
    auto a = random_tensor(rng, {3, 3}, true);
    check("scale", [&] { return scale(sum(mul(a, a)), -0.37); }, {{"a", a}});
  }
}

TEST_CASE("randomly composed graphs up to depth 8 pass gradient checks") {
  Rng rng(555);
  for (int rep = 0; rep < 6; ++rep) {
    Rng local = rng.stream("graph" + std::to_string(rep));
    auto x = random_tensor(local, {4, 4}, true);
    auto w = random_tensor(local, {4, 4}, true);
    auto fn = [&]() {
      Tensor cur = x;
      Rng ops = local.stream("ops");
      for (int depth = 0; depth < 8; ++depth) {
        switch (ops.index(5)) {
          case 0: cur = matmul(cur, w); break;
          case 1: cur = gelu(cur); break;
          case 2: cur = softmax(cur); break;
          case 3: cur = add(cur, x); break;
          case 4: cur = transpose(cur); break;
        }
      }
      return sum(mul(cur, cur));
    };
    auto r = grad_check(fn, {{"x", x}, {"w", w}});
    INFO("rep " << rep << " worst " << r.worst);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("tape replay determinism: two backward passes agree bit for bit") {
  Rng rng(99);
  auto x = random_tensor(rng, {4, 4}, true);
  auto w = random_tensor(rng, {4, 4}, true);
  auto run = [&]() {
    x.zero_grad();
    w.zero_grad();
    Tape tape;
    TapeScope scope(tape);
    auto y = sum(mul(gelu(matmul(x, w)), gelu(matmul(x, w))));
    tape.backward(y);
    std::vector<double> out(x.grad().begin(), x.grad().end());
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  auto g1 = run();
  auto g2 = run();
  CHECK(g1 == g2);
}

TEST_CASE("ops without an active tape run pure-eager") {
  auto x = Tensor::from_data({2}, {1, 2}, true);
  auto y = sum(mul(x, x));
  CHECK(y.scalar() == doctest::Approx(5.0));
  Tape tape;
  CHECK_THROWS_AS(tape.backward(y), std::logic_error);
}
