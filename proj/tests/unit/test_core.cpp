#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "doctest.h"
#include "rnash/core.hpp"
#include "rnash/error.hpp"
#include "rnash/riccati.hpp"

using namespace rnash;

namespace {

Matrix chain() {
  Matrix f(2, 2);
  f << 1, -1, -1, 1;
  return f;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigError;
}

Matrix random_symmetric(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(gen);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_CASE("mod and centered representatives") {
  CHECK(mod(-1, 4) == 3);
  CHECK(mod(9, 4) == 1);
  CHECK(mod(0, 5) == 0);
  CHECK(centered(3, 4) == -1);
  CHECK(centered(2, 4) == 2);
  CHECK(centered(-2, 5) == -2);
  CHECK(centered(3, 5) == -2);
}

TEST_CASE("directed chain stencil builds a valid game") {
  CostStencil s = make_stencil(chain(), Matrix::Zero(2, 2));
  GameSpec game = shift_invariant_game(s, 8, 1, 1.0);
  CHECK(game.shift_invariant());
  CHECK(game.si().stencil.ell() == 2);
  CHECK(*game.si().n_players == 8);
}

TEST_CASE("zero cost single player game solves to zero") {
  CostStencil s = make_stencil(Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  GameSpec game = shift_invariant_game(s, 1, 1, 1.0);
  CoefficientFlow flow = integrate_backward(game, 16);
  for (std::size_t m = 0; m < flow.samples(); ++m) CHECK(flow.reduced(m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stencil validation") {
  Matrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK(code_of([&] { (void)make_stencil(bad, Matrix::Zero(2, 2)); }) == ErrorCode::NonSymmetricCost);
  CHECK(code_of([&] { (void)make_stencil(Matrix(), Matrix()); }) == ErrorCode::EmptyStencil);
  CHECK(code_of([&] { (void)make_stencil(chain(), Matrix::Zero(3, 3)); }) ==
        ErrorCode::DimensionMismatch);

  Matrix nearly = chain();
  nearly(0, 1) += 5e-13;
  CostStencil s = make_stencil(nearly, Matrix::Zero(2, 2));
  CHECK(s.f(0, 1) == s.f(1, 0));

  CostStencil ok = make_stencil(chain(), Matrix::Zero(2, 2));
  CHECK(code_of([&] { (void)shift_invariant_game(ok, 1, 1, 1.0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { (void)shift_invariant_game(ok, 4, 0, 1.0); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("general game validation") {
  std::vector<Matrix> f(3, Matrix::Identity(3, 3));
  std::vector<Matrix> g(2, Matrix::Identity(3, 3));
  CHECK(code_of([&] { (void)general_game(f, g, 1, 1.0); }) == ErrorCode::DimensionMismatch);
  std::vector<Matrix> g3(3, Matrix::Identity(2, 2));
  CHECK(code_of([&] { (void)general_game(f, g3, 1, 1.0); }) == ErrorCode::DimensionMismatch);
  GameSpec ok = general_game(f, std::vector<Matrix>(3, Matrix::Zero(3, 3)), 2, 0.5);
  CHECK(ok.general().n_players() == 3);

  GameDescription desc;
  desc.mode = "bogus";
  CHECK(code_of([&] { (void)build_game(desc); }) == ErrorCode::ConfigError);
}

TEST_CASE("shift of a diagonal matrix") {
  Matrix c = Matrix::Zero(3, 3);
  c(0, 0) = 2.0;
  c(1, 1) = 3.0;
  Matrix s = shift_matrix(c, 1, 3);
  Matrix expect = Matrix::Zero(3, 3);
  expect(1, 1) = 2.0;
  expect(2, 2) = 3.0;
  CHECK(s == expect);
  CHECK(shift_matrix(c, 0, 3) == c);
  CHECK(code_of([&] { (void)shift_matrix(c, 3, 3); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("shift is a permutation similarity") {
  Matrix c = random_symmetric(4, 7);
  Matrix s = shift_matrix(c, 2, 4);
  CHECK(s == s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> a(c), b(s);
  CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-13);
  // Shifting by i and then by N - i restores c exactly.
  CHECK(shift_matrix(s, 2, 4) == c);
  CHECK(shift_matrix(shift_matrix(c, 1, 4), 3, 4) == c);
}

TEST_CASE("expanded costs and solutions satisfy the shift relation") {
  const int N = 6;
  CostStencil s = make_stencil(chain(), 0.3 * Matrix::Identity(2, 2));
  GeneralMode costs = expand_costs(s, N);
  CHECK(costs.n_players() == N);
  for (int i = 0; i < N; ++i) {
    CHECK(costs.f[mod(i + 1, N)] == shift_matrix(costs.f[i], 1, N));
    CHECK(costs.g[mod(i + 1, N)] == shift_matrix(costs.g[i], 1, N));
  }
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, N, 1, 1.0), 64);
  ShiftInvariantExpansion ex(flow, N);
  for (std::size_t m : {std::size_t{0}, std::size_t{10}, flow.samples() - 1}) {
    for (int i = 0; i < N; ++i) {
      CHECK(ex.materialize(m, mod(i + 1, N)) == shift_matrix(ex.materialize(m, i), 1, N));
    }
  }
  std::vector<Matrix> p2 = expand_shift_invariant(flow, 2, N);
  CHECK(p2.size() == flow.samples());
  CHECK(p2[5] == ex.materialize(5, 2));
}

TEST_CASE("terminal sample equals g bit-exactly") {
  Matrix g(2, 2);
  g << 0.1, 0.0, 0.0, 0.7;
  CostStencil s = make_stencil(chain(), g);
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 1, 2.0), 64, 8);
  Matrix expect = Matrix::Zero(8, 8);
  expect.topLeftCorner(2, 2) = g;
  CHECK(flow.reduced(flow.samples() - 1) == expect);
}

TEST_CASE("flow interpolation and eta") {
  CoefficientFlow flow;
  flow.grid = {0.0, 0.5, 1.0};
  flow.truncation = 1;
  flow.values = {{Matrix::Constant(1, 1, 2.0)}, {Matrix::Constant(1, 1, 4.0)},
                 {Matrix::Constant(1, 1, 6.0)}};
  CHECK(flow.at(0.25)(0, 0) == doctest::Approx(3.0));
  CHECK(flow.at(-1.0)(0, 0) == 2.0);
  CHECK(flow.at(2.0)(0, 0) == 6.0);
  // Linear trace: trapezoid is exact, int_0^1 (2 + 4s) ds = 4.
  std::vector<double> e = eta(flow, 3);
  CHECK(e[2] == 0.0);
  CHECK(e[1] == doctest::Approx(3.0 * 2.5));
  CHECK(e[0] == doctest::Approx(3.0 * 4.0));
}
