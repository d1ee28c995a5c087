#include <cmath>

#include "doctest.h"
#include "rnash/error.hpp"
#include "rnash/montecarlo.hpp"
#include "rnash/rng.hpp"

using namespace rnash;

namespace {

Matrix nu_chain(double nu) {
  Matrix f(2, 2);
  f << nu * nu, -nu, -nu, 1;
  return f;
}

// Reduced flow with c_0j = j + 1 at both samples and zeros elsewhere.
CoefficientFlow synthetic_flow(int H) {
  CoefficientFlow flow;
  flow.grid = {0.0, 1.0};
  flow.truncation = H;
  Matrix c = Matrix::Zero(H, H);
  for (int j = 0; j < H; ++j) c(0, j) = c(j, 0) = j + 1.0;
  flow.values = {{c}, {c}};
  return flow;
}

struct ScalarSetup {
  GameSpec game;
  FeedbackControl control;
};

ScalarSetup scalar_setup() {
  CostStencil s = make_stencil(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1));
  GameSpec game = shift_invariant_game(s, 1, 1, 1.0);
  CoefficientFlow flow = integrate_backward(game, 1000);
  return {game, project_equilibrium_control(flow, 1, certify_decay(flow, 1.0))};
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

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using rng::Counter;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) == Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("Box-Muller normals have unit moments") {
  const rng::Key key = rng::key_from_seed(42);
  double s1 = 0.0, s2 = 0.0;
  const int n = 50000;
  for (std::uint32_t c = 0; c < n; ++c) {
    for (double v : rng::normals4({c, 0, 0, 0}, key)) {
      s1 += v;
      s2 += v * v;
    }
  }
  CHECK(std::abs(s1 / (4.0 * n)) < 0.01);
  CHECK(std::abs(s2 / (4.0 * n) - 1.0) < 0.01);
  CHECK(rng::to_open_unit(0) > 0.0);
  CHECK(rng::to_open_unit(0xffffffffu) < 1.0);
}

TEST_CASE("projection without wrap, with wrap, and circulant structure") {
  CoefficientFlow flow = synthetic_flow(6);
  const DecayCertificate cert = certify_decay(flow, 1.0);
  FeedbackControl big = project_equilibrium_control(flow, 8, cert);
  for (int j = 0; j < 6; ++j) CHECK(big.gains[0](0, j) == j + 1.0);
  CHECK(big.gains[0](0, 6) == 0.0);

  FeedbackControl small = project_equilibrium_control(flow, 4, cert);
  // alpha^{*0} = -K x, so the X^1 coefficient is -(c_01 + c_05).
  CHECK(-small.gains[0](0, 1) == -(2.0 + 6.0));
  CHECK(small.gains[0](0, 0) == 1.0 + 5.0);
  CHECK(small.gains[0](0, 3) == 4.0);
  for (const Matrix& K : small.gains)
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) CHECK(K(i, k) == K(0, mod(k - i, 4)));
  // Row l1 norm 21 plus the geometric row tail K r^{-H} / (1 - 1/r); r = 1 gives no tail bound.
  CHECK(std::isinf(small.threshold_L));
  const DecayCertificate rate2 = certify_decay(flow, 2.0);
  CHECK(rate2.constant == 6.0 * 32.0);
  CHECK(project_equilibrium_control(flow, 4, rate2).threshold_L == doctest::Approx(21.0 + 192.0 / 64.0 / 0.5));

  CHECK(code_of([&] { (void)project_equilibrium_control(flow, 4, std::nullopt); }) == ErrorCode::UncertifiedFlow);
}

TEST_CASE("equilibrium projection of a solved chain is circulant at every sample") {
  CostStencil s = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 1, 1.0), 128, 16);
  FeedbackControl eq = project_equilibrium_control(flow, 8, certify_decay(flow, 1.2));
  for (const Matrix& K : eq.gains)
    for (int i = 0; i < 8; ++i)
      for (int k = 0; k < 8; ++k) CHECK(K(i, k) == K(0, mod(k - i, 8)));
  CHECK(eq.threshold_L > 0.0);
  CHECK(eq.lipschitz <= eq.threshold_L * (1.0 + 1e-12));
}

TEST_CASE("zero control and zero cost accumulate exactly zero") {
  CostStencil s = make_stencil(Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  GameSpec game = shift_invariant_game(s, 4, 2, 1.0);
  FeedbackControl zero;
  zero.n_players = 4;
  zero.grid = {0.0, 1.0};
  zero.gains = {Matrix::Zero(4, 4), Matrix::Zero(4, 4)};
  TrajectoryBatch b = simulate(game, zero, default_initial_state(4, 2, 3), 1e-2, 100, 5);
  CHECK(b.costs.rows() == 100);
  CHECK(b.costs.cols() == 4);
  CHECK(b.costs.isZero(0.0));
}

TEST_CASE("scalar value recovery with a fitted weak-error constant") {
  ScalarSetup st = scalar_setup();
  const double exact = std::log(std::cosh(1.0));
  Matrix x0 = Matrix::Zero(1, 1);
  TrajectoryBatch coarse = simulate(st.game, st.control, x0, 1e-2, 20000, 7);
  TrajectoryBatch fine = simulate(st.game, st.control, x0, 1e-3, 20000, 7);
  const double C = std::abs(coarse.mean_cost() - fine.mean_cost()) / (1e-2 - 1e-3);
  CHECK(std::abs(coarse.mean_cost() - exact) <= 3.0 * (coarse.std_error() + C * 1e-2));
  CHECK(std::abs(fine.mean_cost() - exact) <= 3.0 * (fine.std_error() + C * 1e-3));
  CHECK(fine.std_error() > 0.0);
}

TEST_CASE("simulation is deterministic across thread counts and seeds") {
  CostStencil s = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 2, 1.0), 128, 16);
  FeedbackControl eq = project_equilibrium_control(flow, 8, certify_decay(flow, 1.2));
  GameSpec game = shift_invariant_game(s, 8, 2, 1.0);
  Matrix x0 = default_initial_state(8, 2, 11);
  CHECK(x0 == default_initial_state(8, 2, 11));
  CHECK(x0.cwiseAbs().maxCoeff() <= 1.0);
  SimulationOptions one, three;
  one.threads = 1;
  three.threads = 3;
  TrajectoryBatch a = simulate(game, eq, x0, 1e-2, 300, 9, one);
  TrajectoryBatch b = simulate(game, eq, x0, 1e-2, 300, 9, three);
  CHECK(a.costs == b.costs);
  CHECK(a.mean_sq_norm == b.mean_sq_norm);
  TrajectoryBatch c = simulate(game, eq, x0, 1e-2, 300, 10, one);
  CHECK(a.costs != c.costs);
}

TEST_CASE("null deviation gives exactly zero gain path by path") {
  CostStencil s = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 1, 1.0), 128, 16);
  FeedbackControl eq = project_equilibrium_control(flow, 8, certify_decay(flow, 1.2));
  DeviationSpec null_spec;
  null_spec.player = 0;
  FeedbackControl dev = make_deviation(eq, null_spec);
  GameSpec game = shift_invariant_game(s, 8, 1, 1.0);
  Matrix x0 = default_initial_state(8, 1, 1);
  SimulationOptions opt;
  opt.tracked = {0};
  TrajectoryBatch a = simulate(game, eq, x0, 1e-2, 200, 3, opt);
  TrajectoryBatch b = simulate(game, dev, x0, 1e-2, 200, 3, opt);
  CHECK(a.costs == b.costs);

  DeviationSpec drift = null_spec;
  drift.drift = Vector::Constant(1, 0.5);
  FeedbackControl moved = make_deviation(eq, drift);
  CHECK(moved.kind == FeedbackControl::Kind::Deviation);
  CHECK(moved.drift(0, 0) == 0.5);
  CHECK(moved.drift(1, 0) == 0.0);
  CHECK(moved.admissibility.R >= 0.5);
}

TEST_CASE("inadmissible deviations are refused") {
  CostStencil s = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 1, 1.0), 128, 16);
  FeedbackControl eq = project_equilibrium_control(flow, 8, certify_decay(flow, 1.2));
  DeviationSpec low;
  low.declared_L = 0.5 * eq.threshold_L;
  CHECK(code_of([&] { (void)make_deviation(eq, low); }) == ErrorCode::InadmissibleDeviation);
  DeviationSpec steep;
  steep.linear = Vector::Constant(8, 10.0);
  CHECK(code_of([&] { (void)make_deviation(eq, steep); }) == ErrorCode::InadmissibleDeviation);
  DeviationSpec far;
  far.drift = Vector::Constant(1, 2.0);
  far.declared_R = 1.0;
  CHECK(code_of([&] { (void)make_deviation(eq, far); }) == ErrorCode::InadmissibleDeviation);
}

TEST_CASE("step and explosion guards") {
  ScalarSetup st = scalar_setup();
  Matrix x0 = Matrix::Zero(1, 1);
  CHECK(code_of([&] { (void)simulate(st.game, st.control, x0, 0.1, 10, 1); }) == ErrorCode::BadStep);

  FeedbackControl unstable;
  unstable.n_players = 1;
  unstable.grid = {0.0, 1.0};
  unstable.gains = {Matrix::Constant(1, 1, -500.0), Matrix::Constant(1, 1, -500.0)};
  unstable.lipschitz = 500.0;
  CHECK(code_of([&] { (void)simulate(st.game, unstable, Matrix::Ones(1, 1), 1e-3, 4, 1); }) ==
        ErrorCode::ExplodingState);
  unstable.lipschitz = 600.0;
  CHECK(code_of([&] { (void)simulate(st.game, unstable, x0, 1e-3, 4, 1); }) == ErrorCode::BadStep);
}

TEST_CASE("second moment grows with 1 + |x0|^2") {
  CostStencil s = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  CoefficientFlow flow = integrate_backward(shift_invariant_game(s, std::nullopt, 1, 1.0), 128, 16);
  FeedbackControl eq = project_equilibrium_control(flow, 8, certify_decay(flow, 1.2));
  GameSpec game = shift_invariant_game(s, 8, 1, 1.0);
  Matrix x0 = default_initial_state(8, 1, 2);
  const double n2 = x0.squaredNorm();
  auto m = [&](double scale) { return simulate(game, eq, scale * x0, 1e-2, 2000, 4).sup_second_moment(); };
  const double m1 = m(1.0), m2 = m(2.0), m3 = m(3.0);
  CHECK(m2 > m1);
  CHECK(m2 / m1 <= 1.25 * (1.0 + 4.0 * n2) / (1.0 + n2));
  // Affine in scale^2 up to the sup over time: interpolate m(2) from m(1) and m(3).
  const double predicted = m1 + (m3 - m1) * (4.0 - 1.0) / (9.0 - 1.0);
  CHECK(m2 == doctest::Approx(predicted).epsilon(0.25).scale(0.0));
}

TEST_CASE("epsilon-Nash experiment gates and the null deviation") {
  McParams p;
  p.T = 1.0;
  p.dt = 1e-2;
  p.n_paths = 400;
  p.flow_steps = 256;
  p.truncation = 16;
  CostStencil chain = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  NashExperiment ex = epsilon_nash_experiment(chain, {8, 16}, DeviationSpec{}, p);
  REQUIRE(ex.rows.size() == 2);
  for (const NashGainRow& row : ex.rows) {
    CHECK(row.mean == 0.0);
    CHECK(row.max_abs_paired == 0.0);
    CHECK(row.j_equilibrium == row.j_deviation);
  }
  CHECK(ex.delta == doctest::Approx(0.5 * (1.0 + 1.0 / 1.4)));
  CHECK(ex.rows[0].envelope == doctest::Approx(std::pow(ex.delta, 2) + (std::pow(ex.delta, -2) + 8) * std::pow(ex.delta, 8)));

  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK(code_of([&] { (void)epsilon_nash_experiment(make_stencil(indefinite, Matrix::Zero(2, 2)), {8}, {}, p); }) ==
        ErrorCode::NotPositiveSemidefinite);
  Matrix dc(2, 2);
  dc << 1, -1, -1, 1;
  CHECK(code_of([&] { (void)epsilon_nash_experiment(make_stencil(dc, Matrix::Zero(2, 2)), {8}, {}, p); }) ==
        ErrorCode::GatheringFailed);
}
