#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rnash/core.hpp"
#include "rnash/error.hpp"
#include "rnash/meanfield.hpp"
#include "rnash/riccati.hpp"

using namespace rnash;

namespace {

ErrorCode code_of(auto&& fn, double* value = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (value) *value = e.value();
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigError;
}

CostFamily zero_family(int N) {
  return {std::vector<Matrix>(N, Matrix::Zero(N, N)), std::vector<Matrix>(N, Matrix::Zero(N, N))};
}

// Independent evaluation of the weighted norm by explicit index loops.
double norm_loops(const std::vector<Matrix>& a) {
  const int N = static_cast<int>(a.size());
  double out = 0.0;
  for (int i = 0; i < N; ++i) {
    double s1 = 0.0, s2 = 0.0;
    for (int h = 0; h < N; ++h)
      for (int k = 0; k < N; ++k)
        if (k != i) s1 += a[i](h, k) * a[i](h, k);
    for (int k = 0; k < N; ++k)
      if (k != i) s2 += a[k](k, i) * a[k](k, i);
    out = std::max(out, N * s1 + N * s2 + a[i](i, i) * a[i](i, i));
  }
  return out;
}

}  // namespace

TEST_CASE("weighted norm of the mean-field example") {
  for (int N : {4, 16}) {
    std::vector<Matrix> f(N, Matrix::Zero(N, N));
    for (int i = 0; i < N; ++i) {
      f[i](i, i) = 1.0;
      for (int j = 0; j < N; ++j)
        if (j != i) f[i](i, j) = f[i](j, i) = 1.0 / N;
    }
    const double expect = 1.0 + 2.0 * (N - 1.0) / N;
    CHECK(mf_weighted_norm(f) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(mf_weighted_norm(f) <= 3.0);
    CHECK(norm_loops(f) == doctest::Approx(expect).epsilon(1e-14));
  }
  // Entries with h = i count in the first sum.
  std::vector<Matrix> a(3, Matrix::Zero(3, 3));
  a[0](0, 2) = a[0](2, 0) = 1.0;
  CHECK(mf_weighted_norm(a) == doctest::Approx(norm_loops(a)));
  // i = 0 sees (0, 2) in the first sum; i = 2 sees a^0_02 in the column sum.
  CHECK(mf_weighted_norm(a) == doctest::Approx(3.0));
}

TEST_CASE("mf_B picks the own rows") {
  std::vector<Matrix> a(2, Matrix::Zero(2, 2));
  a[0] << 1, 2, 2, 3;
  a[1] << 4, 5, 5, 6;
  Matrix B = mf_B(a);
  Matrix expect(2, 2);
  expect << 1, 2, 5, 6;
  CHECK(B == expect);
  // sym B = [[1, 3.5], [3.5, 6]], eigenvalues 3.5 -+ sqrt(6.25 + 12.25).
  CHECK(mf_min_eig_B(a) == doctest::Approx(3.5 - std::sqrt(18.5)).epsilon(1e-14));
}

TEST_CASE("zero costs give a zero flow and monitor") {
  MfSolveResult r = solve_mf_system(zero_family(5), 1.0, 64, 1.0);
  CHECK(r.storage == MfStorage::Dense);
  CHECK(r.flow.samples() == 65);
  CHECK(r.flow.grid.front() == 0.0);
  CHECK(r.flow.grid.back() == doctest::Approx(1.0));
  for (const auto& s : r.flow.values)
    for (const Matrix& m : s) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t n = 0; n < r.monitor.grid.size(); ++n) {
    CHECK(r.monitor.est_lhs[n] == 0.0);
    CHECK(r.monitor.d_norm_sq[n] == 0.0);
    CHECK(r.monitor.min_eig_Bc[n] == 0.0);
  }
  CHECK(!r.barrier_crossing);
  MfScalingBudget b = check_mf_scaling(zero_family(5));
  CHECK(b.kappa_f == 0.0);
  CHECK(b.K_f == 0.0);
  CHECK(!std::signbit(b.K_g));
}

TEST_CASE("Gronwall envelopes") {
  std::vector<double> grid;
  for (int j = 0; j <= 1000; ++j) grid.push_back(j / 1000.0);
  MfScalingBudget b;
  b.kappa_g = 1.0;
  Envelopes e = gronwall_envelopes(b, 0.0, 8, grid);
  CHECK(e.kappa0.back() == doctest::Approx(std::numbers::e).epsilon(1e-14));
  CHECK(e.kappa1.front() == doctest::Approx(2.0));
  // kappa0 = e^t so int_0^1 sqrt(kappa0) = 2 (e^{1/2} - 1); trapezoid error O(h^2).
  const double k1 = 2.0 * std::numbers::e * std::exp(4.0 * (std::exp(0.5) - 1.0));
  CHECK(e.kappa1.back() == doctest::Approx(k1).epsilon(1e-6));
  const double k2 = (0.0 + std::numbers::e * k1 / 64.0) * std::exp(2.0);
  CHECK(e.kappa2.back() == doctest::Approx(1.0 * std::exp(2.0) + k2).epsilon(1e-6));
  // M_+ enters kappa0 through exp(4 M t); negative M is clipped.
  Envelopes m = gronwall_envelopes(b, 0.5, 8, grid);
  CHECK(m.kappa0.back() == doctest::Approx(std::exp(3.0)).epsilon(1e-14));
  Envelopes neg = gronwall_envelopes(b, -3.0, 8, grid);
  CHECK(neg.kappa0.back() == e.kappa0.back());
  Envelopes z = gronwall_envelopes(MfScalingBudget{}, 1.0, 8, grid);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(z.kappa0[j] + z.kappa1[j] + z.kappa2[j] == 0.0);
  CHECK(code_of([&] { (void)gronwall_envelopes(b, 0.0, 0, grid); }) == ErrorCode::ConfigError);
}

TEST_CASE("horizon condition scanner") {
  HorizonScan z = scan_horizon_condition(0.0, 0.0, 2.0);
  CHECK(z.feasible);
  CHECK(z.M == doctest::Approx(0.25));
  CHECK(z.kg_sup == doctest::Approx(1.0 / (4.0 * std::numbers::e)));

  const double T = 1.0;
  HorizonScan edge = scan_horizon_condition(0.0, 1.0 / (2.0 * std::numbers::e * T), T);
  CHECK(!edge.feasible);
  CHECK(!edge.reason.empty());

  HorizonScan s = scan_horizon_condition(0.0, 0.1, T);
  REQUIRE(s.feasible);
  CHECK(s.M * std::exp(-2.0 * s.M * T) > 0.1);
  // Brute-force supremum of the K_f bound on a uniform grid of the admissible M.
  double best = -1e300;
  for (int j = 1; j <= 200000; ++j) {
    const double M = j * 5e-5;
    if (!(M * std::exp(-2.0 * M * T) > 0.1)) continue;
    best = std::max(best, 2.0 * M * (M * std::exp(-M * T) - 0.1) / (1.0 - std::exp(-2.0 * M * T)));
  }
  CHECK(s.kf_sup == doctest::Approx(best).epsilon(1e-4).scale(0.0));
  CHECK(!scan_horizon_condition(best * 1.01, 0.1, T).feasible);
  CHECK(scan_horizon_condition(best * 0.99, 0.1, T).feasible);
  CHECK(code_of([] { (void)scan_horizon_condition(0.0, 0.0, 0.0); }) == ErrorCode::ConfigError);
}

TEST_CASE("generated mean-field costs") {
  const int N = 16;
  CostFamily a = generate_mf_costs(N, 1.0, 0.0, 42);
  CostFamily b = generate_mf_costs(N, 1.0, 0.0, 42);
  CostFamily c = generate_mf_costs(N, 1.0, 0.0, 43);
  bool same = true, differs = false;
  for (int i = 0; i < N; ++i) {
    same = same && a.f[i] == b.f[i] && a.g[i] == b.g[i];
    differs = differs || a.f[i] != c.f[i];
    CHECK(a.f[i] == a.f[i].transpose());
    CHECK(a.g[i] == a.g[i].transpose());
  }
  CHECK(same);
  CHECK(differs);
  MfScalingBudget bud = check_mf_scaling(a);
  CHECK(bud.kappa_f == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bud.kappa_g == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_loops(a.f) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bud.K_f <= 1e-12);
  CHECK(bud.K_g <= 1e-12);
  CHECK(code_of([] { (void)generate_mf_costs(N, 1.0, -0.5, 1); }) == ErrorCode::TargetInfeasible);
  CHECK(code_of([] { (void)generate_mf_costs(1, 1.0, 0.0, 1); }) == ErrorCode::ConfigError);
}

TEST_CASE("shift-invariant family agrees with the general solver") {
  const int N = 6;
  Matrix f(2, 2);
  f << 1.0, -0.3, -0.3, 0.5;
  CostStencil s = make_stencil(f, 0.2 * Matrix::Identity(2, 2));
  GeneralMode ex = expand_costs(s, N);
  CostFamily fam{ex.f, ex.g};
  MfSolveOptions opt;
  opt.halt_on_barrier = false;
  MfSolveResult r = solve_mf_system(fam, 1.0, 256, 10.0, opt);
  CoefficientFlow ref = integrate_backward(shift_invariant_game(s, N, 1, 1.0), 256);
  REQUIRE(r.flow.samples() == ref.samples());
  double worst = 0.0, grid_gap = 0.0;
  for (std::size_t m = 0; m < ref.samples(); ++m) {
    grid_gap = std::max(grid_gap, std::abs(r.flow.grid[m] - ref.grid[m]));
    for (int i = 0; i < N; ++i)
      worst = std::max(worst, (r.flow.player(m, i) - shift_matrix(ref.reduced(m), i, N)).cwiseAbs().maxCoeff());
  }
  CHECK(grid_gap < 1e-12);
  CHECK(worst < 1e-8);
  // c(T) = g exactly, and the forward monitor starts at g.
  for (int i = 0; i < N; ++i) CHECK(r.flow.player(r.flow.samples() - 1, i) == fam.g[i]);
  CHECK(r.monitor.est_lhs.front() == doctest::Approx(mf_weighted_norm(fam.g)));
}

TEST_CASE("monitor stays inside the Gronwall envelopes") {
  const double T = 1.0;
  for (int N : {16, 64}) {
    CostFamily fam = generate_mf_costs(N, 1.0, 0.0, 7);
    MfScalingBudget bud = check_mf_scaling(fam);
    HorizonScan scan = scan_horizon_condition(bud.K_f, bud.K_g, T);
    REQUIRE(scan.feasible);
    MfSolveResult r = solve_mf_system(fam, T, 128, scan.M);
    CHECK(!r.barrier_crossing);
    Envelopes e = gronwall_envelopes(bud, scan.M, N, r.monitor.grid);
    const MfMonitor& m = r.monitor;
    for (std::size_t n = 0; n < m.grid.size(); ++n) {
      CHECK(m.min_eig_Bc[n] >= -scan.M);
      CHECK(m.norm_offdiag[n] <= e.kappa0[n] * (1.0 + 1e-12));
      CHECK(m.norm_column[n] <= e.kappa1[n] * (1.0 + 1e-12));
      CHECK(m.norm_diag[n] <= e.kappa2[n] * (1.0 + 1e-12));
      CHECK(m.est_lhs[n] <= m.norm_offdiag[n] + m.norm_column[n] + m.norm_diag[n] + 1e-12);
      CHECK(m.d_norm_sq[n] <= m.d_bound[n] * (1.0 + 1e-12) + 1e-300);
      CHECK(m.d_bound[n] <= e.kappa0[n] * e.kappa1[n] / N * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("D matrix against explicit sums") {
  const int N = 5;
  CostFamily fam = generate_mf_costs(N, 2.0, 0.0, 3);
  MfSolveOptions opt;
  opt.storage = MfStorage::MonitorOnly;
  MfSolveResult r = solve_mf_system(fam, 0.5, 64, 10.0, opt);
  CHECK(r.flow.samples() == 1);
  CHECK(r.flow.grid.front() == 0.0);
  const std::vector<Matrix>& c = r.flow.values.front();
  double d2 = 0.0;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      double s = 0.0;
      for (int j = 0; j < N; ++j)
        if (j != i) s += c[i](k, j) * c[j](j, i);
      d2 += s * s;
    }
  CHECK(r.monitor.d_norm_sq.back() == doctest::Approx(d2).epsilon(1e-12));
  CHECK(r.monitor.est_lhs.back() == doctest::Approx(norm_loops(c)).epsilon(1e-12));
}

TEST_CASE("storage modes") {
  CostFamily fam = generate_mf_costs(8, 1.0, 0.0, 5);
  MfSolveOptions opt;
  opt.storage = MfStorage::Checkpoints;
  opt.checkpoint_every = 32;
  MfSolveResult r = solve_mf_system(fam, 1.0, 128, 10.0, opt);
  CHECK(r.flow.samples() == 5);
  CHECK(r.monitor.grid.size() == 129);
  MfSolveResult d = solve_mf_system(fam, 1.0, 128, 10.0);
  for (int i = 0; i < 8; ++i) CHECK(r.flow.player(0, i) == d.flow.player(0, i));
  CHECK(solve_mf_system(generate_mf_costs(72, 1.0, 0.0, 5), 0.1, 64, 10.0).storage == MfStorage::Checkpoints);
  CHECK(code_of([&] { (void)solve_mf_system(fam, 1.0, 32, 1.0); }) == ErrorCode::ConfigError);
  opt.checkpoint_every = 0;
  CHECK(code_of([&] { (void)solve_mf_system(fam, 1.0, 64, 1.0, opt); }) == ErrorCode::ConfigError);
}

TEST_CASE("monotonicity barrier") {
  CostFamily fam = generate_mf_costs(8, 1.0, 0.0, 11);
  for (Matrix& m : fam.f) m = -m;
  for (Matrix& m : fam.g) m = -m;
  CHECK(check_mf_scaling(fam).K_g > 0.5);
  double at = -1.0;
  CHECK(code_of([&] { (void)solve_mf_system(fam, 0.5, 64, 0.1); }, &at) ==
        ErrorCode::MonotonicityBarrierCrossed);
  CHECK(at == 0.0);
  MfSolveOptions opt;
  opt.halt_on_barrier = false;
  MfSolveResult r = solve_mf_system(fam, 0.5, 64, 0.1, opt);
  REQUIRE(r.barrier_crossing.has_value());
  CHECK(*r.barrier_crossing == 0.0);
  CHECK(r.flow.samples() == 65);
}
