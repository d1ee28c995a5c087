#include "rnash/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rnash/error.hpp"
#include "rnash/parallel.hpp"
#include "rnash/riccati.hpp"
#include "rnash/rk4.hpp"
#include "rnash/rng.hpp"

namespace rnash {
namespace {

void validate_family(const std::vector<Matrix>& a, int N, const char* name) {
  if (static_cast<int>(a.size()) != N) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must hold N matrices");
  }
  for (const Matrix& m : a) {
    if (m.rows() != N || m.cols() != N) {
      throw Error(ErrorCode::DimensionMismatch, std::string(name) + " matrices must be N x N");
    }
  }
}

// Uniform in (0, 1) addressed by (family, i, j, k).
struct Draws {
  rng::Key key;
  double operator()(std::uint32_t family, std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return rng::uniforms4({family, i, j, k}, key)[0];
  }
};

std::vector<Matrix> generate_family(int N, std::uint32_t family, const Draws& draw) {
  const double sigma = 1.0;
  const double tau = 1.0;
  std::vector<double> eps(N), diag(N);
  for (int i = 0; i < N; ++i) {
    eps[i] = draw(family, static_cast<std::uint32_t>(i), 0xFFFFFFFFu, 0u) < 0.5 ? -1.0 : 1.0;
    diag[i] = 0.9 + 0.1 * draw(family, static_cast<std::uint32_t>(i), 0xFFFFFFFFu, 1u);
  }
  const double n2 = static_cast<double>(N) * N;
  std::vector<Matrix> out(N, Matrix::Zero(N, N));
  for (int i = 0; i < N; ++i) {
    Matrix& a = out[i];
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      for (int k = j; k < N; ++k) {
        if (k == i) continue;
        double u = draw(family, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                        static_cast<std::uint32_t>(k));
        a(j, k) = a(k, j) = (u < 0.5 ? -tau : tau) / n2;
      }
    }
    a(i, i) = diag[i];
    for (int j = 0; j < N; ++j) {
      if (j != i) a(i, j) = a(j, i) = sigma * eps[i] * eps[j] / N;
    }
  }
  return out;
}

// dc^i/ds = f^i + c^i E^i c^i - P - P^T, P = B(c)^T c^i; parallel over i.
// p + p^T is bitwise symmetric, so symmetric data stays symmetric.
std::vector<Matrix> mf_rhs(const std::vector<Matrix>& c, const std::vector<Matrix>& f, int threads) {
  const int N = static_cast<int>(c.size());
  const Matrix bt = mf_B(c).transpose();
  std::vector<Matrix> out(static_cast<std::size_t>(N));
  parallel_chunks(static_cast<std::size_t>(N), 8, threads, [&](std::size_t b, std::size_t e) {
    Matrix p(N, N);
    for (std::size_t i = b; i < e; ++i) {
      p.noalias() = bt * c[i];
      Matrix& r = out[i];
      r = f[i];
      r.noalias() += c[i].col(static_cast<Eigen::Index>(i)) * c[i].row(static_cast<Eigen::Index>(i));
      r -= p + p.transpose();
    }
  });
  return out;
}

struct Sample {
  double min_eig;
  double norm_offdiag;
  double norm_column;
  double norm_diag;
  double est_lhs;
  double d_norm_sq;
  double d_bound;
};

Sample measure(const std::vector<Matrix>& c) {
  const int N = static_cast<int>(c.size());
  const Matrix B = mf_B(c);
  Sample s{};
  s.min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .minCoeff();
  std::vector<double> off(N), col(N);
  double off_total = 0.0;
  const Eigen::VectorXd col_sq = B.cwiseAbs2().colwise().sum().transpose();
  for (int i = 0; i < N; ++i) {
    off[i] = c[i].squaredNorm() - c[i].col(i).squaredNorm();
    off_total += off[i];
    col[i] = col_sq(i) - B(i, i) * B(i, i);
  }
  double lhs = 0.0;
  for (int i = 0; i < N; ++i) {
    s.norm_offdiag = std::max(s.norm_offdiag, N * off[i]);
    s.norm_column = std::max(s.norm_column, N * col[i]);
    s.norm_diag = std::max(s.norm_diag, B(i, i) * B(i, i));
    lhs = std::max(lhs, N * off[i] + N * col[i] + B(i, i) * B(i, i));
  }
  s.est_lhs = lhs;
  Eigen::VectorXd b(N);
  for (int i = 0; i < N; ++i) {
    b = B.col(i);
    b(i) = 0.0;
    s.d_norm_sq += (c[i] * b).squaredNorm();
  }
  s.d_bound = s.norm_column / N * off_total;
  return s;
}

}  // namespace

double mf_weighted_norm(const std::vector<Matrix>& a) {
  const int N = static_cast<int>(a.size());
  if (N == 0) return 0.0;
  validate_family(a, N, "family");
  const Matrix B = mf_B(a);
  const Eigen::VectorXd col_sq = B.cwiseAbs2().colwise().sum().transpose();
  double out = 0.0;
  for (int i = 0; i < N; ++i) {
    const double off = a[i].squaredNorm() - a[i].col(i).squaredNorm();
    const double col = col_sq(i) - B(i, i) * B(i, i);
    out = std::max(out, N * off + N * col + B(i, i) * B(i, i));
  }
  return out;
}

Matrix mf_B(const std::vector<Matrix>& a) {
  const int N = static_cast<int>(a.size());
  Matrix B(N, N);
  for (int h = 0; h < N; ++h) B.row(h) = a[h].row(h);
  return B;
}

double mf_min_eig_B(const std::vector<Matrix>& a) {
  if (a.empty()) return 0.0;
  const Matrix B = mf_B(a);
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

MfScalingBudget check_mf_scaling(const CostFamily& costs) {
  const int N = costs.N();
  validate_family(costs.f, N, "f");
  validate_family(costs.g, N, "g");
  MfScalingBudget b;
  b.kappa_f = mf_weighted_norm(costs.f);
  b.kappa_g = mf_weighted_norm(costs.g);
  b.K_f = N > 0 ? -mf_min_eig_B(costs.f) : 0.0;
  b.K_g = N > 0 ? -mf_min_eig_B(costs.g) : 0.0;
  // A zero floor is reported as 0, not -0.
  if (b.K_f == 0.0) b.K_f = 0.0;
  if (b.K_g == 0.0) b.K_g = 0.0;
  return b;
}

CostFamily generate_mf_costs(int N, double kappa_target, double K_target, std::uint64_t seed) {
  if (N < 2) throw Error(ErrorCode::ConfigError, "N must be >= 2");
  if (!(kappa_target >= 0.0)) throw Error(ErrorCode::ConfigError, "kappa_target must be >= 0");
  if (K_target < 0.0) {
    throw Error(ErrorCode::TargetInfeasible,
                "K_target < 0 asks for a uniformly positive B, which the random pattern does not guarantee",
                K_target);
  }
  const Draws draw{rng::key_from_seed(seed)};
  CostFamily out;
  out.f = generate_family(N, 0u, draw);
  out.g = generate_family(N, 1u, draw);
  for (std::vector<Matrix>* fam : {&out.f, &out.g}) {
    const double w = mf_weighted_norm(*fam);
    const double s = w > 0.0 ? std::sqrt(kappa_target / w) : 0.0;
    for (Matrix& m : *fam) m *= s;
  }
  return out;
}

HorizonScan scan_horizon_condition(double K_f, double K_g, double T) {
  if (!(T > 0.0)) throw Error(ErrorCode::ConfigError, "T must be positive");
  HorizonScan out;
  out.kg_sup = 1.0 / (2.0 * std::numbers::e * T);
  auto kf_expr = [&](double M) {
    return 2.0 * M * (M * std::exp(-M * T) - K_g) / (1.0 - std::exp(-2.0 * M * T));
  };
  if (!(K_g < out.kg_sup)) {
    std::ostringstream msg;
    msg << "K_g = " << K_g << " is not below sup_M M e^{-2MT} = " << out.kg_sup;
    out.reason = msg.str();
    return out;
  }
  if (K_f <= 0.0 && K_g <= 0.0) {
    out.feasible = true;
    out.M = 1.0 / (2.0 * T);
    out.kf_sup = kf_expr(out.M);
    out.reason = "K_f, K_g <= 0";
    return out;
  }
  // Log grid over M in [1e-6, 1e3] / T.
  const int n = 8000;
  double best = -std::numeric_limits<double>::infinity();
  double best_M = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double M = std::pow(10.0, -6.0 + 9.0 * j / n) / T;
    if (!(M * std::exp(-2.0 * M * T) > K_g)) continue;
    const double v = kf_expr(M);
    if (v > best) {
      best = v;
      best_M = M;
    }
  }
  out.kf_sup = best;
  if (best > K_f) {
    out.feasible = true;
    out.M = best_M;
    out.reason = "log-grid scan";
  } else {
    std::ostringstream msg;
    msg << "K_f = " << K_f << " is not below the scanned supremum " << best;
    out.reason = msg.str();
  }
  return out;
}

Envelopes gronwall_envelopes(const MfScalingBudget& budget, double M, int N,
                             const std::vector<double>& grid) {
  if (N < 1) throw Error(ErrorCode::ConfigError, "N must be >= 1");
  Envelopes e;
  e.grid = grid;
  const double mp = std::max(M, 0.0);
  const double n2 = static_cast<double>(N) * N;
  double integral = 0.0;
  double prev_root = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    const double k0 = (budget.kappa_g + budget.kappa_f * t) * std::exp((1.0 + 4.0 * mp) * t);
    const double root = std::sqrt(k0);
    if (j > 0) integral += 0.5 * (root + prev_root) * (t - grid[j - 1]);
    prev_root = root;
    const double k1 = 2.0 * k0 * std::exp(2.0 * integral);
    const double k2 = (budget.kappa_g + (budget.kappa_f + k0 * k1 / n2) * t) * std::exp((2.0 + mp) * t);
    e.kappa0.push_back(k0);
    e.kappa1.push_back(k1);
    e.kappa2.push_back(k2);
  }
  return e;
}

MfSolveResult solve_mf_system(const CostFamily& costs, double T, int steps, double M_guess,
                              const MfSolveOptions& options) {
  const int N = costs.N();
  if (N < 1) throw Error(ErrorCode::ConfigError, "cost family is empty");
  validate_family(costs.f, N, "f");
  validate_family(costs.g, N, "g");
  if (steps < 64) throw Error(ErrorCode::ConfigError, "steps must be >= 64");
  if (!(T > 0.0)) throw Error(ErrorCode::ConfigError, "T must be positive");
  if (options.checkpoint_every < 1) throw Error(ErrorCode::ConfigError, "checkpoint_every must be >= 1");

  MfSolveResult out;
  out.storage = options.storage.value_or(N <= 64 ? MfStorage::Dense : MfStorage::Checkpoints);
  const double h = T / steps;
  std::vector<double> times;
  std::vector<std::vector<Matrix>> states;
  auto keep = [&](int n) {
    switch (out.storage) {
      case MfStorage::Dense: return true;
      case MfStorage::Checkpoints: return n % options.checkpoint_every == 0 || n == steps;
      case MfStorage::MonitorOnly: return n == steps;
    }
    return false;
  };

  auto rhs = [&](const std::vector<Matrix>& c) { return mf_rhs(c, costs.f, options.threads); };
  rk4::integrate(costs.g, steps, h, rhs, [&](int n, const std::vector<Matrix>& y) {
    const double t = n * h;
    if (!rk4::finite_below(y, kBlowUpThreshold)) {
      throw Error(ErrorCode::BlowUpDetected, "coefficient exceeded 1e9", (n - 1) * h);
    }
    const Sample s = measure(y);
    MfMonitor& m = out.monitor;
    m.grid.push_back(t);
    m.min_eig_Bc.push_back(s.min_eig);
    m.norm_offdiag.push_back(s.norm_offdiag);
    m.norm_column.push_back(s.norm_column);
    m.norm_diag.push_back(s.norm_diag);
    m.est_lhs.push_back(s.est_lhs);
    m.d_norm_sq.push_back(s.d_norm_sq);
    m.d_bound.push_back(s.d_bound);
    if (keep(n)) {
      times.push_back(T - t);
      states.push_back(y);
    }
    if (s.min_eig < -M_guess && !out.barrier_crossing) {
      out.barrier_crossing = t;
      if (options.halt_on_barrier) {
        std::ostringstream msg;
        msg << "min eig sym B(c) = " << s.min_eig << " < -M = " << -M_guess << " at t = " << t;
        throw Error(ErrorCode::MonotonicityBarrierCrossed, msg.str(), t);
      }
    }
  });

  out.flow.layout = Layout::Full;
  out.flow.indexing = Indexing::Cyclic;
  out.flow.truncation = N;
  std::reverse(times.begin(), times.end());
  std::reverse(states.begin(), states.end());
  if (!times.empty()) times.front() = 0.0;  // the final forward sample is always kept
  out.flow.grid = std::move(times);
  out.flow.values = std::move(states);
  return out;
}

}  // namespace rnash
