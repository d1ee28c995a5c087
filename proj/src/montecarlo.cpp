#include "rnash/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rnash/error.hpp"
#include "rnash/genfun.hpp"
#include "rnash/parallel.hpp"
#include "rnash/rng.hpp"

namespace rnash {
namespace {

constexpr double kExplodingState = 1e9;
constexpr double kPsdFloor = -1e-12;

struct SparseEntry {
  int h;
  int k;
  double v;
};

std::vector<SparseEntry> nonzeros(const Matrix& a) {
  std::vector<SparseEntry> out;
  for (Eigen::Index h = 0; h < a.rows(); ++h) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (a(h, k) != 0.0) out.push_back({static_cast<int>(h), static_cast<int>(k), a(h, k)});
    }
  }
  return out;
}

double schur_bound(const Matrix& k) {
  const Matrix a = k.cwiseAbs();
  return std::sqrt(a.rowwise().sum().maxCoeff() * a.colwise().sum().maxCoeff());
}

double max_schur_bound(const std::vector<Matrix>& gains) {
  double out = 0.0;
  for (const Matrix& k : gains) out = std::max(out, schur_bound(k));
  return out;
}

// sum_{j >= H} of the certified bound on |c_0j|.
double row_tail(const DecayCertificate& cert, int H) {
  if (cert.gauge == DecayCertificate::Gauge::Rate) {
    if (!(cert.rate > 1.0)) return std::numeric_limits<double>::infinity();
    return cert.constant * std::pow(cert.rate, -H) / (1.0 - 1.0 / cert.rate);
  }
  const DecaySequence& beta = *cert.sequence;
  const long J = std::max<long>(H, beta.radius()) + 4096;
  double sum = 0.0;
  for (long j = H; j <= J; ++j) sum += beta.majorant(j);
  // sum_{j > J} A e^{-gamma j} / j^2 <= A / J.
  sum += beta.tail().amplitude / static_cast<double>(J);
  return cert.constant * beta.majorant(0) * sum;
}

struct CostModel {
  std::vector<std::vector<SparseEntry>> running;   // per tracked player
  std::vector<std::vector<SparseEntry>> terminal;
};

CostModel cost_model(const GameSpec& game, int N, const std::vector<int>& tracked) {
  CostModel model;
  GeneralMode costs = game.shift_invariant() ? expand_costs(game.si().stencil, N) : game.general();
  for (int i : tracked) {
    model.running.push_back(nonzeros(costs.f[i]));
    model.terminal.push_back(nonzeros(costs.g[i]));
  }
  return model;
}

int game_players(const GameSpec& game) {
  if (game.shift_invariant()) {
    if (game.si().infinite()) {
      throw Error(ErrorCode::ConfigError, "simulation needs a finite number of players");
    }
    return *game.si().n_players;
  }
  return game.general().n_players();
}

// sum_{h,k} a_hk <x_h, x_k> for path column block [col, col + d).
double quadratic(const std::vector<SparseEntry>& a, const Matrix& X, Eigen::Index col, int d) {
  double out = 0.0;
  for (const SparseEntry& e : a) {
    out += e.v * X.row(e.h).segment(col, d).dot(X.row(e.k).segment(col, d));
  }
  return out;
}

}  // namespace

Matrix FeedbackControl::gain_at(double t) const {
  if (grid.size() == 1) return gains.front();
  if (t <= grid.front()) return gains.front();
  if (t >= grid.back()) return gains.back();
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t m = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double w = (t - grid[m]) / (grid[m + 1] - grid[m]);
  return (1.0 - w) * gains[m] + w * gains[m + 1];
}

FeedbackControl project_equilibrium_control(const CoefficientFlow& flow, int N,
                                            const std::optional<DecayCertificate>& cert) {
  if (!cert) throw Error(ErrorCode::UncertifiedFlow, "equilibrium projection needs a decay certificate");
  if (flow.layout != Layout::Reduced) {
    throw Error(ErrorCode::UncertifiedFlow, "equilibrium projection needs a reduced shift-invariant flow");
  }
  if (N < 1) throw Error(ErrorCode::ConfigError, "N must be >= 1");
  FeedbackControl out;
  out.kind = FeedbackControl::Kind::Equilibrium;
  out.n_players = N;
  out.grid = flow.grid;
  const int H = flow.truncation;
  double row_l1 = 0.0;
  out.gains.reserve(flow.samples());
  for (std::size_t m = 0; m < flow.samples(); ++m) {
    const Matrix& c = flow.reduced(m);
    Matrix K = Matrix::Zero(N, N);
    double l1 = 0.0;
    for (int j = 0; j < H; ++j) {
      const double v = c(0, j);
      l1 += std::abs(v);
      for (int i = 0; i < N; ++i) K(i, mod(i + j, N)) += v;
    }
    row_l1 = std::max(row_l1, l1);
    out.gains.push_back(std::move(K));
  }
  const double tail = flow.indexing == Indexing::Directed ? row_tail(*cert, H) : 0.0;
  out.threshold_L = row_l1 + tail;
  out.lipschitz = max_schur_bound(out.gains);
  out.admissibility = {0.0, out.threshold_L};
  return out;
}

FeedbackControl make_deviation(const FeedbackControl& base, const DeviationSpec& spec) {
  if (base.kind != FeedbackControl::Kind::Equilibrium) {
    throw Error(ErrorCode::ConfigError, "deviations are built from an equilibrium control");
  }
  const int N = base.n_players;
  if (spec.player < 0 || spec.player >= N) {
    throw Error(ErrorCode::IndexOutOfRange, "deviating player out of range");
  }
  if (spec.linear.size() != 0 && spec.linear.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "linear deviation gain must have length N");
  }
  FeedbackControl out = base;
  out.kind = FeedbackControl::Kind::Deviation;
  out.player = spec.player;
  for (Matrix& K : out.gains) {
    Matrix row = spec.weight * K.row(spec.player);
    if (spec.linear.size() == N) row += spec.linear.transpose();
    K.row(spec.player) = row;
  }
  const Eigen::Index dcols = spec.drift.size();
  out.drift = dcols > 0 ? Matrix::Zero(N, dcols) : Matrix();
  if (dcols > 0) out.drift.row(spec.player) = spec.drift.transpose();
  out.lipschitz = max_schur_bound(out.gains);
  const double R = spec.drift.size() > 0 ? spec.drift.norm() : 0.0;
  const double L = spec.declared_L.value_or(base.threshold_L);
  const double declared_R = spec.declared_R.value_or(R);
  std::ostringstream msg;
  if (L < base.threshold_L) {
    msg << "declared L = " << L << " is below the admissible threshold " << base.threshold_L;
    throw Error(ErrorCode::InadmissibleDeviation, msg.str(), L);
  }
  if (out.lipschitz > L * (1.0 + 1e-12)) {
    msg << "deviation Lipschitz bound " << out.lipschitz << " exceeds declared L = " << L;
    throw Error(ErrorCode::InadmissibleDeviation, msg.str(), out.lipschitz);
  }
  if (R > declared_R * (1.0 + 1e-12)) {
    msg << "|psi(t, 0)| = " << R << " exceeds declared R = " << declared_R;
    throw Error(ErrorCode::InadmissibleDeviation, msg.str(), R);
  }
  out.admissibility = {declared_R, L};
  return out;
}

double TrajectoryBatch::mean_cost(int column) const { return costs.col(column).mean(); }

double TrajectoryBatch::std_error(int column) const {
  if (n_paths < 2) return 0.0;
  const double m = mean_cost(column);
  const double var = (costs.col(column).array() - m).square().sum() / (n_paths - 1);
  return std::sqrt(var / n_paths);
}

double TrajectoryBatch::sup_second_moment() const {
  return mean_sq_norm.empty() ? 0.0 : *std::max_element(mean_sq_norm.begin(), mean_sq_norm.end());
}

Matrix default_initial_state(int N, int d, std::uint64_t seed) {
  const rng::Key key = rng::key_from_seed(seed);
  Matrix x(N, d);
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < d; ++c) {
      const std::uint32_t idx = static_cast<std::uint32_t>(i * d + c);
      const auto u = rng::uniforms4({idx / 4u, 0u, 0u, 1u}, key);
      x(i, c) = 2.0 * u[idx % 4u] - 1.0;
    }
  }
  return x;
}

TrajectoryBatch simulate(const GameSpec& game, const FeedbackControl& control, const Matrix& x0,
                         double dt, int n_paths, std::uint64_t seed, const SimulationOptions& options) {
  const int N = game_players(game);
  const int d = game.d;
  const double T = game.T;
  if (control.n_players != N) throw Error(ErrorCode::DimensionMismatch, "control and game disagree on N");
  if (x0.rows() != N || x0.cols() != d) throw Error(ErrorCode::DimensionMismatch, "x0 must be N x d");
  if (n_paths < 1) throw Error(ErrorCode::ConfigError, "n_paths must be >= 1");
  if (options.chunk < 1) throw Error(ErrorCode::ConfigError, "chunk must be >= 1");
  if (!(dt > 0.0) || dt > T / 16.0) {
    throw Error(ErrorCode::BadStep, "dt must lie in (0, T/16]", dt);
  }
  if (control.lipschitz * dt > 0.5) {
    throw Error(ErrorCode::BadStep, "L dt > 0.5 violates the stability heuristic", dt);
  }
  const Eigen::Index dcols = control.drift.cols();
  if (dcols != 0 && (control.drift.rows() != N || (dcols != d && dcols != 1))) {
    throw Error(ErrorCode::DimensionMismatch, "drift must be N x d or N x 1");
  }

  TrajectoryBatch batch;
  batch.n_paths = n_paths;
  batch.n_steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  batch.dt = T / batch.n_steps;
  batch.seed = seed;
  batch.x0 = x0;
  if (options.tracked.empty()) {
    for (int i = 0; i < N; ++i) batch.tracked.push_back(i);
  } else {
    batch.tracked = options.tracked;
    for (int i : batch.tracked) {
      if (i < 0 || i >= N) throw Error(ErrorCode::IndexOutOfRange, "tracked player out of range");
    }
  }
  const int n_tracked = static_cast<int>(batch.tracked.size());
  const CostModel model = cost_model(game, N, batch.tracked);
  batch.costs = Matrix::Zero(n_paths, n_tracked);

  const std::size_t chunk = static_cast<std::size_t>(options.chunk);
  const std::size_t n_chunks = (static_cast<std::size_t>(n_paths) + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial_sq(n_chunks);
  const int steps = batch.n_steps;
  const double h = batch.dt;
  const double noise = std::sqrt(2.0 * h);
  const rng::Key key = rng::key_from_seed(seed);
  const int blocks = (N * d + 3) / 4;

  Matrix drift_full;
  if (dcols != 0) drift_full = dcols == d ? control.drift : control.drift.replicate(1, d);

  parallel_chunks(static_cast<std::size_t>(n_paths), chunk, options.threads,
                  [&](std::size_t begin, std::size_t end) {
    const int P = static_cast<int>(end - begin);
    std::vector<double>& sq = partial_sq[begin / chunk];
    sq.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    Matrix X(N, static_cast<Eigen::Index>(d) * P);
    for (int p = 0; p < P; ++p) X.middleCols(p * d, d) = x0;
    Matrix A(N, X.cols());
    Matrix acc = Matrix::Zero(P, n_tracked);
    auto record_sq = [&](int n) { sq[n] = X.squaredNorm(); };
    record_sq(0);
    for (int n = 0; n < steps; ++n) {
      const Matrix K = control.gain_at(n * h);
      A.noalias() = -K * X;
      if (dcols != 0) {
        for (int p = 0; p < P; ++p) A.middleCols(p * d, d) += drift_full;
      }
      for (int p = 0; p < P; ++p) {
        for (int j = 0; j < n_tracked; ++j) {
          const int i = batch.tracked[j];
          const double a2 = A.row(i).segment(p * d, d).squaredNorm();
          acc(p, j) += 0.5 * (a2 + quadratic(model.running[j], X, p * d, d)) * h;
        }
      }
      X += h * A;
      for (int p = 0; p < P; ++p) {
        const std::uint32_t path = static_cast<std::uint32_t>(begin + p);
        for (int b = 0; b < blocks; ++b) {
          const auto z = rng::normals4({path, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(b), 0u}, key);
          for (int q = 0; q < 4; ++q) {
            const int idx = 4 * b + q;
            if (idx >= N * d) break;
            X(idx / d, p * d + idx % d) += noise * z[q];
          }
        }
      }
      if (!(X.cwiseAbs().maxCoeff() <= kExplodingState)) {
        throw Error(ErrorCode::ExplodingState, "state exceeded 1e9", (n + 1) * h);
      }
      record_sq(n + 1);
    }
    for (int p = 0; p < P; ++p) {
      for (int j = 0; j < n_tracked; ++j) acc(p, j) += 0.5 * quadratic(model.terminal[j], X, p * d, d);
    }
    batch.costs.middleRows(static_cast<Eigen::Index>(begin), P) = acc;
  });

  batch.mean_sq_norm.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  for (const auto& sq : partial_sq) {
    for (int n = 0; n <= steps; ++n) batch.mean_sq_norm[n] += sq[n];
  }
  for (double& v : batch.mean_sq_norm) v /= n_paths;
  return batch;
}

NashExperiment epsilon_nash_experiment(const CostStencil& stencil, const std::vector<int>& N_list,
                                       const DeviationSpec& deviation, const McParams& params) {
  if (N_list.empty()) throw Error(ErrorCode::ConfigError, "N_list must not be empty");
  for (const Matrix* m : {&stencil.f, &stencil.g}) {
    const double floor = Eigen::SelfAdjointEigenSolver<Matrix>(*m).eigenvalues().minCoeff();
    if (floor < kPsdFloor) {
      std::ostringstream msg;
      msg << "player-0 cost has eigenvalue " << floor << " < 0";
      throw Error(ErrorCode::NotPositiveSemidefinite, msg.str(), floor);
    }
  }
  SymbolPair symbol = build_symbol(stencil);
  (void)check_strong_gathering(symbol, params.rho);
  (void)check_compatibility(symbol, params.T);

  NashExperiment out;
  out.rho = params.rho;
  out.delta = 0.5 * (1.0 + 1.0 / params.rho);
  const GameSpec infinite = shift_invariant_game(stencil, std::nullopt, params.d, params.T);
  const CoefficientFlow flow = integrate_backward(infinite, params.flow_steps, params.truncation);
  out.certificate = certify_decay(flow, 0.5 * (1.0 + params.rho));

  for (int N : N_list) {
    const FeedbackControl eq = project_equilibrium_control(flow, N, out.certificate);
    const FeedbackControl dev = make_deviation(eq, deviation);
    const GameSpec game = shift_invariant_game(stencil, N, params.d, params.T);
    Matrix x0 = params.x0 ? *params.x0 : default_initial_state(N, params.d, params.seed);
    SimulationOptions sim;
    sim.tracked = {deviation.player};
    sim.threads = params.threads;
    const TrajectoryBatch a = simulate(game, eq, x0, params.dt, params.n_paths, params.seed, sim);
    const TrajectoryBatch b = simulate(game, dev, x0, params.dt, params.n_paths, params.seed, sim);
    const Vector gains = a.costs.col(0) - b.costs.col(0);
    NashGainRow row;
    row.N = N;
    row.mean = gains.mean();
    row.std_error = params.n_paths > 1
                        ? std::sqrt((gains.array() - row.mean).square().sum() / (params.n_paths - 1) /
                                    params.n_paths)
                        : 0.0;
    row.upper_bound = std::max(0.0, row.mean + 1.96 * row.std_error);
    const int M = static_cast<int>(std::floor(std::sqrt(static_cast<double>(N))));
    row.envelope = std::pow(out.delta, M) + (std::pow(out.delta, -M) + N) * std::pow(out.delta, N);
    row.j_equilibrium = a.mean_cost();
    row.j_deviation = b.mean_cost();
    row.max_abs_paired = gains.cwiseAbs().maxCoeff();
    row.threshold_L = eq.threshold_L;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace rnash
