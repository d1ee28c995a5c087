#include "rnash/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rnash/error.hpp"
#include "rnash/rk4.hpp"
#include "rnash/rng.hpp"

namespace rnash {
namespace {

Matrix padded(const Matrix& a, int H) {
  Matrix out = Matrix::Zero(H, H);
  int n = static_cast<int>(std::min<Eigen::Index>(a.rows(), H));
  out.topLeftCorner(n, n) = a.topLeftCorner(n, n);
  return out;
}

// Toeplitz factor of Q = Toep(c_0.) c.
Matrix toeplitz_factor(const Matrix& c, Indexing indexing) {
  const int H = static_cast<int>(c.rows());
  Matrix t = Matrix::Zero(H, H);
  for (int h = 0; h < H; ++h) {
    if (indexing == Indexing::Directed) {
      for (int j = 0; j <= h; ++j) t(h, j) = c(0, h - j);
    } else {
      for (int j = 0; j < H; ++j) t(h, j) = c(0, mod(h - j, H));
    }
  }
  return t;
}

struct ReducedProblem {
  Matrix f;
  Matrix g;
  Indexing indexing;
};

ReducedProblem reduced_problem(const ShiftInvariantMode& si, int truncation) {
  const int ell = si.stencil.ell();
  if (si.infinite()) {
    if (truncation < ell) {
      throw Error(ErrorCode::TruncationTooSmall, "truncation H must be >= ell", truncation);
    }
    return {padded(si.stencil.f, truncation), padded(si.stencil.g, truncation), Indexing::Directed};
  }
  const int N = *si.n_players;
  return {padded(si.stencil.f, N), padded(si.stencil.g, N), Indexing::Cyclic};
}

std::vector<double> uniform_grid(double T, int steps) {
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) grid[m] = T * m / steps;
  grid.back() = T;
  return grid;
}

[[noreturn]] void throw_blowup(double T, double s_valid) {
  std::ostringstream msg;
  msg << "coefficients exceed " << kBlowUpThreshold << "; last valid time t = " << T - s_valid;
  throw Error(ErrorCode::BlowUpDetected, msg.str(), T - s_valid);
}

int gauge_index(Indexing indexing, int h, int n) {
  return indexing == Indexing::Directed ? h : centered(h, n);
}

double beta_at(const DecaySequence& beta, int i) {
  if (std::abs(i) > beta.radius()) {
    throw Error(ErrorCode::WindowMismatch, "decay gauge window smaller than the index range");
  }
  return beta(i);
}

}  // namespace

Matrix reduced_rhs(const Matrix& c, const Matrix& f, Indexing indexing) {
  Matrix q = toeplitz_factor(c, indexing) * c;
  Matrix out = f;
  out.noalias() += c.row(0).transpose() * c.row(0);
  out -= q + q.transpose();
  return out;
}

Matrix own_feedback_matrix(const std::vector<Matrix>& c) {
  const int N = static_cast<int>(c.size());
  Matrix b(N, N);
  for (int h = 0; h < N; ++h) b.row(h) = c[h].row(h);
  return b;
}

std::vector<Matrix> full_rhs(const std::vector<Matrix>& c, const std::vector<Matrix>& f) {
  // sum_{j != i} c^j E^j c^i = B^T c^i - c^i E^i c^i; the i-th term of the
  // transpose sum is the same matrix, so dc^i/ds = f^i + c^i E^i c^i - P - P^T.
  const int N = static_cast<int>(c.size());
  const Matrix bt = own_feedback_matrix(c).transpose();
  std::vector<Matrix> out(static_cast<std::size_t>(N));
  Matrix p(N, N);
  for (int i = 0; i < N; ++i) {
    p.noalias() = bt * c[i];
    Matrix& r = out[i];
    r = f[i];
    r.noalias() += c[i].col(i) * c[i].row(i);
    // p + p^T is bitwise symmetric, so symmetric data stays symmetric.
    r -= p + p.transpose();
  }
  return out;
}

CoefficientFlow integrate_backward(const GameSpec& game, int steps, int truncation) {
  if (steps < 8) throw Error(ErrorCode::ConfigError, "steps must be >= 8");
  const double T = game.T;
  CoefficientFlow flow;
  const double h = T / steps;
  std::vector<double> grid = uniform_grid(T, steps);

  if (game.shift_invariant()) {
    ReducedProblem p = reduced_problem(game.si(), truncation);
    flow.layout = Layout::Reduced;
    flow.indexing = p.indexing;
    flow.truncation = static_cast<int>(p.f.rows());
    flow.grid = grid;
    flow.values.assign(grid.size(), {});
    flow.values[steps] = {p.g};
    auto rhs = [&](const Matrix& c) { return reduced_rhs(c, p.f, p.indexing); };
    rk4::integrate(p.g, steps, h, rhs, [&](int n, const Matrix& y) {
      if (!rk4::finite_below(y, kBlowUpThreshold)) throw_blowup(T, (n - 1) * h);
      flow.values[steps - n] = {y};
    });
    flow.values[steps] = {p.g};
    return flow;
  }

  const GeneralMode& costs = game.general();
  flow.layout = Layout::Full;
  flow.indexing = Indexing::Cyclic;
  flow.truncation = costs.n_players();
  flow.grid = grid;
  flow.values.assign(grid.size(), {});
  auto rhs = [&](const std::vector<Matrix>& c) { return full_rhs(c, costs.f); };
  rk4::integrate(costs.g, steps, h, rhs, [&](int n, const std::vector<Matrix>& y) {
    if (!rk4::finite_below(y, kBlowUpThreshold)) throw_blowup(T, (n - 1) * h);
    flow.values[steps - n] = y;
  });
  flow.values[steps] = costs.g;
  return flow;
}

RefinedFlow integrate_to_tolerance(const GameSpec& game, int truncation, double tol,
                                   int initial_steps, int max_steps) {
  RefinedFlow out;
  CoefficientFlow coarse = integrate_backward(game, initial_steps, truncation);
  int steps = initial_steps;
  while (steps < max_steps) {
    CoefficientFlow fine = integrate_backward(game, 2 * steps, truncation);
    double diff = 0.0;
    for (std::size_t m = 0; m < coarse.samples(); ++m) {
      for (std::size_t p = 0; p < coarse.values[m].size(); ++p) {
        diff = std::max(diff, (coarse.values[m][p] - fine.values[2 * m][p]).cwiseAbs().maxCoeff());
      }
    }
    steps *= 2;
    coarse = std::move(fine);
    out.last_change = diff;
    if (diff < tol) {
      out.converged = true;
      break;
    }
  }
  out.flow = std::move(coarse);
  out.steps = steps;
  return out;
}

DecayCertificate certify_decay(const CoefficientFlow& flow, const DecaySequence& beta) {
  DecayCertificate cert;
  cert.gauge = DecayCertificate::Gauge::Sequence;
  cert.sequence = beta;
  cert.truncation = flow.truncation;
  const int n = flow.truncation;
  for (std::size_t m = 0; m < flow.samples(); ++m) {
    for (std::size_t p = 0; p < flow.values[m].size(); ++p) {
      const Matrix& c = flow.values[m][p];
      for (int h = 0; h < n; ++h) {
        for (int k = 0; k < n; ++k) {
          int hi, ki;
          if (flow.layout == Layout::Full) {
            hi = centered(h - static_cast<int>(p), n);
            ki = centered(k - static_cast<int>(p), n);
          } else {
            hi = gauge_index(flow.indexing, h, n);
            ki = gauge_index(flow.indexing, k, n);
          }
          double v = std::abs(c(h, k)) / (beta_at(beta, hi) * beta_at(beta, ki));
          if (v > cert.constant) {
            cert.constant = v;
            cert.argmax_h = h;
            cert.argmax_k = k;
            cert.argmax_player = static_cast<int>(p);
            cert.argmax_t = flow.grid[m];
          }
        }
      }
    }
  }
  return cert;
}

namespace {

void rate_scan(DecayCertificate& cert, const Matrix& c, double r, Layout layout, Indexing indexing,
               int player, double t) {
  const int n = static_cast<int>(c.rows());
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      int hi, ki;
      if (layout == Layout::Full) {
        hi = std::abs(centered(h - player, n));
        ki = std::abs(centered(k - player, n));
      } else {
        hi = std::abs(gauge_index(indexing, h, n));
        ki = std::abs(gauge_index(indexing, k, n));
      }
      double v = std::abs(c(h, k)) * std::pow(r, hi + ki);
      if (v > cert.constant) {
        cert.constant = v;
        cert.argmax_h = h;
        cert.argmax_k = k;
        cert.argmax_player = player;
        cert.argmax_t = t;
      }
    }
  }
}

}  // namespace

DecayCertificate certify_decay(const CoefficientFlow& flow, double r) {
  DecayCertificate cert;
  cert.gauge = DecayCertificate::Gauge::Rate;
  cert.rate = r;
  cert.truncation = flow.truncation;
  for (std::size_t m = 0; m < flow.samples(); ++m) {
    for (std::size_t p = 0; p < flow.values[m].size(); ++p) {
      rate_scan(cert, flow.values[m][p], r, flow.layout, flow.indexing, static_cast<int>(p),
                flow.grid[m]);
    }
  }
  return cert;
}

DecayCertificate certify_decay(const Matrix& c, double r) {
  DecayCertificate cert;
  cert.gauge = DecayCertificate::Gauge::Rate;
  cert.rate = r;
  cert.truncation = static_cast<int>(c.rows());
  rate_scan(cert, c, r, Layout::Reduced, Indexing::Directed, 0, 0.0);
  return cert;
}

namespace {

// J(c)(t_m) = g + int_{t_m}^T rhs(c), trapezoid from the terminal end.
CoefficientFlow picard_map(const CoefficientFlow& c, const ReducedProblem& p, double h) {
  const int steps = static_cast<int>(c.samples()) - 1;
  const auto n = p.f.rows();
  CoefficientFlow next = c;
  std::vector<Matrix> integrand(c.samples());
  for (std::size_t m = 0; m < c.samples(); ++m) integrand[m] = reduced_rhs(c.reduced(m), p.f, p.indexing);
  next.values[steps] = {p.g};
  Matrix acc = Matrix::Zero(n, n);
  for (int m = steps - 1; m >= 0; --m) {
    acc += 0.5 * h * (integrand[m] + integrand[m + 1]);
    next.values[m] = {p.g + acc};
  }
  return next;
}

}  // namespace

Matrix picard_weights(const GameSpec& game, const DecaySequence& beta, int truncation) {
  ReducedProblem p = reduced_problem(game.si(), truncation);
  const int n = static_cast<int>(p.f.rows());
  Matrix d(n, n);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      double bb = beta_at(beta, gauge_index(p.indexing, h, n)) *
                  beta_at(beta, gauge_index(p.indexing, k, n));
      d(h, k) = bb + std::max(std::abs(p.f(h, k)), std::abs(p.g(h, k)));
    }
  }
  return d;
}

double weighted_distance(const CoefficientFlow& a, const CoefficientFlow& b, const Matrix& d) {
  if (a.samples() != b.samples()) throw Error(ErrorCode::DimensionMismatch, "flow grids differ");
  double out = 0.0;
  for (std::size_t m = 0; m < a.samples(); ++m) {
    out = std::max(out, ((a.reduced(m) - b.reduced(m)).cwiseAbs().array() / d.array()).maxCoeff());
  }
  return out;
}

PicardResult picard_solve(const GameSpec& game, const DecaySequence& beta,
                          const PicardOptions& options) {
  if (!game.shift_invariant()) {
    throw Error(ErrorCode::DimensionMismatch, "picard_solve needs a shift-invariant game");
  }
  if (options.steps < 8) throw Error(ErrorCode::ConfigError, "steps must be >= 8");
  ReducedProblem p = reduced_problem(game.si(), options.truncation);
  const int n = static_cast<int>(p.f.rows());
  const double T = game.T;
  const int steps = options.steps;
  const double h = T / steps;

  PicardResult result;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double bb = beta_at(beta, gauge_index(p.indexing, a, n)) *
                  beta_at(beta, gauge_index(p.indexing, b, n));
      double data = std::max(std::abs(p.f(a, b)), std::abs(p.g(a, b)));
      result.domination_constant = std::max(result.domination_constant, data / bb);
    }
  }
  if (result.domination_constant > options.domination_bound) {
    std::ostringstream msg;
    msg << "|f| v |g| <= C beta(x)beta needs C = " << result.domination_constant << " > "
        << options.domination_bound;
    throw Error(ErrorCode::DominationViolated, msg.str(), result.domination_constant);
  }
  result.d = picard_weights(game, beta, options.truncation);
  const Matrix ball = 2.0 * result.d;

  CoefficientFlow current;
  current.layout = Layout::Reduced;
  current.indexing = p.indexing;
  current.truncation = n;
  current.grid = uniform_grid(T, steps);
  current.values.assign(current.grid.size(), {p.g});

  int non_contracting = 0;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    CoefficientFlow next = picard_map(current, p, h);
    for (std::size_t m = 0; m < next.samples(); ++m) {
      const Matrix& c = next.reduced(m);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (!(std::abs(c(a, b)) <= ball(a, b))) {
            std::ostringstream msg;
            msg << "iterate " << iter << " leaves the ball at (h,k)=(" << a << "," << b
                << "), t=" << next.grid[m];
            throw Error(ErrorCode::BallEscape, msg.str(), iter);
          }
        }
      }
    }
    double inc = weighted_distance(next, current, result.d);
    result.increments.push_back(inc);
    if (result.increments.size() >= 2) {
      double prev = result.increments[result.increments.size() - 2];
      double factor = prev > 0.0 ? inc / prev : 0.0;
      result.contraction_factors.push_back(factor);
      non_contracting = factor >= 1.0 ? non_contracting + 1 : 0;
      if (non_contracting >= 3) {
        throw Error(ErrorCode::NoContraction, "contraction factor >= 1 for 3 iterations", factor);
      }
    }
    current = std::move(next);
    result.iterations = iter;
    if (inc < options.tol) {
      result.converged = true;
      break;
    }
  }
  double norm = 0.0;
  for (std::size_t m = 0; m < current.samples(); ++m) {
    norm = std::max(norm, (current.reduced(m).cwiseAbs().array() / result.d.array()).maxCoeff());
  }
  result.weighted_norm = norm;
  result.flow = std::move(current);
  return result;
}

double picard_ball_lipschitz(const GameSpec& game, const DecaySequence& beta, const PicardOptions& options,
                             int pairs, std::uint64_t seed) {
  if (!game.shift_invariant()) {
    throw Error(ErrorCode::DimensionMismatch, "picard_ball_lipschitz needs a shift-invariant game");
  }
  if (options.steps < 8) throw Error(ErrorCode::ConfigError, "steps must be >= 8");
  if (pairs < 1) throw Error(ErrorCode::ConfigError, "pairs must be >= 1");
  const ReducedProblem p = reduced_problem(game.si(), options.truncation);
  const int n = static_cast<int>(p.f.rows());
  const Matrix d = picard_weights(game, beta, options.truncation);
  const rng::Key key = rng::key_from_seed(seed);
  CoefficientFlow shape;
  shape.layout = Layout::Reduced;
  shape.indexing = p.indexing;
  shape.truncation = n;
  shape.grid = uniform_grid(game.T, options.steps);
  // a_hk(t) = 2 d_hk (m + w sin(2 pi t + phase)) with |m| + |w| <= 1: symmetric
  // and inside the ball; the profile lives in physical time, so horizons
  // sample the same family.
  auto draw = [&](std::uint32_t pair, std::uint32_t which) {
    CoefficientFlow out = shape;
    Matrix mean(n, n), amp(n, n), phase(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const auto u = rng::uniforms4({pair, which, static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)}, key);
        const double m = 2.0 * u[0] - 1.0;
        mean(a, b) = mean(b, a) = m;
        amp(a, b) = amp(b, a) = (1.0 - std::abs(m)) * u[1];
        phase(a, b) = phase(b, a) = 2.0 * std::numbers::pi * u[2];
      }
    }
    out.values.clear();
    for (double t : shape.grid) {
      Matrix c(n, n);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          c(a, b) = 2.0 * d(a, b) * (mean(a, b) + amp(a, b) * std::sin(2.0 * std::numbers::pi * t + phase(a, b)));
        }
      }
      out.values.push_back({c});
    }
    return out;
  };
  const double h = game.T / options.steps;
  double sup = 0.0;
  for (int j = 0; j < pairs; ++j) {
    const CoefficientFlow a = draw(static_cast<std::uint32_t>(j), 0u);
    const CoefficientFlow b = draw(static_cast<std::uint32_t>(j), 1u);
    const double den = weighted_distance(a, b, d);
    if (den > 0.0) sup = std::max(sup, weighted_distance(picard_map(a, p, h), picard_map(b, p, h), d) / den);
  }
  return sup;
}

GeneralDecayedResult solve_general_decayed(const GameSpec& game, const DecaySequence& beta, int steps,
                                          double domination_bound) {
  const GeneralMode& costs = game.general();
  const int N = costs.n_players();
  GeneralDecayedResult out;
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < N; ++h) {
      for (int k = 0; k < N; ++k) {
        double bb = beta_at(beta, centered(h - i, N)) * beta_at(beta, centered(k - i, N));
        double data = std::max(std::abs(costs.f[i](h, k)), std::abs(costs.g[i](h, k)));
        out.domination_constant = std::max(out.domination_constant, data / bb);
      }
    }
  }
  if (out.domination_constant > domination_bound) {
    std::ostringstream msg;
    msg << "domination constant " << out.domination_constant << " exceeds " << domination_bound;
    throw Error(ErrorCode::DominationViolated, msg.str(), out.domination_constant);
  }
  out.flow = integrate_backward(game, steps);
  out.certificate = certify_decay(out.flow, beta);
  return out;
}

}  // namespace rnash
