#include "rnash/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rnash/error.hpp"
#include "rnash/parallel.hpp"
#include "rnash/riccati.hpp"

namespace rnash {
namespace {

void validate_horizons(const std::vector<double>& horizons) {
  if (horizons.empty()) throw Error(ErrorCode::ConfigError, "sweep needs at least one horizon");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw Error(ErrorCode::ConfigError, "horizons must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) {
      throw Error(ErrorCode::ConfigError, "horizons must be strictly increasing");
    }
  }
}

// Simpson weights for an even number of intervals on [0, T].
std::vector<double> simpson_weights(int intervals, double T) {
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1);
  const double h = T / intervals;
  for (int j = 0; j <= intervals; ++j) {
    double m = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    w[j] = m * h / 3.0;
  }
  return w;
}

// Key quantizing forward times so that shared nodes are evaluated once.
long long time_key(double t) { return std::llround(t * 1e12); }

}  // namespace

ErgodicValue ergodic_value(const Matrix& cbar, int d, double r) {
  if (d < 1) throw Error(ErrorCode::ConfigError, "dimension d must be >= 1");
  ErgodicValue out;
  out.lambda = d * cbar.trace();
  if (cbar.size() == 0) return out;
  if (!(r > 1.0)) {
    out.tail_bound = std::numeric_limits<double>::infinity();
    return out;
  }
  const DecayCertificate cert = certify_decay(cbar, r);
  const double q = 1.0 / (r * r);
  const int H = static_cast<int>(cbar.rows());
  out.tail_bound = d * cert.constant * std::pow(q, H) / (1.0 - q);
  return out;
}

ExactErgodicValue directed_chain_ergodic_value(int H, int d) {
  if (H < 1) throw Error(ErrorCode::ConfigError, "H must be >= 1");
  if (d < 1) throw Error(ErrorCode::ConfigError, "dimension d must be >= 1");
  ExactErgodicValue out;
  out.partial_sum = 0;
  for (int h = 0; h < H; ++h) out.partial_sum += directed_chain_oracle_exact(h, h, Sign::Plus);
  out.partial_sum *= d;
  out.lambda = static_cast<double>(out.partial_sum);
  const double a = std::abs(static_cast<double>(generalized_binomial(Rational(3, 2), 2 * H)));
  out.tail_bound = d * a * (1.0 + 2.0 * H / 3.0);
  return out;
}

ExponentialFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y,
                               double floor) {
  ExponentialFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(y[i] > floor)) continue;
    double ly = std::log(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++n;
  }
  fit.points = n;
  if (n < 2) return fit;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

ConvergenceReport convergence_sweep(const SymbolPair& symbol, std::vector<double> horizons, int H,
                                    const ContourPlan& plan, const SweepOptions& options) {
  const Matrix cbar = ergodic_coefficients(symbol, plan, H, Sign::Plus).c;
  return convergence_sweep_against(symbol, std::move(horizons), H, plan, cbar, options);
}

ConvergenceReport convergence_sweep_against(const SymbolPair& symbol, std::vector<double> horizons,
                                            int H, const ContourPlan& plan, const Matrix& cbar,
                                            const SweepOptions& options) {
  validate_horizons(horizons);
  if (options.quadrature_intervals < 2 || options.quadrature_intervals % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "quadrature_intervals must be even and >= 2");
  }
  if (cbar.rows() != H || cbar.cols() != H) {
    throw Error(ErrorCode::DimensionMismatch, "ergodic reference must be H x H");
  }
  const double t_max = horizons.back();
  (void)check_compatibility(symbol, t_max);

  ConvergenceReport report;
  report.horizons = horizons;
  const ErgodicValue ev = ergodic_value(cbar, options.d, plan.r);
  report.lambda = ev.lambda;
  report.lambda_tail = ev.tail_bound;
  report.epsilon = min_re_xi(symbol, plan.r);

  // Forward-time nodes: every horizon plus its Simpson grid.
  std::map<long long, double> nodes;
  for (double T : horizons) {
    for (int j = 0; j <= options.quadrature_intervals; ++j) {
      double tau = T * j / options.quadrature_intervals;
      nodes.emplace(time_key(tau), tau);
    }
  }
  std::vector<double> taus;
  for (const auto& [key, tau] : nodes) taus.push_back(tau);
  std::vector<Matrix> coeffs(taus.size());
  parallel_chunks(taus.size(), 1, options.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) coeffs[j] = extract_coefficients(symbol, plan, taus[j], H).c;
  });
  std::map<long long, std::size_t> index;
  for (std::size_t j = 0; j < taus.size(); ++j) index[time_key(taus[j])] = j;
  auto at = [&](double tau) -> const Matrix& { return coeffs[index.at(time_key(tau))]; };

  const double trace_bar = cbar.trace();
  for (double T : horizons) {
    const Matrix& c0 = at(T);
    report.l1_gaps.push_back((c0 - cbar).cwiseAbs().sum());
    report.trace_gaps.push_back(std::abs(options.d * (c0.trace() - trace_bar)));
  }
  const ExponentialFit fit = fit_exponential(horizons, report.l1_gaps, 10.0 * options.noise_floor);
  report.fitted_rate = -fit.slope;
  report.fit_points = fit.points;

  for (double T : horizons) {
    const std::vector<double> w = simpson_weights(options.quadrature_intervals, T);
    double integral = 0.0;
    for (int j = 0; j <= options.quadrature_intervals; ++j) {
      double tau = T * j / options.quadrature_intervals;
      integral += w[j] * (at(tau).trace() - trace_bar);
    }
    double mu = options.d * integral;
    // Exponential tail of the integrand beyond T.
    if (report.fitted_rate > 0.0) mu += options.d * (at(T).trace() - trace_bar) / report.fitted_rate;
    report.mu_by_horizon.push_back(mu);
  }
  report.mu_estimate = report.mu_by_horizon.back();
  const double tail_term = report.fitted_rate > 0.0
                               ? std::abs(options.d * (at(t_max).trace() - trace_bar)) / report.fitted_rate
                               : std::numeric_limits<double>::infinity();
  const double spread = report.mu_by_horizon.size() > 1
                            ? std::abs(report.mu_by_horizon.back() -
                                       report.mu_by_horizon[report.mu_by_horizon.size() - 2])
                            : 0.0;
  report.mu_error = tail_term + spread;
  return report;
}

NormalizationTable value_normalization_check(const SymbolPair& symbol, double T,
                                             const std::vector<double>& t_fracs, const Vector& x,
                                             int H, const ContourPlan& plan, int d,
                                             int quadrature_intervals) {
  if (!(T > 0.0)) throw Error(ErrorCode::ConfigError, "T must be positive");
  if (x.size() > H) throw Error(ErrorCode::DimensionMismatch, "state vector longer than H");
  if (quadrature_intervals < 2 || quadrature_intervals % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "quadrature_intervals must be even and >= 2");
  }
  (void)check_compatibility(symbol, T);
  Vector xs = Vector::Zero(H);
  xs.head(x.size()) = x;
  const Matrix cbar = ergodic_coefficients(symbol, plan, H, Sign::Plus).c;
  NormalizationTable table;
  table.lambda = d * cbar.trace();
  for (double s : t_fracs) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::ConfigError, "t_fracs must lie in [0, 1]");
    const double span = (1.0 - s) * T;  // forward time at t = sT
    const Matrix c = extract_coefficients(symbol, plan, span, H).c;
    double eta = 0.0;
    if (span > 0.0) {
      const std::vector<double> w = simpson_weights(quadrature_intervals, span);
      for (int j = 0; j <= quadrature_intervals; ++j) {
        double tau = span * j / quadrature_intervals;
        eta += w[j] * extract_coefficients(symbol, plan, tau, H).c.trace();
      }
      eta *= d;
    }
    NormalizationRow row;
    row.s = s;
    row.value = 0.5 * xs.dot(c * xs) + eta;
    row.gap = std::abs(row.value / T - (1.0 - s) * table.lambda);
    table.max_gap = std::max(table.max_gap, row.gap);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace rnash
