#include "rnash/genfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rnash/error.hpp"

namespace rnash {
namespace {

using CMatrix = Eigen::MatrixXcd;

constexpr double kSingularDenominator = 1e-13;
constexpr double kImaginaryTolerance = 1e-9;
constexpr double kAliasingTolerance = 1e-8;
constexpr double kQuotientSwitch = 1e-6;

Complex horner2(const Matrix& a, Complex z, Complex w) {
  Complex out = 0.0;
  for (Eigen::Index h = a.rows(); h-- > 0;) {
    Complex row = 0.0;
    for (Eigen::Index k = a.cols(); k-- > 0;) row = row * w + a(h, k);
    out = out * z + row;
  }
  return out;
}

double distance_to_negative_axis(Complex v) {
  return v.real() >= 0.0 ? std::abs(v) : std::abs(v.imag());
}

std::string describe(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << "z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

// sinh(x t) / x and (cosh(x t) - 1) / x, entire in x.
Complex sinh_quotient(Complex x, double t) {
  Complex u = x * t;
  if (std::abs(u) < 1e-3) {
    Complex u2 = u * u;
    return t * (1.0 + u2 / 6.0 * (1.0 + u2 / 20.0 * (1.0 + u2 / 42.0)));
  }
  return std::sinh(u) / x;
}

Complex cosh_quotient(Complex x, double t) {
  Complex u = x * t;
  if (std::abs(u) < 1e-3) {
    Complex u2 = u * u;
    return t * u / 2.0 * (1.0 + u2 / 12.0 * (1.0 + u2 / 30.0 * (1.0 + u2 / 56.0)));
  }
  return (std::cosh(u) - 1.0) / x;
}

struct NodeData {
  Complex xi;
  Complex psi;
};

// 2 Xi E_z E_w = 2 xi xi Psi + (phi + xi xi) I+ + (phi - xi xi) I-, with
// I+- = int_0^t (E_z E_w +- F_z F_w), F = E(.; xi, psi).
Complex xi_hat_kernel(const NodeData& a, const NodeData& b, Complex phi, Complex Psi, double t) {
  const Complex xz = a.xi, xw = b.xi, pz = a.psi, pw = b.psi;
  const Complex ez = pz * std::sinh(xz * t) + xz * std::cosh(xz * t);
  const Complex ew = pw * std::sinh(xw * t) + xw * std::cosh(xw * t);
  if (std::abs(ez) < kSingularDenominator || std::abs(ew) < kSingularDenominator) {
    throw Error(ErrorCode::NumericalSingularity, "E(t, .; psi, xi) below 1e-13", t);
  }
  const Complex sum = xz + xw;
  const Complex diff = xz - xw;
  const Complex xx = xz * xw;
  const Complex iplus = (pz * pw + xx) * sinh_quotient(sum, t) + (pz * xw + xz * pw) * cosh_quotient(sum, t);
  const Complex iminus = (xx - pz * pw) * sinh_quotient(diff, t) + (pz * xw - xz * pw) * cosh_quotient(diff, t);
  return (2.0 * xx * Psi + (phi + xx) * iplus + (phi - xx) * iminus) / (2.0 * ez * ew);
}

void require_certified(const SymbolPair& s) {
  if (!s.certified()) {
    throw Error(ErrorCode::UncertifiedSymbol, "symbol has no strong-gathering certificate");
  }
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void validate_plan(const SymbolPair& s, const ContourPlan& plan, int H, bool allow_subunit) {
  if (H < 1) throw Error(ErrorCode::InvalidPlan, "H must be >= 1");
  if (!is_power_of_two(plan.n_nodes)) throw Error(ErrorCode::InvalidPlan, "n_nodes must be a power of two");
  if (plan.n_nodes < 4 * H) throw Error(ErrorCode::InvalidPlan, "n_nodes must be >= 4H");
  if (allow_subunit) {
    if (!(plan.r > 0.0 && plan.r < 1.0)) {
      throw Error(ErrorCode::InvalidPlan, "uncertified extraction needs 0 < r < 1");
    }
    return;
  }
  if (!(plan.r > 1.0 && plan.r < s.rho)) {
    std::ostringstream msg;
    msg << "radius r = " << plan.r << " must lie in (1, rho = " << s.rho << ")";
    throw Error(ErrorCode::InvalidPlan, msg.str());
  }
}

template <class Sampler>
Extraction extract_on_torus(int n, double r, int H, Sampler&& sample) {
  std::vector<Complex> nodes(n);
  for (int a = 0; a < n; ++a) nodes[a] = std::polar(r, 2.0 * std::numbers::pi * a / n);
  CMatrix X(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      Complex v = sample(a, b, nodes[a], nodes[b]);
      X(a, b) = v;
      X(b, a) = v;
    }
  }
  CMatrix F(n, H);
  for (int a = 0; a < n; ++a) {
    for (int h = 0; h < H; ++h) {
      long e = (static_cast<long>(a) * h) % n;
      F(a, h) = std::polar(1.0, -2.0 * std::numbers::pi * e / n);
    }
  }
  CMatrix C = F.transpose() * (X * F);
  Extraction out;
  out.contour_max = X.cwiseAbs().maxCoeff();
  out.c.resize(H, H);
  const double norm = 1.0 / (double(n) * double(n));
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < H; ++k) {
      Complex v = C(h, k) * norm * std::pow(r, -(h + k));
      out.c(h, k) = v.real();
      out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
    }
  }
  Matrix sym = 0.5 * (out.c + out.c.transpose());
  out.c = sym;
  if (out.max_imag > kImaginaryTolerance) {
    std::ostringstream msg;
    msg << "imaginary part " << out.max_imag << " after extraction";
    throw Error(ErrorCode::ImaginaryResidue, msg.str(), out.max_imag);
  }
  return out;
}

template <class Sampler>
Extraction extract_checked(int n, double r, int H, bool check_aliasing, Sampler&& sample) {
  Extraction out = extract_on_torus(n, r, H, sample);
  if (check_aliasing) {
    Extraction fine = extract_on_torus(2 * n, r, H, sample);
    double change = (fine.c - out.c).cwiseAbs().maxCoeff();
    if (change > kAliasingTolerance) {
      std::ostringstream msg;
      msg << "doubling n_nodes changes a coefficient by " << change;
      throw Error(ErrorCode::AliasingDetected, msg.str(), change);
    }
  }
  return out;
}

}  // namespace

SymbolPair build_symbol(const CostStencil& stencil) {
  SymbolPair s;
  s.phi = stencil.f;
  s.Psi = stencil.g;
  s.ell = stencil.ell();
  return s;
}

Complex eval_phi(const SymbolPair& s, Complex z, Complex w) { return horner2(s.phi, z, w); }
Complex eval_Psi(const SymbolPair& s, Complex z, Complex w) { return horner2(s.Psi, z, w); }
Complex eval_xi(const SymbolPair& s, Complex z) { return std::sqrt(eval_phi(s, z, 0.0)); }
Complex eval_psi(const SymbolPair& s, Complex z) { return eval_Psi(s, z, 0.0); }

GatheringReport check_strong_gathering(SymbolPair& symbol, double rho_candidate, int n_samples,
                                       double margin) {
  if (!(rho_candidate > 1.0)) throw Error(ErrorCode::ConfigError, "rho candidate must be > 1");
  if (n_samples < 256) throw Error(ErrorCode::ConfigError, "n_samples must be >= 256");
  GatheringReport report;
  report.rho = rho_candidate;
  report.min_distance = std::numeric_limits<double>::infinity();

  auto visit = [&](Complex z) {
    Complex v = eval_phi(symbol, z, 0.0);
    double dist = distance_to_negative_axis(v);
    if (dist < report.min_distance) {
      report.min_distance = dist;
      report.argmin = z;
    }
    if (!(dist > margin)) {
      std::ostringstream msg;
      msg << "phi(z,0) = " << v.real() << (v.imag() < 0 ? " - " : " + ") << std::abs(v.imag())
          << "i lies within " << margin << " of (-inf, 0] at " << describe(z);
      throw Error(ErrorCode::GatheringFailed, msg.str(), std::abs(z));
    }
    return v;
  };

  visit(0.0);
  const double radii[3] = {1.0, 0.5 * (1.0 + rho_candidate), rho_candidate};
  double turning = 0.0;
  for (int ri = 0; ri < 3; ++ri) {
    Complex first, prev;
    for (int a = 0; a < n_samples; ++a) {
      Complex v = visit(std::polar(radii[ri], 2.0 * std::numbers::pi * a / n_samples));
      if (ri == 2) {
        if (a == 0) first = v;
        else turning += std::arg(v / prev);
      }
      prev = v;
    }
    if (ri == 2) turning += std::arg(first / prev);
  }
  report.winding = static_cast<int>(std::lround(turning / (2.0 * std::numbers::pi)));
  if (report.winding != 0) {
    std::ostringstream msg;
    msg << "phi(., 0) winds " << report.winding << " times around 0 on |z| = " << rho_candidate;
    throw Error(ErrorCode::GatheringFailed, msg.str(), rho_candidate);
  }
  symbol.rho = rho_candidate;
  return report;
}

CompatibilityReport check_compatibility(const SymbolPair& symbol, double t_max, int n_t, int n_z,
                                        double margin) {
  require_certified(symbol);
  if (n_t < 2 || n_z < 1 || !(t_max >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "compatibility grid needs n_t >= 2, n_z >= 1, t_max >= 0");
  }
  CompatibilityReport report;
  report.minimum = std::numeric_limits<double>::infinity();
  std::vector<Complex> zs{0.0};
  for (int j = 1; j <= n_z; ++j) {
    double rad = symbol.rho * j / n_z;
    for (int a = 0; a < n_z; ++a) zs.push_back(std::polar(rad, 2.0 * std::numbers::pi * a / n_z));
  }
  for (Complex z : zs) {
    const Complex xi = eval_xi(symbol, z);
    const Complex psi = eval_psi(symbol, z);
    for (int j = 0; j < n_t; ++j) {
      double t = t_max * j / (n_t - 1);
      double v = std::abs(psi * std::tanh(t * xi) + xi);
      if (v < report.minimum) {
        report.minimum = v;
        report.t_at = t;
        report.z_at = z;
      }
    }
  }
  report.pass = report.minimum > margin;
  if (!report.pass) {
    std::ostringstream msg;
    msg << "|psi tanh(t xi) + xi| = " << report.minimum << " at t = " << report.t_at << ", "
        << describe(report.z_at);
    throw Error(ErrorCode::CompatibilityFailed, msg.str(), report.t_at);
  }
  return report;
}

Complex eval_L(const SymbolPair& s, double t, Complex z) {
  const Complex xi = eval_xi(s, z);
  const Complex psi = eval_psi(s, z);
  const Complex sh = std::sinh(xi * t), ch = std::cosh(xi * t);
  return (xi * sh + psi * ch) / (psi * sh + xi * ch);
}

Complex eval_dL_dxi(Complex xi, Complex psi, double t) {
  const Complex ch = std::cosh(xi * t);
  const Complex th = std::tanh(xi * t);
  const Complex den = psi * th + xi;
  return ((xi * xi - psi * psi) * t - psi) / (ch * ch * den * den);
}

SigmaPair eval_sigma(const SymbolPair& s, double t, Complex z, Complex w) {
  const Complex xz = eval_xi(s, z), xw = eval_xi(s, w);
  const Complex lz = eval_L(s, t, z), lw = eval_L(s, t, w);
  Complex quotient;
  if (std::abs(xz - xw) < kQuotientSwitch) {
    quotient = eval_dL_dxi(0.5 * (xz + xw), 0.5 * (eval_psi(s, z) + eval_psi(s, w)), t);
  } else {
    quotient = (lz - lw) / (xz - xw);
  }
  const Complex mean = (lz + lw) / (xz + xw);
  return {mean + quotient, mean - quotient};
}

Complex eval_xi_hat(const SymbolPair& s, double t, Complex z, Complex w) {
  require_certified(s);
  NodeData a{eval_xi(s, z), eval_psi(s, z)};
  NodeData b{eval_xi(s, w), eval_psi(s, w)};
  return xi_hat_kernel(a, b, eval_phi(s, z, w), eval_Psi(s, z, w), t);
}

Complex eval_xi_hat_sigma(const SymbolPair& s, double t, Complex z, Complex w) {
  require_certified(s);
  const Complex xz = eval_xi(s, z), xw = eval_xi(s, w);
  const Complex pz = eval_psi(s, z), pw = eval_psi(s, w);
  const Complex phi = eval_phi(s, z, w);
  const Complex Psi = eval_Psi(s, z, w);
  const SigmaPair now = eval_sigma(s, t, z, w);
  const SigmaPair start = eval_sigma(s, 0.0, z, w);
  const Complex ez = pz * std::sinh(xz * t) + xz * std::cosh(xz * t);
  const Complex ew = pw * std::sinh(xw * t) + xw * std::cosh(xw * t);
  // The initial-time terms decay with the factor xi(z) xi(w) / (E_z E_w).
  const Complex initial = xz * xw / (ez * ew) * (2.0 * Psi - phi * start.plus - xz * xw * start.minus);
  return 0.5 * (initial + phi * now.plus + xz * xw * now.minus);
}

Complex eval_xi_bar(const SymbolPair& s, Complex z, Complex w) {
  const Complex xz = eval_xi(s, z), xw = eval_xi(s, w);
  return (eval_phi(s, z, w) + xz * xw) / (xz + xw);
}

ContourPlan default_plan(const SymbolPair& s, int H) {
  require_certified(s);
  ContourPlan plan;
  plan.r = 0.5 * (1.0 + s.rho);
  plan.n_nodes = next_power_of_two(std::max(256, 4 * H));
  return plan;
}

Extraction extract_coefficients(const SymbolPair& s, const ContourPlan& plan, double t, int H,
                                bool check_aliasing) {
  require_certified(s);
  validate_plan(s, plan, H, false);
  auto run = [&](int n) {
    std::vector<NodeData> data(n);
    for (int a = 0; a < n; ++a) {
      Complex z = std::polar(plan.r, 2.0 * std::numbers::pi * a / n);
      data[a] = {eval_xi(s, z), eval_psi(s, z)};
    }
    return [&s, t, data = std::move(data)](int a, int b, Complex z, Complex w) {
      return xi_hat_kernel(data[a], data[b], eval_phi(s, z, w), eval_Psi(s, z, w), t);
    };
  };
  Extraction out = extract_on_torus(plan.n_nodes, plan.r, H, run(plan.n_nodes));
  if (check_aliasing) {
    Extraction fine = extract_on_torus(2 * plan.n_nodes, plan.r, H, run(2 * plan.n_nodes));
    double change = (fine.c - out.c).cwiseAbs().maxCoeff();
    if (change > kAliasingTolerance) {
      std::ostringstream msg;
      msg << "doubling n_nodes changes a coefficient by " << change;
      throw Error(ErrorCode::AliasingDetected, msg.str(), change);
    }
  }
  return out;
}

Extraction ergodic_coefficients(const SymbolPair& s, const ContourPlan& plan, int H, Sign sign,
                                bool check_aliasing) {
  const bool subunit = !s.certified();
  validate_plan(s, plan, H, subunit);
  auto sample = [&s](int, int, Complex z, Complex w) { return eval_xi_bar(s, z, w); };
  Extraction out = extract_checked(plan.n_nodes, plan.r, H, check_aliasing, sample);
  out.certified = !subunit;
  if (sign == Sign::Minus) out.c = -out.c;
  return out;
}

Rational generalized_binomial(const Rational& a, int n) {
  Rational out = 1;
  for (int m = 0; m < n; ++m) out = out * (a - m) / (m + 1);
  return out;
}

Rational directed_chain_oracle_exact(int h, int k, Sign sign) {
  if (h < 0 || k < 0) throw Error(ErrorCode::IndexOutOfRange, "oracle indices must be >= 0");
  Rational a(3, 2);
  if (h == 0 || k == 0) a -= 1;
  Rational v = generalized_binomial(a, h + k);
  if ((h + k) % 2 == 1) v = -v;
  return sign == Sign::Plus ? v : Rational(-v);
}

double directed_chain_oracle(int h, int k, Sign sign) {
  return static_cast<double>(directed_chain_oracle_exact(h, k, sign));
}

double min_re_xi(const SymbolPair& s, double r, int n_samples) {
  double out = eval_xi(s, 0.0).real();
  for (int ring = 1; ring <= 8; ++ring) {
    double rad = r * ring / 8.0;
    for (int a = 0; a < n_samples; ++a) {
      out = std::min(out, eval_xi(s, std::polar(rad, 2.0 * std::numbers::pi * a / n_samples)).real());
    }
  }
  return out;
}

}  // namespace rnash
