#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <limits>
#include <vector>

#include "rnash/core.hpp"

namespace rnash {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

enum class Sign { Plus, Minus };

// phi(z,w) = sum f_hk z^h w^k and Psi(z,w) = sum g_hk z^h w^k.
struct SymbolPair {
  Matrix phi;
  Matrix Psi;
  double rho = std::numeric_limits<double>::quiet_NaN();  // set by check_strong_gathering
  int ell = 0;

  [[nodiscard]] bool certified() const { return rho > 1.0; }
};

[[nodiscard]] SymbolPair build_symbol(const CostStencil& stencil);

[[nodiscard]] Complex eval_phi(const SymbolPair& s, Complex z, Complex w);
[[nodiscard]] Complex eval_Psi(const SymbolPair& s, Complex z, Complex w);
// Principal square root of phi(z, 0).
[[nodiscard]] Complex eval_xi(const SymbolPair& s, Complex z);
[[nodiscard]] Complex eval_psi(const SymbolPair& s, Complex z);

struct GatheringReport {
  double rho = 0.0;
  double min_distance = 0.0;  // distance of phi(z,0) samples from (-inf, 0]
  Complex argmin;
  int winding = 0;            // winding of phi(., 0) around 0 on |z| = rho
};

// Samples z = 0 and circles of radii {1, (1+rho)/2, rho}; stores rho on success.
GatheringReport check_strong_gathering(SymbolPair& symbol, double rho_candidate, int n_samples = 512,
                                       double margin = 1e-3);

struct CompatibilityReport {
  double minimum = 0.0;  // min |psi tanh(t xi) + xi|
  double t_at = 0.0;
  Complex z_at;
  bool pass = false;
};

CompatibilityReport check_compatibility(const SymbolPair& symbol, double t_max, int n_t = 201,
                                        int n_z = 64, double margin = 1e-6);

// E(t, z; a, b) = a sinh(xi t) + b cosh(xi t) and L = E(.; xi, psi) / E(.; psi, xi).
[[nodiscard]] Complex eval_L(const SymbolPair& s, double t, Complex z);
// dL/dxi at fixed psi: sech^2(xi t) ((xi^2 - psi^2) t - psi) / (psi tanh(xi t) + xi)^2.
[[nodiscard]] Complex eval_dL_dxi(Complex xi, Complex psi, double t);

struct SigmaPair {
  Complex plus;
  Complex minus;
};

// sigma^pm = (L(z)+L(w))/(xi(z)+xi(w)) +- (L(z)-L(w))/(xi(z)-xi(w)); the
// difference quotient switches to dL/dxi at the midpoint when
// |xi(z) - xi(w)| < 1e-6.
[[nodiscard]] SigmaPair eval_sigma(const SymbolPair& s, double t, Complex z, Complex w);

// Generating function of the evolutive coefficients at forward time t:
// Xi_hat(t, z, w) = sum_hk c_hk(T - t) z^h w^k. Requires a certified symbol.
[[nodiscard]] Complex eval_xi_hat(const SymbolPair& s, double t, Complex z, Complex w);
// Same through the sigma representation (kept as an independent cross-check).
[[nodiscard]] Complex eval_xi_hat_sigma(const SymbolPair& s, double t, Complex z, Complex w);
// Xi_bar(z, w) = (phi(z,w) + xi(z) xi(w)) / (xi(z) + xi(w)).
[[nodiscard]] Complex eval_xi_bar(const SymbolPair& s, Complex z, Complex w);

struct ContourPlan {
  double r = 0.0;
  int n_nodes = 256;
  std::vector<double> t_samples;
};

// r = (1 + rho)/2, n_nodes = max(256, 4H) rounded up to a power of two.
[[nodiscard]] ContourPlan default_plan(const SymbolPair& s, int H);

struct Extraction {
  Matrix c;                  // H x H, symmetrized
  double contour_max = 0.0;  // max |Xi| over the sampled torus
  double max_imag = 0.0;
  bool certified = true;     // false on the sub-unit radius path
};

// c_hk(T - t) from the tensor DFT of Xi_hat(t, .) on the radius-r torus.
[[nodiscard]] Extraction extract_coefficients(const SymbolPair& s, const ContourPlan& plan, double t,
                                              int H, bool check_aliasing = false);

// +-c_bar from Xi_bar. Uncertified symbols are accepted only with r < 1.
[[nodiscard]] Extraction ergodic_coefficients(const SymbolPair& s, const ContourPlan& plan, int H,
                                              Sign sign, bool check_aliasing = false);

// c^pm_hk = +-(-1)^{h+k} binom(3/2 - [hk = 0], h + k) for the directed chain.
[[nodiscard]] Rational directed_chain_oracle_exact(int h, int k, Sign sign);
[[nodiscard]] double directed_chain_oracle(int h, int k, Sign sign);
[[nodiscard]] Rational generalized_binomial(const Rational& a, int n);

// min Re xi over the closed disc of radius r (boundary plus interior rings).
[[nodiscard]] double min_re_xi(const SymbolPair& s, double r, int n_samples = 1024);

}  // namespace rnash
