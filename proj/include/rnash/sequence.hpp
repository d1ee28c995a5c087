#pragma once

#include <optional>
#include <vector>

#include "rnash/core.hpp"

namespace rnash {

// Real array indexed by i in [-radius, radius]; reads outside are 0.
struct Window {
  int radius = 0;
  std::vector<double> v;

  [[nodiscard]] static Window zeros(int radius);
  [[nodiscard]] double operator[](int i) const {
    return (i < -radius || i > radius) ? 0.0 : v[static_cast<std::size_t>(i + radius)];
  }
  [[nodiscard]] double& at(int i) { return v.at(static_cast<std::size_t>(i + radius)); }
};

// Majorant for entries beyond the stored window:
// beta_i <= amplitude * exp(-rate |i|) / i^2 for |i| > radius.
struct TailModel {
  enum class Kind { Compact, InverseSquare };
  Kind kind = Kind::Compact;
  double amplitude = 0.0;
  double rate = 0.0;

  [[nodiscard]] double bound(long i) const;
};

class DecaySequence {
 public:
  // Rejects any nonpositive stored entry.
  explicit DecaySequence(Window entries, TailModel tail = {});

  [[nodiscard]] int radius() const { return entries_.radius; }
  [[nodiscard]] const Window& entries() const { return entries_; }
  [[nodiscard]] const TailModel& tail() const { return tail_; }
  [[nodiscard]] double operator()(int i) const { return entries_[i]; }
  // Stored value inside the window, tail bound outside.
  [[nodiscard]] double majorant(long i) const;
  [[nodiscard]] double min_entry() const;

  std::optional<double> csc_constant;

 private:
  Window entries_;
  TailModel tail_;
};

// beta_i(alpha) = 2 alpha / (alpha^2 + i^2) (1 - (-1)^i e^{-alpha pi}).
[[nodiscard]] DecaySequence make_exponential_fourier_seq(double alpha, int radius);
// beta_i e^{-gamma |i|}.
[[nodiscard]] DecaySequence tilt(const DecaySequence& beta, double gamma);
[[nodiscard]] DecaySequence scale(const DecaySequence& beta, double lambda);

// (a * b)_i = sum_{|j| <= R} a_j b_{i-j}, out-of-window factors treated as 0.
[[nodiscard]] Window convolve(const Window& a, const Window& b);
[[nodiscard]] Window convolve(const DecaySequence& a, const DecaySequence& b);
// (a * b)_k = sum_{j in [[N]]} a_j b_{[k-j]_N}.
[[nodiscard]] std::vector<double> convolve_cyclic(const std::vector<double>& a,
                                                  const std::vector<double>& b);
// Cyclic convolution of the entries at the signed representatives of [[N]].
[[nodiscard]] std::vector<double> convolve_cyclic(const DecaySequence& a, const DecaySequence& b,
                                                  int N);

struct SelfControlCertificate {
  double constant = 0.0;         // max_i ((beta*beta)_i + tail_i) / beta_i
  double window_constant = 0.0;  // same without tails
  double tail_slack = 0.0;       // max_i tail_i / beta_i
  double max_tail = 0.0;         // max_i tail_i
  int argmax = 0;
};

// Certifies sum_j beta_j beta_{i-j} <= C beta_i on the window, with the
// out-of-window part bounded through the tail model. Stores C in beta.
// Edge tails of the Fourier family approach (2 pi - beta_0) beta_R, hence the default.
SelfControlCertificate certify_self_controlled(DecaySequence& beta, double tol_tail = 8.0);

// theta indexed by (h, k) in [-R, R]^2, stored with offset R.
struct DominationWitness {
  double theta_bound = 0.0;  // theta <= theta_bound beta (x) beta
  double conv_bound = 0.0;   // (d_{.0} * d_{.k})_h <= conv_bound beta_h beta_k
};

[[nodiscard]] DominationWitness domination_witness(const DecaySequence& beta, const Matrix& theta);

}  // namespace rnash
