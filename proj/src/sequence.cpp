#include "rnash/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rnash/error.hpp"

namespace rnash {

Window Window::zeros(int radius) {
  return Window{radius, std::vector<double>(static_cast<std::size_t>(2 * radius + 1), 0.0)};
}

double TailModel::bound(long i) const {
  if (kind == Kind::Compact || i == 0) return 0.0;
  double a = static_cast<double>(std::labs(i));
  return amplitude * std::exp(-rate * a) / (a * a);
}

DecaySequence::DecaySequence(Window entries, TailModel tail)
    : entries_(std::move(entries)), tail_(tail) {
  if (entries_.radius < 0 ||
      entries_.v.size() != static_cast<std::size_t>(2 * entries_.radius + 1)) {
    throw Error(ErrorCode::WindowMismatch, "window storage does not match its radius");
  }
  for (int i = -entries_.radius; i <= entries_.radius; ++i) {
    if (!(entries_[i] > 0.0)) {
      std::ostringstream msg;
      msg << "entry " << i << " is " << entries_[i];
      throw Error(ErrorCode::NonPositiveEntry, msg.str(), i);
    }
  }
}

double DecaySequence::majorant(long i) const {
  if (std::labs(i) <= entries_.radius) return entries_[static_cast<int>(i)];
  return tail_.bound(i);
}

double DecaySequence::min_entry() const {
  return *std::min_element(entries_.v.begin(), entries_.v.end());
}

DecaySequence make_exponential_fourier_seq(double alpha, int radius) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0", alpha);
  if (radius < 1) throw Error(ErrorCode::WindowMismatch, "radius must be >= 1");
  Window w = Window::zeros(radius);
  const double decay = std::exp(-alpha * std::numbers::pi);
  for (int i = 0; i <= radius; ++i) {
    double sign = (i % 2 == 0) ? 1.0 : -1.0;
    double value = 2.0 * alpha / (alpha * alpha + double(i) * double(i)) * (1.0 - sign * decay);
    w.at(i) = value;
    w.at(-i) = value;
  }
  TailModel tail{TailModel::Kind::InverseSquare, 2.0 * alpha * (1.0 + decay), 0.0};
  return DecaySequence(std::move(w), tail);
}

DecaySequence tilt(const DecaySequence& beta, double gamma) {
  Window w = beta.entries();
  for (int i = -w.radius; i <= w.radius; ++i) w.at(i) *= std::exp(-gamma * std::abs(i));
  TailModel tail = beta.tail();
  tail.rate += gamma;
  return DecaySequence(std::move(w), tail);
}

DecaySequence scale(const DecaySequence& beta, double lambda) {
  Window w = beta.entries();
  for (double& x : w.v) x *= lambda;
  TailModel tail = beta.tail();
  tail.amplitude *= lambda;
  return DecaySequence(std::move(w), tail);
}

Window convolve(const Window& a, const Window& b) {
  if (a.radius != b.radius) throw Error(ErrorCode::WindowMismatch, "window radii differ");
  const int R = a.radius;
  Window out = Window::zeros(R);
  for (int i = -R; i <= R; ++i) {
    double s = 0.0;
    int lo = std::max(-R, i - R);
    int hi = std::min(R, i + R);
    for (int j = lo; j <= hi; ++j) s += a[j] * b[i - j];
    out.at(i) = s;
  }
  return out;
}

Window convolve(const DecaySequence& a, const DecaySequence& b) {
  return convolve(a.entries(), b.entries());
}

std::vector<double> convolve_cyclic(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::WindowMismatch, "cyclic lengths differ");
  const int N = static_cast<int>(a.size());
  std::vector<double> out(a.size(), 0.0);
  for (int k = 0; k < N; ++k) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += a[j] * b[mod(k - j, N)];
    out[k] = s;
  }
  return out;
}

std::vector<double> convolve_cyclic(const DecaySequence& a, const DecaySequence& b, int N) {
  if (a.radius() != b.radius()) throw Error(ErrorCode::WindowMismatch, "window radii differ");
  if (N < 1 || N > 2 * a.radius() + 1) {
    throw Error(ErrorCode::WindowMismatch, "cyclic N must not exceed the window size");
  }
  std::vector<double> av(N), bv(N);
  for (int j = 0; j < N; ++j) {
    av[j] = a(centered(j, N));
    bv[j] = b(centered(j, N));
  }
  return convolve_cyclic(av, bv);
}

SelfControlCertificate certify_self_controlled(DecaySequence& beta, double tol_tail) {
  const int R = beta.radius();
  const Window conv = convolve(beta, beta);
  const bool compact = beta.tail().kind == TailModel::Kind::Compact;

  // Explicit majorant sums out to |j| <= J, analytic remainder beyond.
  const long J = compact ? R : std::max<long>(16L * R, 2L * R + 64);
  const double A = beta.tail().amplitude;
  const double gamma = beta.tail().rate;

  SelfControlCertificate cert;
  for (int i = -R; i <= R; ++i) {
    double tail = 0.0;
    if (!compact) {
      for (long j = -J; j <= J; ++j) {
        long m = i - j;
        if (std::labs(j) <= R && std::labs(m) <= R) continue;
        tail += beta.majorant(j) * beta.majorant(m);
      }
      double span = static_cast<double>(J - R);
      tail += 2.0 * A * A * std::exp(-gamma * (2.0 * J - std::abs(i))) /
              (double(J) * double(J) * span);
    }
    double b = beta(i);
    double with_tail = (conv[i] + tail) / b;
    if (with_tail > cert.constant) {
      cert.constant = with_tail;
      cert.argmax = i;
    }
    cert.window_constant = std::max(cert.window_constant, conv[i] / b);
    cert.tail_slack = std::max(cert.tail_slack, tail / b);
    cert.max_tail = std::max(cert.max_tail, tail);
  }
  if (cert.max_tail > tol_tail * beta.min_entry()) {
    std::ostringstream msg;
    msg << "tail bound " << cert.max_tail << " exceeds " << tol_tail << " * min beta";
    throw Error(ErrorCode::TailBoundFailure, msg.str(), cert.max_tail);
  }
  beta.csc_constant = cert.constant;
  return cert;
}

DominationWitness domination_witness(const DecaySequence& beta, const Matrix& theta) {
  const int R = beta.radius();
  const int n = 2 * R + 1;
  if (theta.rows() != n || theta.cols() != n) {
    throw Error(ErrorCode::WindowMismatch, "theta must be (2R+1) x (2R+1)");
  }
  auto b = [&](int i) { return beta(i); };
  Matrix d(n, n);
  DominationWitness w;
  for (int h = -R; h <= R; ++h) {
    for (int k = -R; k <= R; ++k) {
      double th = theta(h + R, k + R);
      if (th < 0.0) throw Error(ErrorCode::NonPositiveEntry, "theta must be nonnegative");
      d(h + R, k + R) = b(h) * b(k) + th;
      w.theta_bound = std::max(w.theta_bound, th / (b(h) * b(k)));
    }
  }
  for (int h = -R; h <= R; ++h) {
    int lo = std::max(-R, h - R);
    int hi = std::min(R, h + R);
    for (int k = -R; k <= R; ++k) {
      double s = 0.0;
      for (int j = lo; j <= hi; ++j) s += d(j + R, R) * d(h - j + R, k + R);
      w.conv_bound = std::max(w.conv_bound, s / (b(h) * b(k)));
    }
  }
  return w;
}

}  // namespace rnash
