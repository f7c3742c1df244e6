#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Spectral radius of a nonnegative irreducible matrix by power iteration
/// on (I + A), which is primitive whenever A is irreducible.
inline double spectral_radius(const Matrix& A, double tol = 1e-14, int max_iter = 200000) {
  const std::size_t k = A.size();
  std::vector<double> x(k, 1.0), y(k);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = x[i];
      for (std::size_t j = 0; j < k; ++j) y[i] += A[i][j] * x[j];
      norm = std::max(norm, y[i]);
    }
    for (std::size_t i = 0; i < k; ++i) y[i] /= norm;
    double diff = 0.0;
    for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(y[i] - x[i]));
    x.swap(y);
    const double next = norm - 1.0;
    if (diff < tol && std::abs(next - lambda) < tol) return next;
    lambda = next;
  }
  return lambda;
}

/// Right Perron eigenvector (normalized to sum 1), same iteration.
inline std::vector<double> perron_vector(const Matrix& A, bool left = false) {
  const std::size_t k = A.size();
  std::vector<double> x(k, 1.0 / static_cast<double>(k)), y(k);
  for (int it = 0; it < 200000; ++it) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = x[i];
      for (std::size_t j = 0; j < k; ++j) y[i] += (left ? A[j][i] : A[i][j]) * x[j];
      sum += y[i];
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] /= sum;
      diff = std::max(diff, std::abs(y[i] - x[i]));
    }
    x.swap(y);
    if (diff < 1e-15) break;
  }
  return x;
}

/// Parry measure of the word w (1-based symbols) for the 0/1 matrix A.
inline double parry_mass(const Matrix& A, const std::vector<std::uint32_t>& w) {
  const double rho = spectral_radius(A);
  const auto r = perron_vector(A, false);
  const auto l = perron_vector(A, true);
  double lr = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) lr += l[i] * r[i];
  double m = l[w.front() - 1] * r[w.back() - 1] / lr;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) m *= A[w[i] - 1][w[i + 1] - 1];
  return m / std::pow(rho, static_cast<double>(w.size() - 1));
}

/// All words of length n on the 0/1 graph A (every vertex assumed live).
inline std::vector<std::vector<std::uint32_t>> words(const Matrix& A, std::size_t n) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> w;
  std::function<void()> rec = [&] {
    if (w.size() == n) {
      out.push_back(w);
      return;
    }
    for (std::uint32_t b = 1; b <= A.size(); ++b) {
      if (!w.empty() && A[w.back() - 1][b - 1] == 0.0) continue;
      w.push_back(b);
      rec();
      w.pop_back();
    }
  };
  if (n > 0) rec();
  return out;
}

/// Top Lyapunov exponent of an i.i.d. product of 2x2 matrices chosen with
/// probabilities q, by direct multiplication of a vector with renormalization.
inline double lyapunov_monte_carlo(const std::vector<Matrix>& mats, const std::vector<double>& q,
                                   std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(q.begin(), q.end());
  double v0 = 1.0, v1 = 1.0, log_sum = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const Matrix& A = mats[pick(rng)];
    const double a = A[0][0] * v0 + A[0][1] * v1;
    const double b = A[1][0] * v0 + A[1][1] * v1;
    const double nrm = std::sqrt(a * a + b * b);
    log_sum += std::log(nrm);
    v0 = a / nrm;
    v1 = b / nrm;
  }
  return log_sum / static_cast<double>(steps);
}

}  // namespace oracle
