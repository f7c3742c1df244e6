#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermoshift/errors.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift {

enum class MatrixNorm { max_row_sum, spectral };

inline std::string_view norm_name(MatrixNorm n) { return n == MatrixNorm::spectral ? "spectral" : "max-row-sum"; }

/// Nonincreasing singular values of a square matrix, d <= 3. For d = 2 the
/// closed form from |A|_F^2 and det A is used.
inline std::vector<double> singular_values(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw SpecError("singular_values needs a square matrix");
  const auto d = A.rows();
  if (d == 1) return {std::abs(A(0, 0))};
  if (d == 2) {
    const double f2 = A.squaredNorm();
    const double det = std::abs(A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0));
    // s1 + s2 = sqrt(F^2 + 2|det|), s1 - s2 = sqrt(F^2 - 2|det|).
    const double sum = std::sqrt(f2 + 2.0 * det);
    const double diff = std::sqrt(std::max(0.0, f2 - 2.0 * det));
    const double s1 = 0.5 * (sum + diff);
    // s2 from det / s1 keeps small values accurate.
    const double s2 = s1 > 0.0 ? det / s1 : 0.0;
    return {s1, s2};
  }
  if (d == 3) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    return {s(0), s(1), s(2)};
  }
  throw SpecError("singular_values supports d <= 3, got " + std::to_string(d));
}

inline double matrix_norm(const Eigen::MatrixXd& A, MatrixNorm norm) {
  if (norm == MatrixNorm::spectral) {
    if (A.rows() <= 3) return singular_values(A).front();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues()(0);
  }
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

class MatrixFamily {
 public:
  static MatrixFamily create(std::vector<Eigen::MatrixXd> mats, MatrixNorm norm = MatrixNorm::max_row_sum) {
    if (mats.empty()) throw SpecError("matrix family is empty");
    const auto d = mats.front().rows();
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const auto& A = mats[i];
      if (A.rows() != A.cols() || A.rows() != d)
        throw SpecError("matrix " + std::to_string(i + 1) + " is not " + std::to_string(d) + "x" + std::to_string(d));
      if ((A.array() < 0.0).any()) throw SpecError("matrix " + std::to_string(i + 1) + " has a negative entry");
      if (!A.allFinite()) throw SpecError("matrix " + std::to_string(i + 1) + " has a non-finite entry");
    }
    return MatrixFamily(std::move(mats), norm);
  }

  std::size_t size() const { return mats_->size(); }
  std::size_t dim() const { return static_cast<std::size_t>(mats_->front().rows()); }
  MatrixNorm norm() const { return norm_; }
  const Eigen::MatrixXd& matrix(Symbol i) const { return (*mats_)[i - 1]; }

 private:
  MatrixFamily(std::vector<Eigen::MatrixXd> mats, MatrixNorm norm)
      : mats_(std::make_shared<const std::vector<Eigen::MatrixXd>>(std::move(mats))), norm_(norm) {}
  std::shared_ptr<const std::vector<Eigen::MatrixXd>> mats_;
  MatrixNorm norm_;
};

/// log |A_{w_n} ... A_{w_1}|, renormalizing the running product every 32
/// factors.
inline double cocycle_weight(const MatrixFamily& mf, WordView w) {
  for (Symbol b : w)
    if (b < 1 || b > mf.size()) throw SpecError("symbol " + std::to_string(b) + " has no matrix");
  if (w.empty()) return 0.0;
  Eigen::MatrixXd P = mf.matrix(w[0]);
  double log_scale = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    P = mf.matrix(w[i]) * P;
    if (i % 32 == 31) {
      const double s = P.cwiseAbs().maxCoeff();
      if (s == 0.0) return kNegInf;
      P /= s;
      log_scale += std::log(s);
    }
  }
  const double nrm = matrix_norm(P, mf.norm());
  return nrm == 0.0 ? kNegInf : log_scale + std::log(nrm);
}

inline WeightSystem matrix_cocycle(const ShiftSpace& s, const MatrixFamily& mf) {
  if (mf.size() < s.alphabet_size())
    throw SpecError("matrix family has " + std::to_string(mf.size()) + " matrices for " +
                    std::to_string(s.alphabet_size()) + " symbols");
  WeightSystem::Parts parts;
  parts.kind = WeightKind::matrix_cocycle;
  parts.meta.declared_C = 0.0;  // sub-multiplicative norm
  parts.meta.declared_M = 1.0;  // f_n only depends on the first n symbols
  parts.eval = [mf](const ShiftSpace&, WordView w) { return cocycle_weight(mf, w); };
  parts.rebind = [mf](const ShiftSpace& other) { return matrix_cocycle(other, mf); };
  return WeightSystem(s, std::move(parts));
}

struct LyapunovRow {
  std::size_t n = 0;
  double a_n = 0.0;       ///< sum_w m([w]) log |A_w|
  double estimate = 0.0;  ///< a_n / n
  double envelope = 0.0;  ///< min_{k <= n} a_k / k
  double increment = 0.0;  ///< a_n - a_{n-1}
};

/// (1/n) sum over B_n of m([w]) log |A_w| for n = 1..n_max, with the
/// sub-additive envelope and the increments a_n - a_{n-1}.
inline std::vector<LyapunovRow> lyapunov_estimate(const CylinderMeasure& m, const MatrixFamily& mf, std::size_t n_max) {
  if (n_max == 0 || n_max > m.depth()) throw SpecError("lyapunov_estimate: n must be in 1..depth");
  std::vector<LyapunovRow> rows;
  double prev = 0.0, env = kPosInf;
  for (std::size_t n = 1; n <= n_max; ++n) {
    LyapunovRow r;
    r.n = n;
    double a = 0.0;
    for (const auto mg = m.marginal(n); const auto& [w, mass] : mg.weights()) {
      if (mass <= 0.0) continue;
      a += mass * cocycle_weight(mf, w);
    }
    r.a_n = a;
    r.estimate = a / static_cast<double>(n);
    env = std::min(env, r.estimate);
    r.envelope = env;
    r.increment = a - prev;
    prev = a;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace thermoshift
