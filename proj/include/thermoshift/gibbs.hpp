#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "thermoshift/errors.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift {

/// Probability weights on the depth-l cylinders of a finite truncation.
/// Shorter cylinders get their mass by summing over extensions.
class CylinderMeasure {
 public:
  using Table = std::map<Word, double>;

  CylinderMeasure(const ShiftSpace& space, std::size_t depth, Table weights)
      : space_(space), depth_(depth), weights_(std::move(weights)) {
    double total = 0.0;
    for (const auto& [w, m] : weights_) {
      if (w.size() != depth_)
        throw SpecError("cylinder '" + to_string(w) + "' does not have depth " + std::to_string(depth_));
      if (!(m >= 0.0)) throw SpecError("negative mass on cylinder '" + to_string(w) + "'");
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) throw SpecError("cylinder masses sum to " + std::to_string(total) + ", not 1");
  }

  /// Rescales nonnegative weights to total mass 1.
  static CylinderMeasure normalized(const ShiftSpace& space, std::size_t depth, Table weights) {
    double total = 0.0;
    for (const auto& [w, m] : weights) total += m;
    if (!(total > 0.0)) throw ConditionFailure("all cylinder weights vanish");
    for (auto& [w, m] : weights) m /= total;
    return CylinderMeasure(space, depth, std::move(weights));
  }

  const ShiftSpace& space() const { return space_; }
  std::size_t depth() const { return depth_; }
  const Table& weights() const { return weights_; }

  /// m([u]) for |u| <= depth.
  double mass(WordView u) const {
    if (u.size() > depth_) throw SpecError("cylinder longer than the measure depth");
    double total = 0.0;
    for (auto it = weights_.lower_bound(Word(u.begin(), u.end())); it != weights_.end() && has_prefix(it->first, u); ++it)
      total += it->second;
    return total;
  }

  /// The induced measure on depth-l cylinders, l <= depth.
  CylinderMeasure marginal(std::size_t l) const {
    if (l > depth_) throw SpecError("marginal depth exceeds measure depth");
    if (l == depth_) return *this;
    Table out;
    for (const auto& [w, m] : weights_) out[Word(w.begin(), w.begin() + l)] += m;
    return CylinderMeasure(space_, l, std::move(out));
  }

 private:
  ShiftSpace space_;
  std::size_t depth_;
  Table weights_;
};

/// nu_l: masses proportional to exp(eval(w)), w in B_l.
inline CylinderMeasure build_nu(const WeightSystem& ws, std::size_t l, std::size_t budget = kDefaultWordBudget) {
  if (l == 0) throw SpecError("build_nu needs depth >= 1");
  std::vector<std::pair<Word, double>> logs;
  LogSumAccumulator alpha;
  for_each_word(ws.space(), l, [&](WordView w) {
    if (logs.size() >= budget) throw BudgetExceeded("build_nu: more than " + std::to_string(budget) + " cylinders");
    double v = ws.eval(w);
    logs.emplace_back(Word(w.begin(), w.end()), v);
    alpha.add(v);
  });
  const double log_alpha = alpha.value();
  if (log_alpha == kNegInf) throw ConditionFailure("all weights of length " + std::to_string(l) + " vanish");
  CylinderMeasure::Table table;
  for (auto& [w, v] : logs) table.emplace_hint(table.end(), std::move(w), std::exp(v - log_alpha));
  return CylinderMeasure::normalized(ws.space(), l, std::move(table));
}

/// Product measure with symbol probabilities q (index i-1 for symbol i),
/// restricted to B_depth and renormalized.
inline CylinderMeasure product_measure(const ShiftSpace& s, const std::vector<double>& q, std::size_t depth) {
  if (q.size() < s.alphabet_size()) throw SpecError("product measure needs one probability per symbol");
  CylinderMeasure::Table table;
  for_each_word(s, depth, [&](WordView w) {
    double m = 1.0;
    for (Symbol b : w) m *= q[b - 1];
    table.emplace_hint(table.end(), Word(w.begin(), w.end()), m);
  });
  return CylinderMeasure::normalized(s, depth, std::move(table));
}

/// mu = (1/n) sum_{i=1..n} sigma^i nu, on depth l - n cylinders, by exact
/// summation of nu over words whose window at offset i is u.
inline CylinderMeasure cesaro_average(const CylinderMeasure& nu, std::size_t n_steps) {
  if (n_steps == 0 || n_steps >= nu.depth())
    throw SpecError("cesaro_average needs 1 <= n_steps < depth (" + std::to_string(nu.depth()) + ")");
  const std::size_t out_depth = nu.depth() - n_steps;
  CylinderMeasure::Table out;
  const double scale = 1.0 / static_cast<double>(n_steps);
  for (const auto& [w, m] : nu.weights()) {
    if (m == 0.0) continue;
    for (std::size_t i = 1; i <= n_steps; ++i) out[Word(w.begin() + i, w.begin() + i + out_depth)] += m * scale;
  }
  return CylinderMeasure::normalized(nu.space(), out_depth, std::move(out));
}

struct GibbsRow {
  std::size_t n = 0;
  double min_ratio = kPosInf, max_ratio = 0.0;
  double C0 = 1.0;
  std::size_t cylinders = 0;
};

struct GibbsRatioReport {
  double P = 0.0;          ///< value used in the ratios (interval midpoint)
  double P_halfwidth = 0.0;
  std::vector<GibbsRow> rows;
  double C0 = 1.0;  ///< max over rows
  /// log C0 can move by up to n * halfwidth at depth n; this is the value at n_max.
  double log_C0_uncertainty = 0.0;
};

/// Ratios m([w]) e^{nP} / exp(eval(w)) over positive-mass cylinders, n = 1..n_max.
inline GibbsRatioReport gibbs_ratio_report(const CylinderMeasure& m, const WeightSystem& ws, double P_lower,
                                           double P_upper, std::size_t n_max) {
  if (n_max > m.depth()) throw SpecError("gibbs_ratio_report: n_max exceeds measure depth");
  GibbsRatioReport r;
  r.P = 0.5 * (P_lower + P_upper);
  r.P_halfwidth = 0.5 * (P_upper - P_lower);
  for (std::size_t n = 1; n <= n_max; ++n) {
    GibbsRow row;
    row.n = n;
    double lo = kPosInf, hi = kNegInf;
    for (const auto mg = m.marginal(n); const auto& [w, mass] : mg.weights()) {
      if (mass <= 0.0) continue;
      ++row.cylinders;
      const double e = ws.eval(w);
      const double lr = e == kNegInf ? kPosInf : std::log(mass) + static_cast<double>(n) * r.P - e;
      lo = std::min(lo, lr);
      hi = std::max(hi, lr);
    }
    row.min_ratio = std::exp(lo);
    row.max_ratio = std::exp(hi);
    row.C0 = std::exp(std::max(hi, -lo));
    r.C0 = std::max(r.C0, row.C0);
    r.rows.push_back(row);
  }
  r.log_C0_uncertainty = static_cast<double>(n_max) * r.P_halfwidth;
  return r;
}

struct MixingSample {
  Word u, v;
  std::size_t t = 0;
};

struct MixingRow {
  MixingSample sample;
  std::optional<double> best_ratio;  ///< empty when m([u]) m([v]) = 0
  std::size_t best_i = 0;
  std::size_t gaps_checked = 0;
};

struct MixingReport {
  std::size_t p = 0;
  double c_min = 0.0;
  std::vector<MixingRow> rows;
  double min_best_ratio = kPosInf;
  bool pass = true;
};

/// For each (u, v, t), the best over 0 <= i <= 2p (within the measure depth)
/// of m([u] cap sigma^{-(|u|+t+i)}[v]) / (m([u]) m([v])).
inline MixingReport mixing_report(const CylinderMeasure& m, std::size_t p, const std::vector<MixingSample>& samples,
                                  double c_min) {
  MixingReport r;
  r.p = p;
  r.c_min = c_min;
  std::map<std::size_t, CylinderMeasure> marginals;
  auto marginal = [&](std::size_t l) -> const CylinderMeasure& {
    auto it = marginals.find(l);
    if (it == marginals.end()) it = marginals.emplace(l, m.marginal(l)).first;
    return it->second;
  };
  for (const auto& smp : samples) {
    MixingRow row;
    row.sample = smp;
    const std::size_t base = smp.u.size() + smp.t;
    if (base + smp.v.size() > m.depth())
      throw SpecError("mixing sample (u='" + to_string(smp.u) + "', v='" + to_string(smp.v) + "', t=" +
                      std::to_string(smp.t) + ") exceeds measure depth " + std::to_string(m.depth()));
    const double mu = m.mass(smp.u), mv = m.mass(smp.v);
    if (mu > 0.0 && mv > 0.0) {
      double best = -1.0;
      for (std::size_t i = 0; i <= 2 * p && base + i + smp.v.size() <= m.depth(); ++i) {
        const std::size_t len = base + i + smp.v.size();
        double joint = 0.0;
        const auto& table = marginal(len).weights();
        for (auto it = table.lower_bound(smp.u); it != table.end() && has_prefix(it->first, smp.u); ++it)
          if (has_prefix(WordView(it->first).subspan(base + i), smp.v)) joint += it->second;
        const double ratio = joint / (mu * mv);
        ++row.gaps_checked;
        if (ratio > best) {
          best = ratio;
          row.best_i = i;
        }
      }
      row.best_ratio = best;
      r.min_best_ratio = std::min(r.min_best_ratio, best);
      if (best < c_min) r.pass = false;
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

struct EntropyEnergy {
  std::size_t n = 0;
  double entropy = 0.0, energy = 0.0, balance = 0.0;
};

inline EntropyEnergy entropy_energy(const CylinderMeasure& m, const WeightSystem& ws, std::size_t n) {
  if (n == 0 || n > m.depth()) throw SpecError("entropy_energy: n must be in 1..depth");
  EntropyEnergy e;
  e.n = n;
  double h = 0.0, en = 0.0;
  for (const auto mg = m.marginal(n); const auto& [w, mass] : mg.weights()) {
    if (mass <= 0.0) continue;
    h -= mass * std::log(mass);
    en += mass * ws.eval(w);
  }
  e.entropy = h / static_cast<double>(n);
  e.energy = en / static_cast<double>(n);
  e.balance = e.entropy + e.energy;
  return e;
}

}  // namespace thermoshift
