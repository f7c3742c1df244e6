#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermoshift/conditions.hpp"
#include "thermoshift/errors.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/parallel.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift {

/// log Z_n(F) over B_n at the bound truncation, or at ladder entry `level`.
inline double log_partition(const WeightSystem& ws, std::size_t n, std::optional<std::size_t> level = std::nullopt,
                            std::size_t budget = kDefaultWordBudget) {
  if (level) return log_partition(ws.rebind(ws.space().at_level(*level)), n, std::nullopt, budget);
  if (n == 0) return 0.0;
  const ShiftSpace& s = ws.space();
  if (const TransferForm* t = ws.transfer()) return transfer_log_partition(s, *t, n);
  std::vector<LogSumAccumulator> parts(s.alphabet_size());
  std::atomic<std::size_t> seen{0};
  parallel_for(s.alphabet_size(), [&](std::size_t idx) {
    for_each_word_from(s, static_cast<Symbol>(idx + 1), n, [&](WordView w) {
      if (++seen > budget)
        throw BudgetExceeded("log_partition: more than " + std::to_string(budget) + " words of length " + std::to_string(n));
      parts[idx].add(ws.eval(w));
    });
  });
  return pairwise_log_sum(std::move(parts));
}

namespace detail {

inline bool has_cycle(const std::vector<std::vector<std::size_t>>& next) {
  const std::size_t m = next.size();
  std::vector<int> colour(m, 0);
  for (std::size_t root = 0; root < m; ++root) {
    if (colour[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, pos] = stack.back();
      if (pos < next[node].size()) {
        std::size_t t = next[node][pos++];
        if (colour[t] == 1) return true;
        if (colour[t] == 0) {
          colour[t] = 1;
          stack.emplace_back(t, 0);
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

/// Gurevich sum for a sofic space with linear semantics. Image words
/// starting with a are grouped by their last symbol and by the relation
/// "start cover symbol -> end cover symbol" they induce; per group the path
/// weights are accumulated. Whether w^infinity is a point of the space
/// depends only on the relation, so each group is kept or dropped whole.
inline double relation_gurevich(const ShiftSpace& s, const TransferForm& t, std::size_t n, Symbol a,
                                std::size_t state_cap) {
  using Bits = ShiftSpace::Bits;
  const auto& start = s.fiber(a);
  const std::size_t fa = start.size();
  if (fa == 0) return kNegInf;
  // Weights are fa x |fiber(last)|, row-major.
  using Key = std::pair<Symbol, Bits>;
  std::map<Key, std::vector<double>> cur;
  {
    Bits rel(fa * fa);
    std::vector<double> w(fa * fa, kNegInf);
    for (std::size_t i = 0; i < fa; ++i) {
      rel.set(i * fa + i);
      w[i * fa + i] = t.initial[start[i] - 1];
    }
    cur.emplace(Key{a, std::move(rel)}, std::move(w));
  }
  for (std::size_t step = 1; step < n; ++step) {
    std::map<Key, std::vector<double>> next;
    for (const auto& [key, w] : cur) {
      const auto& fb = s.fiber(key.first);
      const std::size_t nb = fb.size();
      for (Symbol c = 1; c <= s.alphabet_size(); ++c) {
        const auto& fc = s.fiber(c);
        const std::size_t nc = fc.size();
        if (nc == 0) continue;
        Bits rel(fa * nc);
        std::vector<double> acc(fa * nc, kNegInf);
        for (std::size_t x = 0; x < fa; ++x)
          for (std::size_t y = 0; y < nb; ++y) {
            if (!key.second.test(x * nb + y)) continue;
            for (std::size_t z = 0; z < nc; ++z) {
              if (!s.has_edge(fb[y], fc[z])) continue;
              rel.set(x * nc + z);
              acc[x * nc + z] = log_add(acc[x * nc + z], w[x * nb + y] + t.step_at(fb[y], fc[z]));
            }
          }
        if (rel.none()) continue;
        auto [it, fresh] = next.try_emplace(Key{c, std::move(rel)}, std::move(acc));
        if (!fresh) {
          // try_emplace left acc intact; merge it in.
          auto& dst = it->second;
          for (std::size_t q = 0; q < dst.size(); ++q) dst[q] = log_add(dst[q], acc[q]);
        }
      }
    }
    if (next.size() > state_cap)
      throw BudgetExceeded("Gurevich relation states exceed " + std::to_string(state_cap));
    cur = std::move(next);
  }
  LogSumAccumulator total;
  for (const auto& [key, w] : cur) {
    const auto& fb = s.fiber(key.first);
    const std::size_t nb = fb.size();
    std::vector<std::vector<std::size_t>> q(fa);
    for (std::size_t x = 0; x < fa; ++x)
      for (std::size_t y = 0; y < nb; ++y) {
        if (!key.second.test(x * nb + y)) continue;
        for (std::size_t x2 = 0; x2 < fa; ++x2)
          if (s.has_edge(fb[y], start[x2])) q[x].push_back(x2);
      }
    for (auto& row : q) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    if (!has_cycle(q)) continue;
    for (std::size_t x = 0; x < fa; ++x)
      for (std::size_t y = 0; y < nb; ++y)
        if (key.second.test(x * nb + y)) total.add(w[x * nb + y] + t.final[fb[y] - 1]);
  }
  double v = total.value();
  return v == kNegInf ? kNegInf : v + t.offset_at(n);
}

}  // namespace detail

/// log Z_n(F, a): the sum of f_n over periodic points of period n in [a].
inline double gurevich_log_sum(const WeightSystem& ws, std::size_t n, Symbol a, std::size_t budget = kDefaultWordBudget) {
  const ShiftSpace& s = ws.space();
  if (a < 1 || a > s.alphabet_size()) throw SpecError("anchor symbol " + std::to_string(a) + " outside alphabet");
  if (n == 0) throw SpecError("Gurevich sums need n >= 1");
  if (const TransferForm* t = ws.transfer()) {
    if (!s.is_sofic()) {
      if (!s.is_live(a)) return kNegInf;
      const std::size_t k = s.cover_size();
      std::vector<double> cur(k, kNegInf), next(k);
      cur[a - 1] = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (Symbol y = 1; y <= k; ++y) {
          LogSumAccumulator acc;
          for (Symbol x : s.predecessors(y)) acc.add(cur[x - 1] + t->step_at(x, y));
          next[y - 1] = acc.value();
        }
        cur.swap(next);
      }
      return cur[a - 1] == kNegInf ? kNegInf : cur[a - 1] + t->offset_at(n);
    }
    return detail::relation_gurevich(s, *t, n, a, 1'000'000);
  }
  LogSumAccumulator acc;
  std::size_t seen = 0;
  for_each_word_from(s, a, n, [&](WordView w) {
    if (++seen > budget) throw BudgetExceeded("gurevich_log_sum: more than " + std::to_string(budget) + " words");
    if (is_periodic_point(s, w)) acc.add(ws.periodic_eval(w));
  });
  return acc.value();
}

/// Constants entering the two-sided bound
///   C1 * Z_n <= e^{nP} <= e^C * Z_n,   C1 = D / (e^{Cp} K (p+1)),
///   K = max_{0<=i<=p} Z_1^i.
struct BracketConstants {
  double C = 0.0;
  std::optional<double> log_D;
  std::size_t p = 0;
  double Z1 = 1.0;
  std::string C_source, D_source;

  double log_K() const { return Z1 > 1.0 ? static_cast<double>(p) * std::log(Z1) : 0.0; }
  std::optional<double> log_C1() const {
    if (!log_D || !std::isfinite(*log_D)) return std::nullopt;
    return *log_D - C * static_cast<double>(p) - log_K() - std::log(static_cast<double>(p + 1));
  }
};

struct Bracket {
  std::size_t n = 0;
  double log_Z = kNegInf;
  std::optional<double> lower;
  double upper = kNegInf;
};

inline Bracket bracket_from(std::size_t n, double log_Z, const BracketConstants& k) {
  Bracket b;
  b.n = n;
  b.log_Z = log_Z;
  const double dn = static_cast<double>(n);
  if (log_Z == kNegInf) {
    b.upper = kNegInf;
    b.lower = kNegInf;
    return b;
  }
  b.upper = (log_Z + k.C) / dn;
  if (auto c1 = k.log_C1()) b.lower = (log_Z + *c1) / dn;
  return b;
}

inline Bracket pressure_bracket(const WeightSystem& ws, std::size_t n, const BracketConstants& k) {
  return bracket_from(n, log_partition(ws, n), k);
}

struct QuasiMultiplicativity {
  double log_D = kNegInf;
  std::size_t p = 0;
  std::vector<Word> W;  ///< cover connectors
  bool strong = false;
};

/// For a one-site linear potential on a sofic space, a connector set W of
/// the Markov cover gives, by pigeonhole over the |W| connectors,
///   g(u pi(w) v) >= (1/|W|) min_{w in W} e^{S(w)} g(u) g(v).
/// Returns the better (by log D - log(p+1)) of the weak and strong
/// certificates of the truncated cover.
inline std::optional<QuasiMultiplicativity> quasi_multiplicativity(const ShiftSpace& s, const std::vector<double>& site,
                                                                   std::size_t p_max) {
  const ShiftSpace cover = s.cover();
  IrreducibilityReport rep = check_finite_irreducibility(cover, 1, p_max);
  if (!rep.ok()) return std::nullopt;
  auto bound = [&](const std::vector<Word>& W, std::size_t p, bool strong) {
    QuasiMultiplicativity q;
    q.W = W;
    q.p = p;
    q.strong = strong;
    double worst = kPosInf;
    for (const Word& w : W) {
      double sum = 0.0;
      for (Symbol x : w) sum += site[x - 1];
      worst = std::min(worst, sum);
    }
    q.log_D = worst - std::log(static_cast<double>(W.size()));
    return q;
  };
  const auto& cert = *rep.certificate;
  QuasiMultiplicativity best = bound(cert.W, cert.p, false);
  if (cert.strong) {
    QuasiMultiplicativity alt = bound(cert.strong_W, cert.strong_p, true);
    auto score = [](const QuasiMultiplicativity& q) { return q.log_D - std::log(static_cast<double>(q.p + 1)); };
    if (score(alt) > score(best)) best = std::move(alt);
  }
  return best;
}

struct ConstantOptions {
  std::size_t c2_n_max = 2;
  std::size_t p_max = 4;
  std::size_t defect_n_max = 6;
};

/// C from the declared constant (or the split scan), D and p from the
/// pigeonhole bound when it applies, otherwise from estimate_c2.
inline BracketConstants resolve_constants(const WeightSystem& ws, const ConstantOptions& opt = {}) {
  BracketConstants k;
  if (ws.meta().declared_C) {
    k.C = *ws.meta().declared_C;
    k.C_source = "declared";
  } else {
    k.C = subadditivity_defect(ws, opt.defect_n_max).C_hat;
    k.C_source = "subadditivity_defect(n_max=" + std::to_string(opt.defect_n_max) + ")";
  }
  k.Z1 = std::exp(log_partition(ws, 1));
  const TransferForm* t = ws.transfer();
  if (ws.space().is_sofic() && t && t->site) {
    if (auto q = quasi_multiplicativity(ws.space(), *t->site, opt.p_max)) {
      k.log_D = q->log_D;
      k.p = q->p;
      k.D_source = std::string("cover connectors (") + (q->strong ? "strong" : "weak") + ", |W| = " +
                   std::to_string(q->W.size()) + ")";
      return k;
    }
  }
  C2Estimate est = estimate_c2(ws, opt.c2_n_max, opt.p_max);
  if (est.ok) {
    k.log_D = est.log_D_hat;
    k.p = est.p_hat;
    k.D_source = "estimate_c2(n_max=" + std::to_string(opt.c2_n_max) + ", p_max=" + std::to_string(opt.p_max) + ")";
  } else {
    k.D_source = "unavailable";
  }
  return k;
}

struct CompareRow {
  std::size_t n = 0;
  double rate = 0.0;                  ///< (1/n) log Z_n
  std::vector<double> gurevich_rate;  ///< (1/n) log Z_n(F, a) per anchor
  double discrepancy = 0.0;
};

struct PressureComparison {
  std::vector<Symbol> anchors;
  std::vector<CompareRow> rows;
  bool nonincreasing = true;
  double final_discrepancy = kPosInf;
  bool pass = false;
};

/// Discrepancy between topological and Gurevich growth rates for n in
/// [n_lo, n_hi]; monotonicity is required from n_monotone on.
inline PressureComparison pressure_compare(const WeightSystem& ws, std::size_t n_lo, std::size_t n_hi,
                                           const std::vector<Symbol>& anchors, double tol,
                                           std::size_t n_monotone = 0) {
  PressureComparison out;
  out.anchors = anchors;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    CompareRow r;
    r.n = n;
    const double dn = static_cast<double>(n);
    r.rate = log_partition(ws, n) / dn;
    for (Symbol a : anchors) {
      double g = gurevich_log_sum(ws, n, a) / dn;
      r.gurevich_rate.push_back(g);
      double d = (g == kNegInf || r.rate == kNegInf) ? kPosInf : std::abs(g - r.rate);
      r.discrepancy = std::max(r.discrepancy, d);
    }
    if (!out.rows.empty() && n > std::max(n_monotone, n_lo) && r.discrepancy > out.rows.back().discrepancy + 1e-12)
      out.nonincreasing = false;
    out.rows.push_back(std::move(r));
  }
  if (!out.rows.empty()) out.final_discrepancy = out.rows.back().discrepancy;
  out.pass = out.nonincreasing && out.final_discrepancy <= tol;
  return out;
}

struct LadderEntry {
  std::size_t level = 0;
  bool irreducible = false;
  std::string note;
  std::optional<Bracket> bracket;
  std::optional<BracketConstants> constants;
};

/// Brackets at a fixed n along the truncation ladder. Reducible levels are
/// skipped with a note.
inline std::vector<LadderEntry> approximation_ladder(const WeightSystem& ws, std::size_t n_fixed,
                                                     const ConstantOptions& opt = {}) {
  const ShiftSpace& s = ws.space();
  std::vector<LadderEntry> out;
  bool any = false;
  for (std::size_t l : s.effective_ladder()) {
    LadderEntry e;
    e.level = l;
    const ShiftSpace sub = s.truncated(l);
    e.irreducible = sub.cover().is_irreducible();
    if (!e.irreducible) {
      e.note = "reducible truncation skipped";
      out.push_back(std::move(e));
      continue;
    }
    any = true;
    WeightSystem local = ws.rebind(sub);
    BracketConstants k = resolve_constants(local, opt);
    e.bracket = pressure_bracket(local, n_fixed, k);
    e.constants = std::move(k);
    out.push_back(std::move(e));
  }
  if (!any) throw ConditionFailure("every ladder level is reducible");
  return out;
}

struct PressureOptions {
  std::size_t n_max = 20;
  std::vector<Symbol> anchors{1};
  bool gurevich = true;
  bool ladder = false;
  ConstantOptions constants;
};

struct GurevichRow {
  std::size_t n = 0;
  Symbol a = 0;
  double log_Z = kNegInf;
};

struct PressureReport {
  BracketConstants constants;
  std::vector<Bracket> per_n;
  std::vector<GurevichRow> gurevich_per_n;
  std::vector<LadderEntry> ladder;
  std::optional<double> best_lower;
  double best_upper = kPosInf;
  bool bracket_consistent = true;
  Z1Report z1;
  std::string status;
};

inline PressureReport pressure_report(const WeightSystem& ws, const PressureOptions& opt = {}) {
  PressureReport r;
  r.constants = resolve_constants(ws, opt.constants);
  r.z1 = z1(ws);
  for (std::size_t n = 1; n <= opt.n_max; ++n) {
    Bracket b = pressure_bracket(ws, n, r.constants);
    r.best_upper = std::min(r.best_upper, b.upper);
    if (b.lower) r.best_lower = r.best_lower ? std::max(*r.best_lower, *b.lower) : *b.lower;
    r.per_n.push_back(b);
    if (opt.gurevich)
      for (Symbol a : opt.anchors) r.gurevich_per_n.push_back({n, a, gurevich_log_sum(ws, n, a)});
  }
  if (r.best_lower && *r.best_lower > r.best_upper + 1e-12) r.bracket_consistent = false;
  if (opt.ladder) r.ladder = approximation_ladder(ws, opt.n_max, opt.constants);

  if (!r.per_n.empty() && r.per_n.back().log_Z == kNegInf) {
    r.status = "suspected-minus-infinite";
  } else if (r.z1.verdict == "suspected-divergent") {
    bool shrinking = false;
    std::vector<double> ups;
    for (const auto& e : r.ladder)
      if (e.bracket) ups.push_back(e.bracket->upper);
    if (ups.size() >= 3) {
      double d1 = ups[ups.size() - 2] - ups[ups.size() - 3], d2 = ups.back() - ups[ups.size() - 2];
      shrinking = d2 < 1e-3 || d2 < 0.5 * d1;
    } else if (ups.size() == 2) {
      shrinking = ups[1] - ups[0] < 1e-3;
    }
    r.status = shrinking ? "finite" : "suspected-infinite";
  } else {
    r.status = "finite";
  }
  return r;
}

}  // namespace thermoshift
