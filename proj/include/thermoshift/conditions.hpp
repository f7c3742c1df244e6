#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "thermoshift/errors.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/parallel.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift {

namespace detail {

/// All allowable words of lengths lo..hi, shortlex.
inline std::vector<Word> words_between(const ShiftSpace& s, std::size_t lo, std::size_t hi,
                                       std::size_t budget = kDefaultWordBudget) {
  std::vector<Word> out;
  for (std::size_t n = lo; n <= hi; ++n)
    for_each_word(s, n, [&](WordView w) {
      if (out.size() >= budget) throw BudgetExceeded("more than " + std::to_string(budget) + " words up to length " + std::to_string(hi));
      out.emplace_back(w.begin(), w.end());
    });
  return out;
}

inline double clamp_tiny(double x) { return std::abs(x) < 1e-12 ? 0.0 : x; }

}  // namespace detail

struct DefectEstimate {
  double C_hat = 0.0;        ///< max of [eval(uv) - eval(u) - eval(v)]^+
  double C_lower_hat = 0.0;  ///< max of the negative part
  std::size_t n_max = 0;
  std::optional<std::pair<Word, Word>> worst_upper, worst_lower;
  bool subadditive() const { return C_hat == 0.0; }
  bool almost_additive() const { return std::isfinite(C_hat) && std::isfinite(C_lower_hat); }
};

/// Exhaustive split scan over allowable words of length 2..n_max.
inline DefectEstimate subadditivity_defect(const WeightSystem& ws, std::size_t n_max,
                                           std::size_t budget = kDefaultWordBudget) {
  const ShiftSpace& s = ws.space();
  DefectEstimate total;
  total.n_max = n_max;
  if (n_max < 2) return total;
  std::vector<DefectEstimate> part(s.alphabet_size());
  parallel_for(s.alphabet_size(), [&](std::size_t idx) {
    DefectEstimate& d = part[idx];
    std::size_t seen = 0;
    for (std::size_t n = 2; n <= n_max; ++n)
      for_each_word_from(s, static_cast<Symbol>(idx + 1), n, [&](WordView w) {
        if (++seen > budget) throw BudgetExceeded("subadditivity scan exceeded " + std::to_string(budget) + " words");
        const double whole = ws.eval(w);
        for (std::size_t j = 1; j < n; ++j) {
          const double a = ws.eval(w.first(j)), b = ws.eval(w.subspan(j));
          double gap;
          if (a == kNegInf || b == kNegInf) {
            if (whole == kNegInf) continue;
            gap = kPosInf;
          } else if (whole == kNegInf) {
            gap = kNegInf;
          } else {
            gap = detail::clamp_tiny(whole - a - b);
          }
          Word u(w.begin(), w.begin() + j), v(w.begin() + j, w.end());
          if (gap > d.C_hat) {
            d.C_hat = gap;
            d.worst_upper = std::make_pair(u, v);
          }
          if (-gap > d.C_lower_hat) {
            d.C_lower_hat = -gap;
            d.worst_lower = std::make_pair(std::move(u), std::move(v));
          }
        }
      });
  });
  for (auto& d : part) {
    if (d.C_hat > total.C_hat) {
      total.C_hat = d.C_hat;
      total.worst_upper = d.worst_upper;
    }
    if (d.C_lower_hat > total.C_lower_hat) {
      total.C_lower_hat = d.C_lower_hat;
      total.worst_lower = d.worst_lower;
    }
  }
  return total;
}

struct C2Cell {
  std::size_t n = 0, m = 0;
  double log_D = kPosInf;  ///< min over pairs with |u| = n, |v| = m
};

struct C2Estimate {
  bool ok = false;
  double log_D_hat = kPosInf;
  std::size_t p_hat = 0;
  std::vector<Word> W_hat;  ///< shortlex
  std::vector<C2Cell> D_table;
  std::optional<std::pair<Word, Word>> failure;  ///< pair with no allowable u.w.v
  std::optional<std::pair<Word, Word>> worst;    ///< pair attaining D_hat
  std::size_t n_max = 0, p_max = 0, pairs = 0;

  double D_hat() const { return std::exp(log_D_hat); }
};

/// For each pair (u, v), 1 <= |u|, |v| <= n_max, the connector |w| <= p_max
/// maximizing eval(uwv) - eval(u) - eval(v); candidates are scanned by
/// length, then lexicographically, and the first maximizer is kept. Pairs
/// where f vanishes on [u] or [v] impose nothing and are skipped.
inline C2Estimate estimate_c2(const WeightSystem& ws, std::size_t n_max, std::size_t p_max,
                              std::size_t budget = kDefaultWordBudget) {
  const ShiftSpace& s = ws.space();
  C2Estimate out;
  out.n_max = n_max;
  out.p_max = p_max;
  const std::vector<Word> words = detail::words_between(s, 1, n_max, budget);
  const std::vector<Word> connectors = detail::words_between(s, 0, p_max, budget);
  if (words.size() * words.size() > budget) throw BudgetExceeded("estimate_c2: too many word pairs");

  std::vector<double> eval_word(words.size());
  std::vector<std::optional<ShiftSpace::Bits>> starts(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    eval_word[i] = ws.eval(words[i]);
    starts[i] = detail::start_set(s, words[i]);
  }

  struct Best {
    bool connected = false;
    double gap = kNegInf;
    std::size_t w = 0;
  };
  std::vector<std::vector<Best>> table(words.size(), std::vector<Best>(words.size()));
  parallel_for(words.size(), [&](std::size_t iu) {
    const Word& u = words[iu];
    const SubsetState su = run(s, SubsetState{}, u);
    for (std::size_t ic = 0; ic < connectors.size(); ++ic) {
      const Word& w = connectors[ic];
      const SubsetState suw = run(s, su, w);
      if (suw.dead()) continue;
      for (std::size_t iv = 0; iv < words.size(); ++iv) {
        if (!detail::joins(s, suw, starts[iv])) continue;
        Best& b = table[iu][iv];
        if (eval_word[iu] == kNegInf || eval_word[iv] == kNegInf) {
          b.connected = true;
          continue;
        }
        const double gap = ws.eval(concat(u, w, words[iv])) - eval_word[iu] - eval_word[iv];
        if (!b.connected || gap > b.gap + 1e-12) {
          b.gap = gap;
          b.w = ic;
        }
        b.connected = true;
      }
    }
  });

  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::set<std::size_t> used;
  for (std::size_t iu = 0; iu < words.size(); ++iu)
    for (std::size_t iv = 0; iv < words.size(); ++iv) {
      const Best& b = table[iu][iv];
      if (!b.connected) {
        out.failure = std::make_pair(words[iu], words[iv]);
        return out;
      }
      if (eval_word[iu] == kNegInf || eval_word[iv] == kNegInf) continue;
      ++out.pairs;
      used.insert(b.w);
      const double gap = detail::clamp_tiny(b.gap);
      if (gap < out.log_D_hat) {
        out.log_D_hat = gap;
        out.worst = std::make_pair(words[iu], words[iv]);
      }
      auto key = std::make_pair(words[iu].size(), words[iv].size());
      auto it = cells.find(key);
      if (it == cells.end() || gap < it->second) cells[key] = gap;
    }
  for (std::size_t ic : used) {
    out.W_hat.push_back(connectors[ic]);
    out.p_hat = std::max(out.p_hat, connectors[ic].size());
  }
  for (auto& [key, v] : cells) out.D_table.push_back({key.first, key.second, v});
  out.ok = out.pairs > 0 && out.log_D_hat > kNegInf;
  if (out.pairs == 0) out.log_D_hat = kNegInf;
  return out;
}

struct Z1Report {
  std::vector<double> partial;  ///< partial sums over symbols 1..i
  double value = 0.0;
  std::string verdict;  ///< suspected-convergent | suspected-divergent | inconclusive
  std::string note;
};

/// Partial sums of Z_1 = sum_i sup f_1 on [i] up to `level` symbols, with a
/// tail heuristic. Nothing here proves convergence.
inline Z1Report z1(const WeightSystem& ws, std::optional<std::size_t> level = std::nullopt) {
  const ShiftSpace& s = ws.space();
  const std::size_t top = level.value_or(s.alphabet_size());
  if (top > s.alphabet_size()) throw SpecError("z1 level exceeds alphabet size");
  Z1Report r;
  std::vector<double> terms;
  double sum = 0.0;
  for (Symbol i = 1; i <= top; ++i) {
    Word w{i};
    double t = is_allowable(s, w) ? std::exp(ws.eval(w)) : 0.0;
    terms.push_back(t);
    sum += t;
    r.partial.push_back(sum);
  }
  r.value = sum;
  // Power-law exponent of the tail: t_i ~ i^{-s}, estimated from the last
  // term against the term at half the index.
  const std::size_t n = terms.size();
  if (n < 4 || terms[n - 1] <= 0.0 || terms[n / 2 - 1] <= 0.0) {
    r.verdict = "inconclusive";
    r.note = "too few positive tail terms";
    return r;
  }
  const double a = terms[n / 2 - 1], b = terms[n - 1];
  const double ratio = b / terms[n - 2];
  const double s_exp = -std::log(b / a) / std::log(static_cast<double>(n) / static_cast<double>(n / 2));
  if (ratio < 0.9) {
    r.verdict = "suspected-convergent";
    r.note = "geometric tail, last ratio " + std::to_string(ratio);
  } else if (s_exp > 1.2) {
    r.verdict = "suspected-convergent";
    r.note = "power-law tail exponent " + std::to_string(s_exp);
  } else if (s_exp < 0.8) {
    r.verdict = "suspected-divergent";
    r.note = "power-law tail exponent " + std::to_string(s_exp);
  } else {
    r.verdict = "inconclusive";
    r.note = "power-law tail exponent " + std::to_string(s_exp);
  }
  return r;
}

struct C3Level {
  std::size_t level = 0;
  C2Estimate estimate;
  std::vector<Symbol> symbols;  ///< image symbols used by W_hat
};

struct C3Scan {
  std::vector<C3Level> levels;
  bool finite = false;
  std::string reason;
};

/// Repeats estimate_c2 along the truncation ladder. The connector set looks
/// finite when the estimate succeeds at every level, D_hat has stopped
/// decreasing at the top level, and the top-level connectors use only
/// symbols that were already present one level below.
inline C3Scan c3_finiteness_scan(const WeightSystem& ws, std::size_t n_max, std::size_t p_max) {
  const ShiftSpace& s = ws.space();
  C3Scan scan;
  for (std::size_t l : s.effective_ladder()) {
    C3Level lv;
    lv.level = l;
    lv.estimate = estimate_c2(ws.rebind(s.truncated(l)), n_max, p_max);
    std::set<Symbol> syms;
    for (const Word& w : lv.estimate.W_hat) syms.insert(w.begin(), w.end());
    lv.symbols.assign(syms.begin(), syms.end());
    scan.levels.push_back(std::move(lv));
  }
  for (const auto& lv : scan.levels)
    if (!lv.estimate.ok) {
      scan.reason = "estimate fails at level " + std::to_string(lv.level);
      return scan;
    }
  if (scan.levels.size() < 2) {
    scan.reason = "needs at least two ladder levels";
    return scan;
  }
  const C3Level& top = scan.levels.back();
  const C3Level& below = scan.levels[scan.levels.size() - 2];
  if (top.estimate.log_D_hat < below.estimate.log_D_hat - 1e-9) {
    scan.reason = "D_hat still decreasing at level " + std::to_string(top.level);
    return scan;
  }
  const ShiftSpace prev = s.truncated(below.level);
  for (Symbol b : top.symbols)
    if (prev.fiber(b).empty()) {
      scan.reason = "connectors at level " + std::to_string(top.level) + " use symbol " + std::to_string(b) +
                    " absent at level " + std::to_string(below.level);
      return scan;
    }
  scan.finite = true;
  scan.reason = "connector set stable across the last two levels";
  return scan;
}

}  // namespace thermoshift
