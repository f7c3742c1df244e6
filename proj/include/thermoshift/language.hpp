#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermoshift/errors.hpp"
#include "thermoshift/shift_space.hpp"
#include "thermoshift/word.hpp"

namespace thermoshift {

inline constexpr std::size_t kDefaultWordBudget = 10'000'000;

/// Reader state of the subset construction on the cover: the set of cover
/// symbols that can end a preimage path of the word read so far. `initial`
/// stands for the empty word, where nothing constrains the next symbol.
struct SubsetState {
  bool initial = true;
  ShiftSpace::Bits ends;

  bool dead() const { return !initial && ends.none(); }
  friend bool operator<(const SubsetState& a, const SubsetState& b) {
    if (a.initial != b.initial) return a.initial;
    return a.ends < b.ends;
  }
  friend bool operator==(const SubsetState& a, const SubsetState& b) {
    return a.initial == b.initial && (a.initial || a.ends == b.ends);
  }
};

namespace detail {

inline ShiftSpace::Bits reach(const ShiftSpace& s, const ShiftSpace::Bits& from) {
  ShiftSpace::Bits out(s.cover_size());
  for (std::size_t x = from.find_first(); x != ShiftSpace::Bits::npos; x = from.find_next(x))
    out |= s.successor_bits(static_cast<Symbol>(x + 1));
  return out;
}

}  // namespace detail

inline SubsetState step(const ShiftSpace& s, const SubsetState& state, Symbol b) {
  SubsetState next{false, ShiftSpace::Bits(s.cover_size())};
  if (b < 1 || b > s.alphabet_size()) return next;
  if (state.initial) {
    next.ends = s.fiber_bits(b);
  } else {
    next.ends = detail::reach(s, state.ends) & s.fiber_bits(b);
  }
  return next;
}

inline SubsetState run(const ShiftSpace& s, SubsetState state, WordView w) {
  for (Symbol b : w) {
    state = step(s, state, b);
    if (state.dead()) break;
  }
  return state;
}

inline bool is_allowable(const ShiftSpace& s, WordView w) {
  if (w.empty()) return true;
  if (!s.is_sofic()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!s.is_live(w[i])) return false;
      if (i > 0 && !s.has_edge(w[i - 1], w[i])) return false;
    }
    return true;
  }
  return !run(s, SubsetState{}, w).dead();
}

inline void require_allowable(const ShiftSpace& s, WordView w, const char* what = "word") {
  if (!is_allowable(s, w)) throw NotAllowable(std::string(what) + " '" + to_string(w) + "' is not allowable");
}

/// Visits every allowable word of length n >= 1 whose first symbol is
/// `first`, in lexicographic order. The visitor receives a WordView that is
/// only valid during the call.
template <class Visitor>
void for_each_word_from(const ShiftSpace& s, Symbol first, std::size_t n, Visitor&& visit) {
  if (n == 0 || first < 1 || first > s.alphabet_size()) return;
  Word w(n);
  w[0] = first;
  if (!s.is_sofic()) {
    if (!s.is_live(first)) return;
    if (n == 1) {
      visit(WordView(w));
      return;
    }
    std::vector<std::size_t> idx(n, 0);
    std::size_t depth = 1;
    while (depth >= 1) {
      const auto& cand = s.successors(w[depth - 1]);
      if (idx[depth] < cand.size()) {
        w[depth] = cand[idx[depth]++];
        if (depth + 1 == n) {
          visit(WordView(w));
        } else {
          ++depth;
          idx[depth] = 0;
        }
      } else {
        --depth;
      }
    }
    return;
  }
  const std::size_t k = s.alphabet_size();
  std::vector<ShiftSpace::Bits> state(n), reachable(n);
  state[0] = s.fiber_bits(first);
  if (state[0].none()) return;
  if (n == 1) {
    visit(WordView(w));
    return;
  }
  std::vector<Symbol> next_symbol(n, 1);
  std::size_t depth = 1;
  reachable[1] = detail::reach(s, state[0]);
  while (depth >= 1) {
    if (next_symbol[depth] > k) {
      --depth;
      continue;
    }
    Symbol b = next_symbol[depth]++;
    state[depth] = reachable[depth] & s.fiber_bits(b);
    if (state[depth].none()) continue;
    w[depth] = b;
    if (depth + 1 == n) {
      visit(WordView(w));
    } else {
      ++depth;
      next_symbol[depth] = 1;
      reachable[depth] = detail::reach(s, state[depth - 1]);
    }
  }
}

/// Visits B_n in lexicographic order; n = 0 visits the empty word once.
template <class Visitor>
void for_each_word(const ShiftSpace& s, std::size_t n, Visitor&& visit) {
  if (n == 0) {
    visit(WordView());
    return;
  }
  for (Symbol a = 1; a <= s.alphabet_size(); ++a) for_each_word_from(s, a, n, visit);
}

inline std::uint64_t count_words(const ShiftSpace& s, std::size_t n) {
  std::uint64_t count = 0;
  for_each_word(s, n, [&](WordView) { ++count; });
  return count;
}

/// B_n at the truncation (or at ladder entry `level`), lexicographic.
inline std::vector<Word> enumerate_words(const ShiftSpace& s, std::size_t n,
                                         std::optional<std::size_t> level = std::nullopt,
                                         std::size_t budget = kDefaultWordBudget) {
  const ShiftSpace space = level ? s.at_level(*level) : s;
  std::vector<Word> out;
  for_each_word(space, n, [&](WordView w) {
    if (out.size() >= budget)
      throw BudgetExceeded("more than " + std::to_string(budget) + " words of length " + std::to_string(n));
    out.emplace_back(w.begin(), w.end());
  });
  return out;
}

/// True iff the periodic sequence w w w ... is a point of the space. For a
/// Markov shift this is "w allowable and last(w) -> first(w)"; for a sofic
/// space it asks for a periodic preimage path, i.e. a cycle in the relation
/// "x reaches x' through a path labelled w followed by one edge" on the
/// fiber of w_1.
inline bool is_periodic_point(const ShiftSpace& s, WordView w) {
  if (w.empty() || !is_allowable(s, w)) return false;
  if (!s.is_sofic()) return s.has_edge(w.back(), w.front());
  const auto& start = s.fiber(w.front());
  const std::size_t m = start.size();
  std::vector<std::vector<std::size_t>> next(m);
  for (std::size_t i = 0; i < m; ++i) {
    ShiftSpace::Bits cur(s.cover_size());
    cur.set(start[i] - 1);
    for (std::size_t j = 1; j < w.size() && cur.any(); ++j) cur = detail::reach(s, cur) & s.fiber_bits(w[j]);
    ShiftSpace::Bits back = detail::reach(s, cur) & s.fiber_bits(w.front());
    for (std::size_t t = 0; t < m; ++t)
      if (back.test(start[t] - 1)) next[i].push_back(t);
  }
  // Cycle detection by iterative DFS with colours.
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

/// Length-n words w with w_1 = a whose periodic extension lies in the space.
inline std::vector<Word> periodic_words(const ShiftSpace& s, std::size_t n, Symbol a) {
  if (a < 1 || a > s.alphabet_size()) throw SpecError("anchor symbol " + std::to_string(a) + " outside alphabet");
  std::vector<Word> out;
  for_each_word_from(s, a, n, [&](WordView w) {
    if (is_periodic_point(s, w)) out.emplace_back(w.begin(), w.end());
  });
  return out;
}

namespace detail {

/// Depth-first walk over allowable continuations of `state` of length
/// exactly `len`, lexicographic. `leaf(word, end_state)` returns true to stop.
template <class Leaf>
bool walk_from(const ShiftSpace& s, const SubsetState& state, std::size_t len, Word& buf, Leaf&& leaf) {
  if (len == 0) return leaf(static_cast<const Word&>(buf), state);
  for (Symbol b = 1; b <= s.alphabet_size(); ++b) {
    SubsetState next = step(s, state, b);
    if (next.dead()) continue;
    buf.push_back(b);
    bool stop = walk_from(s, next, len - 1, buf, leaf);
    buf.pop_back();
    if (stop) return true;
  }
  return false;
}

/// Whether some allowable word continues after a reader in `left` and
/// starts a word whose admissible first cover symbols are `right_starts`
/// (nullopt = the empty word).
inline bool joins(const ShiftSpace& s, const SubsetState& left,
                  const std::optional<ShiftSpace::Bits>& right_starts) {
  if (left.dead()) return false;
  if (!right_starts) return true;
  if (left.initial) return right_starts->any();
  return reach(s, left.ends).intersects(*right_starts);
}

/// Cover symbols that can start a preimage path of v (v nonempty, allowable).
inline ShiftSpace::Bits start_set(const ShiftSpace& s, WordView v) {
  ShiftSpace::Bits t = s.fiber_bits(v.back());
  for (std::size_t i = v.size() - 1; i-- > 0;) {
    ShiftSpace::Bits prev(s.cover_size());
    const auto& fib = s.fiber_bits(v[i]);
    for (std::size_t x = fib.find_first(); x != ShiftSpace::Bits::npos; x = fib.find_next(x))
      if (s.successor_bits(static_cast<Symbol>(x + 1)).intersects(t)) prev.set(x);
    t = std::move(prev);
  }
  return t;
}

}  // namespace detail

/// Shortest w (lexicographic among equal lengths, ε first) with u·w·v
/// allowable and |w| <= p_max.
inline std::optional<Word> find_connector(const ShiftSpace& s, WordView u, WordView v, std::size_t p_max) {
  require_allowable(s, u, "u");
  require_allowable(s, v, "v");
  SubsetState left = run(s, SubsetState{}, u);
  std::optional<ShiftSpace::Bits> right;
  if (!v.empty()) right = detail::start_set(s, v);
  for (std::size_t len = 0; len <= p_max; ++len) {
    Word buf;
    std::optional<Word> found;
    detail::walk_from(s, left, len, buf, [&](const Word& w, const SubsetState& st) {
      if (!detail::joins(s, st, right)) return false;
      found = w;
      return true;
    });
    if (found) return found;
  }
  return std::nullopt;
}

struct ConnectorEntry {
  Word u, v, w;
};

/// Finite-irreducibility certificate, valid for all pairs of words of
/// length <= n_max at the current truncation. For a Markov space the pair
/// classes depend only on the boundary symbols, so the certificate then
/// covers every pair of words of the truncation.
struct SpecificationCertificate {
  std::size_t p = 0;
  std::vector<Word> W;  ///< shortest connectors actually used, shortlex
  std::vector<ConnectorEntry> connector_table;
  bool strong = false;  ///< some single length works for every pair
  std::size_t strong_p = 0;
  std::vector<Word> strong_W;  ///< greedy cover by connectors of length strong_p
  std::size_t n_max = 0;
  std::size_t left_classes = 0, right_classes = 0;
  std::string scale = "at truncation scale";
};

struct IrreducibilityReport {
  std::optional<SpecificationCertificate> certificate;
  std::optional<std::pair<Word, Word>> uncovered;  ///< witness pair when it fails
  bool ok() const { return certificate.has_value(); }
};

inline bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

/// Searches connectors of length <= p_max for all pairs (u, v) of
/// allowable words with |u|, |v| <= n_max. Pairs are grouped by the reader
/// state after u and by the set of admissible first cover symbols of v,
/// which decide allowability of u·w·v exactly.
inline IrreducibilityReport check_finite_irreducibility(const ShiftSpace& s, std::size_t n_max, std::size_t p_max,
                                                        std::size_t pair_cap = 1'000'000) {
  using Bits = ShiftSpace::Bits;
  // Left classes: reader states, with a shortlex witness word.
  std::vector<SubsetState> lefts{SubsetState{}};
  std::vector<Word> left_words{Word{}};
  {
    std::map<SubsetState, std::size_t> seen{{SubsetState{}, 0}};
    std::vector<std::size_t> frontier{0};
    for (std::size_t d = 1; d <= n_max && !frontier.empty(); ++d) {
      std::vector<std::size_t> next;
      for (std::size_t idx : frontier)
        for (Symbol b = 1; b <= s.alphabet_size(); ++b) {
          SubsetState st = step(s, lefts[idx], b);
          if (st.dead() || seen.count(st)) continue;
          seen.emplace(st, lefts.size());
          Word w = left_words[idx];
          w.push_back(b);
          next.push_back(lefts.size());
          lefts.push_back(std::move(st));
          left_words.push_back(std::move(w));
        }
      frontier = std::move(next);
    }
  }
  // Right classes: admissible start sets of v (nullopt = ε).
  std::vector<std::optional<Bits>> rights{std::nullopt};
  std::vector<Word> right_words{Word{}};
  {
    std::map<Bits, std::size_t> seen;
    std::vector<std::size_t> frontier;
    for (Symbol b = 1; b <= s.alphabet_size() && n_max >= 1; ++b) {
      const Bits& t = s.fiber_bits(b);
      if (t.none() || seen.count(t)) continue;
      seen.emplace(t, rights.size());
      frontier.push_back(rights.size());
      rights.emplace_back(t);
      right_words.push_back(Word{b});
    }
    for (std::size_t d = 2; d <= n_max && !frontier.empty(); ++d) {
      std::vector<std::size_t> next;
      for (std::size_t idx : frontier)
        for (Symbol b = 1; b <= s.alphabet_size(); ++b) {
          Bits prev(s.cover_size());
          const Bits& fib = s.fiber_bits(b);
          for (std::size_t x = fib.find_first(); x != Bits::npos; x = fib.find_next(x))
            if (s.successor_bits(static_cast<Symbol>(x + 1)).intersects(*rights[idx])) prev.set(x);
          if (prev.none() || seen.count(prev)) continue;
          seen.emplace(prev, rights.size());
          Word w{b};
          w.insert(w.end(), right_words[idx].begin(), right_words[idx].end());
          next.push_back(rights.size());
          rights.emplace_back(std::move(prev));
          right_words.push_back(std::move(w));
        }
      frontier = std::move(next);
    }
  }
  const std::size_t nl = lefts.size(), nr = rights.size();
  if (nl * nr > pair_cap)
    throw BudgetExceeded("finite-irreducibility check needs " + std::to_string(nl * nr) +
                         " pair classes, cap is " + std::to_string(pair_cap));

  auto coverage = [&](const Word& w) {
    Bits cov(nl * nr);
    for (std::size_t i = 0; i < nl; ++i) {
      SubsetState st = run(s, lefts[i], w);
      if (st.dead()) continue;
      for (std::size_t j = 0; j < nr; ++j)
        if (detail::joins(s, st, rights[j])) cov.set(i * nr + j);
    }
    return cov;
  };

  std::vector<std::optional<Word>> assigned(nl * nr);
  Bits uncovered(nl * nr);
  uncovered.set();
  std::vector<bool> length_covers_all(p_max + 1, false);
  for (std::size_t len = 0; len <= p_max; ++len) {
    Bits union_len(nl * nr);
    Word buf;
    detail::walk_from(s, SubsetState{}, len, buf, [&](const Word& w, const SubsetState&) {
      Bits cov = coverage(w);
      union_len |= cov;
      Bits fresh = cov & uncovered;
      for (std::size_t q = fresh.find_first(); q != Bits::npos; q = fresh.find_next(q)) assigned[q] = w;
      uncovered -= fresh;
      return false;
    });
    length_covers_all[len] = union_len.all();
  }

  IrreducibilityReport report;
  if (uncovered.any()) {
    std::size_t q = uncovered.find_first();
    report.uncovered = std::make_pair(left_words[q / nr], right_words[q % nr]);
    return report;
  }
  SpecificationCertificate cert;
  cert.n_max = n_max;
  cert.left_classes = nl;
  cert.right_classes = nr;
  std::vector<Word> used;
  for (std::size_t q = 0; q < nl * nr; ++q) {
    const Word& w = *assigned[q];
    cert.connector_table.push_back({left_words[q / nr], right_words[q % nr], w});
    used.push_back(w);
    cert.p = std::max(cert.p, w.size());
  }
  std::sort(used.begin(), used.end(), shortlex_less);
  used.erase(std::unique(used.begin(), used.end()), used.end());
  cert.W = std::move(used);

  for (std::size_t len = 0; len <= p_max; ++len) {
    if (!length_covers_all[len]) continue;
    cert.strong = true;
    cert.strong_p = len;
    std::vector<Word> cands;
    std::vector<Bits> covs;
    Word buf;
    detail::walk_from(s, SubsetState{}, len, buf, [&](const Word& w, const SubsetState&) {
      cands.push_back(w);
      covs.push_back(coverage(w));
      return false;
    });
    Bits todo(nl * nr);
    todo.set();
    std::vector<Word> chosen;
    while (todo.any()) {
      std::size_t best = 0, best_gain = 0;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        std::size_t gain = (covs[c] & todo).count();
        if (gain > best_gain) {
          best_gain = gain;
          best = c;
        }
      }
      chosen.push_back(cands[best]);
      todo -= covs[best];
    }
    std::sort(chosen.begin(), chosen.end());
    cert.strong_W = std::move(chosen);
    break;
  }
  report.certificate = std::move(cert);
  return report;
}

struct BipReport {
  bool holds = false;
  std::vector<Symbol> witnesses;
  std::optional<Symbol> blocking_symbol;  ///< a symbol lacking an in- or out-edge
};

/// Big-images-and-preimages check on the truncated cover: a greedy set
/// cover (largest gain, smallest symbol on ties) of the requirements
/// "some b_i -> a" and "a -> some b_j" for every live symbol a.
inline BipReport check_bip(const ShiftSpace& s) {
  BipReport out;
  const std::size_t k = s.cover_size();
  std::vector<Symbol> syms;
  for (Symbol a = 1; a <= k; ++a)
    if (s.is_active(a)) syms.push_back(a);
  for (Symbol a : syms)
    if (!s.is_live(a) || s.predecessors(a).empty()) {
      out.blocking_symbol = a;
      return out;
    }
  std::vector<bool> need_in(k + 1, false), need_out(k + 1, false);
  std::size_t remaining = 0;
  for (Symbol a : syms) {
    need_in[a] = need_out[a] = true;
    remaining += 2;
  }
  while (remaining > 0) {
    Symbol best = 0;
    std::size_t best_gain = 0;
    for (Symbol b : syms) {
      std::size_t gain = 0;
      for (Symbol a : s.successors(b)) gain += need_in[a];
      for (Symbol a : s.predecessors(b)) gain += need_out[a];
      if (gain > best_gain) {
        best_gain = gain;
        best = b;
      }
    }
    if (best == 0) return out;
    out.witnesses.push_back(best);
    for (Symbol a : s.successors(best))
      if (need_in[a]) need_in[a] = false, --remaining;
    for (Symbol a : s.predecessors(best))
      if (need_out[a]) need_out[a] = false, --remaining;
  }
  std::sort(out.witnesses.begin(), out.witnesses.end());
  out.holds = true;
  return out;
}

}  // namespace thermoshift
