#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermoshift/errors.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/shift_space.hpp"
#include "thermoshift/word.hpp"

namespace thermoshift {

enum class WeightKind { additive_cylinder, tabulated_aa, matrix_cocycle, preimage_count, pushforward, scaled };

inline std::string_view kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::additive_cylinder: return "additive-cylinder";
    case WeightKind::tabulated_aa: return "tabulated-aa";
    case WeightKind::matrix_cocycle: return "matrix-cocycle";
    case WeightKind::preimage_count: return "preimage-count";
    case WeightKind::pushforward: return "pushforward";
    case WeightKind::scaled: return "scaled";
  }
  return "?";
}

/// Path-sum representation on the cover graph. For a word v,
///   exp(eval(v)) = exp(offset(n)) * sum over cover paths x with label v of
///                  exp(initial[x1] + step[x1][x2] + ... + final[xn]).
/// On a Markov space there is one path per word; on a sofic space this is
/// the linear (fiber-sum) semantics of preimage counts and pushforwards.
/// The same form drives the O(n * edges) partition-sum recursion.
struct TransferForm {
  std::size_t k = 0;
  std::vector<double> initial, final, step;  // step is row-major k x k
  std::function<double(std::size_t)> offset;
  /// Set when step[x][.] = final[x] = site[x], initial = 0 and no offset:
  /// the weight of a path is the product of one factor per symbol.
  std::optional<std::vector<double>> site;

  double step_at(Symbol x, Symbol y) const { return step[(x - 1) * k + (y - 1)]; }
  double offset_at(std::size_t n) const { return offset ? offset(n) : 0.0; }

  static TransferForm one_site(const ShiftSpace& s, std::vector<double> phi) {
    TransferForm t;
    t.k = s.cover_size();
    t.initial.assign(t.k, 0.0);
    t.final = phi;
    t.step.assign(t.k * t.k, kNegInf);
    for (Symbol x = 1; x <= t.k; ++x)
      for (Symbol y : s.successors(x)) t.step[(x - 1) * t.k + (y - 1)] = phi[x - 1];
    t.site = std::move(phi);
    return t;
  }
};

/// log of the path sum over cover paths labelled v (see TransferForm).
inline double path_sum(const ShiftSpace& s, const TransferForm& t, WordView v) {
  if (v.empty()) return 0.0;
  const auto* prev = &s.fiber(v[0]);
  std::vector<double> cur, next;
  cur.reserve(prev->size());
  for (Symbol x : *prev) cur.push_back(t.initial[x - 1]);
  for (std::size_t i = 1; i < v.size(); ++i) {
    const auto& fib = s.fiber(v[i]);
    next.assign(fib.size(), kNegInf);
    for (std::size_t j = 0; j < fib.size(); ++j) {
      LogSumAccumulator acc;
      for (std::size_t q = 0; q < prev->size(); ++q)
        if (s.has_edge((*prev)[q], fib[j])) acc.add(cur[q] + t.step_at((*prev)[q], fib[j]));
      next[j] = acc.value();
    }
    cur.swap(next);
    prev = &fib;
  }
  LogSumAccumulator acc;
  for (std::size_t q = 0; q < prev->size(); ++q) acc.add(cur[q] + t.final[(*prev)[q] - 1]);
  double total = acc.value();
  return total == kNegInf ? kNegInf : total + t.offset_at(v.size());
}

/// log of the sum over all cover paths of length n >= 1 (i.e. log Z_n for a
/// Markov space, or for a sofic space with linear semantics).
inline double transfer_log_partition(const ShiftSpace& s, const TransferForm& t, std::size_t n) {
  const std::size_t k = s.cover_size();
  std::vector<double> cur(k, kNegInf), next(k);
  for (Symbol x = 1; x <= k; ++x)
    if (s.is_live(x)) cur[x - 1] = t.initial[x - 1];
  for (std::size_t i = 1; i < n; ++i) {
    for (Symbol y = 1; y <= k; ++y) {
      LogSumAccumulator acc;
      for (Symbol x : s.predecessors(y)) acc.add(cur[x - 1] + t.step_at(x, y));
      next[y - 1] = acc.value();
    }
    cur.swap(next);
  }
  LogSumAccumulator acc;
  for (Symbol x = 1; x <= k; ++x)
    if (s.is_live(x)) acc.add(cur[x - 1] + t.final[x - 1]);
  double total = acc.value();
  return total == kNegInf ? kNegInf : total + t.offset_at(n);
}

struct WeightMeta {
  std::optional<double> declared_C;
  std::optional<double> declared_M;
  std::size_t depth = 0;
  /// Whether periodic_eval is the exact f_n at the periodic point.
  bool exact_periodic = true;
  /// Linear semantics over cover paths (preimage counts, pushforwards).
  bool linear = false;
  std::string regime;  ///< free-form note, e.g. "exact" for pushforwards with M = 1
};

/// A potential sequence F = {log f_n}, bound to the shift it lives on.
/// eval(w) is the log of the supremum of f_{|w|} on the cylinder [w].
class WeightSystem {
 public:
  using Eval = std::function<double(const ShiftSpace&, WordView)>;
  using Rebind = std::function<WeightSystem(const ShiftSpace&)>;

  struct Parts {
    WeightKind kind;
    Eval eval;           ///< may be empty when a transfer form is given
    Eval periodic_eval;  ///< empty: use eval
    std::shared_ptr<const TransferForm> transfer;
    WeightMeta meta;
    Rebind rebind;
  };

  WeightSystem(const ShiftSpace& space, Parts parts)
      : space_(std::make_shared<const ShiftSpace>(space)), parts_(std::make_shared<const Parts>(std::move(parts))) {}

  WeightKind kind() const { return parts_->kind; }
  const ShiftSpace& space() const { return *space_; }
  const WeightMeta& meta() const { return parts_->meta; }
  const TransferForm* transfer() const { return parts_->transfer.get(); }

  double eval(WordView w) const {
    if (w.empty()) return 0.0;
    if (parts_->eval) return parts_->eval(*space_, w);
    return path_sum(*space_, *parts_->transfer, w);
  }

  /// log f_n at the periodic point w w w ..., for Gurevich sums.
  double periodic_eval(WordView w) const {
    if (parts_->periodic_eval) return parts_->periodic_eval(*space_, w);
    return eval(w);
  }

  /// The same potential on another truncation of the same shift.
  WeightSystem rebind(const ShiftSpace& space) const { return parts_->rebind(space); }

 private:
  std::shared_ptr<const ShiftSpace> space_;
  std::shared_ptr<const Parts> parts_;
};

namespace detail {

using WindowTable = std::map<Word, double>;

inline double window_value(const WindowTable& values, const std::optional<double>& fallback, WordView window) {
  auto it = values.find(Word(window.begin(), window.end()));
  if (it != values.end()) return it->second;
  if (fallback) return *fallback;
  throw SpecError("additive-cylinder potential has no value for window '" + to_string(window) + "'");
}

/// sup over the cylinder [w] of the Birkhoff sum of a depth-d locally
/// constant function: windows inside w are fixed, the remaining ones are
/// maximized over allowable right extensions of length d - 1.
inline double additive_sup(const ShiftSpace& s, const WindowTable& values, const std::optional<double>& fallback,
                           std::size_t d, WordView w) {
  const std::size_t n = w.size();
  double inner = 0.0;
  for (std::size_t i = 0; i + d <= n; ++i) inner += window_value(values, fallback, w.subspan(i, d));
  if (d == 1) return inner;
  SubsetState st = run(s, SubsetState{}, w);
  if (st.dead()) return kNegInf;
  const std::size_t first_open = n >= d ? n - d + 1 : 0;
  double best = kNegInf;
  Word ext;
  Word full(w.begin(), w.end());
  walk_from(s, st, d - 1, ext, [&](const Word& e, const SubsetState&) {
    full.resize(n);
    full.insert(full.end(), e.begin(), e.end());
    double tail = 0.0;
    for (std::size_t i = first_open; i < n; ++i) tail += window_value(values, fallback, WordView(full).subspan(i, d));
    best = std::max(best, tail);
    return false;
  });
  return best == kNegInf ? kNegInf : inner + best;
}

/// Birkhoff sum along the periodic point w w w ... (n windows).
inline double additive_cyclic(const WindowTable& values, const std::optional<double>& fallback, std::size_t d,
                              WordView w) {
  const std::size_t n = w.size();
  Word window(d);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) window[j] = w[(i + j) % n];
    sum += window_value(values, fallback, window);
  }
  return sum;
}

}  // namespace detail

/// Birkhoff sums of a function that depends on the first `depth` symbols;
/// values are keyed by words of length `depth` in the space's alphabet. A
/// fallback value, when given, covers windows missing from the table.
inline WeightSystem additive_cylinder(const ShiftSpace& s, std::size_t depth, std::map<Word, double> values,
                                      std::optional<double> fallback = std::nullopt) {
  if (depth == 0) throw SpecError("additive-cylinder depth must be >= 1");
  for (const auto& [w, v] : values) {
    if (w.size() != depth)
      throw SpecError("additive-cylinder key '" + to_string(w) + "' does not have length " + std::to_string(depth));
    for (Symbol b : w)
      if (b < 1 || b > s.alphabet_size())
        throw SpecError("additive-cylinder key '" + to_string(w) + "' uses a symbol outside the alphabet");
    if (std::isnan(v) || v == kPosInf) throw SpecError("additive-cylinder value for '" + to_string(w) + "' is not a log-weight");
  }
  auto table = std::make_shared<const detail::WindowTable>(std::move(values));

  WeightSystem::Parts parts;
  parts.kind = WeightKind::additive_cylinder;
  parts.meta.declared_C = 0.0;
  parts.meta.declared_M = 1.0;
  parts.meta.depth = depth;
  parts.rebind = [depth, table, fallback](const ShiftSpace& other) {
    return additive_cylinder(other, depth, *table, fallback);
  };
  parts.periodic_eval = [table, fallback, depth](const ShiftSpace&, WordView w) {
    return detail::additive_cyclic(*table, fallback, depth, w);
  };

  if (!s.is_sofic() && depth <= 2) {
    const std::size_t k = s.cover_size();
    if (depth == 1) {
      std::vector<double> phi(k, kNegInf);
      for (Symbol x = 1; x <= k; ++x)
        if (s.is_live(x)) phi[x - 1] = detail::window_value(*table, fallback, Word{x});
      parts.transfer = std::make_shared<const TransferForm>(TransferForm::one_site(s, std::move(phi)));
    } else {
      TransferForm t;
      t.k = k;
      t.initial.assign(k, 0.0);
      t.final.assign(k, kNegInf);
      t.step.assign(k * k, kNegInf);
      for (Symbol x = 1; x <= k; ++x)
        for (Symbol y : s.successors(x)) {
          double v = detail::window_value(*table, fallback, Word{x, y});
          t.step[(x - 1) * k + (y - 1)] = v;
          t.final[x - 1] = std::max(t.final[x - 1], v);
        }
      parts.transfer = std::make_shared<const TransferForm>(std::move(t));
    }
  } else {
    parts.eval = [table, fallback, depth](const ShiftSpace& sp, WordView w) {
      return detail::additive_sup(sp, *table, fallback, depth, w);
    };
  }
  return WeightSystem(s, std::move(parts));
}

/// F = 0.
inline WeightSystem zero_potential(const ShiftSpace& s) { return additive_cylinder(s, 1, {}, 0.0); }

/// Closed-form scalar sequences log c_n for tabulated almost-additive
/// potentials g_n = c_n * lambda_{i_1} ... lambda_{i_n}.
struct ScalarSequence {
  std::string id;
  std::function<double(std::size_t)> log_c;
  double C = 0.0;  ///< sup over n, m of |log c_{n+m} - log c_n - log c_m|
};

inline ScalarSequence scalar_sequence(std::string_view id) {
  if (id == "one") return {"one", [](std::size_t) { return 0.0; }, 0.0};
  if (id == "alternating")
    return {"alternating", [](std::size_t n) { return n % 2 == 0 ? 1.0 : -1.0; }, 3.0};
  if (id == "bounded-sine")
    return {"bounded-sine", [](std::size_t n) { return std::sin(static_cast<double>(n)); }, 3.0};
  throw SpecError("unknown scalar sequence '" + std::string(id) + "' (expected one, alternating, bounded-sine)");
}

inline WeightSystem tabulated_aa(const ShiftSpace& s, std::vector<double> lambda, std::string_view c_id) {
  ScalarSequence seq = scalar_sequence(c_id);
  if (lambda.size() < s.alphabet_size())
    throw SpecError("tabulated-aa needs " + std::to_string(s.alphabet_size()) + " lambda values, got " +
                    std::to_string(lambda.size()));
  for (double l : lambda)
    if (!(l > 0.0) || !std::isfinite(l)) throw SpecError("tabulated-aa lambda values must be positive and finite");
  auto lam = std::make_shared<const std::vector<double>>(std::move(lambda));

  WeightSystem::Parts parts;
  parts.kind = WeightKind::tabulated_aa;
  parts.meta.declared_C = seq.C;
  parts.meta.declared_M = 1.0;
  parts.meta.depth = 1;
  parts.rebind = [lam, id = seq.id](const ShiftSpace& other) { return tabulated_aa(other, *lam, id); };
  auto log_c = seq.log_c;
  if (!s.is_sofic()) {
    std::vector<double> phi(s.cover_size(), kNegInf);
    for (Symbol x = 1; x <= s.cover_size(); ++x) phi[x - 1] = std::log((*lam)[x - 1]);
    TransferForm t = TransferForm::one_site(s, std::move(phi));
    if (seq.id != "one") {
      t.offset = log_c;
      t.site.reset();
    }
    parts.transfer = std::make_shared<const TransferForm>(std::move(t));
  } else {
    parts.eval = [lam, log_c](const ShiftSpace&, WordView w) {
      double sum = log_c(w.size());
      for (Symbol b : w) sum += std::log((*lam)[b - 1]);
      return sum;
    };
  }
  return WeightSystem(s, std::move(parts));
}

/// f_n -> e^{c n} f_n.
inline WeightSystem scaled(const WeightSystem& inner, double c) {
  WeightSystem::Parts parts;
  parts.kind = WeightKind::scaled;
  parts.meta = inner.meta();
  parts.rebind = [inner, c](const ShiftSpace& other) { return scaled(inner.rebind(other), c); };
  parts.periodic_eval = [inner, c](const ShiftSpace&, WordView w) {
    return inner.periodic_eval(w) + c * static_cast<double>(w.size());
  };
  if (const TransferForm* t = inner.transfer()) {
    TransferForm s = *t;
    for (double& v : s.step)
      if (v != kNegInf) v += c;
    for (double& v : s.final)
      if (v != kNegInf) v += c;
    if (s.site)
      for (double& v : *s.site)
        if (v != kNegInf) v += c;
    parts.transfer = std::make_shared<const TransferForm>(std::move(s));
  } else {
    parts.eval = [inner, c](const ShiftSpace&, WordView w) {
      return inner.eval(w) + c * static_cast<double>(w.size());
    };
  }
  return WeightSystem(inner.space(), std::move(parts));
}

inline double log_weight(const WeightSystem& ws, WordView w) {
  require_allowable(ws.space(), w);
  return ws.eval(w);
}

}  // namespace thermoshift
