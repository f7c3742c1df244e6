#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "thermoshift/errors.hpp"
#include "thermoshift/word.hpp"

namespace thermoshift {

/// A finite truncation of a countable Markov shift given by its edge graph,
/// optionally carrying a one-block factor map. With a factor map the words
/// of the space are words of the sofic image and the Markov graph is kept as
/// its presentation ("cover"); without one the space is the Markov shift.
///
/// Symbols of the cover are 1..cover_size(), symbols of the image are
/// 1..alphabet_size(). A truncation keeps the numbering and marks the
/// remaining cover symbols active; symbols without an infinite forward path
/// inside the truncation are dead and never appear in words.
class ShiftSpace {
 public:
  using Bits = boost::dynamic_bitset<>;
  using EdgeList = std::vector<std::pair<Symbol, Symbol>>;

  static ShiftSpace create(std::size_t alphabet_size, const EdgeList& edges,
                           std::vector<std::size_t> ladder = {},
                           std::optional<std::vector<Symbol>> factor_map = std::nullopt) {
    if (alphabet_size == 0) throw SpecError("alphabet_size must be positive");
    std::vector<Bits> adj(alphabet_size, Bits(alphabet_size));
    for (auto [i, j] : edges) {
      if (i < 1 || j < 1 || i > alphabet_size || j > alphabet_size)
        throw SpecError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                        ") outside alphabet 1.." + std::to_string(alphabet_size));
      adj[i - 1].set(j - 1);
    }
    Bits has_in(alphabet_size);
    for (std::size_t i = 0; i < alphabet_size; ++i) {
      if (adj[i].none()) throw SpecError("symbol " + std::to_string(i + 1) + " has no out-edge");
      has_in |= adj[i];
    }
    if (!has_in.all()) {
      for (std::size_t j = 0; j < alphabet_size; ++j)
        if (!has_in.test(j)) throw SpecError("symbol " + std::to_string(j + 1) + " has no in-edge");
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      if (ladder[i] == 0 || ladder[i] > alphabet_size)
        throw SpecError("ladder entry " + std::to_string(ladder[i]) + " outside 1.." +
                        std::to_string(alphabet_size));
      if (i > 0 && ladder[i] <= ladder[i - 1]) throw SpecError("ladder must be strictly increasing");
    }
    if (factor_map) {
      if (factor_map->size() != alphabet_size)
        throw SpecError("factor_map has " + std::to_string(factor_map->size()) +
                        " entries, expected " + std::to_string(alphabet_size));
      Symbol image = 0;
      for (Symbol s : *factor_map) {
        if (s == 0) throw SpecError("factor_map values must be >= 1");
        image = std::max(image, s);
      }
      std::vector<bool> hit(image, false);
      for (Symbol s : *factor_map) hit[s - 1] = true;
      for (Symbol j = 1; j <= image; ++j)
        if (!hit[j - 1]) throw SpecError("factor_map is not onto: image symbol " + std::to_string(j) + " has an empty fiber");
    }
    Bits active(alphabet_size);
    active.set();
    return ShiftSpace(std::move(adj), std::move(ladder), std::move(factor_map), std::move(active),
                      alphabet_size);
  }

  /// Number of symbols of the Markov presentation.
  std::size_t cover_size() const { return adj_.size(); }
  /// Number of symbols words are written in (image symbols when sofic).
  std::size_t alphabet_size() const { return image_size_; }
  bool is_sofic() const { return factor_map_.has_value(); }
  /// Largest cover symbol admitted by the truncation (cover_size() if none).
  std::size_t truncation() const { return limit_; }

  bool is_active(Symbol x) const { return x >= 1 && x <= cover_size() && active_.test(x - 1); }
  bool is_live(Symbol x) const { return x >= 1 && x <= cover_size() && live_.test(x - 1); }
  const Bits& live() const { return live_; }

  /// Edge of the truncated cover (both ends live).
  bool has_edge(Symbol i, Symbol j) const {
    return is_live(i) && is_live(j) && adj_[i - 1].test(j - 1);
  }
  const std::vector<Symbol>& successors(Symbol x) const { return succ_[x - 1]; }
  const std::vector<Symbol>& predecessors(Symbol x) const { return pred_[x - 1]; }
  const Bits& successor_bits(Symbol x) const { return succ_bits_[x - 1]; }

  Symbol label(Symbol x) const { return factor_map_ ? (*factor_map_)[x - 1] : x; }
  /// Live cover symbols mapping to image symbol b, ascending.
  const std::vector<Symbol>& fiber(Symbol b) const { return fibers_[b - 1]; }
  const Bits& fiber_bits(Symbol b) const { return fiber_bits_[b - 1]; }

  const std::vector<std::size_t>& ladder() const { return ladder_; }
  const std::optional<std::vector<Symbol>>& factor_map() const { return factor_map_; }

  /// The Markov presentation at the same truncation.
  ShiftSpace cover() const {
    return ShiftSpace(adj_, ladder_, std::nullopt, active_, limit_);
  }

  /// Restriction to cover symbols 1..l. For a sofic space the kept set is
  /// closed under fibers: every cover symbol whose image is the image of
  /// some symbol <= l stays, so preimage counts of surviving image words are
  /// those of the untruncated cover.
  ShiftSpace truncated(std::size_t l) const {
    if (l == 0 || l > cover_size())
      throw SpecError("truncation level " + std::to_string(l) + " outside 1.." + std::to_string(cover_size()));
    Bits active(cover_size());
    for (std::size_t x = 0; x < l; ++x) active.set(x);
    if (factor_map_) {
      std::vector<bool> kept(image_size_, false);
      for (std::size_t x = 0; x < l; ++x) kept[(*factor_map_)[x] - 1] = true;
      for (std::size_t x = l; x < cover_size(); ++x)
        if (kept[(*factor_map_)[x] - 1]) active.set(x);
    }
    active &= active_;
    return ShiftSpace(adj_, ladder_, factor_map_, std::move(active), std::min(l, limit_));
  }

  /// Truncation at ladder entry `index` (0-based).
  ShiftSpace at_level(std::size_t index) const {
    if (index >= ladder_.size())
      throw SpecError("ladder level " + std::to_string(index) + " out of range (ladder has " +
                      std::to_string(ladder_.size()) + " entries)");
    return truncated(ladder_[index]);
  }

  /// Ladder entries, or doubling levels 2, 4, 8, ... capped by cover_size().
  std::vector<std::size_t> effective_ladder() const {
    if (!ladder_.empty()) return ladder_;
    std::vector<std::size_t> out;
    for (std::size_t l = 2; l < cover_size(); l *= 2) out.push_back(l);
    out.push_back(cover_size());
    return out;
  }

  /// True when the active cover symbols are all live and form one strongly
  /// connected component.
  bool is_irreducible() const {
    if (live_.none() || live_ != active_) return false;
    std::size_t start = live_.find_first();
    auto reach = [&](bool forward) {
      Bits seen(cover_size());
      std::vector<std::size_t> stack{start};
      seen.set(start);
      while (!stack.empty()) {
        std::size_t x = stack.back();
        stack.pop_back();
        const auto& next = forward ? succ_[x] : pred_[x];
        for (Symbol y : next)
          if (!seen.test(y - 1)) {
            seen.set(y - 1);
            stack.push_back(y - 1);
          }
      }
      return seen;
    };
    return reach(true) == live_ && reach(false) == live_;
  }

  /// Live edges, lexicographic.
  EdgeList edges() const {
    EdgeList out;
    for (Symbol x = 1; x <= cover_size(); ++x)
      for (Symbol y : succ_[x - 1]) out.emplace_back(x, y);
    return out;
  }

  /// The full (untruncated) edge list, as given at construction.
  EdgeList all_edges() const {
    EdgeList out;
    for (std::size_t x = 0; x < cover_size(); ++x)
      for (std::size_t y = adj_[x].find_first(); y != Bits::npos; y = adj_[x].find_next(y))
        out.emplace_back(static_cast<Symbol>(x + 1), static_cast<Symbol>(y + 1));
    return out;
  }

 private:
  ShiftSpace(std::vector<Bits> adj, std::vector<std::size_t> ladder,
             std::optional<std::vector<Symbol>> factor_map, Bits active, std::size_t limit)
      : adj_(std::move(adj)),
        ladder_(std::move(ladder)),
        factor_map_(std::move(factor_map)),
        active_(std::move(active)),
        limit_(limit) {
    const std::size_t k = adj_.size();
    live_ = active_;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t x = live_.find_first(); x != Bits::npos; x = live_.find_next(x))
        if (!adj_[x].intersects(live_)) {
          live_.reset(x);
          changed = true;
        }
    }
    succ_.assign(k, {});
    pred_.assign(k, {});
    succ_bits_.assign(k, Bits(k));
    for (std::size_t x = live_.find_first(); x != Bits::npos; x = live_.find_next(x)) {
      succ_bits_[x] = adj_[x] & live_;
      for (std::size_t y = succ_bits_[x].find_first(); y != Bits::npos; y = succ_bits_[x].find_next(y)) {
        succ_[x].push_back(static_cast<Symbol>(y + 1));
        pred_[y].push_back(static_cast<Symbol>(x + 1));
      }
    }
    if (factor_map_) {
      image_size_ = *std::max_element(factor_map_->begin(), factor_map_->end());
    } else {
      image_size_ = k;
    }
    fibers_.assign(image_size_, {});
    fiber_bits_.assign(image_size_, Bits(k));
    for (std::size_t x = live_.find_first(); x != Bits::npos; x = live_.find_next(x)) {
      Symbol b = label(static_cast<Symbol>(x + 1));
      fibers_[b - 1].push_back(static_cast<Symbol>(x + 1));
      fiber_bits_[b - 1].set(x);
    }
  }

  std::vector<Bits> adj_;
  std::vector<std::size_t> ladder_;
  std::optional<std::vector<Symbol>> factor_map_;
  Bits active_;
  std::size_t limit_ = 0;
  Bits live_;
  std::size_t image_size_ = 0;
  std::vector<std::vector<Symbol>> succ_, pred_;
  std::vector<Bits> succ_bits_;
  std::vector<std::vector<Symbol>> fibers_;
  std::vector<Bits> fiber_bits_;
};

namespace builtin {

/// Block index of x for the partition {1}, {2,3}, {4,5,6}, ... (block n
/// holds n consecutive symbols).
inline Symbol triangular_block(Symbol x) {
  Symbol n = 1;
  while (static_cast<std::size_t>(n) * (n + 1) / 2 < x) ++n;
  return n;
}

inline Symbol block_start(Symbol n) { return n * (n - 1) / 2 + 1; }

inline std::vector<Symbol> triangular_block_map(std::size_t k) {
  std::vector<Symbol> map(k);
  for (std::size_t x = 1; x <= k; ++x) map[x - 1] = triangular_block(static_cast<Symbol>(x));
  return map;
}

inline ShiftSpace::EdgeList full_edges(std::size_t k) {
  ShiftSpace::EdgeList e;
  for (Symbol i = 1; i <= k; ++i)
    for (Symbol j = 1; j <= k; ++j) e.emplace_back(i, j);
  return e;
}

/// 1->1, 1->2, 2->1: the word 22 is forbidden.
inline ShiftSpace::EdgeList golden_mean_edges() { return {{1, 1}, {1, 2}, {2, 1}}; }

/// Graph of the almost-additive counterexample: 1 loops and links both ways
/// to the last symbol of each block {3j-1, 3j, 3j+1}; each block is a full
/// shift on three symbols.
inline ShiftSpace::EdgeList example_dif_edges(std::size_t k) {
  ShiftSpace::EdgeList e{{1, 1}};
  for (Symbol first = 2; first <= k; first += 3) {
    Symbol last = std::min<Symbol>(first + 2, static_cast<Symbol>(k));
    for (Symbol i = first; i <= last; ++i)
      for (Symbol j = first; j <= last; ++j) e.emplace_back(i, j);
    if (first + 2 <= k) {
      e.emplace_back(1, first + 2);
      e.emplace_back(first + 2, 1);
    }
  }
  std::sort(e.begin(), e.end());
  return e;
}

/// Finitely primitive graph with hub 2: 1->2, 2->everything, 3->{1,3},
/// i->2 for i >= 4.
inline ShiftSpace::EdgeList example_e1_edges(std::size_t k) {
  if (k < 2) throw SpecError("example-e1 needs alphabet_size >= 2");
  ShiftSpace::EdgeList e{{1, 2}};
  for (Symbol j = 1; j <= k; ++j) e.emplace_back(2, j);
  if (k >= 3) {
    e.emplace_back(3, 1);
    e.emplace_back(3, 3);
  }
  for (Symbol i = 4; i <= k; ++i) e.emplace_back(i, 2);
  std::sort(e.begin(), e.end());
  return e;
}

/// Blocks F_n of n symbols, each a full shift, joined only through the
/// symbol 1 via the first symbol of every block.
inline ShiftSpace::EdgeList example_nofinite_edges(std::size_t k) {
  ShiftSpace::EdgeList e{{1, 1}};
  for (Symbol n = 2; block_start(n) <= k; ++n) {
    Symbol first = block_start(n);
    Symbol last = std::min<Symbol>(first + n - 1, static_cast<Symbol>(k));
    for (Symbol i = first; i <= last; ++i)
      for (Symbol j = first; j <= last; ++j) e.emplace_back(i, j);
    e.emplace_back(1, first);
    e.emplace_back(first, 1);
  }
  std::sort(e.begin(), e.end());
  return e;
}

inline ShiftSpace full(std::size_t k, std::vector<std::size_t> ladder = {}) {
  return ShiftSpace::create(k, full_edges(k), std::move(ladder));
}

inline ShiftSpace golden_mean() { return ShiftSpace::create(2, golden_mean_edges()); }

/// Named fixtures. `with_block_map` attaches the triangular block map used
/// by the factor-map examples (only example-e1 and example-nofinite).
inline ShiftSpace by_name(std::string_view name, std::size_t k, std::vector<std::size_t> ladder = {},
                          bool with_block_map = false) {
  std::optional<std::vector<Symbol>> fmap;
  if (with_block_map) {
    if (name != "example-e1" && name != "example-nofinite")
      throw SpecError("builtin factor_map only exists for example-e1 and example-nofinite");
    fmap = triangular_block_map(k);
  }
  if (name == "full") return ShiftSpace::create(k, full_edges(k), std::move(ladder), fmap);
  if (name == "golden-mean") {
    if (k != 2) throw SpecError("golden-mean has alphabet_size 2");
    return ShiftSpace::create(2, golden_mean_edges(), std::move(ladder), fmap);
  }
  if (name == "example-e1") return ShiftSpace::create(k, example_e1_edges(k), std::move(ladder), fmap);
  if (name == "example-dif") return ShiftSpace::create(k, example_dif_edges(k), std::move(ladder), fmap);
  if (name == "example-nofinite")
    return ShiftSpace::create(k, example_nofinite_edges(k), std::move(ladder), fmap);
  throw SpecError("unknown builtin shift '" + std::string(name) + "'");
}

}  // namespace builtin
}  // namespace thermoshift
