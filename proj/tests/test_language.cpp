#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "thermoshift/thermoshift.hpp"

using namespace thermoshift;

namespace {

Word W(const char* s) { return parse_word(s); }

std::vector<Word> all_candidates(std::size_t k, std::size_t n) {
  std::vector<Word> out{Word{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (Symbol b = 1; b <= k; ++b) {
        Word x = w;
        x.push_back(b);
        next.push_back(std::move(x));
      }
    out.swap(next);
  }
  return out;
}

// Image words of all cover words of length n, deduplicated.
std::set<Word> image_language(const ShiftSpace& y, std::size_t n) {
  std::set<Word> out;
  for (const auto& u : enumerate_words(y.cover(), n)) {
    Word v;
    for (Symbol x : u) v.push_back(y.label(x));
    out.insert(v);
  }
  return out;
}

}  // namespace

TEST(Words, ParseAndPrint) {
  EXPECT_EQ(W("121"), (Word{1, 2, 1}));
  EXPECT_EQ(W("12.3"), (Word{12, 3}));
  EXPECT_EQ(to_string(Word{12, 3}), "12.3");
  EXPECT_EQ(to_string(Word{1, 2}), "12");
  EXPECT_TRUE(W("").empty());
  EXPECT_THROW(parse_word("1a"), std::invalid_argument);
}

TEST(Enumerate, FullShiftCounts) {
  for (std::size_t k = 1; k <= 4; ++k) {
    auto s = builtin::full(k);
    double expected = 1;
    for (std::size_t n = 1; n <= 12; ++n) {
      expected *= static_cast<double>(k);
      EXPECT_EQ(static_cast<double>(count_words(s, n)), expected) << "k=" << k << " n=" << n;
    }
  }
  EXPECT_EQ(enumerate_words(builtin::full(2), 3).size(), 8u);
}

TEST(Enumerate, EmptyWord) {
  auto w = enumerate_words(builtin::golden_mean(), 0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_TRUE(w[0].empty());
}

TEST(Enumerate, GoldenMeanFibonacci) {
  auto s = builtin::golden_mean();
  EXPECT_EQ(enumerate_words(s, 4).size(), 8u);
  std::uint64_t a = count_words(s, 1), b = count_words(s, 2);
  for (std::size_t n = 3; n <= 25; ++n) {
    const std::uint64_t c = count_words(s, n);
    EXPECT_EQ(c, a + b) << n;
    a = b;
    b = c;
  }
}

TEST(Enumerate, MatchesBruteForceDfs) {
  auto s = builtin::golden_mean();
  oracle::Matrix A{{1, 1}, {1, 0}};
  for (std::size_t n = 1; n <= 8; ++n) {
    auto ours = enumerate_words(s, n);
    auto ref = oracle::words(A, n);
    ASSERT_EQ(ours.size(), ref.size());
    for (std::size_t i = 0; i < ours.size(); ++i) EXPECT_EQ(ours[i], Word(ref[i].begin(), ref[i].end()));
  }
}

TEST(Enumerate, ExactlyTheAllowableWords) {
  std::vector<ShiftSpace> spaces{builtin::golden_mean(), builtin::by_name("example-e1", 5),
                                 builtin::by_name("example-e1", 6, {}, true),
                                 ShiftSpace::create(3, builtin::full_edges(3), {}, std::vector<Symbol>{1, 1, 2})};
  for (const auto& s : spaces)
    for (std::size_t n = 1; n <= 4; ++n) {
      auto list = enumerate_words(s, n);
      EXPECT_TRUE(std::is_sorted(list.begin(), list.end()));
      EXPECT_EQ(std::set<Word>(list.begin(), list.end()).size(), list.size());
      std::vector<Word> filtered;
      for (const auto& w : all_candidates(s.alphabet_size(), n))
        if (is_allowable(s, w)) filtered.push_back(w);
      EXPECT_EQ(list, filtered);
    }
}

TEST(Enumerate, SoficIsImageOfCover) {
  ShiftSpace::EdgeList e{{1, 1}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 1}, {3, 4}, {4, 1}, {4, 2}};
  auto y = ShiftSpace::create(4, e, {}, std::vector<Symbol>{1, 1, 2, 2});
  for (std::size_t n = 1; n <= 6; ++n) {
    auto img = image_language(y, n);
    auto list = enumerate_words(y, n);
    EXPECT_EQ(std::set<Word>(list.begin(), list.end()), img) << n;
  }
  auto amalg = ShiftSpace::create(3, builtin::full_edges(3), {}, std::vector<Symbol>{1, 1, 2});
  EXPECT_EQ(enumerate_words(amalg, 2).size(), 4u);
}

TEST(Enumerate, LevelRestriction) {
  auto s = builtin::full(8, {2, 4});
  EXPECT_EQ(enumerate_words(s, 2, 0).size(), 4u);
  EXPECT_EQ(enumerate_words(s, 2, 1).size(), 16u);
  EXPECT_THROW(enumerate_words(s, 2, 5), SpecError);
}

TEST(Enumerate, BudgetExceeded) { EXPECT_THROW(enumerate_words(builtin::full(4), 10, std::nullopt, 1000), BudgetExceeded); }

TEST(Allowable, GoldenMean) {
  auto s = builtin::golden_mean();
  EXPECT_FALSE(is_allowable(s, W("22")));
  EXPECT_TRUE(is_allowable(s, W("212")));
  EXPECT_TRUE(is_allowable(s, W("")));
  EXPECT_FALSE(is_allowable(s, W("3")));
}

TEST(Connector, Examples) {
  auto g = builtin::golden_mean();
  EXPECT_EQ(find_connector(g, W("2"), W("2"), 2), W("1"));
  EXPECT_EQ(find_connector(g, W("1"), W("1"), 2), W(""));
  auto f = builtin::full(3);
  EXPECT_EQ(find_connector(f, W("3"), W("21"), 0), W(""));
  EXPECT_THROW(find_connector(g, W("22"), W("1"), 2), NotAllowable);
}

TEST(Connector, NoFiniteBlocksGoThroughOne) {
  // Blocks {1}, {2,3}, {4,5,6}: from inside one block to inside another the
  // only route is first(F_s) 1 first(F_t).
  auto s = builtin::by_name("example-nofinite", 6);
  auto w = find_connector(s, W("3"), W("5"), 4);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(*w, W("214"));
  EXPECT_FALSE(find_connector(s, W("3"), W("5"), 2).has_value());
}

TEST(Connector, ResultIsAllowable) {
  auto s = builtin::by_name("example-e1", 6);
  std::vector<Word> words;
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto& w : enumerate_words(s, n)) words.push_back(w);
  for (const auto& u : words)
    for (const auto& v : words)
      if (auto w = find_connector(s, u, v, 3)) EXPECT_TRUE(is_allowable(s, concat(u, *w, v)));
}

TEST(Certificate, FullShift) {
  auto r = check_finite_irreducibility(builtin::full(3), 3, 2);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.certificate->p, 0u);
  EXPECT_EQ(r.certificate->W, std::vector<Word>{Word{}});
  EXPECT_TRUE(r.certificate->strong);
  EXPECT_EQ(r.certificate->scale, "at truncation scale");
}

TEST(Certificate, GoldenMean) {
  auto r = check_finite_irreducibility(builtin::golden_mean(), 4, 2);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.certificate->p, 1u);
  EXPECT_EQ(r.certificate->W, (std::vector<Word>{W(""), W("1")}));
  EXPECT_TRUE(r.certificate->strong);
  EXPECT_EQ(r.certificate->strong_W, (std::vector<Word>{W("1")}));
}

TEST(Certificate, ExampleE1ConnectorsRunThroughTheHub) {
  // every symbol reaches every other through 2, with 3 -> 1 -> 2 the only detour
  auto r = check_finite_irreducibility(builtin::by_name("example-e1", 10), 3, 3);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.certificate->p, 2u);
  EXPECT_EQ(r.certificate->W, (std::vector<Word>{Word{}, W("1"), W("2"), W("12")}));
}

TEST(Certificate, ImpliesConnectorsForEveryPair) {
  for (const auto& s : {builtin::golden_mean(), builtin::by_name("example-e1", 6), builtin::by_name("example-e1", 6, {}, true)}) {
    auto r = check_finite_irreducibility(s, 3, 3);
    ASSERT_TRUE(r.ok());
    std::vector<Word> words;
    for (std::size_t n = 1; n <= 3; ++n)
      for (auto& w : enumerate_words(s, n)) words.push_back(w);
    for (const auto& u : words)
      for (const auto& v : words) {
        auto w = find_connector(s, u, v, r.certificate->p);
        ASSERT_TRUE(w.has_value()) << to_string(u) << " " << to_string(v);
        EXPECT_TRUE(is_allowable(s, concat(u, *w, v)));
      }
  }
}

TEST(Certificate, FailureReportsPair) {
  // Two disjoint full shifts: no connector between the blocks.
  auto s = ShiftSpace::create(4, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 3}, {4, 4}});
  auto r = check_finite_irreducibility(s, 2, 3);
  EXPECT_FALSE(r.ok());
  ASSERT_TRUE(r.uncovered.has_value());
  EXPECT_FALSE(find_connector(s, r.uncovered->first, r.uncovered->second, 3).has_value());
}

TEST(Bip, Examples) {
  auto full = check_bip(builtin::full(4));
  EXPECT_TRUE(full.holds);
  EXPECT_EQ(full.witnesses, std::vector<Symbol>{1});
  auto two = check_bip(ShiftSpace::create(4, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 3}, {4, 4}}));
  EXPECT_TRUE(two.holds);
  EXPECT_EQ(two.witnesses.size(), 2u);
}

TEST(Periodic, Examples) {
  EXPECT_EQ(periodic_words(builtin::full(2), 2, 1), (std::vector<Word>{W("11"), W("12")}));
  EXPECT_EQ(periodic_words(builtin::golden_mean(), 3, 1), (std::vector<Word>{W("111"), W("112"), W("121")}));
  EXPECT_EQ(periodic_words(builtin::golden_mean(), 1, 2), std::vector<Word>{});
  EXPECT_EQ(periodic_words(builtin::golden_mean(), 1, 1), std::vector<Word>{W("1")});
}

TEST(Periodic, BruteForceCyclicCheck) {
  auto s = builtin::by_name("example-e1", 5);
  for (std::size_t n = 1; n <= 5; ++n)
    for (Symbol a = 1; a <= 5; ++a) {
      std::vector<Word> ref;
      for (const auto& w : all_candidates(5, n))
        if (w[0] == a && is_allowable(s, concat(w, w))) ref.push_back(w);
      EXPECT_EQ(periodic_words(s, n, a), ref);
    }
}

TEST(ShiftSpace, Validation) {
  EXPECT_THROW(ShiftSpace::create(2, {{1, 2}}), SpecError);        // symbol 1 has no in-edge
  EXPECT_THROW(ShiftSpace::create(2, {{1, 3}, {3, 1}}), SpecError);  // out of range
  EXPECT_THROW(builtin::full(4, {3, 2}), SpecError);                 // ladder not increasing
  EXPECT_THROW(builtin::full(4, {5}), SpecError);
  EXPECT_THROW(ShiftSpace::create(3, builtin::full_edges(3), {}, std::vector<Symbol>{1, 3, 3}), SpecError);  // empty fiber
}

TEST(ShiftSpace, DefaultLadderDoubles) {
  EXPECT_EQ(builtin::full(10).effective_ladder(), (std::vector<std::size_t>{2, 4, 8, 10}));
}
