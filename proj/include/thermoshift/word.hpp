#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace thermoshift {

/// Symbols are 1-based; 0 never names a symbol.
using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;
using WordView = std::span<const Symbol>;

inline constexpr std::string_view kLibraryVersion = "0.1.0";

inline Word concat(WordView a, WordView b) {
  Word out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Word concat(WordView a, WordView b, WordView c) {
  Word out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

inline bool has_prefix(WordView w, WordView prefix) {
  if (prefix.size() > w.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (w[i] != prefix[i]) return false;
  return true;
}

/// Compact text form: "121" when every symbol is a single digit, otherwise
/// dot separated ("3.12.1"). The empty word prints as "".
inline std::string to_string(WordView w) {
  bool small = true;
  for (Symbol s : w) small = small && s <= 9;
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!small && i > 0) out.push_back('.');
    out += std::to_string(w[i]);
  }
  return out;
}

/// Inverse of to_string. Accepts either digit strings ("212") or dot
/// separated symbols ("10.2.13").
inline Word parse_word(std::string_view text) {
  Word out;
  if (text.empty()) return out;
  auto bad = [&] {
    return std::invalid_argument("malformed word '" + std::string(text) + "'");
  };
  if (text.find('.') == std::string_view::npos) {
    for (char c : text) {
      if (c < '1' || c > '9') throw bad();
      out.push_back(static_cast<Symbol>(c - '0'));
    }
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('.', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view part = text.substr(start, end - start);
    if (part.empty()) throw bad();
    std::uint64_t value = 0;
    for (char c : part) {
      if (c < '0' || c > '9') throw bad();
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      if (value > 0xffffffffu) throw bad();
    }
    if (value == 0) throw bad();
    out.push_back(static_cast<Symbol>(value));
    start = end + 1;
  }
  return out;
}

}  // namespace thermoshift
