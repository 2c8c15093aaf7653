#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ymimo/error.hpp"

namespace ymimo {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses "3", "-2", "7/4" or "0.125" exactly.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto integer = [&](std::string_view s) -> BigInt {
    std::string_view digits = s;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
    if (digits.empty()) throw InvalidInput("bad rational '" + std::string(text) + "'");
    for (char c : digits)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidInput("bad rational '" + std::string(text) + "'");
    return BigInt(std::string(s));
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = integer(trim(text.substr(0, slash)));
    const BigInt den = integer(trim(text.substr(slash + 1)));
    if (den == 0) throw InvalidInput("bad rational '" + std::string(text) + "': zero denominator");
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = text.substr(dot + 1);
    const bool negative = !whole.empty() && whole.front() == '-';
    const BigInt int_part = (whole.empty() || whole == "-" || whole == "+") ? BigInt(0) : integer(whole);
    if (frac.empty()) return Rational(int_part);
    const BigInt frac_part = integer(frac);
    if (frac.front() == '-' || frac.front() == '+') throw InvalidInput("bad rational '" + std::string(text) + "'");
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Rational value = Rational(boost::multiprecision::abs(int_part)) + Rational(frac_part, scale);
    return negative ? Rational(-value) : value;
  }
  return Rational(integer(text));
}

inline std::string format_rational(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Unordered pair {first, second}, first < second, 0-based user indices.
struct UserPair {
  int first = 0;
  int second = 1;
  auto operator<=>(const UserPair&) const = default;
};

// All pairs in lexicographic order (1,2), (1,3), ..., (K-1,K).
inline std::vector<UserPair> all_pairs(int users) {
  std::vector<UserPair> pairs;
  for (int j = 0; j < users; ++j)
    for (int k = j + 1; k < users; ++k) pairs.push_back({j, k});
  return pairs;
}

inline std::string pair_label(int from, int to) {
  return std::to_string(from + 1) + "_" + std::to_string(to + 1);
}

// d_jk for every ordered pair j != k, stored in the order
// d_12, ..., d_1K, d_21, d_23, ..., d_K(K-1). User indices are 0-based.
class DofVector {
 public:
  explicit DofVector(int users = 3) : users_(users) {
    if (users < 2) throw InvalidInput("DofVector: need at least 2 users");
    entries_.assign(static_cast<std::size_t>(users) * (users - 1), Rational(0));
  }

  static DofVector uniform(int users, const Rational& value) {
    DofVector d(users);
    for (auto& e : d.entries_) e = value;
    return d;
  }

  int users() const noexcept { return users_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::size_t index(int from, int to) const {
    if (from < 0 || to < 0 || from >= users_ || to >= users_ || from == to) {
      throw InvalidInput("DofVector: invalid ordered pair (" + std::to_string(from + 1) + "," +
                         std::to_string(to + 1) + ")");
    }
    return static_cast<std::size_t>(from) * (users_ - 1) + (to < from ? to : to - 1);
  }

  // Inverse of index().
  std::pair<int, int> pair_at(std::size_t i) const {
    const int from = static_cast<int>(i / (users_ - 1));
    int to = static_cast<int>(i % (users_ - 1));
    if (to >= from) ++to;
    return {from, to};
  }

  const Rational& at(int from, int to) const { return entries_[index(from, to)]; }

  void set(int from, int to, const Rational& value) {
    if (value < 0) throw InvalidInput("DofVector: entries must be nonnegative");
    entries_[index(from, to)] = value;
  }

  const std::vector<Rational>& entries() const noexcept { return entries_; }
  const Rational& operator[](std::size_t i) const { return entries_[i]; }

  DofVector scaled(const Rational& c) const {
    if (c < 0) throw InvalidInput("DofVector: negative scale");
    DofVector out = *this;
    for (auto& e : out.entries_) e *= c;
    return out;
  }

  // Applies a user relabeling: out(perm[j], perm[k]) = in(j, k).
  DofVector relabeled(const std::vector<int>& perm) const {
    DofVector out(users_);
    for (int j = 0; j < users_; ++j)
      for (int k = 0; k < users_; ++k)
        if (j != k) out.entries_[out.index(perm[j], perm[k])] = at(j, k);
    return out;
  }

  Rational total() const {
    Rational sum = 0;
    for (const auto& e : entries_) sum += e;
    return sum;
  }

  bool operator==(const DofVector&) const = default;

  // "1_2=7,2_1=1/2" listing nonzero entries only, 1-based labels.
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i] == 0) continue;
      const auto [j, k] = pair_at(i);
      if (!out.empty()) out += ",";
      out += pair_label(j, k) + "=" + format_rational(entries_[i]);
    }
    return out.empty() ? "0" : out;
  }

 private:
  int users_;
  std::vector<Rational> entries_;
};

namespace detail {

inline int parse_user_label(std::string_view s, int users) {
  if (s.empty()) throw InvalidInput("empty user label");
  int value = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidInput("bad user label '" + std::string(s) + "'");
    value = value * 10 + (c - '0');
    if (value > 1000000) throw InvalidInput("user label out of range");
  }
  if (value < 1 || value > users) {
    throw InvalidInput("user " + std::string(s) + " outside 1.." + std::to_string(users));
  }
  return value - 1;
}

}  // namespace detail

// Parses a comma-separated assignment list into a DofVector of `users` users.
// Pair keys: "12" (single-digit labels), "1_2", "1-2" or "1:2"; "all" sets every
// entry. Later assignments override earlier ones; "0" or "" gives the zero vector.
inline DofVector parse_dof(std::string_view text, int users) {
  DofVector d(users);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(pos, end - pos);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    pos = end + 1;
    if (item.empty() || item == "0") continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InvalidInput("dof item '" + std::string(item) + "' lacks '='");
    std::string_view key = item.substr(0, eq);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
    const Rational value = parse_rational(item.substr(eq + 1));
    if (value < 0) throw InvalidInput("dof entries must be nonnegative");
    if (key == "all") {
      d = DofVector::uniform(users, value);
      continue;
    }
    int from = 0, to = 0;
    const auto sep = key.find_first_of("_-:");
    if (sep != std::string_view::npos) {
      from = detail::parse_user_label(key.substr(0, sep), users);
      to = detail::parse_user_label(key.substr(sep + 1), users);
    } else if (key.size() == 2) {
      from = detail::parse_user_label(key.substr(0, 1), users);
      to = detail::parse_user_label(key.substr(1, 1), users);
    } else {
      throw InvalidInput("dof key '" + std::string(key) + "' is ambiguous; use j_k");
    }
    if (from == to) throw InvalidInput("dof key '" + std::string(key) + "' names a self-message");
    d.set(from, to, value);
  }
  return d;
}

}  // namespace ymimo
