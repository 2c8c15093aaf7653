#pragma once

// Signal-space alignment layout for the uplink.
//
// Each unordered pair {j,k} owns a contiguous slot of length
// l_jk = max(T d_jk, T d_kj) in the relay word of length T*N. User j writes
// v_jk zero-padded to l_jk into that slot and leaves every other slot empty,
// so at the relay the opposite-direction streams of a pair land on top of
// each other. Slots follow lexicographic pair order; the unused tail of
// length l_0 comes last.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ymimo/dof_vector.hpp"
#include "ymimo/error.hpp"
#include "ymimo/linalg.hpp"

namespace ymimo {

inline constexpr int kStreamPlanSchemaVersion = 1;

// Thrown when sum over pairs of max(d_jk, d_kj) exceeds N.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, Rational excess)
      : Error(what), excess_(std::move(excess)) {}

  // sum_{pairs} max(d_jk, d_kj) - N, in DoF units (> 0).
  const Rational& excess() const noexcept { return excess_; }

 private:
  Rational excess_;
};

struct PairSlot {
  UserPair pair;
  std::int64_t length = 0;  // l_jk, in symbols per T channel uses
  std::int64_t offset = 0;  // start index in the relay word
};

struct StreamPlan {
  int users = 0;
  int relay_antennas = 0;       // N
  std::int64_t extension = 1;   // T
  std::vector<PairSlot> slots;  // lexicographic pair order
  std::int64_t padding = 0;     // l_0
  // T d_jk for every ordered pair, indexed like DofVector.
  std::vector<std::int64_t> stream_lengths;

  std::int64_t word_length() const { return extension * relay_antennas; }

  std::size_t ordered_index(int from, int to) const {
    return static_cast<std::size_t>(from) * (users - 1) + (to < from ? to : to - 1);
  }

  std::int64_t stream_length(int from, int to) const { return stream_lengths.at(ordered_index(from, to)); }

  const PairSlot& slot(int a, int b) const {
    const UserPair key{std::min(a, b), std::max(a, b)};
    for (const auto& s : slots)
      if (s.pair == key) return s;
    throw InvalidInput("StreamPlan: no slot for pair (" + std::to_string(a + 1) + "," +
                       std::to_string(b + 1) + ")");
  }
};

namespace detail {

inline std::int64_t to_int64(const BigInt& v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw TooLarge(std::string(what) + ": value does not fit in 64 bits");
  }
  return v.convert_to<std::int64_t>();
}

inline std::int64_t scaled_integer(const Rational& d, std::int64_t t, int from, int to) {
  const Rational v = d * t;
  if (boost::multiprecision::denominator(v) != 1) {
    throw NonIntegral("T*d_" + pair_label(from, to) + " = " + format_rational(v) + " is not an integer");
  }
  return to_int64(boost::multiprecision::numerator(v), "stream length");
}

}  // namespace detail

// l_jk = max(T d_jk, T d_kj) for every pair, lexicographic order.
inline std::vector<std::int64_t> pair_lengths(const DofVector& d, std::int64_t extension) {
  if (extension < 1) throw InvalidInput("pair_lengths: extension must be >= 1");
  std::vector<std::int64_t> out;
  for (const auto& p : all_pairs(d.users())) {
    const auto forward = detail::scaled_integer(d.at(p.first, p.second), extension, p.first, p.second);
    const auto backward = detail::scaled_integer(d.at(p.second, p.first), extension, p.second, p.first);
    out.push_back(std::max(forward, backward));
  }
  return out;
}

// Least T making every T d_jk an integer.
inline std::int64_t minimal_extension(const DofVector& d) {
  BigInt t = 1;
  for (const auto& e : d.entries()) {
    const BigInt den = boost::multiprecision::denominator(e);
    t = boost::multiprecision::lcm(t, den);
  }
  return detail::to_int64(t, "minimal_extension");
}

inline Rational sum_of_pair_maxima(const DofVector& d) {
  Rational sum = 0;
  for (const auto& p : all_pairs(d.users())) sum += std::max(d.at(p.first, p.second), d.at(p.second, p.first));
  return sum;
}

inline StreamPlan build_stream_plan(const DofVector& d, int relay_antennas) {
  if (relay_antennas < 1) throw InvalidInput("build_stream_plan: N must be >= 1");
  StreamPlan plan;
  plan.users = d.users();
  plan.relay_antennas = relay_antennas;
  plan.extension = minimal_extension(d);
  const auto lengths = pair_lengths(d, plan.extension);
  const std::int64_t total = std::accumulate(lengths.begin(), lengths.end(), std::int64_t{0});
  if (total > plan.word_length()) {
    const Rational excess = sum_of_pair_maxima(d) - relay_antennas;
    throw Infeasible("build_stream_plan: sum of pair maxima " + format_rational(sum_of_pair_maxima(d)) +
                         " exceeds N=" + std::to_string(relay_antennas) + " by " + format_rational(excess),
                     excess);
  }
  std::int64_t offset = 0;
  const auto pairs = all_pairs(d.users());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    plan.slots.push_back({pairs[i], lengths[i], offset});
    offset += lengths[i];
  }
  plan.padding = plan.word_length() - total;
  plan.stream_lengths.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto [from, to] = d.pair_at(i);
    plan.stream_lengths[i] = detail::scaled_integer(d[i], plan.extension, from, to);
  }
  return plan;
}

// Codeword symbols v_jk, one vector per ordered pair (DofVector indexing).
class StreamSymbols {
 public:
  explicit StreamSymbols(int users = 3)
      : users_(users), streams_(static_cast<std::size_t>(users) * (users - 1)) {}

  int users() const noexcept { return users_; }

  const ComplexVector& get(int from, int to) const { return streams_.at(index(from, to)); }
  void set(int from, int to, ComplexVector v) { streams_.at(index(from, to)) = std::move(v); }

  // All-zero symbols with the stream lengths of `plan`.
  static StreamSymbols zeros(const StreamPlan& plan) {
    StreamSymbols s(plan.users);
    for (int j = 0; j < plan.users; ++j)
      for (int k = 0; k < plan.users; ++k)
        if (j != k) s.set(j, k, ComplexVector::Zero(plan.stream_length(j, k)));
    return s;
  }

 private:
  std::size_t index(int from, int to) const {
    if (from < 0 || to < 0 || from >= users_ || to >= users_ || from == to) {
      throw InvalidInput("StreamSymbols: invalid ordered pair");
    }
    return static_cast<std::size_t>(from) * (users_ - 1) + (to < from ? to : to - 1);
  }

  int users_;
  std::vector<ComplexVector> streams_;
};

// u_j: user j's length T*N uplink word.
inline ComplexVector assemble_uplink_symbol(int user, const StreamSymbols& symbols, const StreamPlan& plan) {
  if (user < 0 || user >= plan.users) throw InvalidInput("assemble_uplink_symbol: user out of range");
  if (symbols.users() != plan.users) throw DimensionError("assemble_uplink_symbol: user count mismatch");
  ComplexVector word = ComplexVector::Zero(plan.word_length());
  for (const auto& slot : plan.slots) {
    if (slot.pair.first != user && slot.pair.second != user) continue;
    const int partner = slot.pair.first == user ? slot.pair.second : slot.pair.first;
    const ComplexVector& v = symbols.get(user, partner);
    if (v.size() != plan.stream_length(user, partner)) {
      throw DimensionError("assemble_uplink_symbol: v_" + pair_label(user, partner) + " has length " +
                           std::to_string(v.size()) + ", plan expects " +
                           std::to_string(plan.stream_length(user, partner)));
    }
    word.segment(slot.offset, v.size()) = v;
  }
  return word;
}

inline ComplexVector extract_pair_slot(const ComplexVector& word, UserPair pair, const StreamPlan& plan) {
  if (word.size() != plan.word_length()) {
    throw DimensionError("extract_pair_slot: word length " + std::to_string(word.size()) + ", plan expects " +
                         std::to_string(plan.word_length()));
  }
  const auto& slot = plan.slot(pair.first, pair.second);
  return word.segment(slot.offset, slot.length);
}

inline nlohmann::ordered_json to_json(const StreamPlan& plan) {
  nlohmann::ordered_json j;
  j["schema"] = "ymimo.stream_plan";
  j["schema_version"] = kStreamPlanSchemaVersion;
  j["users"] = plan.users;
  j["relay_antennas"] = plan.relay_antennas;
  j["extension"] = plan.extension;
  j["word_length"] = plan.word_length();
  auto slots = nlohmann::ordered_json::array();
  for (const auto& s : plan.slots) {
    nlohmann::ordered_json e;
    e["pair"] = {s.pair.first + 1, s.pair.second + 1};
    e["offset"] = s.offset;
    e["length"] = s.length;
    e["forward_length"] = plan.stream_length(s.pair.first, s.pair.second);
    e["backward_length"] = plan.stream_length(s.pair.second, s.pair.first);
    slots.push_back(e);
  }
  j["slots"] = slots;
  j["padding"] = plan.padding;
  return j;
}

}  // namespace ymimo
