#pragma once

// One transmission round of the diagonalization strategy.
//
// Uplink: user j sends x_j = H_j^R u_j per channel use, so the relay sees
// y_r = sum_j alpha_j u_j + z_r. With the alignment layout every pair slot
// of y_r carries alpha_j u_jk + alpha_k u_kj (a network-coded word w).
// Downlink: the relay forwards x_r = sqrt(P) w / ||w||; user k post-codes
// with D_k^L to get gamma beta_k w + D_k^L z_k, and strips its own
// contribution from each of its pair slots.
//
// Uplink words are scaled per channel use so that ||u_j||^2 = P, i.e. the
// assembled codeword block is normalized just like the relay word. Because
// ||H^R||_2 <= ||H^R||_F = 1 this keeps every ||x_j||^2 <= P. Receivers are
// given the amplitude, alpha, beta and gamma scalars as side information.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ymimo/alignment.hpp"
#include "ymimo/channel.hpp"
#include "ymimo/error.hpp"
#include "ymimo/linalg.hpp"
#include "ymimo/rng.hpp"

namespace ymimo {

inline constexpr int kRoundResultSchemaVersion = 1;

enum class RelayMode {
  kGenie,  // relay recovers w exactly (ideal lattice decoding)
  kRaw,    // relay forwards its noisy observation
};

inline const char* to_string(RelayMode mode) { return mode == RelayMode::kGenie ? "genie" : "raw"; }

inline RelayMode parse_relay_mode(std::string_view s) {
  if (s == "genie") return RelayMode::kGenie;
  if (s == "raw") return RelayMode::kRaw;
  throw InvalidInput("unknown relay mode '" + std::string(s) + "' (expected genie|raw)");
}

struct Precoders {
  std::vector<NormalizedRightMppi> uplink;
  std::vector<NormalizedLeftMppi> downlink;
};

inline Precoders make_precoders(const ChannelSet& ch, PowerScaling scaling = PowerScaling::kUnitFrobenius) {
  Precoders p;
  for (const auto& h : ch.uplink) p.uplink.push_back(normalized_right_mppi(h, scaling));
  for (const auto& d : ch.downlink) p.downlink.push_back(normalized_left_mppi(d, scaling));
  return p;
}

inline ComplexVector uplink_precode(const ComplexVector& u, const NormalizedRightMppi& hr) {
  if (u.size() != hr.matrix.cols()) {
    throw DimensionError("uplink_precode: symbol length " + std::to_string(u.size()) + ", precoder " +
                         detail::shape(hr.matrix));
  }
  return hr.matrix * u;
}

namespace detail {

inline Eigen::Index channel_uses(Eigen::Index word_length, Eigen::Index n) {
  if (n < 1 || word_length % n != 0) {
    throw DimensionError("word length " + std::to_string(word_length) + " is not a multiple of N=" +
                         std::to_string(n));
  }
  return word_length / n;
}

}  // namespace detail

// Relay observation for words of length T*N (T channel uses, N per use).
inline ComplexVector relay_observe(const SystemConfig& cfg, const ChannelSet& ch, const Precoders& pre,
                                   std::span<const ComplexVector> words,
                                   const std::optional<ComplexVector>& noise = std::nullopt) {
  const Eigen::Index n = cfg.relay_antennas;
  if (words.size() != ch.uplink.size() || pre.uplink.size() != ch.uplink.size()) {
    throw DimensionError("relay_observe: need one word and one precoder per user");
  }
  if (words.empty()) throw DimensionError("relay_observe: no users");
  const Eigen::Index len = words.front().size();
  const Eigen::Index uses = detail::channel_uses(len, n);
  for (const auto& w : words)
    if (w.size() != len) throw DimensionError("relay_observe: words differ in length");
  if (noise && noise->size() != len) throw DimensionError("relay_observe: noise length mismatch");

  ComplexVector y(len);
  std::vector<ComplexVector> x(words.size());
  for (Eigen::Index t = 0; t < uses; ++t) {
    for (std::size_t j = 0; j < words.size(); ++j) x[j] = uplink_precode(words[j].segment(t * n, n), pre.uplink[j]);
    std::optional<ComplexVector> z;
    if (noise) z = noise->segment(t * n, n);
    y.segment(t * n, n) = uplink_propagate(ch, x, z);
  }
  return y;
}

// w-hat: genie returns the true word; raw forwards y_r with the padding tail zeroed.
inline ComplexVector relay_decode(const ComplexVector& y_r, const StreamPlan& plan, RelayMode mode,
                                  const std::optional<ComplexVector>& truth = std::nullopt) {
  if (y_r.size() != plan.word_length()) throw DimensionError("relay_decode: observation length mismatch");
  if (mode == RelayMode::kGenie) {
    if (!truth) throw ModeUnavailable("relay_decode: genie mode needs the true network-coded word");
    if (truth->size() != plan.word_length()) throw DimensionError("relay_decode: truth length mismatch");
    return *truth;
  }
  ComplexVector w = y_r;
  w.tail(plan.padding).setZero();
  return w;
}

struct RelayTransmit {
  ComplexVector x_r;
  double gamma = 0.0;      // sqrt(P) / ||w-hat||
  bool zero_word = false;  // ||w-hat|| == 0; x_r is zero and gamma is 0
};

inline RelayTransmit relay_transmit(const ComplexVector& w_hat, double power) {
  const double norm = w_hat.norm();
  if (norm == 0.0) return {ComplexVector::Zero(w_hat.size()), 0.0, true};
  const double gamma = std::sqrt(power) / norm;
  return {gamma * w_hat, gamma, false};
}

inline ComplexVector user_postcode(const ComplexVector& y_k, const NormalizedLeftMppi& dl) {
  if (y_k.size() != dl.matrix.cols()) {
    throw DimensionError("user_postcode: received length " + std::to_string(y_k.size()) + ", post-coder " +
                         detail::shape(dl.matrix));
  }
  return dl.matrix * y_k;
}

// Per-round scalars the receivers are assumed to know.
struct RoundScalars {
  std::vector<double> alphas;                   // alpha_j, per user
  std::vector<std::vector<double>> amplitudes;  // uplink word scale, [user][channel use]
  std::vector<double> gammas;                   // relay scale per channel use, 0 for a zero word
};

struct StreamEstimate {
  int from = 0;
  ComplexVector symbols;
};

// Estimates v_jk for every j != k from user k's post-coded word.
inline std::vector<StreamEstimate> user_recover(const ComplexVector& filtered, int user, const StreamSymbols& own,
                                                const StreamPlan& plan, const RoundScalars& scalars, double beta) {
  const Eigen::Index n = plan.relay_antennas;
  if (filtered.size() != plan.word_length()) throw DimensionError("user_recover: filtered length mismatch");
  if (user < 0 || user >= plan.users) throw InvalidInput("user_recover: user out of range");
  const auto uses = static_cast<std::size_t>(plan.extension);
  if (scalars.alphas.size() != static_cast<std::size_t>(plan.users) || scalars.gammas.size() != uses ||
      scalars.amplitudes.size() != static_cast<std::size_t>(plan.users)) {
    throw DimensionError("user_recover: scalar side information does not match plan");
  }
  for (const auto& a : scalars.amplitudes)
    if (a.size() != uses) throw DimensionError("user_recover: amplitude count does not match plan");

  std::vector<StreamEstimate> out;
  for (int j = 0; j < plan.users; ++j) {
    if (j == user) continue;
    const PairSlot& slot = plan.slot(j, user);
    const std::int64_t len = plan.stream_length(j, user);
    const ComplexVector& mine = own.get(user, j);
    if (mine.size() != plan.stream_length(user, j)) throw DimensionError("user_recover: own symbol length mismatch");
    ComplexVector est(len);
    for (std::int64_t i = 0; i < len; ++i) {
      const std::int64_t p = slot.offset + i;
      const auto t = static_cast<std::size_t>(p / n);
      const double gamma = scalars.gammas[t];
      const double partner_gain = scalars.alphas[j] * scalars.amplitudes[j][t];
      const double gain = (gamma == 0.0 ? 1.0 : gamma) * beta * partner_gain;
      if (std::abs(gain) < 1e-300) {
        throw ScalarUnderflow("user_recover: effective gain of stream " + pair_label(j, user) + " underflows");
      }
      // A zero relay word carries w = 0 exactly.
      const Complex slot_value = gamma == 0.0 ? Complex(0.0) : filtered(p) / (gamma * beta);
      const Complex self = i < mine.size() ? scalars.alphas[user] * scalars.amplitudes[user][t] * mine(i) : Complex(0.0);
      est(i) = (slot_value - self) / partner_gain;
    }
    out.push_back({j, std::move(est)});
  }
  return out;
}

struct StreamSnr {
  int from = 0;
  int to = 0;
  std::vector<double> uplink;    // per slot component
  std::vector<double> downlink;  // per slot component, measured at `to`
  double rate = 0.0;             // bits per channel use
};

struct EffectiveSnr {
  std::vector<StreamSnr> streams;  // active streams, DofVector order
  double sum_rate = 0.0;
};

namespace detail {

// Number of codeword entries user j places in each channel use.
inline std::vector<std::vector<std::int64_t>> active_counts(const StreamPlan& plan) {
  const std::int64_t n = plan.relay_antennas;
  std::vector<std::vector<std::int64_t>> counts(plan.users, std::vector<std::int64_t>(plan.extension, 0));
  for (const auto& slot : plan.slots) {
    for (int side = 0; side < 2; ++side) {
      const int from = side == 0 ? slot.pair.first : slot.pair.second;
      const int to = side == 0 ? slot.pair.second : slot.pair.first;
      for (std::int64_t i = 0; i < plan.stream_length(from, to); ++i) ++counts[from][(slot.offset + i) / n];
    }
  }
  return counts;
}

}  // namespace detail

// Analytic per-component SNRs of every active stream.
//
// With ||u_j||^2 = P per use spread over n_j active entries, E|u_j,p|^2 = P/n_j.
// Uplink SNR of entry p for sender j: alpha_j^2 P / (n_j sigma^2).
// Downlink SNR of entry p at user k, with gamma_t^2 = P / E||w-hat_t||^2:
//   gamma_t^2 beta_k^2 E|w_p|^2 / (sigma^2 ||row_p(D_k^L)||^2).
// In raw mode w-hat also carries the relay noise on non-padding entries.
inline EffectiveSnr effective_snr(const SystemConfig& cfg, const Precoders& pre, const StreamPlan& plan,
                                  RelayMode mode) {
  const std::int64_t n = plan.relay_antennas;
  const double p_lin = cfg.power;
  const double sigma2 = cfg.noise_variance;
  const auto counts = detail::active_counts(plan);

  // Expected per-user power on each word entry.
  std::vector<std::vector<double>> entry_power(plan.users, std::vector<double>(plan.word_length(), 0.0));
  for (const auto& slot : plan.slots) {
    for (int side = 0; side < 2; ++side) {
      const int from = side == 0 ? slot.pair.first : slot.pair.second;
      const int to = side == 0 ? slot.pair.second : slot.pair.first;
      for (std::int64_t i = 0; i < plan.stream_length(from, to); ++i) {
        const std::int64_t p = slot.offset + i;
        entry_power[from][p] = p_lin / static_cast<double>(counts[from][p / n]);
      }
    }
  }
  std::vector<double> w_power(plan.word_length(), 0.0);
  for (int j = 0; j < plan.users; ++j) {
    const double a2 = pre.uplink[j].alpha * pre.uplink[j].alpha;
    for (std::int64_t p = 0; p < plan.word_length(); ++p) w_power[p] += a2 * entry_power[j][p];
  }
  std::vector<double> forwarded_power(plan.extension, 0.0);  // E||w-hat_t||^2
  const std::int64_t payload = plan.word_length() - plan.padding;
  for (std::int64_t p = 0; p < plan.word_length(); ++p) {
    double e = w_power[p];
    if (mode == RelayMode::kRaw && p < payload) e += sigma2;
    forwarded_power[p / n] += e;
  }

  EffectiveSnr out;
  for (int j = 0; j < plan.users; ++j) {
    for (int k = 0; k < plan.users; ++k) {
      if (j == k || plan.stream_length(j, k) == 0) continue;
      StreamSnr s;
      s.from = j;
      s.to = k;
      const PairSlot& slot = plan.slot(j, k);
      const double a2 = pre.uplink[j].alpha * pre.uplink[j].alpha;
      const ComplexMatrix& post = pre.downlink[k].matrix;
      const double b2 = pre.downlink[k].beta * pre.downlink[k].beta;
      double rate = 0.0;
      for (std::int64_t i = 0; i < plan.stream_length(j, k); ++i) {
        const std::int64_t p = slot.offset + i;
        const std::int64_t t = p / n;
        const double up = a2 * entry_power[j][p] / sigma2;
        const double row2 = post.row(p % n).squaredNorm();
        const double down = p_lin * b2 * w_power[p] / (forwarded_power[t] * sigma2 * row2);
        s.uplink.push_back(up);
        s.downlink.push_back(down);
        const double bottleneck = mode == RelayMode::kGenie ? down : std::min(up, down);
        rate += std::log2(1.0 + bottleneck);
      }
      s.rate = rate / static_cast<double>(plan.extension);
      out.sum_rate += s.rate;
      out.streams.push_back(std::move(s));
    }
  }
  return out;
}

struct StreamOutcome {
  int from = 0;
  int to = 0;
  ComplexVector sent;
  ComplexVector estimate;
  double relative_error = 0.0;
  std::vector<double> snr_uplink;
  std::vector<double> snr_downlink;
  double rate = 0.0;
};

struct RoundResult {
  RelayMode mode = RelayMode::kGenie;
  bool noise = false;
  std::int64_t extension = 1;
  std::vector<StreamOutcome> streams;  // active streams, DofVector order
  std::vector<double> gammas;          // relay transmit scale per channel use
  double sum_rate = 0.0;
  bool power_ok = true;  // every emitted x_j and x_r passed check_power

  double max_relative_error() const {
    double m = 0.0;
    for (const auto& s : streams) m = std::max(m, s.relative_error);
    return m;
  }
};

inline StreamSymbols sample_symbols(const StreamPlan& plan, std::uint64_t seed) {
  StreamSymbols s(plan.users);
  for (int j = 0; j < plan.users; ++j) {
    for (int k = 0; k < plan.users; ++k) {
      if (j == k) continue;
      const std::int64_t len = plan.stream_length(j, k);
      CounterRng rng(seed, stream_id(StreamTag::kSymbols, static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k)));
      ComplexVector v(len);
      for (std::int64_t i = 0; i < len; ++i) v(i) = rng.complex_normal();
      s.set(j, k, std::move(v));
    }
  }
  return s;
}

inline RoundResult run_round(const SystemConfig& cfg, const ChannelSet& ch, const Precoders& pre, const DofVector& d,
                             const std::optional<StreamSymbols>& given, std::uint64_t seed, RelayMode mode,
                             bool noise) {
  cfg.validate();
  if (d.users() != cfg.users) throw DimensionError("run_round: DoF vector user count differs from config");
  if (ch.uplink.size() != static_cast<std::size_t>(cfg.users) || pre.uplink.size() != ch.uplink.size()) {
    throw DimensionError("run_round: channel set does not match config");
  }
  const StreamPlan plan = build_stream_plan(d, cfg.relay_antennas);
  const StreamSymbols symbols = given ? *given : sample_symbols(plan, seed);
  const Eigen::Index n = cfg.relay_antennas;
  const Eigen::Index len = plan.word_length();
  const auto uses = static_cast<std::size_t>(plan.extension);
  const auto users = static_cast<std::size_t>(cfg.users);

  RoundResult result;
  result.mode = mode;
  result.noise = noise;
  result.extension = plan.extension;

  RoundScalars scalars;
  const auto counts = detail::active_counts(plan);
  std::vector<ComplexVector> words(users);
  for (std::size_t j = 0; j < users; ++j) {
    scalars.alphas.push_back(pre.uplink[j].alpha);
    ComplexVector raw = assemble_uplink_symbol(static_cast<int>(j), symbols, plan);
    std::vector<double> amp(uses, 0.0);
    for (std::size_t t = 0; t < uses; ++t) {
      const double norm = raw.segment(static_cast<Eigen::Index>(t) * n, n).norm();
      const auto active = counts[j][t];
      // An all-zero block carries nothing; any finite scale works for it.
      if (norm > 0.0) {
        amp[t] = std::sqrt(cfg.power) / norm;
      } else {
        amp[t] = active > 0 ? std::sqrt(cfg.power / static_cast<double>(active)) : 1.0;
      }
      raw.segment(static_cast<Eigen::Index>(t) * n, n) *= amp[t];
    }
    scalars.amplitudes.push_back(std::move(amp));
    words[j] = std::move(raw);
  }

  for (std::size_t j = 0; j < users; ++j)
    for (std::size_t t = 0; t < uses; ++t)
      if (!check_power(uplink_precode(words[j].segment(static_cast<Eigen::Index>(t) * n, n), pre.uplink[j]), cfg.power))
        result.power_ok = false;

  std::optional<ComplexVector> relay_noise;
  if (noise) {
    relay_noise = ComplexVector(len);
    for (std::size_t t = 0; t < uses; ++t)
      relay_noise->segment(static_cast<Eigen::Index>(t) * n, n) =
          sample_awgn(n, seed, stream_id(StreamTag::kRelayNoise, static_cast<std::uint32_t>(t), 0), cfg.noise_variance);
  }
  const ComplexVector y_r = relay_observe(cfg, ch, pre, words, relay_noise);

  ComplexVector w = ComplexVector::Zero(len);
  for (std::size_t j = 0; j < users; ++j) w += scalars.alphas[j] * words[j];
  const ComplexVector w_hat = relay_decode(y_r, plan, mode, w);

  ComplexVector x_r(len);
  for (std::size_t t = 0; t < uses; ++t) {
    const auto tx = relay_transmit(w_hat.segment(static_cast<Eigen::Index>(t) * n, n), cfg.power);
    if (!tx.zero_word && !check_power(tx.x_r, cfg.power)) result.power_ok = false;
    x_r.segment(static_cast<Eigen::Index>(t) * n, n) = tx.x_r;
    scalars.gammas.push_back(tx.gamma);
  }
  result.gammas = scalars.gammas;

  const EffectiveSnr snr = effective_snr(cfg, pre, plan, mode);
  result.sum_rate = snr.sum_rate;

  std::vector<std::vector<StreamEstimate>> estimates(users);
  for (std::size_t k = 0; k < users; ++k) {
    ComplexVector filtered(len);
    for (std::size_t t = 0; t < uses; ++t) {
      std::optional<ComplexVector> z;
      if (noise) {
        z = sample_awgn(cfg.user_antennas, seed,
                        stream_id(StreamTag::kUserNoise, static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(k)),
                        cfg.noise_variance);
      }
      const ComplexVector y_k = downlink_propagate(ch.downlink[k], x_r.segment(static_cast<Eigen::Index>(t) * n, n), z);
      filtered.segment(static_cast<Eigen::Index>(t) * n, n) = user_postcode(y_k, pre.downlink[k]);
    }
    estimates[k] = user_recover(filtered, static_cast<int>(k), symbols, plan, scalars, pre.downlink[k].beta);
  }

  std::size_t snr_index = 0;
  for (int j = 0; j < cfg.users; ++j) {
    for (int k = 0; k < cfg.users; ++k) {
      if (j == k || plan.stream_length(j, k) == 0) continue;
      StreamOutcome s;
      s.from = j;
      s.to = k;
      s.sent = symbols.get(j, k);
      for (const auto& e : estimates[k])
        if (e.from == j) s.estimate = e.symbols;
      const double ref = s.sent.norm();
      const double err = (s.estimate - s.sent).norm();
      s.relative_error = ref > 0.0 ? err / ref : err;
      const auto& sn = snr.streams.at(snr_index++);
      s.snr_uplink = sn.uplink;
      s.snr_downlink = sn.downlink;
      s.rate = sn.rate;
      result.streams.push_back(std::move(s));
    }
  }
  return result;
}

inline RoundResult run_round(const SystemConfig& cfg, const ChannelSet& ch, const DofVector& d,
                             const std::optional<StreamSymbols>& given, std::uint64_t seed, RelayMode mode,
                             bool noise) {
  return run_round(cfg, ch, make_precoders(ch), d, given, seed, mode, noise);
}

inline nlohmann::ordered_json complex_array(const ComplexVector& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

inline nlohmann::ordered_json to_json(const RoundResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = "ymimo.round_result";
  j["schema_version"] = kRoundResultSchemaVersion;
  j["mode"] = to_string(r.mode);
  j["noise"] = r.noise;
  j["extension"] = r.extension;
  j["gammas"] = r.gammas;
  j["power_ok"] = r.power_ok;
  j["sum_rate"] = r.sum_rate;
  j["max_relative_error"] = r.max_relative_error();
  auto streams = nlohmann::ordered_json::array();
  for (const auto& s : r.streams) {
    nlohmann::ordered_json e;
    e["from"] = s.from + 1;
    e["to"] = s.to + 1;
    e["relative_error"] = s.relative_error;
    e["snr_uplink"] = s.snr_uplink;
    e["snr_downlink"] = s.snr_downlink;
    e["rate"] = s.rate;
    e["sent"] = complex_array(s.sent);
    e["estimate"] = complex_array(s.estimate);
    streams.push_back(e);
  }
  j["streams"] = streams;
  return j;
}

}  // namespace ymimo
