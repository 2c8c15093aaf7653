#pragma once

// System model: K users with M antennas each exchange messages through a
// relay with N antennas. Uplink y_r = sum_j H_j x_j + z_r, downlink
// y_j = D_j x_r + z_j, with block-constant channels and CN(0, I) noise.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ymimo/error.hpp"
#include "ymimo/linalg.hpp"
#include "ymimo/rng.hpp"

namespace ymimo {

struct SystemConfig {
  int users = 3;           // K
  int user_antennas = 1;   // M
  int relay_antennas = 1;  // N
  double power = 1.0;      // P, linear
  double noise_variance = 1.0;

  void validate() const {
    if (users < 3) throw InvalidInput("SystemConfig: need K >= 3, got " + std::to_string(users));
    if (relay_antennas < 1 || relay_antennas > user_antennas) {
      throw InvalidInput("SystemConfig: need 1 <= N <= M, got N=" + std::to_string(relay_antennas) +
                         " M=" + std::to_string(user_antennas));
    }
    if (!(power > 0.0) || !std::isfinite(power)) throw InvalidInput("SystemConfig: need P > 0");
    if (!(noise_variance > 0.0)) throw InvalidInput("SystemConfig: need noise variance > 0");
  }
};

struct ChannelSet {
  std::vector<ComplexMatrix> uplink;    // H_j, N x M
  std::vector<ComplexMatrix> downlink;  // D_j, M x N
};

inline constexpr int kMaxChannelRejections = 100;

namespace detail {

inline ComplexMatrix sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                            std::uint64_t stream) {
  CounterRng rng(seed, stream);
  ComplexMatrix m(rows, cols);
  // Row-major fill so the stream layout matches the row-major entry order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  return m;
}

inline bool well_conditioned(const ComplexMatrix& m) {
  const auto diag = condition_diagnostics(m);
  return std::isfinite(diag.condition) && 1.0 / diag.condition >= tolerance::kRankRatio;
}

}  // namespace detail

// i.i.d. CN(0, 1) entries. Matrix j of the uplink uses stream
// (kUplinkChannel, attempt, j); a matrix failing the rank check is redrawn
// with the next attempt index.
inline ChannelSet sample_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Eigen::Index n = cfg.relay_antennas;
  const Eigen::Index m = cfg.user_antennas;
  ChannelSet out;
  out.uplink.reserve(cfg.users);
  out.downlink.reserve(cfg.users);
  int rejections = 0;
  auto draw = [&](StreamTag tag, int user, Eigen::Index rows, Eigen::Index cols) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      ComplexMatrix mat = detail::sample_gaussian_matrix(
          rows, cols, seed, stream_id(tag, attempt, static_cast<std::uint32_t>(user)));
      if (detail::well_conditioned(mat)) return mat;
      if (++rejections >= kMaxChannelRejections) {
        throw GenerationFailed("sample_channels: " + std::to_string(rejections) +
                               " ill-conditioned draws");
      }
    }
  };
  for (int j = 0; j < cfg.users; ++j) out.uplink.push_back(draw(StreamTag::kUplinkChannel, j, n, m));
  for (int j = 0; j < cfg.users; ++j) out.downlink.push_back(draw(StreamTag::kDownlinkChannel, j, m, n));
  return out;
}

inline ComplexVector sample_awgn(Eigen::Index dim, std::uint64_t seed,
                                 std::uint64_t stream = stream_id(StreamTag::kAwgn, 0, 0),
                                 double variance = 1.0) {
  if (dim < 1) throw DimensionError("sample_awgn: dim must be >= 1");
  CounterRng rng(seed, stream);
  const double scale = std::sqrt(variance);
  ComplexVector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = scale * rng.complex_normal();
  return z;
}

inline ComplexVector uplink_propagate(const ChannelSet& ch, std::span<const ComplexVector> x,
                                      const std::optional<ComplexVector>& noise = std::nullopt) {
  if (ch.uplink.empty()) throw DimensionError("uplink_propagate: empty channel set");
  if (x.size() != ch.uplink.size()) {
    throw DimensionError("uplink_propagate: " + std::to_string(x.size()) + " inputs for " +
                         std::to_string(ch.uplink.size()) + " users");
  }
  const Eigen::Index n = ch.uplink.front().rows();
  ComplexVector y = ComplexVector::Zero(n);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& h = ch.uplink[j];
    if (h.rows() != n || h.cols() != x[j].size()) {
      throw DimensionError("uplink_propagate: user " + std::to_string(j + 1) + " vector length " +
                           std::to_string(x[j].size()) + " vs channel " + detail::shape(h));
    }
    y.noalias() += h * x[j];
  }
  if (noise) {
    if (noise->size() != n) throw DimensionError("uplink_propagate: noise length mismatch");
    y += *noise;
  }
  return y;
}

inline ComplexVector downlink_propagate(const ComplexMatrix& d, const ComplexVector& x_r,
                                        const std::optional<ComplexVector>& noise = std::nullopt) {
  if (d.cols() != x_r.size()) {
    throw DimensionError("downlink_propagate: relay vector length " + std::to_string(x_r.size()) +
                         " vs channel " + detail::shape(d));
  }
  ComplexVector y = d * x_r;
  if (noise) {
    if (noise->size() != d.rows()) throw DimensionError("downlink_propagate: noise length mismatch");
    y += *noise;
  }
  return y;
}

inline bool check_power(const ComplexVector& x, double power) {
  return x.squaredNorm() <= power * (1.0 + tolerance::kPower);
}

}  // namespace ymimo
