#pragma once

// Seeded Monte Carlo sweeps over transmit power.
//
// Config file grammar (one assignment per line):
//   line    := blank | comment | key ws* '=' ws* value ws* comment?
//   comment := '#' anything
//   value   := bare text up to '#', or a "double-quoted string"
// Keys: k, m, n, dof, sweep_db, trials, seed, mode, noise, power_db, threads.
// Unknown keys are an error. Command-line flags override file values.
//
// dB convention: P_linear = 10^(P_dB / 10).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ymimo/alignment.hpp"
#include "ymimo/channel.hpp"
#include "ymimo/dof_vector.hpp"
#include "ymimo/error.hpp"
#include "ymimo/transceiver.hpp"

namespace ymimo {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSweepReportSchemaVersion = 1;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct ExperimentConfig {
  SystemConfig system{4, 6, 6, 1.0, 1.0};
  std::string dof_text = "all=1";
  std::vector<double> sweep_db{30.0};
  int trials = 1;
  std::uint64_t seed = 1;
  RelayMode mode = RelayMode::kGenie;
  bool noise = true;
  double power_db = 30.0;  // single-round commands
  int threads = 0;         // 0 = hardware concurrency

  DofVector dof() const { return parse_dof(dof_text, system.users); }

  void validate() const {
    SystemConfig s = system;
    s.power = 1.0;
    s.validate();
    (void)dof();
    if (sweep_db.empty()) throw InvalidInput("sweep must have at least one point");
    for (std::size_t i = 1; i < sweep_db.size(); ++i)
      if (!(sweep_db[i] > sweep_db[i - 1])) throw InvalidInput("sweep points must be strictly increasing");
    if (trials < 1) throw InvalidInput("trials must be >= 1");
    if (threads < 0) throw InvalidInput("threads must be >= 0");
  }

  // Canonical one-line form; hashed into the report provenance.
  std::string canonical() const {
    std::string s = "k=" + std::to_string(system.users) + " m=" + std::to_string(system.user_antennas) +
                    " n=" + std::to_string(system.relay_antennas) + " dof=" + dof().to_string() + " sweep_db=";
    for (std::size_t i = 0; i < sweep_db.size(); ++i) s += (i ? "," : "") + format_double(sweep_db[i]);
    s += " trials=" + std::to_string(trials) + " seed=" + std::to_string(seed) + " mode=" + to_string(mode) +
         " noise=" + (noise ? "on" : "off");
    return s;
  }
};

// FNV-1a, 64-bit.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = kHex[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) throw InvalidInput(std::string("bad ") + what + " '" + text + "'");
  return value;
}

inline bool parse_on_off(const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw InvalidInput("expected on|off, got '" + text + "'");
}

}  // namespace detail

// "start:step:stop", inclusive of stop; or a comma list; or a single value.
inline std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find(':', pos);
      if (end == std::string::npos) end = text.size();
      parts.push_back(detail::parse_number<double>(detail::trim(text.substr(pos, end - pos)), "sweep"));
      pos = end + 1;
    }
    if (parts.size() != 3) throw InvalidInput("sweep range must be start:step:stop");
    const double start = parts[0], step = parts[1], stop = parts[2];
    if (!(step > 0.0) || stop < start) throw InvalidInput("sweep range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw InvalidInput("sweep range too long");
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(detail::parse_number<double>(detail::trim(text.substr(pos, end - pos)), "sweep"));
    pos = end + 1;
  }
  return out;
}

inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "k") {
    cfg.system.users = detail::parse_number<int>(value, "k");
  } else if (key == "m") {
    cfg.system.user_antennas = detail::parse_number<int>(value, "m");
  } else if (key == "n") {
    cfg.system.relay_antennas = detail::parse_number<int>(value, "n");
  } else if (key == "dof") {
    cfg.dof_text = value;
  } else if (key == "sweep_db") {
    cfg.sweep_db = parse_sweep(value);
  } else if (key == "trials") {
    cfg.trials = detail::parse_number<int>(value, "trials");
  } else if (key == "seed") {
    cfg.seed = detail::parse_number<std::uint64_t>(value, "seed");
  } else if (key == "mode") {
    cfg.mode = parse_relay_mode(value);
  } else if (key == "noise") {
    cfg.noise = detail::parse_on_off(value);
  } else if (key == "power_db") {
    cfg.power_db = detail::parse_number<double>(value, "power_db");
  } else if (key == "threads") {
    cfg.threads = detail::parse_number<int>(value, "threads");
  } else {
    throw InvalidInput("unknown config key '" + key + "'");
  }
}

inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    std::string rest = detail::trim(body.substr(eq + 1));
    std::string value;
    if (!rest.empty() && rest.front() == '"') {
      const auto close = rest.find('"', 1);
      if (close == std::string::npos) throw InvalidInput("config line " + std::to_string(line_no) + ": unterminated string");
      value = rest.substr(1, close - 1);
      const std::string tail = detail::trim(rest.substr(close + 1));
      if (!tail.empty() && tail.front() != '#') {
        throw InvalidInput("config line " + std::to_string(line_no) + ": trailing text after string");
      }
    } else {
      value = detail::trim(rest.substr(0, rest.find('#')));
    }
    try {
      apply_setting(cfg, key, value);
    } catch (const InvalidInput& e) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;      // root-mean-square of the fit residuals
  double slope_stderr = 0.0;  // 0 when exactly two points
};

inline LineFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw Underdetermined("fit_slope: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw Underdetermined("fit_slope: all x values coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (f.intercept + f.slope * x);
    sse += r * r;
  }
  f.residual = std::sqrt(sse / static_cast<double>(n));
  if (n > 2) f.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  return f;
}

struct SweepRow {
  double p_db = 0.0;
  std::vector<double> stream_snr;   // mean bottleneck SNR per active stream
  std::vector<double> stream_rate;  // mean rate proxy per active stream
  double sum_rate = 0.0;
  double error_mean = 0.0;  // mean over trials and streams of the relative recovery error
  double error_max = 0.0;
  bool power_ok = true;
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<std::string> stream_labels;  // "1_2", ...
  std::vector<SweepRow> rows;
  std::optional<LineFit> fit;  // sum rate vs log2 P, present with >= 3 points

  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

namespace detail {

struct TrialPoint {
  std::vector<double> snr;
  std::vector<double> rate;
  double sum_rate = 0.0;
  double error_sum = 0.0;
  double error_max = 0.0;
  bool power_ok = true;
};

inline std::vector<TrialPoint> run_trial(const ExperimentConfig& cfg, const DofVector& d, std::uint64_t trial) {
  const std::uint64_t trial_seed = derive_seed(cfg.seed, trial);
  SystemConfig sys = cfg.system;
  const ChannelSet ch = sample_channels(sys, trial_seed);
  const Precoders pre = make_precoders(ch);
  std::vector<TrialPoint> out;
  for (std::size_t i = 0; i < cfg.sweep_db.size(); ++i) {
    sys.power = db_to_linear(cfg.sweep_db[i]);
    const RoundResult r = run_round(sys, ch, pre, d, std::nullopt, derive_seed(trial_seed, i), cfg.mode, cfg.noise);
    TrialPoint tp;
    for (const auto& s : r.streams) {
      double snr = 0.0;
      for (std::size_t c = 0; c < s.snr_downlink.size(); ++c) {
        snr += cfg.mode == RelayMode::kGenie ? s.snr_downlink[c] : std::min(s.snr_uplink[c], s.snr_downlink[c]);
      }
      tp.snr.push_back(snr / static_cast<double>(s.snr_downlink.size()));
      tp.rate.push_back(s.rate);
      tp.error_sum += s.relative_error;
      tp.error_max = std::max(tp.error_max, s.relative_error);
    }
    tp.sum_rate = r.sum_rate;
    tp.power_ok = r.power_ok;
    out.push_back(std::move(tp));
  }
  return out;
}

}  // namespace detail

inline SweepReport run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const DofVector d = cfg.dof();
  const StreamPlan plan = build_stream_plan(d, cfg.system.relay_antennas);

  SweepReport report;
  report.config = cfg;
  for (int j = 0; j < d.users(); ++j)
    for (int k = 0; k < d.users(); ++k)
      if (j != k && plan.stream_length(j, k) > 0) report.stream_labels.push_back(pair_label(j, k));

  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<detail::TrialPoint>> results(trials);
  std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, trials));
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < trials; t += workers) results[t] = detail::run_trial(cfg, d, t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Aggregate in trial order so the floating-point sums do not depend on scheduling.
  const std::size_t streams = report.stream_labels.size();
  for (std::size_t i = 0; i < cfg.sweep_db.size(); ++i) {
    SweepRow row;
    row.p_db = cfg.sweep_db[i];
    row.stream_snr.assign(streams, 0.0);
    row.stream_rate.assign(streams, 0.0);
    double error_total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& tp = results[t][i];
      for (std::size_t s = 0; s < streams; ++s) {
        row.stream_snr[s] += tp.snr[s];
        row.stream_rate[s] += tp.rate[s];
      }
      row.sum_rate += tp.sum_rate;
      error_total += tp.error_sum;
      row.error_max = std::max(row.error_max, tp.error_max);
      row.power_ok = row.power_ok && tp.power_ok;
    }
    const double nt = static_cast<double>(trials);
    for (std::size_t s = 0; s < streams; ++s) {
      row.stream_snr[s] /= nt;
      row.stream_rate[s] /= nt;
    }
    row.sum_rate /= nt;
    row.error_mean = streams > 0 ? error_total / (nt * static_cast<double>(streams)) : 0.0;
    report.rows.push_back(std::move(row));
  }

  if (report.rows.size() >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : report.rows) pts.emplace_back(std::log2(db_to_linear(r.p_db)), r.sum_rate);
    report.fit = fit_slope(pts);
  }
  return report;
}

inline std::string SweepReport::to_csv() const {
  std::string out;
  const std::string canon = config.canonical();
  out += "# ymimo sweep report schema=" + std::to_string(kSweepReportSchemaVersion) + "\n";
  out += "# version=" + std::string(kVersion) + "\n";
  out += "# rng=" + std::string(kRngName) + "\n";
  out += "# seed=" + std::to_string(config.seed) + "\n";
  out += "# config=" + canon + "\n";
  out += "# config_hash=" + config_hash(canon) + "\n";
  if (fit) {
    out += "# fit x=log2(P) y=sum_rate slope=" + format_double(fit->slope) +
           " intercept=" + format_double(fit->intercept) + " residual=" + format_double(fit->residual) +
           " slope_stderr=" + format_double(fit->slope_stderr) + "\n";
  }
  out += "p_db,sum_rate,error_mean,error_max,power_ok";
  for (const auto& l : stream_labels) out += ",snr_" + l;
  for (const auto& l : stream_labels) out += ",rate_" + l;
  out += "\n";
  for (const auto& r : rows) {
    out += format_double(r.p_db) + "," + format_double(r.sum_rate) + "," + format_double(r.error_mean) + "," +
           format_double(r.error_max) + "," + (r.power_ok ? "1" : "0");
    for (double v : r.stream_snr) out += "," + format_double(v);
    for (double v : r.stream_rate) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline nlohmann::ordered_json SweepReport::to_json() const {
  nlohmann::ordered_json j;
  const std::string canon = config.canonical();
  j["schema"] = "ymimo.sweep_report";
  j["schema_version"] = kSweepReportSchemaVersion;
  j["provenance"] = {{"version", kVersion},
                     {"rng", kRngName},
                     {"seed", config.seed},
                     {"config", canon},
                     {"config_hash", config_hash(canon)}};
  j["streams"] = stream_labels;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["p_db"] = r.p_db;
    e["sum_rate"] = r.sum_rate;
    e["error_mean"] = r.error_mean;
    e["error_max"] = r.error_max;
    e["power_ok"] = r.power_ok;
    e["snr"] = r.stream_snr;
    e["rate"] = r.stream_rate;
    rows_json.push_back(e);
  }
  j["rows"] = rows_json;
  if (fit) {
    j["fit"] = {{"x", "log2(P)"},
                {"y", "sum_rate"},
                {"slope", fit->slope},
                {"intercept", fit->intercept},
                {"residual", fit->residual},
                {"slope_stderr", fit->slope_stderr}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

}  // namespace ymimo
