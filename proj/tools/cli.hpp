#pragma once

// Command-line front end. Exit codes: 0 success, 1 infeasible DoF target or
// failed check (region violation, diagonalization residual), 2 usage or input
// error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ymimo/ymimo.hpp"

namespace ymimo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;

enum class OutputFormat { kCsv, kJson };

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int k = 0, m = 0, n = 0;
  std::string dof;
  std::string sweep_db;
  int trials = 0;
  std::string mode;
  std::string noise;
  double power_db = 0.0;
  int threads = 0;
  std::string out;
  std::string pairs;
  bool quiet = false;
};

struct Bound {
  CLI::Option* config = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* m = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* dof = nullptr;
  CLI::Option* sweep_db = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* noise = nullptr;
  CLI::Option* power_db = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* out = nullptr;
};

inline Bound add_common(CLI::App* app, Flags& f) {
  Bound b;
  b.config = app->add_option("--config", f.config, "Experiment config file (key = value lines)");
  b.seed = app->add_option("--seed", f.seed, "Base seed (u64)");
  b.k = app->add_option("--k", f.k, "Number of users K");
  b.m = app->add_option("--m", f.m, "Antennas per user M");
  b.n = app->add_option("--n", f.n, "Relay antennas N");
  b.dof = app->add_option("--dof", f.dof, "DoF targets, e.g. all=1 or 1_2=7,2_1=1/2");
  b.sweep_db = app->add_option("--sweep-db", f.sweep_db, "Power sweep in dB, start:step:stop or a,b,c");
  b.trials = app->add_option("--trials", f.trials, "Trials per sweep point");
  b.mode = app->add_option("--mode", f.mode, "Relay mode: genie|raw");
  b.noise = app->add_option("--noise", f.noise, "Noise on|off");
  b.power_db = app->add_option("--power-db", f.power_db, "Transmit power in dB for single rounds");
  b.threads = app->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  b.out = app->add_option("--out", f.out, "Output format: csv|json");
  app->add_flag("--quiet", f.quiet, "Suppress messages on stderr");
  return b;
}

inline ExperimentConfig resolve(const Flags& f, const Bound& b) {
  ExperimentConfig cfg;
  if (b.config->count()) apply_config_file(cfg, f.config);
  if (b.seed->count()) cfg.seed = f.seed;
  if (b.k->count()) cfg.system.users = f.k;
  if (b.m->count()) cfg.system.user_antennas = f.m;
  if (b.n->count()) cfg.system.relay_antennas = f.n;
  if (b.dof->count()) cfg.dof_text = f.dof;
  if (b.sweep_db->count()) cfg.sweep_db = parse_sweep(f.sweep_db);
  if (b.trials->count()) cfg.trials = f.trials;
  if (b.mode->count()) cfg.mode = parse_relay_mode(f.mode);
  if (b.noise->count()) apply_setting(cfg, "noise", f.noise);
  if (b.power_db->count()) cfg.power_db = f.power_db;
  if (b.threads->count()) cfg.threads = f.threads;
  return cfg;
}

inline OutputFormat output_format(const Flags& f, OutputFormat fallback) {
  if (f.out.empty()) return fallback;
  if (f.out == "csv") return OutputFormat::kCsv;
  if (f.out == "json") return OutputFormat::kJson;
  throw InvalidInput("unknown output format '" + f.out + "' (expected csv|json)");
}

inline std::vector<UserPair> parse_pairs(const std::string& text, int users) {
  std::vector<UserPair> out;
  // Reuse the DoF key grammar: every listed pair gets a dummy value.
  std::string items;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string key = text.substr(pos, end - pos);
    pos = end + 1;
    if (key.empty()) continue;
    const DofVector d = parse_dof(key + "=1", users);
    const auto [from, to] = d.pair_at(static_cast<std::size_t>(
        std::find(d.entries().begin(), d.entries().end(), Rational(1)) - d.entries().begin()));
    const UserPair p{std::min(from, to), std::max(from, to)};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  if (out.empty()) throw InvalidInput("--pairs lists no pairs");
  return out;
}

inline void print_json(std::ostream& out, const nlohmann::ordered_json& j) { out << j.dump(2) << "\n"; }

inline int cmd_mppi_check(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  SystemConfig sys = cfg.system;
  sys.power = db_to_linear(cfg.power_db);
  const ChannelSet ch = sample_channels(sys, cfg.seed);
  bool ok = true;
  nlohmann::ordered_json users = nlohmann::ordered_json::array();
  std::string csv = "user,alpha,beta,uplink_residual,downlink_residual,uplink_norm_error,downlink_norm_error,"
                    "uplink_condition,downlink_condition\n";
  for (int j = 0; j < sys.users; ++j) {
    const auto hr = normalized_right_mppi(ch.uplink[j]);
    const auto dl = normalized_left_mppi(ch.downlink[j]);
    const double up_res = diagonalization_residual(ch.uplink[j], hr);
    const double down_res = diagonalization_residual(ch.downlink[j], dl);
    const double up_norm = std::abs(hr.matrix.squaredNorm() - 1.0);
    const double down_norm = std::abs(dl.matrix.squaredNorm() - 1.0);
    const double up_cond = condition_diagnostics(ch.uplink[j]).condition;
    const double down_cond = condition_diagnostics(ch.downlink[j]).condition;
    ok = ok && up_res <= tolerance::kDiagonalization && down_res <= tolerance::kDiagonalization &&
         up_norm <= tolerance::kUnitNorm && down_norm <= tolerance::kUnitNorm;
    nlohmann::ordered_json u;
    u["user"] = j + 1;
    u["alpha"] = hr.alpha;
    u["beta"] = dl.beta;
    u["uplink_residual"] = up_res;
    u["downlink_residual"] = down_res;
    u["uplink_norm_error"] = up_norm;
    u["downlink_norm_error"] = down_norm;
    u["uplink_condition"] = up_cond;
    u["downlink_condition"] = down_cond;
    users.push_back(u);
    csv += std::to_string(j + 1) + "," + format_double(hr.alpha) + "," + format_double(dl.beta) + "," +
           format_double(up_res) + "," + format_double(down_res) + "," + format_double(up_norm) + "," +
           format_double(down_norm) + "," + format_double(up_cond) + "," + format_double(down_cond) + "\n";
  }
  if (fmt == OutputFormat::kCsv) {
    out << csv;
  } else {
    nlohmann::ordered_json j;
    j["schema"] = "ymimo.mppi_check";
    j["schema_version"] = 1;
    j["seed"] = cfg.seed;
    j["k"] = sys.users;
    j["m"] = sys.user_antennas;
    j["n"] = sys.relay_antennas;
    j["ok"] = ok;
    j["users"] = users;
    print_json(out, j);
  }
  return ok ? kExitOk : kExitViolation;
}

inline int cmd_simulate(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  SystemConfig sys = cfg.system;
  sys.power = db_to_linear(cfg.power_db);
  sys.validate();
  const DofVector d = cfg.dof();
  const ChannelSet ch = sample_channels(sys, cfg.seed);
  const RoundResult r = run_round(sys, ch, d, std::nullopt, derive_seed(cfg.seed, 0), cfg.mode, cfg.noise);
  if (fmt == OutputFormat::kCsv) {
    out << "from,to,relative_error,rate,snr_uplink_mean,snr_downlink_mean\n";
    for (const auto& s : r.streams) {
      double up = 0.0, down = 0.0;
      for (double v : s.snr_uplink) up += v;
      for (double v : s.snr_downlink) down += v;
      const auto c = static_cast<double>(s.snr_uplink.size());
      out << s.from + 1 << "," << s.to + 1 << "," << format_double(s.relative_error) << "," << format_double(s.rate)
          << "," << format_double(up / c) << "," << format_double(down / c) << "\n";
    }
  } else {
    nlohmann::ordered_json j = to_json(r);
    j["provenance"] = {{"version", kVersion}, {"rng", kRngName}, {"seed", cfg.seed},
                       {"k", sys.users},      {"m", sys.user_antennas}, {"n", sys.relay_antennas},
                       {"power_db", cfg.power_db}, {"dof", d.to_string()}};
    print_json(out, j);
  }
  return r.power_ok ? kExitOk : kExitViolation;
}

inline int cmd_sweep(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  const SweepReport report = run_sweep(cfg);
  if (fmt == OutputFormat::kCsv) {
    out << report.to_csv();
  } else {
    print_json(out, report.to_json());
  }
  return kExitOk;
}

inline int cmd_plan(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  const StreamPlan plan = build_stream_plan(cfg.dof(), cfg.system.relay_antennas);
  if (fmt == OutputFormat::kCsv) {
    out << "pair,offset,length,forward_length,backward_length\n";
    for (const auto& s : plan.slots) {
      out << pair_label(s.pair.first, s.pair.second) << "," << s.offset << "," << s.length << ","
          << plan.stream_length(s.pair.first, s.pair.second) << ","
          << plan.stream_length(s.pair.second, s.pair.first) << "\n";
    }
    out << "padding," << plan.word_length() - plan.padding << "," << plan.padding << ",0,0\n";
  } else {
    print_json(out, to_json(plan));
  }
  return kExitOk;
}

inline int cmd_dof_check(const ExperimentConfig& cfg, OutputFormat fmt, bool quiet, std::ostream& out,
                         std::ostream& err) {
  const RegionSpec spec{cfg.system.users, cfg.system.relay_antennas};
  const DofVector d = cfg.dof();
  const MembershipVerdict v = is_member(d, spec);
  if (fmt == OutputFormat::kCsv) {
    out << "member,max_value,witness,tight_count,construction_feasible,sum_of_pair_maxima\n";
    const auto cf = construction_feasible(d, spec.relay_antennas);
    out << (v.member ? 1 : 0) << "," << format_rational(v.max_value) << ",\"" << format_permutation(v.witness)
        << "\"," << v.tight.size() << "," << (cf.feasible ? 1 : 0) << "," << format_rational(cf.sum_of_maxima) << "\n";
  } else {
    print_json(out, to_json(v, d, spec));
  }
  if (!v.member) {
    if (!quiet) {
      err << "not in the DoF region: ordering " << format_permutation(v.witness) << " sums to "
          << format_rational(v.max_value) << " > N=" << spec.relay_antennas << "\n";
    }
    return kExitViolation;
  }
  return kExitOk;
}

inline int cmd_dof_sumdof(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  const RegionSpec spec{cfg.system.users, cfg.system.relay_antennas};
  const SumDofResult r = sum_dof_max(spec);
  if (fmt == OutputFormat::kCsv) {
    out << "k,n,sum_dof,pivots,certificate_verified\n";
    out << spec.users << "," << spec.relay_antennas << "," << format_rational(r.value) << ","
        << r.certificate.pivots << "," << (verify_certificate(r.lp, r.certificate) ? 1 : 0) << "\n";
  } else {
    nlohmann::ordered_json j;
    j["schema"] = "ymimo.sum_dof";
    j["schema_version"] = 1;
    j["users"] = spec.users;
    j["relay_antennas"] = spec.relay_antennas;
    j["sum_dof"] = format_rational(r.value);
    j["maximizer"] = dof_json(r.maximizer);
    j["pivots"] = r.certificate.pivots;
    j["certificate_verified"] = verify_certificate(r.lp, r.certificate);
    auto dual = nlohmann::ordered_json::array();
    for (const auto& y : r.certificate.dual) dual.push_back(format_rational(y));
    j["dual"] = dual;
    print_json(out, j);
  }
  return kExitOk;
}

inline int cmd_dof_gap(const ExperimentConfig& cfg, const std::optional<std::vector<UserPair>>& pairs,
                       OutputFormat fmt, std::ostream& out) {
  const RegionSpec spec{cfg.system.users, cfg.system.relay_antennas};
  const GapProbe probe = find_construction_gap(spec, pairs);
  if (fmt == OutputFormat::kCsv) {
    out << "found,max_sum_of_pair_maxima,lps_solved,witness\n";
    out << (probe.witness ? 1 : 0) << "," << format_rational(probe.max_sum_of_maxima) << "," << probe.lps_solved
        << ",\"" << (probe.witness ? probe.witness->d.to_string() : std::string()) << "\"\n";
  } else {
    nlohmann::ordered_json j;
    j["schema"] = "ymimo.construction_gap";
    j["schema_version"] = 1;
    j["users"] = spec.users;
    j["relay_antennas"] = spec.relay_antennas;
    j["found"] = probe.witness.has_value();
    j["max_sum_of_pair_maxima"] = format_rational(probe.max_sum_of_maxima);
    j["lps_solved"] = probe.lps_solved;
    if (probe.witness) {
      const auto& w = *probe.witness;
      nlohmann::ordered_json wj;
      wj["dof"] = dof_json(w.d);
      wj["sum_of_pair_maxima"] = format_rational(w.sum_of_maxima);
      wj["member"] = is_member(w.d, spec).member;
      auto sel = nlohmann::ordered_json::array();
      for (const auto& [from, to] : w.selected) sel.push_back(pair_label(from, to));
      wj["selected_directions"] = sel;
      j["witness"] = wj;
    } else {
      j["witness"] = nullptr;
    }
    print_json(out, j);
  }
  return kExitOk;
}

inline int cmd_dof_vertices(const ExperimentConfig& cfg, OutputFormat fmt, std::ostream& out) {
  const auto verts = vertices_k3(cfg.system.relay_antennas);
  const DofVector shape(3);
  if (fmt == OutputFormat::kCsv) {
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const auto [from, to] = shape.pair_at(i);
      out << (i ? "," : "") << "d_" << pair_label(from, to);
    }
    out << "\n";
    for (const auto& v : verts) {
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_rational(v[i]);
      out << "\n";
    }
  } else {
    nlohmann::ordered_json j;
    j["schema"] = "ymimo.vertices_k3";
    j["schema_version"] = 1;
    j["relay_antennas"] = cfg.system.relay_antennas;
    j["count"] = verts.size();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : verts) arr.push_back(dof_json(v));
    j["vertices"] = arr;
    print_json(out, j);
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"K-user MIMO Y-channel: zero-forcing diagonalization simulator and DoF region tools", "ymimo"};
  app.require_subcommand(1);
  Flags flags;

  struct Command {
    CLI::App* app;
    Bound bound;
  };
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* sub = parent->add_subcommand(name, help);
    return Command{sub, add_common(sub, flags)};
  };
  const Command mppi = add(&app, "mppi-check", "Normalized pseudo-inverse residuals for one channel draw");
  const Command simulate = add(&app, "simulate", "Run one transmission round");
  const Command sweep = add(&app, "sweep", "Monte Carlo power sweep with slope fit");
  const Command plan = add(&app, "plan", "Uplink alignment slot plan for a DoF target");
  CLI::App* dof = app.add_subcommand("dof", "Exact DoF region tools");
  dof->require_subcommand(1);
  const Command check = add(dof, "check", "Region membership over all user orderings");
  const Command sumdof = add(dof, "sumdof", "Maximum sum-DoF by exact simplex");
  const Command gap = add(dof, "gap", "Search region points the direct construction cannot carry");
  gap.app->add_option("--pairs", flags.pairs, "Restrict the probe to these pairs, e.g. 1_2,3_4");
  const Command vertices = add(dof, "vertices-k3", "Vertices of the 3-user region");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto with = [&](const Command& c, OutputFormat fallback, auto&& fn) {
      const ExperimentConfig cfg = resolve(flags, c.bound);
      return fn(cfg, output_format(flags, fallback));
    };
    if (mppi.app->parsed()) {
      return with(mppi, OutputFormat::kJson, [&](const auto& cfg, auto fmt) { return cmd_mppi_check(cfg, fmt, out); });
    }
    if (simulate.app->parsed()) {
      return with(simulate, OutputFormat::kJson, [&](const auto& cfg, auto fmt) { return cmd_simulate(cfg, fmt, out); });
    }
    if (sweep.app->parsed()) {
      return with(sweep, OutputFormat::kCsv, [&](const auto& cfg, auto fmt) { return cmd_sweep(cfg, fmt, out); });
    }
    if (plan.app->parsed()) {
      return with(plan, OutputFormat::kJson, [&](const auto& cfg, auto fmt) { return cmd_plan(cfg, fmt, out); });
    }
    if (check.app->parsed()) {
      return with(check, OutputFormat::kJson,
                  [&](const auto& cfg, auto fmt) { return cmd_dof_check(cfg, fmt, flags.quiet, out, err); });
    }
    if (sumdof.app->parsed()) {
      return with(sumdof, OutputFormat::kJson, [&](const auto& cfg, auto fmt) { return cmd_dof_sumdof(cfg, fmt, out); });
    }
    if (gap.app->parsed()) {
      return with(gap, OutputFormat::kJson, [&](const auto& cfg, auto fmt) {
        std::optional<std::vector<UserPair>> pairs;
        if (!flags.pairs.empty()) pairs = parse_pairs(flags.pairs, cfg.system.users);
        return cmd_dof_gap(cfg, pairs, fmt, out);
      });
    }
    if (vertices.app->parsed()) {
      return with(vertices, OutputFormat::kJson,
                  [&](const auto& cfg, auto fmt) { return cmd_dof_vertices(cfg, fmt, out); });
    }
  } catch (const Infeasible& e) {
    if (!flags.quiet) err << "infeasible: " << e.what() << " (excess " << format_rational(e.excess()) << ")\n";
    return kExitViolation;
  } catch (const Error& e) {
    if (!flags.quiet) err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    if (!flags.quiet) err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ymimo::cli
