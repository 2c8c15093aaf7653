#pragma once

// The DoF region of the K-user MIMO Y-channel with N <= M:
//
//   D_K = { d >= 0 : sum_{a<b} d_{p_a p_b} <= N for every ordering p of the users }.
//
// Everything here is exact rational arithmetic. Membership enumerates all K!
// orderings; LP-based tools use the Bland's-rule simplex in simplex.hpp.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ymimo/alignment.hpp"
#include "ymimo/dof_vector.hpp"
#include "ymimo/error.hpp"
#include "ymimo/simplex.hpp"

namespace ymimo {

inline constexpr int kMaxMembershipUsers = 8;
inline constexpr int kMaxSumDofUsers = 5;
inline constexpr int kMaxGapProbeUsers = 4;
inline constexpr int kMaxVertexRelayAntennas = 100;

struct RegionSpec {
  int users = 3;           // K
  int relay_antennas = 1;  // N

  void validate() const {
    if (users < 3) throw InvalidInput("RegionSpec: need K >= 3");
    if (relay_antennas < 1) throw InvalidInput("RegionSpec: need N >= 1");
  }
};

using Permutation = std::vector<int>;  // 0-based user labels

inline std::string format_permutation(const Permutation& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i] + 1);
  return s + ")";
}

// sum_{a<b} d_{p_a p_b}: every pair counted once, in the direction p orders it.
inline Rational permutation_constraint(const DofVector& d, const Permutation& p) {
  if (static_cast<int>(p.size()) != d.users()) throw DimensionError("permutation_constraint: length mismatch");
  std::vector<bool> seen(p.size(), false);
  for (int v : p) {
    if (v < 0 || v >= d.users() || seen[v]) throw InvalidInput("permutation_constraint: not a permutation");
    seen[v] = true;
  }
  Rational sum = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b) sum += d.at(p[a], p[b]);
  return sum;
}

struct MembershipVerdict {
  bool member = false;
  Rational max_value = 0;             // largest permutation value
  Permutation witness;                // first ordering attaining max_value
  std::vector<Permutation> tight;     // orderings with value == N (members only)
  std::size_t permutations_checked = 0;
};

inline MembershipVerdict is_member(const DofVector& d, const RegionSpec& spec) {
  spec.validate();
  if (d.users() != spec.users) throw DimensionError("is_member: DoF vector has " + std::to_string(d.users()) + " users");
  if (spec.users > kMaxMembershipUsers) {
    throw TooLarge("is_member: K=" + std::to_string(spec.users) + " exceeds the K! enumeration limit of " +
                   std::to_string(kMaxMembershipUsers));
  }
  // Work on integer numerators over a common denominator.
  BigInt den = 1;
  for (const auto& e : d.entries()) den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(e));
  const int k = spec.users;
  std::vector<BigInt> num(static_cast<std::size_t>(k) * k, BigInt(0));
  for (int j = 0; j < k; ++j)
    for (int l = 0; l < k; ++l)
      if (j != l) {
        const Rational scaled = d.at(j, l) * den;
        num[j * k + l] = boost::multiprecision::numerator(scaled);
      }
  const BigInt bound = BigInt(spec.relay_antennas) * den;

  MembershipVerdict v;
  Permutation p(k);
  std::iota(p.begin(), p.end(), 0);
  BigInt best;
  bool first = true;
  std::vector<Permutation> tight;
  do {
    BigInt sum = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) sum += num[p[a] * k + p[b]];
    if (first || sum > best) {
      best = sum;
      v.witness = p;
      first = false;
    }
    if (sum == bound) tight.push_back(p);
    ++v.permutations_checked;
  } while (std::next_permutation(p.begin(), p.end()));

  v.max_value = Rational(best, den);
  v.member = best <= bound;
  if (v.member) v.tight = std::move(tight);
  return v;
}

namespace detail {

// One row per ordering: coefficient 1 on every ordered pair the ordering selects.
inline LinearProgram region_lp(int users, int relay_antennas, const std::vector<std::size_t>& variables) {
  const DofVector shape(users);
  std::vector<int> column(shape.size(), -1);
  for (std::size_t c = 0; c < variables.size(); ++c) column[variables[c]] = static_cast<int>(c);
  LinearProgram lp;
  lp.c.assign(variables.size(), Rational(0));
  Permutation p(users);
  std::iota(p.begin(), p.end(), 0);
  std::set<std::vector<Rational>> rows;  // orderings that select the same set of variables coincide
  do {
    std::vector<Rational> row(variables.size(), Rational(0));
    for (int a = 0; a < users; ++a)
      for (int b = a + 1; b < users; ++b)
        if (const int col = column[shape.index(p[a], p[b])]; col >= 0) row[col] = 1;
    if (rows.insert(row).second) {
      lp.a.push_back(std::move(row));
      lp.b.emplace_back(relay_antennas);
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return lp;
}

inline std::vector<std::size_t> all_variables(int users) {
  std::vector<std::size_t> v(static_cast<std::size_t>(users) * (users - 1));
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

inline DofVector to_dof(int users, const std::vector<std::size_t>& variables, const std::vector<Rational>& x) {
  DofVector d(users);
  for (std::size_t c = 0; c < variables.size(); ++c) {
    const auto [from, to] = d.pair_at(variables[c]);
    d.set(from, to, x[c]);
  }
  return d;
}

}  // namespace detail

struct SumDofResult {
  Rational value = 0;
  DofVector maximizer;
  LinearProgram lp;
  LpSolution certificate;
};

// max sum_jk d_jk over the region.
inline SumDofResult sum_dof_max(const RegionSpec& spec) {
  spec.validate();
  if (spec.users > kMaxSumDofUsers) {
    throw TooLarge("sum_dof_max: K=" + std::to_string(spec.users) + " exceeds " + std::to_string(kMaxSumDofUsers));
  }
  const auto vars = detail::all_variables(spec.users);
  SumDofResult r{0, DofVector(spec.users), detail::region_lp(spec.users, spec.relay_antennas, vars), {}};
  for (auto& c : r.lp.c) c = 1;
  r.certificate = solve_lp(r.lp);
  if (r.certificate.status != LpStatus::kOptimal) throw Error("sum_dof_max: region LP unbounded");
  r.value = r.certificate.objective;
  r.maximizer = detail::to_dof(spec.users, vars, r.certificate.x);
  return r;
}

struct ConstructionCheck {
  bool feasible = false;
  Rational sum_of_maxima = 0;  // sum over pairs of max(d_jk, d_kj)
};

inline ConstructionCheck construction_feasible(const DofVector& d, int relay_antennas) {
  const Rational s = sum_of_pair_maxima(d);
  return {s <= relay_antennas, s};
}

struct GapWitness {
  DofVector d;
  Rational sum_of_maxima = 0;
  Rational lp_value = 0;                      // optimum of the direction-selected LP
  std::vector<std::pair<int, int>> selected;  // (from, to) chosen for each pair
};

struct GapProbe {
  std::optional<GapWitness> witness;  // region point with sum of pair maxima > N, if any
  Rational max_sum_of_maxima = 0;     // max over the region of sum_{pairs} max(d_jk, d_kj)
  std::size_t lps_solved = 0;
};

// For every choice of one direction per pair, maximizes the sum of the chosen
// directions over the region. The best of these optima is the maximum of the
// sum of pair maxima over the region, so a value above N is a region point the
// direct alignment layout cannot carry. `pairs` restricts the probe to a
// subset of pairs (all other entries fixed at zero).
inline GapProbe find_construction_gap(const RegionSpec& spec, std::optional<std::vector<UserPair>> pairs = std::nullopt) {
  spec.validate();
  if (spec.users > kMaxGapProbeUsers) {
    throw TooLarge("find_construction_gap: K=" + std::to_string(spec.users) + " exceeds " +
                   std::to_string(kMaxGapProbeUsers));
  }
  const std::vector<UserPair> active = pairs ? *pairs : all_pairs(spec.users);
  const DofVector shape(spec.users);
  std::vector<std::size_t> vars;
  for (const auto& pr : active) {
    if (pr.first < 0 || pr.second >= spec.users || pr.first >= pr.second) {
      throw InvalidInput("find_construction_gap: invalid pair");
    }
    vars.push_back(shape.index(pr.first, pr.second));
    vars.push_back(shape.index(pr.second, pr.first));
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  LinearProgram lp = detail::region_lp(spec.users, spec.relay_antennas, vars);

  GapProbe probe;
  bool have_max = false;
  const std::size_t selections = std::size_t{1} << active.size();
  for (std::size_t mask = 0; mask < selections; ++mask) {
    std::fill(lp.c.begin(), lp.c.end(), Rational(0));
    std::vector<std::pair<int, int>> chosen;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const bool reverse = (mask >> i) & 1u;
      const int from = reverse ? active[i].second : active[i].first;
      const int to = reverse ? active[i].first : active[i].second;
      chosen.emplace_back(from, to);
      const auto var = shape.index(from, to);
      const auto col = std::lower_bound(vars.begin(), vars.end(), var) - vars.begin();
      lp.c[col] = 1;
    }
    const LpSolution sol = solve_lp(lp);
    ++probe.lps_solved;
    if (sol.status != LpStatus::kOptimal) throw Error("find_construction_gap: region LP unbounded");
    if (!have_max || sol.objective > probe.max_sum_of_maxima) {
      probe.max_sum_of_maxima = sol.objective;
      have_max = true;
      if (sol.objective > spec.relay_antennas) {
        GapWitness w{detail::to_dof(spec.users, vars, sol.x), 0, sol.objective, std::move(chosen)};
        w.sum_of_maxima = sum_of_pair_maxima(w.d);
        probe.witness = std::move(w);
      }
    }
  }
  return probe;
}

namespace detail {

// Solves the square system exactly; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    for (std::size_t r = col; r < n; ++r)
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot == n) return std::nullopt;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace detail

// Vertices of D_3 (coordinates in DofVector order d_12, d_13, d_21, d_23,
// d_31, d_32), found by intersecting every 6-subset of the 6 ordering
// constraints and 6 nonnegativity constraints. Sorted lexicographically.
inline std::vector<DofVector> vertices_k3(int relay_antennas) {
  if (relay_antennas < 1) throw InvalidInput("vertices_k3: N must be >= 1");
  if (relay_antennas > kMaxVertexRelayAntennas) {
    throw TooLarge("vertices_k3: N=" + std::to_string(relay_antennas) + " exceeds " +
                   std::to_string(kMaxVertexRelayAntennas));
  }
  constexpr int kUsers = 3;
  constexpr std::size_t kDim = 6;
  const auto vars = detail::all_variables(kUsers);
  const LinearProgram region = detail::region_lp(kUsers, relay_antennas, vars);

  // Constraint rows as equalities: ordering rows = N, then x_i = 0.
  std::vector<std::vector<Rational>> rows = region.a;
  std::vector<Rational> rhs = region.b;
  for (std::size_t i = 0; i < kDim; ++i) {
    std::vector<Rational> unit(kDim, Rational(0));
    unit[i] = 1;
    rows.push_back(std::move(unit));
    rhs.emplace_back(0);
  }

  std::set<std::vector<Rational>> found;
  const std::size_t total = rows.size();
  std::vector<bool> pick(total, false);
  std::fill(pick.begin(), pick.begin() + kDim, true);
  do {
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    for (std::size_t i = 0; i < total; ++i)
      if (pick[i]) {
        a.push_back(rows[i]);
        b.push_back(rhs[i]);
      }
    auto x = detail::solve_square(std::move(a), std::move(b));
    if (!x) continue;
    bool feasible = std::all_of(x->begin(), x->end(), [](const Rational& v) { return v >= 0; });
    for (std::size_t i = 0; feasible && i < region.rows(); ++i) {
      Rational lhs = 0;
      for (std::size_t j = 0; j < kDim; ++j) lhs += region.a[i][j] * (*x)[j];
      if (lhs > region.b[i]) feasible = false;
    }
    if (feasible) found.insert(std::move(*x));
  } while (std::prev_permutation(pick.begin(), pick.end()));

  std::vector<DofVector> out;
  for (const auto& x : found) out.push_back(detail::to_dof(kUsers, vars, x));
  return out;
}

inline nlohmann::ordered_json dof_json(const DofVector& d) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto [from, to] = d.pair_at(i);
    j[pair_label(from, to)] = format_rational(d[i]);
  }
  return j;
}

inline nlohmann::ordered_json permutation_json(const Permutation& p) {
  auto a = nlohmann::ordered_json::array();
  for (int v : p) a.push_back(v + 1);
  return a;
}

inline nlohmann::ordered_json to_json(const MembershipVerdict& v, const DofVector& d, const RegionSpec& spec) {
  nlohmann::ordered_json j;
  j["schema"] = "ymimo.membership";
  j["schema_version"] = 1;
  j["users"] = spec.users;
  j["relay_antennas"] = spec.relay_antennas;
  j["dof"] = dof_json(d);
  j["member"] = v.member;
  j["max_value"] = format_rational(v.max_value);
  j["witness"] = permutation_json(v.witness);
  auto tight = nlohmann::ordered_json::array();
  for (const auto& p : v.tight) tight.push_back(permutation_json(p));
  j["tight"] = tight;
  j["permutations_checked"] = v.permutations_checked;
  const auto cf = construction_feasible(d, spec.relay_antennas);
  j["construction_feasible"] = cf.feasible;
  j["sum_of_pair_maxima"] = format_rational(cf.sum_of_maxima);
  return j;
}

}  // namespace ymimo
