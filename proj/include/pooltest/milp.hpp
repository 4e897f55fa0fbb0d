// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Mixed-integer linear program for non-overlapping testing over a clustered
// population, with exp replaced by an upper piecewise-linear approximation
// and log encoded by one-hot indicators over the integral utility sums.
//
// Per test j: counts x_j_c (integer), welfare w_j, log-welfare l_j, log-sum
// y_j, utility sum z_j, segment selectors d_j_k with matching v_j_k, and
// value selectors g_j_k for k in [L, U].

#ifndef POOLTEST_MILP_HPP
#define POOLTEST_MILP_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pooltest/clusters.hpp"
#include "pooltest/core.hpp"
#include "pooltest/oracle.hpp"
#include "pooltest/pwl.hpp"

namespace pooltest {

inline constexpr double kMaxMilpUtility = 1e4;

enum class VarType { kContinuous, kInteger, kBinary };
enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Variable {
  std::string name;
  VarType type = VarType::kContinuous;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct LinearTerm {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::string family;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

/// Range of l = log(sum of utilities) + sum of log q over tests of size <= G.
struct LogWelfareDomain {
  double lower = 0.0;
  double upper = 0.0;
};

/// A = min log u + G min log q, upper = log(G max u) + max log q. A zero-width
/// range (every q = 1 and G max u = min u) is widened by 1 so a secant exists.
inline LogWelfareDomain log_welfare_domain(const ClusteredPopulation& clusters, std::size_t pool_cap) {
  if (clusters.num_clusters() == 0) throw ValidationError("no clusters");
  double min_u = std::numeric_limits<double>::infinity();
  double max_u = 0.0;
  double min_log_q = 0.0;
  double max_log_q = -std::numeric_limits<double>::infinity();
  for (const auto& c : clusters.clusters()) {
    if (!(c.q > 0.0) || !(c.utility > 0.0)) throw ValidationError("domain needs positive q and utility");
    min_u = std::min(min_u, c.utility);
    max_u = std::max(max_u, c.utility);
    min_log_q = std::min(min_log_q, std::log(c.q));
    max_log_q = std::max(max_log_q, std::log(c.q));
  }
  LogWelfareDomain d;
  d.lower = std::log(min_u) + static_cast<double>(pool_cap) * min_log_q;
  d.upper = std::log(static_cast<double>(pool_cap) * max_u) + max_log_q;
  if (d.upper - d.lower < 1e-9) d.upper = d.lower + 1.0;
  return d;
}

class MilpModel {
 public:
  std::size_t add_variable(std::string name, VarType type, double lower, double upper) {
    variables_.push_back({std::move(name), type, lower, upper});
    return variables_.size() - 1;
  }

  void add_constraint(std::string name, std::string family, std::vector<LinearTerm> terms, Sense sense,
                      double rhs) {
    constraints_.push_back({std::move(name), std::move(family), std::move(terms), sense, rhs});
  }

  void add_objective_term(std::size_t var, double coef) { objective_.push_back({var, coef}); }

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  const std::vector<LinearTerm>& objective() const noexcept { return objective_; }

  std::size_t count(VarType type) const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [&](const Variable& v) { return v.type == type; }));
  }

  // Instance data.
  ClusteredPopulation clusters;            // clusters kept in the model
  std::vector<std::size_t> excluded;       // input clusters dropped (q = 0 or u = 0)
  std::size_t pool_cap = 0;
  std::size_t budget = 0;
  std::int64_t min_sum = 0;                // L
  std::int64_t max_sum = 0;                // U
  PwlExpApprox approx;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<LinearTerm> objective_;
};

/// Variable and constraint counts implied by the formulation.
struct MilpSize {
  std::size_t integer = 0;
  std::size_t binary = 0;
  std::size_t continuous = 0;
  std::size_t constraints = 0;
};

inline MilpSize expected_milp_size(std::size_t clusters, std::size_t budget, std::size_t segments,
                                   std::size_t value_range) {
  MilpSize s;
  s.integer = budget * clusters;
  s.binary = budget * (segments + value_range);
  s.continuous = budget * (4 + segments);
  s.constraints = budget * (10 + 2 * segments) + clusters;
  return s;
}

inline MilpModel build_milp(const ClusteredPopulation& input, std::size_t pool_cap, std::size_t budget,
                            std::size_t segments) {
  if (budget == 0) throw ValidationError("budget must be at least 1");
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  if (segments == 0) throw ValidationError("K must be at least 1");
  MilpModel model;
  std::vector<Cluster> kept;
  for (std::size_t c = 0; c < input.num_clusters(); ++c) {
    const auto& cl = input[c];
    if (cl.utility != std::floor(cl.utility)) {
      throw ValidationError("MILP requires integral utilities (cluster " + std::to_string(c) + ")");
    }
    if (cl.utility > kMaxMilpUtility) throw ValidationError("MILP utilities are limited to 10^4");
    if (cl.q == 0.0 || cl.utility == 0.0) {
      model.excluded.push_back(c);
      continue;
    }
    kept.push_back(cl);
  }
  if (kept.empty()) throw ValidationError("no cluster with positive q and utility");
  model.clusters = ClusteredPopulation(kept);
  model.pool_cap = pool_cap;
  model.budget = budget;

  double min_u = kept.front().utility;
  double max_u = kept.front().utility;
  for (const auto& c : kept) {
    min_u = std::min(min_u, c.utility);
    max_u = std::max(max_u, c.utility);
  }
  model.min_sum = static_cast<std::int64_t>(min_u);
  model.max_sum = static_cast<std::int64_t>(pool_cap) * static_cast<std::int64_t>(max_u);
  const auto domain = log_welfare_domain(model.clusters, pool_cap);
  model.approx = equal_error_partition(domain.lower, domain.upper, segments);
  const auto& f = model.approx;
  const auto cuts = f.breakpoints();
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t num_clusters = kept.size();

  std::vector<std::vector<std::size_t>> x(budget, std::vector<std::size_t>(num_clusters));
  for (std::size_t j = 0; j < budget; ++j) {
    const std::string sj = std::to_string(j);
    for (std::size_t c = 0; c < num_clusters; ++c) {
      x[j][c] = model.add_variable("x_" + sj + "_" + std::to_string(c), VarType::kInteger, 0.0,
                                   static_cast<double>(std::min(kept[c].size, pool_cap)));
    }
    const auto w = model.add_variable("w_" + sj, VarType::kContinuous, 0.0, inf);
    const auto l = model.add_variable("l_" + sj, VarType::kContinuous, f.lower(), f.upper());
    const auto y = model.add_variable("y_" + sj, VarType::kContinuous, std::log(min_u),
                                      std::log(static_cast<double>(model.max_sum)));
    const auto z = model.add_variable("z_" + sj, VarType::kContinuous, static_cast<double>(model.min_sum),
                                      static_cast<double>(model.max_sum));
    std::vector<std::size_t> d(segments);
    std::vector<std::size_t> v(segments);
    for (std::size_t k = 0; k < segments; ++k) {
      d[k] = model.add_variable("d_" + sj + "_" + std::to_string(k), VarType::kBinary, 0.0, 1.0);
    }
    for (std::size_t k = 0; k < segments; ++k) {
      v[k] = model.add_variable("v_" + sj + "_" + std::to_string(k), VarType::kContinuous, -inf, inf);
    }
    std::vector<std::size_t> g;
    for (std::int64_t k = model.min_sum; k <= model.max_sum; ++k) {
      g.push_back(model.add_variable("g_" + sj + "_" + std::to_string(k), VarType::kBinary, 0.0, 1.0));
    }
    model.add_objective_term(w, 1.0);

    // w_j <= sum_k a_k v_jk + b_k d_jk
    std::vector<LinearTerm> wub{{w, 1.0}};
    for (std::size_t k = 0; k < segments; ++k) {
      wub.push_back({v[k], -f.slopes()[k]});
      wub.push_back({d[k], -f.intercepts()[k]});
    }
    model.add_constraint("wub_" + sj, "exp_upper", std::move(wub), Sense::kLessEqual, 0.0);

    std::vector<LinearTerm> dsum;
    for (auto dk : d) dsum.push_back({dk, 1.0});
    model.add_constraint("dsum_" + sj, "segment_select", std::move(dsum), Sense::kEqual, 1.0);

    std::vector<LinearTerm> vsum;
    for (auto vk : v) vsum.push_back({vk, 1.0});
    vsum.push_back({l, -1.0});
    model.add_constraint("vsum_" + sj, "segment_value", std::move(vsum), Sense::kEqual, 0.0);

    for (std::size_t k = 0; k < segments; ++k) {
      const std::string sk = sj + "_" + std::to_string(k);
      model.add_constraint("vlo_" + sk, "segment_lower", {{d[k], cuts[k]}, {v[k], -1.0}}, Sense::kLessEqual, 0.0);
      model.add_constraint("vhi_" + sk, "segment_upper", {{v[k], 1.0}, {d[k], -cuts[k + 1]}}, Sense::kLessEqual,
                           0.0);
    }

    // l_j = y_j + sum_c x_jc log q_c
    std::vector<LinearTerm> ldef{{l, 1.0}, {y, -1.0}};
    for (std::size_t c = 0; c < num_clusters; ++c) ldef.push_back({x[j][c], -std::log(kept[c].q)});
    model.add_constraint("ldef_" + sj, "log_welfare", std::move(ldef), Sense::kEqual, 0.0);

    std::vector<LinearTerm> gsum;
    std::vector<LinearTerm> zsel{{z, 1.0}};
    std::vector<LinearTerm> ysel{{y, 1.0}};
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double value = static_cast<double>(model.min_sum + static_cast<std::int64_t>(k));
      gsum.push_back({g[k], 1.0});
      zsel.push_back({g[k], -value});
      ysel.push_back({g[k], -std::log(value)});
    }
    model.add_constraint("gsum_" + sj, "value_select", std::move(gsum), Sense::kEqual, 1.0);
    model.add_constraint("zsel_" + sj, "value_sum", std::move(zsel), Sense::kEqual, 0.0);
    model.add_constraint("ysel_" + sj, "value_log", std::move(ysel), Sense::kEqual, 0.0);

    std::vector<LinearTerm> zdef{{z, 1.0}};
    std::vector<LinearTerm> size;
    for (std::size_t c = 0; c < num_clusters; ++c) {
      zdef.push_back({x[j][c], -kept[c].utility});
      size.push_back({x[j][c], 1.0});
    }
    model.add_constraint("zdef_" + sj, "utility_sum", std::move(zdef), Sense::kEqual, 0.0);
    model.add_constraint("size_lo_" + sj, "pool_size_lower", size, Sense::kGreaterEqual, 1.0);
    model.add_constraint("size_hi_" + sj, "pool_size_upper", std::move(size), Sense::kLessEqual,
                         static_cast<double>(pool_cap));
  }
  for (std::size_t c = 0; c < num_clusters; ++c) {
    std::vector<LinearTerm> terms;
    for (std::size_t j = 0; j < budget; ++j) terms.push_back({x[j][c], 1.0});
    model.add_constraint("budget_" + std::to_string(c), "cluster_budget", std::move(terms), Sense::kLessEqual,
                         static_cast<double>(kept[c].size));
  }
  return model;
}

namespace detail {

inline std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

/// Writes "a x + b y - c z" with zero coefficients dropped, wrapping long rows.
inline void write_terms(std::ostream& out, const MilpModel& model, const std::vector<LinearTerm>& terms) {
  std::size_t written = 0;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    if (written > 0 && written % 8 == 0) out << "\n   ";
    const double mag = std::abs(t.coef);
    out << (t.coef < 0.0 ? " - " : (written == 0 ? " " : " + "));
    if (mag != 1.0) out << format_number(mag) << ' ';
    out << model.variables()[t.var].name;
    ++written;
  }
  if (written == 0) out << " 0 " << model.variables()[terms.front().var].name;
}

inline std::string lowercase(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace detail

/// CPLEX LP text. Output is deterministic for a given model.
inline void write_lp(std::ostream& out, const MilpModel& model) {
  out << "\\ pooled testing MILP: " << model.clusters.num_clusters() << " clusters, B=" << model.budget
      << ", G=" << model.pool_cap << ", K=" << model.approx.segments()
      << ", eps=" << detail::format_number(model.approx.epsilon()) << "\n";
  out << "Maximize\n obj:";
  detail::write_terms(out, model, model.objective());
  out << "\nSubject To\n";
  for (const auto& c : model.constraints()) {
    out << ' ' << c.name << ':';
    detail::write_terms(out, model, c.terms);
    switch (c.sense) {
      case Sense::kLessEqual: out << " <= "; break;
      case Sense::kGreaterEqual: out << " >= "; break;
      case Sense::kEqual: out << " = "; break;
    }
    out << detail::format_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    if (v.type == VarType::kBinary) continue;
    const bool lo_inf = std::isinf(v.lower);
    const bool hi_inf = std::isinf(v.upper);
    if (lo_inf && hi_inf) {
      out << ' ' << v.name << " free\n";
    } else if (hi_inf) {
      out << ' ' << v.name << " >= " << detail::format_number(v.lower) << '\n';
    } else {
      out << ' ' << (lo_inf ? std::string("-inf") : detail::format_number(v.lower)) << " <= " << v.name
          << " <= " << detail::format_number(v.upper) << '\n';
    }
  }
  auto write_names = [&](const char* header, VarType type) {
    out << header << '\n';
    std::size_t written = 0;
    for (const auto& v : model.variables()) {
      if (v.type != type) continue;
      out << (written % 10 == 0 ? (written == 0 ? " " : "\n ") : " ") << v.name;
      ++written;
    }
    if (written > 0) out << '\n';
  };
  write_names("Generals", VarType::kInteger);
  write_names("Binaries", VarType::kBinary);
  out << "End\n";
}

inline void export_lp(const MilpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_lp(out, model);
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

/// Counts recovered from LP text.
struct LpSummary {
  std::string sense;
  std::size_t constraints = 0;
  std::size_t variables = 0;
  std::size_t generals = 0;
  std::size_t binaries = 0;
  std::vector<std::string> objective_variables;
};

inline LpSummary parse_lp(std::istream& in) {
  enum class Section { kNone, kObjective, kConstraints, kBounds, kGenerals, kBinaries, kEnd };
  LpSummary summary;
  std::set<std::string> names;
  Section section = Section::kNone;
  std::string line;
  auto is_name = [](const std::string& tok) {
    if (tok.empty()) return false;
    const unsigned char first = static_cast<unsigned char>(tok.front());
    if (!(std::isalpha(first) || tok.front() == '_')) return false;
    const auto lower = detail::lowercase(tok);
    return lower != "free" && lower != "inf" && lower != "infinity";
  };
  while (std::getline(in, line)) {
    if (auto pos = line.find('\\'); pos != std::string::npos) line.erase(pos);
    std::istringstream probe(line);
    std::string first;
    if (!(probe >> first)) continue;
    const auto key = detail::lowercase(line.substr(line.find_first_not_of(" \t")));
    auto starts = [&](const char* kw) {
      const std::string k(kw);
      return key.rfind(k, 0) == 0 && (key.size() == k.size() || std::isspace(static_cast<unsigned char>(key[k.size()])));
    };
    if (starts("maximize") || starts("maximise") || starts("minimize") || starts("minimise")) {
      section = Section::kObjective;
      summary.sense = detail::lowercase(first).substr(0, 3);
      continue;
    }
    if (starts("subject to") || starts("st") || starts("s.t.")) { section = Section::kConstraints; continue; }
    if (starts("bounds")) { section = Section::kBounds; continue; }
    if (starts("generals") || starts("general")) { section = Section::kGenerals; continue; }
    if (starts("binaries") || starts("binary")) { section = Section::kBinaries; continue; }
    if (starts("end")) { section = Section::kEnd; continue; }

    std::string body = line;
    if (section == Section::kObjective || section == Section::kConstraints) {
      if (auto colon = body.find(':'); colon != std::string::npos) {
        if (section == Section::kConstraints) ++summary.constraints;
        body = body.substr(colon + 1);
      }
    }
    for (auto& ch : body) {
      if (ch == '<' || ch == '>' || ch == '=' || ch == '+') ch = ' ';
    }
    std::istringstream tokens(body);
    std::string tok;
    while (tokens >> tok) {
      if (tok == "-") continue;
      if (!is_name(tok)) continue;
      names.insert(tok);
      if (section == Section::kObjective) summary.objective_variables.push_back(tok);
      if (section == Section::kGenerals) ++summary.generals;
      if (section == Section::kBinaries) ++summary.binaries;
    }
  }
  summary.variables = names.size();
  return summary;
}

struct PwlObjective {
  double sigma = 0.0;        // true welfare, sum_j exp(l_j)
  double sigma_prime = 0.0;  // surrogate, sum_j f(l_j)
};

/// Evaluates an integer assignment x (B rows of per-cluster counts over the
/// model's kept clusters).
inline PwlObjective pwl_objective(const MilpModel& model, const ClusterAssignment& x) {
  const auto& clusters = model.clusters;
  if (x.size() != model.budget) throw ValidationError("assignment needs one row per test (tests)");
  std::vector<std::size_t> used(clusters.num_clusters(), 0);
  PwlObjective out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j].size() != clusters.num_clusters()) throw ValidationError("assignment row width mismatch (tests)");
    std::size_t size = 0;
    double sum = 0.0;
    double log_q = 0.0;
    for (std::size_t c = 0; c < x[j].size(); ++c) {
      size += x[j][c];
      used[c] += x[j][c];
      sum += static_cast<double>(x[j][c]) * clusters[c].utility;
      log_q += static_cast<double>(x[j][c]) * std::log(clusters[c].q);
    }
    if (size < 1) throw ValidationError("infeasible assignment: pool_size_lower violated for test " + std::to_string(j));
    if (size > model.pool_cap) {
      throw ValidationError("infeasible assignment: pool_size_upper violated for test " + std::to_string(j));
    }
    const double l = std::log(sum) + log_q;
    out.sigma += std::exp(l);
    out.sigma_prime += model.approx(l);
  }
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c] > clusters[c].size) {
      throw ValidationError("infeasible assignment: cluster_budget violated for cluster " + std::to_string(c));
    }
  }
  return out;
}

struct ApproxResult {
  Regime regime;
  double welfare = 0.0;              // true welfare of the returned regime
  double surrogate = 0.0;            // its piecewise-linear objective
  double additive_guarantee = 0.0;   // eps * B
  PwlExpApprox approx;
};

/// Maximizes the piecewise-linear surrogate exactly by enumerating
/// non-overlapping regimes with exactly min(B, n') nonempty tests, where n'
/// counts individuals with positive q and utility. Stands in for an external
/// MILP solver on small instances.
inline ApproxResult approx_regime_small(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                        std::size_t segments, const OracleLimits& limits = {}) {
  if (budget == 0) throw ValidationError("budget must be at least 1");
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  if (!pop.integral_utilities()) throw ValidationError("approx requires integral utilities");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop.q(i) > 0.0 && pop.utility(i) > 0.0) kept.push_back(i);
  }
  ApproxResult result;
  result.regime = Regime(budget, pool_cap);
  if (kept.empty()) return result;
  if (kept.size() > 12 || budget > 3) throw CapacityError("approx_regime_small limited to n <= 12 and B <= 3");
  const auto clusters = ClusteredPopulation::from_population(pop.subset(kept));
  const auto domain = log_welfare_domain(clusters, pool_cap);
  result.approx = equal_error_partition(domain.lower, domain.upper, segments);
  result.additive_guarantee = result.approx.epsilon() * static_cast<double>(budget);

  auto surrogate = [&](std::uint32_t mask) {
    double sum = 0.0;
    double log_q = 0.0;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) {
      const auto i = kept[static_cast<std::size_t>(std::countr_zero(m))];
      sum += pop.utility(i);
      log_q += std::log(pop.q(i));
    }
    return result.approx(std::log(sum) + log_q);
  };
  const auto packing = best_disjoint_packing<double>(kept.size(), pool_cap, std::min(budget, kept.size()), surrogate,
                                                     PackingMode::kExactly, limits);
  if (!packing.feasible) return result;
  for (auto mask : packing.tests) {
    std::vector<std::size_t> members;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) members.push_back(kept[std::countr_zero(m)]);
    result.regime.add(Test(std::move(members)));
  }
  result.surrogate = packing.value;
  result.welfare = regime_welfare_nonoverlapping(pop, result.regime).total;
  return result;
}

}  // namespace pooltest

#endif  // POOLTEST_MILP_HPP
