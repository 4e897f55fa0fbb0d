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

// File formats: population CSV (`id,utility,q`), cluster CSV
// (`size,utility,q`) and regime JSON
// (`{"budget":B,"pool_cap":G,"tests":[[...],...]}` with 0-based indices).

#ifndef POOLTEST_IO_HPP
#define POOLTEST_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pooltest/clusters.hpp"
#include "pooltest/core.hpp"

namespace pooltest {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline double parse_double(std::string_view field, std::size_t line, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
  }
  return value;
}

inline std::size_t parse_count(std::string_view field, std::size_t line, const char* what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
  }
  return value;
}

inline std::vector<std::vector<std::string_view>> read_rows(std::istream& in, std::string_view header,
                                                            std::vector<std::string>& storage,
                                                            std::vector<std::size_t>& line_numbers) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!seen_header) {
      if (trim(line) != header) {
        throw ParseError("expected header '" + std::string(header) + "'", line_no);
      }
      seen_header = true;
      continue;
    }
    storage.push_back(line);
    line_numbers.push_back(line_no);
  }
  if (!seen_header) throw ParseError("missing header '" + std::string(header) + "'", line_no);
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t r = 0; r < storage.size(); ++r) {
    auto fields = split_csv(storage[r]);
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_numbers[r]);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

inline Population parse_population(std::istream& in) {
  std::vector<std::string> storage;
  std::vector<std::size_t> lines;
  auto rows = detail::read_rows(in, "id,utility,q", storage, lines);
  std::vector<Individual> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Individual e{std::string(rows[r][0]), detail::parse_double(rows[r][1], lines[r], "utility"),
                 detail::parse_double(rows[r][2], lines[r], "q")};
    if (e.id.empty()) throw ParseError("empty id", lines[r]);
    if (!(e.q >= 0.0 && e.q <= 1.0)) throw ParseError("q outside [0,1]", lines[r]);
    if (!(e.utility >= 0.0)) throw ParseError("negative utility", lines[r]);
    entries.push_back(std::move(e));
  }
  return Population(std::move(entries));
}

inline Population load_population(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open population file '" + path + "'");
  return parse_population(in);
}

inline void write_population(std::ostream& out, const Population& pop) {
  out << "id,utility,q\n";
  out << std::setprecision(17);
  for (const auto& e : pop.entries()) out << e.id << ',' << e.utility << ',' << e.q << '\n';
}

inline ClusteredPopulation parse_clusters(std::istream& in) {
  std::vector<std::string> storage;
  std::vector<std::size_t> lines;
  auto rows = detail::read_rows(in, "size,utility,q", storage, lines);
  std::vector<Cluster> clusters;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Cluster c{detail::parse_count(rows[r][0], lines[r], "size"),
              detail::parse_double(rows[r][1], lines[r], "utility"),
              detail::parse_double(rows[r][2], lines[r], "q")};
    if (c.size == 0) throw ParseError("cluster size must be positive", lines[r]);
    if (!(c.q >= 0.0 && c.q <= 1.0)) throw ParseError("q outside [0,1]", lines[r]);
    if (!(c.utility >= 0.0)) throw ParseError("negative utility", lines[r]);
    clusters.push_back(c);
  }
  return ClusteredPopulation(std::move(clusters));
}

/// Default draw sets: utilities {1,...,10}, healthy-probabilities {0, 0.1, ..., 1}.
inline std::vector<double> default_utility_values() {
  std::vector<double> v;
  for (int k = 1; k <= 10; ++k) v.push_back(k);
  return v;
}

inline std::vector<double> default_q_values() {
  std::vector<double> v;
  for (int k = 0; k <= 10; ++k) v.push_back(k / 10.0);
  return v;
}

/// Each individual's utility and q drawn independently and uniformly from the
/// given value sets. Deterministic for a fixed seed.
inline Population generate_random_population(std::size_t n, std::uint64_t seed,
                                             const std::vector<double>& utility_values = default_utility_values(),
                                             const std::vector<double>& q_values = default_q_values()) {
  if (utility_values.empty() || q_values.empty()) throw ValidationError("empty value set");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_u(0, utility_values.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_q(0, q_values.size() - 1);
  std::vector<Individual> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = utility_values[pick_u(rng)];
    const double q = q_values[pick_q(rng)];
    entries.push_back({"p" + std::to_string(i), u, q});
  }
  return Population(std::move(entries));
}

inline nlohmann::json regime_to_json(const Regime& regime) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : regime.tests()) {
    tests.push_back(std::vector<std::size_t>(t.members().begin(), t.members().end()));
  }
  return {{"budget", regime.budget()}, {"pool_cap", regime.pool_cap()}, {"tests", tests}};
}

inline Regime regime_from_json(const nlohmann::json& j) {
  try {
    Regime regime(j.at("budget").get<std::size_t>(), j.at("pool_cap").get<std::size_t>());
    for (const auto& t : j.at("tests")) regime.add(Test(t.get<std::vector<std::size_t>>()));
    return regime;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed regime JSON: ") + e.what());
  }
}

inline Regime load_regime(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open regime file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed regime JSON: ") + e.what());
  }
  return regime_from_json(j);
}

inline void save_regime(const std::string& path, const Regime& regime) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write regime file '" + path + "'");
  out << regime_to_json(regime).dump() << '\n';
}

}  // namespace pooltest

#endif  // POOLTEST_IO_HPP
