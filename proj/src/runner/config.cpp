// Copyright 2026 The CREM Sampling Authors
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

#include "crem/runner/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "crem/error.hpp"
#include "crem/random.hpp"

namespace crem::runner {

using nlohmann::json;

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ": " + message
                                  : message),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string field, const std::string& message)
    : std::runtime_error("invalid '" + field + "': " + message), field_(std::move(field)) {}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::uint64_t parse_seed(std::string_view text) {
  std::uint64_t value = 0;
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("seed", "expected a decimal or 0x-prefixed unsigned 64-bit integer");
  }
  return value;
}

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  json parse() {
    json doc = json::object();
    json* table = &doc;
    std::set<std::string> seen_tables;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        const int line = line_, col = col_;
        advance();
        skip_spaces();
        const std::string name = bare_key();
        skip_spaces();
        expect(']');
        if (!seen_tables.insert(name).second) {
          throw ConfigError("table [" + name + "] defined twice", line, col);
        }
        if (doc.contains(name)) throw ConfigError("key '" + name + "' redefined as a table", line, col);
        doc[name] = json::object();
        table = &doc[name];
      } else {
        const int line = line_, col = col_;
        const std::string key = bare_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        json value = parse_value();
        if (table->contains(key)) throw ConfigError("duplicate key '" + key + "'", line, col);
        (*table)[key] = std::move(value);
      }
      end_of_line();
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(message, line_, col_); }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }
  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') advance();
    }
  }
  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }
  void skip_whitespace_in_array() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') advance();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    advance();
  }

  std::string bare_key() {
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      key.push_back(peek());
      advance();
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (c == 't' || c == 'f') {
      std::string word;
      while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) {
        word.push_back(peek());
        advance();
      }
      if (word == "true") return true;
      if (word == "false") return false;
      fail("unknown literal '" + word + "'");
    }
    if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      return parse_number();
    }
    fail("expected a value");
  }

  json parse_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = peek();
        advance();
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
        continue;
      }
      out.push_back(c);
    }
    return out;
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    for (;;) {
      skip_whitespace_in_array();
      if (peek() == ']') {
        advance();
        return arr;
      }
      if (peek() == '[') fail("nested arrays are not supported");
      arr.push_back(parse_value());
      skip_whitespace_in_array();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json parse_number() {
    const int line = line_, col = col_;
    std::string raw;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == '_')) {
      raw.push_back(peek());
      advance();
    }
    std::string digits;
    for (char c : raw) {
      if (c != '_') digits.push_back(c);
    }
    const bool hex = digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X');
    if (hex) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(digits.data() + 2, digits.data() + digits.size(), v, 16);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw ConfigError("malformed hexadecimal integer '" + raw + "'", line, col);
      }
      return v;
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
      const char* last = digits.data() + digits.size();
      if (digits[0] == '-') {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && ptr == last) return v;
      } else {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && ptr == last) return v;
      }
      throw ConfigError("malformed integer '" + raw + "'", line, col);
    }
    double v = 0.0;
    const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError("malformed number '" + raw + "'", line, col);
    }
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Schema

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"", {"experiment", "seed", "workers", "out_dir", "output", "format", "plot", "dense_cap",
            "spec", "grid", "envelope"}},
      {"spec", {"name", "breakpoints", "slopes"}},
      {"grid", {"beta", "N", "M", "epsilon", "K", "z", "reals", "trials", "reps", "budget",
                "record", "algorithm"}},
      {"envelope", {"gap_factor", "sigma"}},
  };
  return s;
}

std::string suggestion(const std::string& key) {
  std::string best;
  std::size_t best_d = 3;
  for (const auto& [table, keys] : schema()) {
    for (const auto& k : keys) {
      const std::size_t d = levenshtein(key, k);
      if (d < best_d) {
        best_d = d;
        best = table.empty() ? k : table + "." + k;
      }
    }
  }
  return best;
}

void check_keys(const json& obj, const std::string& table) {
  const auto& allowed = schema().at(table);
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const std::string where = table.empty() ? key : table + "." + key;
      std::string msg = "unknown key '" + where + "'";
      const auto hint = suggestion(key);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      throw ValidationError(where, msg);
    }
  }
}

std::string path_of(const std::string& table, const std::string& key) {
  return table.empty() ? key : table + "." + key;
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
      throw ValidationError(field, "integer out of range");
    }
    return static_cast<long long>(u);
  }
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<long long>(d);
  }
  throw ValidationError(field, "expected an integer");
}

int as_int(const json& v, const std::string& field) {
  const long long x = as_integer(v, field);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ValidationError(field, "integer out of range");
  }
  return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ValidationError(field, "expected a string");
  return v.get<std::string>();
}

template <class T, class F>
std::vector<T> as_list(const json& v, const std::string& field, F convert) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(convert(e, field));
  } else {
    out.push_back(convert(v, field));
  }
  return out;
}

std::uint64_t seed_value(const json& v) {
  if (v.is_string()) return parse_seed(v.get<std::string>());
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ValidationError("seed", "expected a non-negative integer or a 0x-prefixed string");
}

json seed_json(std::uint64_t seed) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string hex = "0x";
  for (int i = 60; i >= 0; i -= 4) hex.push_back(kDigits[(seed >> i) & 0xF]);
  return hex;
}

}  // namespace

json parse_toml_subset(std::string_view text) { return TomlReader(text).parse(); }

// ---------------------------------------------------------------------------
// ExperimentConfig

CovarianceSpec ExperimentConfig::covariance() const {
  if (!breakpoints.empty() || !slopes.empty()) return CovarianceSpec(breakpoints, slopes);
  return CovarianceSpec::from_name(spec_name);
}

json ExperimentConfig::canonical() const {
  json c;
  c["experiment"] = experiment;
  if (seed) c["seed"] = seed_json(*seed);
  c["dense_cap"] = dense_cap;
  json s = json::object();
  if (!spec_name.empty()) s["name"] = spec_name;
  if (!breakpoints.empty()) s["breakpoints"] = breakpoints;
  if (!slopes.empty()) s["slopes"] = slopes;
  c["spec"] = s;
  json g;
  g["beta"] = beta;
  g["N"] = N;
  g["M"] = M;
  g["epsilon"] = epsilon;
  g["K"] = K;
  g["z"] = z;
  g["reals"] = reals;
  g["trials"] = trials;
  g["reps"] = reps;
  g["budget"] = budget;
  g["record"] = record;
  g["algorithm"] = algorithm;
  c["grid"] = g;
  c["envelope"] = {{"gap_factor", gap_factor}, {"sigma", sigma}};
  return c;
}

json ExperimentConfig::to_json() const {
  json c = canonical();
  c["workers"] = workers;
  c["out_dir"] = out_dir;
  if (!output.empty()) c["output"] = output;
  c["format"] = format;
  c["plot"] = plot;
  return c;
}

std::string ExperimentConfig::hash() const {
  const std::uint64_t h = fnv1a64(canonical().dump());
  return seed_json(h).get<std::string>().substr(2);
}

void ExperimentConfig::validate() const {
  if (experiment.empty()) throw ValidationError("experiment", "missing experiment kind");
  if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), experiment) ==
      kExperimentKinds.end()) {
    throw ValidationError("experiment", "unknown kind '" + experiment + "'");
  }
  if (!seed) throw ValidationError("seed", "a seed is required");
  if (workers < 0) throw ValidationError("workers", "must be >= 0 (0 selects automatically)");
  if (format != "csv" && format != "json") throw ValidationError("format", "expected csv or json");
  if (dense_cap < 1 || dense_cap > kHardDenseCap) {
    throw ValidationError("dense_cap", "must lie in [1, " + std::to_string(kHardDenseCap) + "]");
  }
  if (experiment != "brw") {
    if (!has_spec()) throw ValidationError("spec", "a covariance profile is required");
    if (!spec_name.empty() && !breakpoints.empty()) {
      throw ValidationError("spec", "give either a name or breakpoints and slopes");
    }
    try {
      (void)covariance();
    } catch (const std::exception& e) {
      throw ValidationError("spec", e.what());
    }
  }

  auto need = [&](bool nonempty, const char* field) {
    if (!nonempty) throw ValidationError(field, "grid must be nonempty for " + experiment);
  };
  auto single = [&](std::size_t n, const char* field) {
    if (n != 1) throw ValidationError(field, "expected exactly one value for " + experiment);
  };
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("grid.beta", "values must be finite and >= 0");
  }
  for (int n : N) {
    if (n < 1) throw ValidationError("grid.N", "values must be >= 1");
  }
  for (int m : M) {
    if (m < 1) throw ValidationError("grid.M", "values must be >= 1");
  }
  for (double e : epsilon) {
    if (!(e > 0.0)) throw ValidationError("grid.epsilon", "values must be > 0");
  }
  for (int k : K) {
    if (k < 1) throw ValidationError("grid.K", "values must be >= 1");
  }
  for (double v : z) {
    if (!(v > 0.0)) throw ValidationError("grid.z", "values must be > 0");
  }
  if (!M.empty() && !epsilon.empty()) {
    throw ValidationError("grid.M", "give either M or epsilon, not both");
  }
  if (algorithm != "sampler" && algorithm != "uniform") {
    throw ValidationError("grid.algorithm", "expected sampler or uniform");
  }
  if (!(gap_factor >= 1.0)) throw ValidationError("envelope.gap_factor", "must be >= 1");
  if (!(sigma > 0.0)) throw ValidationError("envelope.sigma", "must be > 0");

  const std::string& x = experiment;
  if (x == "thermo") {
    need(!beta.empty(), "grid.beta");
  } else if (x == "sample") {
    single(beta.size(), "grid.beta");
    single(N.size(), "grid.N");
    if (M.empty() && epsilon.empty()) need(false, "grid.M");
    single(M.size() + epsilon.size(), "grid.M");
    if (reps < 1) throw ValidationError("grid.reps", "must be >= 1");
  } else if (x == "kl" || x == "kl-sweep") {
    need(!beta.empty(), "grid.beta");
    need(!N.empty(), "grid.N");
    if (M.empty() && epsilon.empty()) need(false, "grid.M");
    if (x == "kl") {
      single(beta.size(), "grid.beta");
      single(N.size(), "grid.N");
      single(M.size() + epsilon.size(), "grid.M");
    }
    if (reals < 2) throw ValidationError("grid.reals", "must be >= 2");
  } else if (x == "hardness") {
    single(beta.size(), "grid.beta");
    single(N.size(), "grid.N");
    if (K.size() > 1) throw ValidationError("grid.K", "at most one value for hardness");
    if (z.size() > 1) throw ValidationError("grid.z", "at most one value for hardness");
    if (M.size() > 1 || !epsilon.empty()) throw ValidationError("grid.M", "at most one M for hardness");
    if (trials < 1) throw ValidationError("grid.trials", "must be >= 1");
    if (budget < 1) throw ValidationError("grid.budget", "must be >= 1");
  } else if (x == "steep-rate") {
    need(!N.empty(), "grid.N");
    single(K.size(), "grid.K");
    single(z.size(), "grid.z");
    if (trials < 100) throw ValidationError("grid.trials", "must be >= 100");
  } else if (x == "brw") {
    need(!M.empty(), "grid.M");
    need(!beta.empty(), "grid.beta");
    if (trials < 100) throw ValidationError("grid.trials", "must be >= 100");
  }
  for (std::uint64_t n : record) {
    if (n < 1) throw ValidationError("grid.record", "values must be >= 1");
  }
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  check_keys(doc, "");
  ExperimentConfig cfg;
  for (const auto& [key, v] : doc.items()) {
    if (key == "experiment") cfg.experiment = as_string(v, key);
    else if (key == "seed") cfg.seed = seed_value(v);
    else if (key == "workers") cfg.workers = as_int(v, key);
    else if (key == "out_dir") cfg.out_dir = as_string(v, key);
    else if (key == "output") cfg.output = as_string(v, key);
    else if (key == "format") cfg.format = as_string(v, key);
    else if (key == "plot") {
      if (!v.is_boolean()) throw ValidationError(key, "expected true or false");
      cfg.plot = v.get<bool>();
    } else if (key == "dense_cap") cfg.dense_cap = as_int(v, key);
    else if (key == "spec") {
      if (v.is_string()) {
        cfg.spec_name = v.get<std::string>();
        continue;
      }
      if (!v.is_object()) throw ValidationError("spec", "expected a table or a profile name");
      check_keys(v, "spec");
      for (const auto& [k, e] : v.items()) {
        const auto field = path_of("spec", k);
        if (k == "name") cfg.spec_name = as_string(e, field);
        else if (k == "breakpoints") cfg.breakpoints = as_list<double>(e, field, as_double);
        else cfg.slopes = as_list<double>(e, field, as_double);
      }
    } else if (key == "grid") {
      if (!v.is_object()) throw ValidationError("grid", "expected a table");
      check_keys(v, "grid");
      for (const auto& [k, e] : v.items()) {
        const auto field = path_of("grid", k);
        if (k == "beta") cfg.beta = as_list<double>(e, field, as_double);
        else if (k == "N") cfg.N = as_list<int>(e, field, as_int);
        else if (k == "M") cfg.M = as_list<int>(e, field, as_int);
        else if (k == "epsilon") cfg.epsilon = as_list<double>(e, field, as_double);
        else if (k == "K") cfg.K = as_list<int>(e, field, as_int);
        else if (k == "z") cfg.z = as_list<double>(e, field, as_double);
        else if (k == "reals") cfg.reals = as_int(e, field);
        else if (k == "trials") cfg.trials = as_int(e, field);
        else if (k == "reps") cfg.reps = as_int(e, field);
        else if (k == "budget") {
          const long long b = as_integer(e, field);
          if (b < 1) throw ValidationError(field, "must be >= 1");
          cfg.budget = static_cast<std::uint64_t>(b);
        } else if (k == "record") {
          for (long long n : as_list<long long>(e, field, as_integer)) {
            if (n < 1) throw ValidationError(field, "values must be >= 1");
            cfg.record.push_back(static_cast<std::uint64_t>(n));
          }
        } else cfg.algorithm = as_string(e, field);
      }
    } else if (key == "envelope") {
      if (!v.is_object()) throw ValidationError("envelope", "expected a table");
      check_keys(v, "envelope");
      for (const auto& [k, e] : v.items()) {
        const auto field = path_of("envelope", k);
        if (k == "gap_factor") cfg.gap_factor = as_double(e, field);
        else cfg.sigma = as_double(e, field);
      }
    }
  }
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  json doc;
  if (first < text.size() && text[first] == '{') {
    try {
      doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      // Convert the byte offset into a line and column.
      const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
      int line = 1, col = 1;
      for (std::size_t i = 0; i < at; ++i) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ConfigError("malformed JSON", line, col);
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("manifest_version")) {
      doc = doc["config"];
    }
  } else {
    doc = parse_toml_subset(text);
  }
  return config_from_json(doc);
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config_text(buf.str());
  cfg.validate();
  return cfg;
}

}  // namespace crem::runner
