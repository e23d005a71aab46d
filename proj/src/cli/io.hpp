#pragma once

#include "bavc/cli.hpp"
#include "bavc/coding.hpp"
#include "bavc/epi.hpp"
#include "bavc/fock.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace bavc::cli {

using json = nlohmann::json;

/// A parsed config file together with its source text, for diagnostics.
class Config {
 public:
  static Config load(const std::filesystem::path& file);
  static Config from_string(std::string text, std::string name);

  const json& root() const { return root_; }
  [[noreturn]] void fail(const std::string& path, const std::string& message) const;

 private:
  std::string name_;
  std::string text_;
  json root_;
};

/// Typed access to one JSON object, reporting errors by field path.
class Obj {
 public:
  Obj(const Config& cfg, const json& j, std::string path);

  /// Fails on any key outside `allowed`.
  void allow(std::initializer_list<const char*> allowed) const;
  bool has(const char* key) const;

  double number(const char* key) const;
  double number(const char* key, double fallback) const;
  long long integer(const char* key, long long fallback) const;
  long long integer(const char* key) const;
  bool boolean(const char* key, bool fallback) const;
  std::string string(const char* key, const std::string& fallback) const;
  std::string string(const char* key) const;
  std::vector<double> numbers(const char* key, std::vector<double> fallback) const;
  /// A number or an array of numbers.
  std::vector<double> scalar_or_list(const char* key) const;
  std::vector<std::string> strings(const char* key, std::vector<std::string> fallback) const;
  Complex complex(const char* key) const;
  std::vector<Obj> objects(const char* key) const;
  Obj child(const char* key) const;
  const json& raw(const char* key) const;
  const json& value() const { return j_; }
  std::string field(const char* key) const;
  [[noreturn]] void fail(const char* key, const std::string& message) const;

  const Config& config() const { return cfg_; }

 private:
  const Config& cfg_;
  const json& j_;
  std::string path_;
};

Complex parse_complex(const Config& cfg, const json& j, const std::string& path);

/// One or more state recipes (list-valued parameters expand).
std::vector<StateSpec> parse_states(const Obj& o);
JammerSpec parse_jammer(const Obj& o);

/// Header fields shared by every output file.
struct Manifest {
  std::string subcommand;
  std::string config_digest;
  json seed_schedule = json::object();
  json cutoffs = json::object();
  json deficit_budgets = json::object();
  json overrides = json::object();

  json to_json() const;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const Manifest& manifest, const std::vector<std::string>& header);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool first_ = true;
};

void write_json(const std::filesystem::path& file, const json& j);

/// NaN and infinities become strings so the JSON stays valid.
json num(double v);

}  // namespace bavc::cli
