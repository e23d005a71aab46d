#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bavc::cli {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string digest(const std::string& canonical) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

const char* type_name(const json& j) {
  return j.type_name();
}

}  // namespace

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigParseError(file.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), file.string());
}

Config Config::from_string(std::string text, std::string name) {
  Config c;
  c.name_ = std::move(name);
  c.text_ = std::move(text);
  try {
    c.root_ = json::parse(c.text_);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(c.text_, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    throw ConfigParseError(c.name_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                           (pos == std::string::npos ? what : what.substr(pos)));
  }
  if (!c.root_.is_object()) throw ConfigParseError(c.name_ + ": top level must be a JSON object");
  return c;
}

void Config::fail(const std::string& path, const std::string& message) const {
  // Best effort: the first line mentioning the last key of the path.
  std::string where = name_;
  auto key = path.substr(path.find_last_of('.') + 1);
  key = key.substr(0, key.find('['));
  if (!key.empty()) {
    const auto pos = text_.find("\"" + key + "\"");
    if (pos != std::string::npos) where += ":" + std::to_string(line_col(text_, pos).first);
  }
  throw ConfigParseError(where + ": field '" + path + "': " + message);
}

// ---------------------------------------------------------------------------

Obj::Obj(const Config& cfg, const json& j, std::string path) : cfg_(cfg), j_(j), path_(std::move(path)) {
  if (!j_.is_object()) cfg_.fail(path_.empty() ? "<root>" : path_, std::string("expected object, got ") + type_name(j_));
}

std::string Obj::field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

void Obj::fail(const char* key, const std::string& message) const { cfg_.fail(field(key), message); }

void Obj::allow(std::initializer_list<const char*> allowed) const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) cfg_.fail(path_.empty() ? it.key() : path_ + "." + it.key(), "unknown field");
  }
}

bool Obj::has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

const json& Obj::raw(const char* key) const {
  if (!has(key)) fail(key, "required field missing");
  return j_.at(key);
}

double Obj::number(const char* key) const {
  const json& v = raw(key);
  if (!v.is_number()) fail(key, std::string("expected number, got ") + type_name(v));
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "expected a finite number");
  return d;
}

double Obj::number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

long long Obj::integer(const char* key) const {
  const json& v = raw(key);
  if (!v.is_number_integer()) fail(key, std::string("expected integer, got ") + type_name(v));
  return v.get<long long>();
}

long long Obj::integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

bool Obj::boolean(const char* key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_boolean()) fail(key, std::string("expected boolean, got ") + type_name(v));
  return v.get<bool>();
}

std::string Obj::string(const char* key) const {
  const json& v = raw(key);
  if (!v.is_string()) fail(key, std::string("expected string, got ") + type_name(v));
  return v.get<std::string>();
}

std::string Obj::string(const char* key, const std::string& fallback) const { return has(key) ? string(key) : fallback; }

std::vector<double> Obj::numbers(const char* key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_array()) fail(key, std::string("expected array of numbers, got ") + type_name(v));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) cfg_.fail(field(key) + "[" + std::to_string(i) + "]", std::string("expected number, got ") + type_name(v[i]));
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> Obj::scalar_or_list(const char* key) const {
  const json& v = raw(key);
  if (v.is_number()) return {v.get<double>()};
  return numbers(key, {});
}

std::vector<std::string> Obj::strings(const char* key, std::vector<std::string> fallback) const {
  if (!has(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_array()) fail(key, std::string("expected array of strings, got ") + type_name(v));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) cfg_.fail(field(key) + "[" + std::to_string(i) + "]", std::string("expected string, got ") + type_name(v[i]));
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

Complex parse_complex(const Config& cfg, const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  cfg.fail(path, "expected a number or [re, im]");
}

Complex Obj::complex(const char* key) const { return parse_complex(cfg_, raw(key), field(key)); }

std::vector<Obj> Obj::objects(const char* key) const {
  const json& v = raw(key);
  if (!v.is_array()) fail(key, std::string("expected array of objects, got ") + type_name(v));
  std::vector<Obj> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(cfg_, v[i], field(key) + "[" + std::to_string(i) + "]");
  return out;
}

Obj Obj::child(const char* key) const { return Obj(cfg_, raw(key), field(key)); }

// ---------------------------------------------------------------------------

std::vector<StateSpec> parse_states(const Obj& o) {
  const std::string kind = o.string("kind");
  std::vector<StateSpec> out;
  if (kind == "vacuum") {
    o.allow({"kind"});
    out.push_back(StateSpec::vacuum());
  } else if (kind == "thermal") {
    o.allow({"kind", "mean_photons"});
    for (double n : o.scalar_or_list("mean_photons")) out.push_back(StateSpec::thermal(n));
  } else if (kind == "phav") {
    o.allow({"kind", "radius"});
    for (double b : o.scalar_or_list("radius")) out.push_back(StateSpec::phav(b));
  } else if (kind == "dphav") {
    o.allow({"kind", "center", "radius"});
    const Complex c = o.complex("center");
    for (double b : o.scalar_or_list("radius")) out.push_back(StateSpec::dphav(c, b));
  } else if (kind == "coherent") {
    o.allow({"kind", "alpha"});
    out.push_back(StateSpec::coherent(o.complex("alpha")));
  } else if (kind == "fock") {
    o.allow({"kind", "n"});
    for (double n : o.scalar_or_list("n")) {
      if (n < 0 || n != std::floor(n)) o.fail("n", "photon numbers must be non-negative integers");
      out.push_back(StateSpec::fock(static_cast<Index>(n)));
    }
  } else if (kind == "fock_mixture") {
    o.allow({"kind", "probabilities"});
    out.push_back(StateSpec::fock_mixture(o.numbers("probabilities", {})));
  } else {
    o.fail("kind", "unknown state kind '" + kind + "'");
  }
  return out;
}

JammerSpec parse_jammer(const Obj& o) {
  const std::string kind = o.string("kind");
  try {
    if (kind == "vacuum") {
      o.allow({"kind"});
      return JammerSpec::vacuum();
    }
    if (kind == "thermal") {
      o.allow({"kind", "mean_photons"});
      return JammerSpec::thermal(o.number("mean_photons"));
    }
    if (kind == "phav") {
      o.allow({"kind", "radius"});
      return JammerSpec::phav(o.number("radius"));
    }
    if (kind == "dphav") {
      o.allow({"kind", "center", "radius"});
      return JammerSpec::dphav(o.complex("center"), o.number("radius"));
    }
    if (kind == "coherent") {
      o.allow({"kind", "alpha"});
      return JammerSpec::coherent(o.complex("alpha"));
    }
    if (kind == "phav_mixture") {
      o.allow({"kind", "components"});
      std::vector<PhavComponent> comps;
      const json& v = o.raw("components");
      if (!v.is_array()) o.fail("components", "expected array of [radius, weight]");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number())
          o.config().fail(o.field("components") + "[" + std::to_string(i) + "]", "expected [radius, weight]");
        comps.push_back({v[i][0].get<double>(), v[i][1].get<double>()});
      }
      return JammerSpec::phav_mixture(std::move(comps));
    }
  } catch (const ConfigParseError&) {
    throw;
  } catch (const Error& e) {
    o.fail("kind", e.what());
  }
  o.fail("kind", "unknown jammer kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

json Manifest::to_json() const {
  return json{{"tool", "bavc"},
              {"version", kToolVersion},
              {"subcommand", subcommand},
              {"config_digest", config_digest},
              {"seed_schedule", seed_schedule},
              {"cutoffs", cutoffs},
              {"deficit_budgets", deficit_budgets},
              {"overrides", overrides}};
}

CsvWriter::CsvWriter(const std::filesystem::path& file, const Manifest& manifest,
                     const std::vector<std::string>& header)
    : out_(file, std::ios::binary) {
  if (!out_) throw Error("cannot write " + file.string());
  out_ << "# manifest " << manifest.to_json().dump() << "\n";
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  sep();
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out_ << s;
  } else {
    out_ << '"';
    for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
    out_ << '"';
  }
  return *this;
}

void CsvWriter::end_row() {
  out_ << "\n";
  first_ = true;
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace bavc::cli
