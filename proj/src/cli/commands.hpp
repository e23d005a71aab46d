#pragma once

#include "io.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace bavc::cli {

/// Global flags shared by every subcommand.
struct Context {
  std::string config_path;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<Index> cutoff_override;
  std::optional<double> tolerance;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  /// Overrides actually given on the command line, for the manifest.
  json overrides() const;
  Config load_config() const;
};

struct LemmaFlags {
  std::string lemma = "all";
  std::optional<int> k, d;
  std::optional<std::size_t> trials;
  std::string budget = "quick";
};

int cmd_epi_scan(const Context& ctx);
int cmd_capacity(const Context& ctx);
int cmd_lemma_check(const Context& ctx, const LemmaFlags& flags);
int cmd_code_sim(const Context& ctx);
int cmd_state_info(const Context& ctx);

PortSign parse_port_sign(const Obj& o, const char* key);

}  // namespace bavc::cli
