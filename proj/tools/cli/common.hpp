#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccmap/datasets.hpp"

namespace ccmap::cli {

using J = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* kCacheEnv = "CCMAP_CACHE_DIR";

/// Subcommand handlers registered by name; the one selected on the command line runs after parsing.
using Handlers = std::map<std::string, std::function<void()>>;

void register_data_commands(CLI::App& app, Handlers& handlers);
void register_model_commands(CLI::App& app, Handlers& handlers);
void register_study_commands(CLI::App& app, Handlers& handlers);

std::string tool_version();

/// $CCMAP_CACHE_DIR, else <tmp>/ccmap-cache. Created on demand.
fs::path cache_dir();

/// Writes to a sibling temp file, then renames over the target.
void write_atomic(const fs::path& path, const std::string& content);

std::string read_text(const fs::path& path);
std::string file_checksum(const fs::path& path);

/// Canonical record of one invocation. Written before any result.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  J& config() { return config_; }
  void seed(std::uint64_t s) { seeds_.push_back(s); }
  void input(const fs::path& p);
  void output(const fs::path& p) { outputs_.push_back(p.string()); }

  std::string config_hash() const;
  /// Lands next to `anchor` (<anchor>.manifest.json), inside `dir` (manifest.json), or in the cache
  /// when neither is given. Returns the path.
  fs::path write(const std::optional<fs::path>& anchor, const std::optional<fs::path>& dir = std::nullopt);

 private:
  std::string command_;
  J config_ = J::object();
  std::vector<std::uint64_t> seeds_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

/// JSON result to --out (atomically) or stdout.
void emit_json(const J& result, const std::string& out_path);

BitFormat resolve_format(const std::string& name, const fs::path& path);
BitDataset load_bits(const std::string& path, const std::string& format);

std::vector<double> parse_double_list(const std::string& text, const char* what);

}  // namespace ccmap::cli
