#include "common.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/experiments.hpp"

#ifndef CCMAP_VERSION
#define CCMAP_VERSION "0.0.0"
#endif

namespace ccmap::cli {

std::string tool_version() { return CCMAP_VERSION; }

fs::path cache_dir() {
  const char* env = std::getenv(kCacheEnv);
  fs::path dir = (env && *env) ? fs::path(env) : fs::temp_directory_path() / "ccmap-cache";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create cache directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp" + hex64(fnv1a64(path.string() + content)).substr(0, 8);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move result into " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_checksum(const fs::path& path) { return hex64(fnv1a64(read_text(path))); }

void Manifest::input(const fs::path& p) {
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += f.filename().string() + ":" + file_checksum(f) + ";";
    inputs_.emplace_back(p.string(), hex64(fnv1a64(acc)));
    return;
  }
  inputs_.emplace_back(p.string(), file_checksum(p));
}

std::string Manifest::config_hash() const { return ccmap::config_hash(config_.dump()); }

fs::path Manifest::write(const std::optional<fs::path>& anchor, const std::optional<fs::path>& dir) {
  J j;
  j["command"] = command_;
  j["tool_version"] = tool_version();
  j["config_hash"] = config_hash();
  j["config"] = config_;
  j["seeds"] = seeds_;
  j["inputs"] = J::array();
  for (const auto& [path, sum] : inputs_) j["inputs"].push_back(J{{"path", path}, {"checksum", sum}});
  j["outputs"] = outputs_;

  fs::path target;
  if (anchor) {
    target = *anchor;
    target += ".manifest.json";
  } else if (dir) {
    target = *dir / "manifest.json";
  } else {
    target = cache_dir() / "manifests" / (command_ + "-" + config_hash() + ".json");
  }
  write_atomic(target, j.dump(2) + "\n");
  return target;
}

void emit_json(const J& result, const std::string& out_path) {
  const std::string text = result.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_atomic(out_path, text);
  }
}

BitFormat resolve_format(const std::string& name, const fs::path& path) {
  if (name.empty() || name == "auto") return format_from_extension(path);
  return parse_bit_format(name);
}

BitDataset load_bits(const std::string& path, const std::string& format) {
  return load_bit_dataset(path, resolve_format(format, path));
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(std::string("invalid number \"") + cell + "\" in " + what);
    }
  }
  return out;
}

}  // namespace ccmap::cli
