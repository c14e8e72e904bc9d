#pragma once

// Run bookkeeping for the command-line tool: atomic file output, input
// digests and the per-run manifest.

#include "behaviorplan/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <unistd.h>
#include <utility>
#include <vector>

namespace bplan {

using behaviorplan::Error;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes to a sibling temporary and renames it into place, so readers never
/// see a partial file.
inline void write_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into '" + path + "'");
  }
}

class RunManifest {
 public:
  RunManifest(std::string command, std::string version) : command_(std::move(command)), version_(std::move(version)) {}

  void set_config(nlohmann::json config) { config_ = std::move(config); }

  /// Records the digest of bytes already read from `path`.
  void add_input(const std::string& path, std::string_view bytes) {
    inputs_.push_back({{"path", path}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }

  void add_output(const std::string& path) { outputs_.push_back(path); }

  void add_stage(const std::string& name, double seconds) { stages_.push_back({{"name", name}, {"seconds", seconds}}); }

  bool wrote_files() const { return !outputs_.empty(); }

  nlohmann::json to_json() const {
    return {{"tool", "bplan"},       {"version", version_}, {"command", command_}, {"config", config_},
            {"inputs", inputs_},     {"outputs", outputs_}, {"stages", stages_}};
  }

 private:
  std::string command_;
  std::string version_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::string> outputs_;
  nlohmann::json stages_ = nlohmann::json::array();
};

/// Measures one stage into the manifest.
class StageTimer {
 public:
  StageTimer(RunManifest& m, std::string name) : m_(m), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    m_.add_stage(name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count());
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  RunManifest& m_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace bplan
