#pragma once

#include "bandtaper/jsonw.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bandtaper {

inline constexpr const char* kToolName = "bandtaper";
inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_file(const std::string& path);
std::string iso8601_utc_now();

/**
 * Provenance record written next to every command's outputs: the command
 * line, resolved configuration, seed and thread count, digests of all inputs
 * and the list of outputs. Timestamps live here (and only here) so report
 * files stay byte-identical across reruns.
 */
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::pair<std::string, std::string>> config;

  struct InputDigest {
    std::string path;
    std::string sha256;
    std::uint64_t bytes = 0;
  };
  std::vector<InputDigest> inputs;
  std::vector<std::string> outputs;

  std::string started_at;
  std::string finished_at;
  double duration_seconds = 0.0;

  void add_input(const std::string& path);
  void write(const std::string& path) const;
};

}  // namespace bandtaper
