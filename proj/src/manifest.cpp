#include "bandtaper/manifest.hpp"

#include "bandtaper/types.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace bandtaper {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file for digest: " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    if (ctx) EVP_MD_CTX_free(ctx);
    throw NumericalError("sha256: digest init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof(b), "%02x", digest[i]);
    hex += b;
  }
  return hex;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::string& path) {
  InputDigest d;
  d.path = path;
  d.sha256 = sha256_file(path);
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  d.bytes = in ? static_cast<std::uint64_t>(in.tellg()) : 0;
  inputs.push_back(std::move(d));
}

void RunManifest::write(const std::string& path) const {
  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("command", command);
  Json args = Json::array();
  for (const auto& a : argv) args.push(a);
  j.set("argv", std::move(args));
  j.set("seed", seed);
  j.set("threads", threads);
  Json cfg = Json::object();
  for (const auto& [k, v] : config) cfg.set(k, v);
  j.set("config", std::move(cfg));
  Json ins = Json::array();
  for (const auto& d : inputs) {
    Json e = Json::object();
    e.set("path", d.path);
    e.set("sha256", d.sha256);
    e.set("bytes", d.bytes);
    ins.push(std::move(e));
  }
  j.set("inputs", std::move(ins));
  Json outs = Json::array();
  for (const auto& o : outputs) outs.push(o);
  j.set("outputs", std::move(outs));
  j.set("started_at", started_at);
  j.set("finished_at", finished_at);
  j.set("duration_seconds", duration_seconds);
  write_text_file(path, j.dump());
}

}  // namespace bandtaper
