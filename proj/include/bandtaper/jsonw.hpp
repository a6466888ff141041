#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bandtaper {

/**
 * Minimal JSON document with insertion-ordered object keys and fixed number
 * formatting (17 significant digits), so that identical runs serialize to
 * byte-identical files.
 */
class Json {
 public:
  Json() : type_(Type::kNull) {}
  static Json object() { return Json(Type::kObject); }
  static Json array() { return Json(Type::kArray); }
  Json(bool b) : type_(Type::kBool), bool_(b) {}
  Json(double d) : type_(Type::kDouble), num_(d) {}
  Json(std::int64_t i) : type_(Type::kInt), int_(i) {}
  Json(int i) : type_(Type::kInt), int_(i) {}
  Json(std::uint64_t u) : type_(Type::kUInt), uint_(u) {}
  Json(const char* s) : type_(Type::kString), str_(s) {}
  Json(std::string s) : type_(Type::kString), str_(std::move(s)) {}

  Json& set(const std::string& key, Json value);
  Json& push(Json value);

  std::string dump(int indent = 2) const;

 private:
  enum class Type { kNull, kBool, kInt, kUInt, kDouble, kString, kArray, kObject };
  explicit Json(Type t) : type_(t) {}
  void dump_to(std::string& out, int indent, int depth) const;

  Type type_;
  bool bool_ = false;
  double num_ = 0.0;
  std::int64_t int_ = 0;
  std::uint64_t uint_ = 0;
  std::string str_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> fields_;
};

/// Write text to a file, throwing InputError on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bandtaper
