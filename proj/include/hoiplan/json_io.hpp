#pragma once

#include "hoiplan/error.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace hoiplan::json_io {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double. -0.0 is written as
/// "-0.0" so the sign survives a reload. Non-finite values throw SchemaError.
std::string format_double(double value);

/// Deterministic serializer: insertion-ordered keys, two-space indent,
/// numbers through format_double. Output always ends with a newline.
std::string dump(const Json& value);

/// Parses text; malformed input becomes SchemaError with the byte offset.
Json parse(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

Json load(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const Json& value);

/// Read-only view of a node plus its JSON-pointer path, for schema checks.
class Cursor {
 public:
  Cursor(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const Json& node() const { return *node_; }
  const std::string& path() const { return path_; }

  bool has(std::string_view key) const;
  Cursor at(std::string_view key) const;
  Cursor at(std::size_t index) const;

  std::size_t array_size() const;
  std::size_t array_size(std::size_t expected) const;

  double as_double() const;
  long long as_int() const;
  bool as_bool() const;
  std::string as_string() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const Json* node_;
  std::string path_;
};

}  // namespace hoiplan::json_io
