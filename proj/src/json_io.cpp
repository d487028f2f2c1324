#include "hoiplan/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hoiplan::json_io {

namespace {

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

void dump_into(const Json& v, std::string& out, int depth) {
  auto indent = [&](int d) { out.append(static_cast<std::size_t>(d) * 2, ' '); };
  switch (v.type()) {
    case Json::value_t::null: out += "null"; return;
    case Json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer: out += std::to_string(v.get<long long>()); return;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<unsigned long long>());
      return;
    case Json::value_t::number_float: out += format_double(v.get<double>()); return;
    case Json::value_t::string: out += v.dump(); return;
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; vectors dominate our files.
      bool flat = true;
      for (const auto& e : v) {
        if (e.is_structured()) {
          flat = false;
          break;
        }
      }
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump_into(v[i], out, depth + 1);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        indent(depth + 1);
        dump_into(v[i], out, depth + 1);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      indent(depth);
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++i) {
        indent(depth + 1);
        out += Json(it.key()).dump();
        out += ": ";
        dump_into(it.value(), out, depth + 1);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      indent(depth);
      out += '}';
      return;
    }
    case Json::value_t::binary:
    case Json::value_t::discarded:
      break;
  }
  throw Error(ErrorCode::SchemaError, "cannot serialize value");
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::SchemaError, "non-finite number cannot be written as JSON");
  }
  if (value == 0.0 && std::signbit(value)) {
    return "-0.0";
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) {
    throw Error(ErrorCode::SchemaError, "number formatting failed");
  }
  return std::string(buf, end);
}

std::string dump(const Json& value) {
  std::string out;
  dump_into(value, out, 0);
  out += '\n';
  return out;
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, "invalid JSON",
                {{"path", ""}, {"byte", e.byte}});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what(),
                {{"path", ""}});
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path.string(), {{"path", path.string()}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write " + path.string(), {{"path", path.string()}});
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(ErrorCode::Io, "write failed for " + path.string(), {{"path", path.string()}});
  }
}

Json load(const std::filesystem::path& path) { return parse(read_file(path)); }

void save(const std::filesystem::path& path, const Json& value) {
  write_file(path, dump(value));
}

bool Cursor::has(std::string_view key) const {
  return node_->is_object() && node_->contains(key);
}

Cursor Cursor::at(std::string_view key) const {
  std::string child = path_ + "/" + escape_pointer_token(key);
  if (!node_->is_object()) {
    fail("expected an object");
  }
  auto it = node_->find(key);
  if (it == node_->end()) {
    throw Error(ErrorCode::SchemaError, "missing field at " + child, {{"path", child}});
  }
  return Cursor(*it, std::move(child));
}

Cursor Cursor::at(std::size_t index) const {
  if (!node_->is_array()) {
    fail("expected an array");
  }
  std::string child = path_ + "/" + std::to_string(index);
  if (index >= node_->size()) {
    throw Error(ErrorCode::SchemaError, "missing element at " + child, {{"path", child}});
  }
  return Cursor((*node_)[index], std::move(child));
}

std::size_t Cursor::array_size() const {
  if (!node_->is_array()) {
    fail("expected an array");
  }
  return node_->size();
}

std::size_t Cursor::array_size(std::size_t expected) const {
  std::size_t n = array_size();
  if (n != expected) {
    fail("expected an array of length " + std::to_string(expected));
  }
  return n;
}

double Cursor::as_double() const {
  if (!node_->is_number()) {
    fail("expected a number");
  }
  return node_->get<double>();
}

long long Cursor::as_int() const {
  if (node_->is_number_integer()) {
    return node_->get<long long>();
  }
  if (node_->is_number_unsigned()) {
    auto u = node_->get<unsigned long long>();
    if (u > static_cast<unsigned long long>(std::numeric_limits<long long>::max())) {
      fail("integer out of range");
    }
    return static_cast<long long>(u);
  }
  fail("expected an integer");
}

bool Cursor::as_bool() const {
  if (!node_->is_boolean()) {
    fail("expected a boolean");
  }
  return node_->get<bool>();
}

std::string Cursor::as_string() const {
  if (!node_->is_string()) {
    fail("expected a string");
  }
  return node_->get<std::string>();
}

void Cursor::fail(const std::string& message) const {
  throw Error(ErrorCode::SchemaError, message + " at " + (path_.empty() ? "/" : path_),
              {{"path", path_}});
}

}  // namespace hoiplan::json_io
