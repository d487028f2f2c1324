#include "hoiplan/relations.hpp"

#include "hoiplan/error.hpp"
#include "hoiplan/json_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

namespace hoiplan {

namespace {

constexpr std::array<std::string_view, 8> kCompassNames = {
    "north", "south", "east", "west", "northeast", "northwest", "southeast", "southwest"};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

struct Arg {
  std::string text;
  bool quoted = false;
  int line = 1;
  int column = 1;
};

class RelationParser {
 public:
  explicit RelationParser(std::string_view src) : src_(src) {}

  std::vector<SpatialRelation> run() {
    std::vector<SpatialRelation> out;
    for (;;) {
      skip_separators();
      if (eof()) break;
      out.push_back(call());
      skip_blanks();
      if (eof()) break;
      const char c = peek();
      if (c != '\n' && c != ';' && c != '#') {
        fail("newline or ';'");
      }
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (!eof() && is_blank(peek())) advance();
  }

  void skip_comment() {
    while (!eof() && peek() != '\n') advance();
  }

  void skip_separators() {
    while (!eof()) {
      const char c = peek();
      if (is_blank(c) || c == '\n' || c == ';') {
        advance();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  // Whitespace, including newlines, inside an argument list.
  void skip_inner_space() {
    while (!eof() && (is_blank(peek()) || peek() == '\n')) advance();
  }

  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = eof() ? "end of input" : describe(peek());
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_) + ", column " + std::to_string(column_) +
                    ": expected " + expected + ", found " + found,
                {{"line", line_}, {"column", column_}, {"expected", expected}});
  }

  static std::string describe(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02x", u);
    return buf;
  }

  SpatialRelation call() {
    const int line = line_;
    const int column = column_;
    if (!is_alpha(peek()) && peek() != '_') {
      fail("relation name");
    }
    std::string name;
    while (!eof() && (is_alpha(peek()) || is_digit(peek()) || peek() == '_')) {
      name += peek();
      advance();
    }
    skip_blanks();
    if (eof() || peek() != '(') {
      fail("'('");
    }
    advance();
    std::vector<Arg> args;
    skip_inner_space();
    if (!eof() && peek() == ')') {
      advance();
    } else {
      for (;;) {
        skip_inner_space();
        args.push_back(arg());
        skip_inner_space();
        if (eof()) fail("',' or ')'");
        if (peek() == ',') {
          advance();
          continue;
        }
        if (peek() == ')') {
          advance();
          break;
        }
        fail("',' or ')'");
      }
    }
    return build(name, args, line, column);
  }

  Arg arg() {
    Arg a;
    a.line = line_;
    a.column = column_;
    if (eof()) fail("argument");
    if (peek() == '"') {
      a.quoted = true;
      advance();
      for (;;) {
        if (eof()) fail("closing '\"'");
        char c = peek();
        if (c == '"') {
          advance();
          break;
        }
        if (c == '\\') {
          advance();
          if (eof()) fail("escaped character");
          c = peek();
        }
        a.text += c;
        advance();
      }
      return a;
    }
    std::string raw;
    while (!eof()) {
      const char c = peek();
      if (c == ',' || c == '(' || c == ')' || c == '\n' || c == ';' || c == '#' || c == '"') {
        break;
      }
      raw += c;
      advance();
    }
    a.text = std::string(trim(raw));
    if (a.text.empty()) {
      fail("argument");
    }
    return a;
  }

  static nlohmann::json where(const Arg& a) { return {{"line", a.line}, {"column", a.column}}; }

  SpatialRelation build(const std::string& name, const std::vector<Arg>& args, int line,
                        int column) const {
    const std::string fn = to_lower_ascii(name);
    std::size_t arity;
    if (fn == "on" || fn == "facing") {
      arity = 2;
    } else if (fn == "adjacent") {
      arity = 4;
    } else {
      throw Error(ErrorCode::UnknownRelation, "unknown relation '" + name + "'",
                  {{"line", line}, {"column", column}, {"name", name}});
    }
    if (args.size() != arity) {
      throw Error(ErrorCode::ArityError,
                  fn + " takes " + std::to_string(arity) + " arguments, got " +
                      std::to_string(args.size()),
                  {{"line", line},
                   {"column", column},
                   {"relation", fn},
                   {"expected", arity},
                   {"got", args.size()}});
    }
    if (args[0].text == args[1].text) {
      throw Error(ErrorCode::SelfRelation, fn + " relates '" + args[0].text + "' to itself",
                  {{"line", line}, {"column", column}, {"id", args[0].text}});
    }
    if (fn == "on") {
      return OnRelation{args[0].text, args[1].text};
    }
    if (fn == "facing") {
      return FacingRelation{args[0].text, args[1].text};
    }
    auto dir = parse_compass(args[2].text);
    if (!dir) {
      auto d = where(args[2]);
      d["direction"] = args[2].text;
      throw Error(ErrorCode::BadDirection, "unknown direction '" + args[2].text + "'", d);
    }
    return AdjacentRelation{args[0].text, args[1].text, *dir, distance(args[3])};
  }

  static double distance(const Arg& a) {
    std::string_view s = a.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (a.quoted || s.empty() || ec != std::errc{} || end != s.data() + s.size() ||
        !std::isfinite(v) || !(v > 0.0)) {
      auto d = where(a);
      d["value"] = a.text;
      throw Error(ErrorCode::BadDistance, "distance must be a positive number, got '" + a.text + "'",
                  d);
    }
    return v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool needs_quotes(std::string_view s) {
  if (s.empty() || is_blank(s.front()) || is_blank(s.back()) || s.front() == ' ' ||
      s.back() == ' ') {
    return true;
  }
  for (char c : s) {
    if (c == ',' || c == '(' || c == ')' || c == '\n' || c == ';' || c == '#' || c == '"' ||
        c == '\\') {
      return true;
    }
  }
  return false;
}

std::string render_arg(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_blank(s.front()) || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (is_blank(s.back()) || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::string_view to_string(Compass c) { return kCompassNames[static_cast<std::size_t>(c)]; }

std::optional<Compass> parse_compass(std::string_view token) {
  std::string t;
  for (char c : to_lower_ascii(trim(token))) {
    if (c != '-' && c != '_' && c != ' ') t += c;
  }
  for (std::size_t i = 0; i < kCompassNames.size(); ++i) {
    if (t == kCompassNames[i]) return static_cast<Compass>(i);
  }
  return std::nullopt;
}

Vec2 compass_vector(Compass c, const Vec2& north_in) {
  const Vec2 north = north_in.normalized();
  const Vec2 east(north.y(), -north.x());
  const double d = std::numbers::sqrt2 / 2.0;
  switch (c) {
    case Compass::North: return north;
    case Compass::South: return -north;
    case Compass::East: return east;
    case Compass::West: return -east;
    case Compass::Northeast: return d * (north + east);
    case Compass::Northwest: return d * (north - east);
    case Compass::Southeast: return d * (east - north);
    case Compass::Southwest: return -d * (north + east);
  }
  return north;
}

const std::string& subject(const SpatialRelation& r) {
  return std::visit([](const auto& v) -> const std::string& { return v.object; }, r);
}

const std::string& reference(const SpatialRelation& r) {
  return std::visit(
      [](const auto& v) -> const std::string& {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, OnRelation>) {
          return v.base;
        } else if constexpr (std::is_same_v<T, AdjacentRelation>) {
          return v.anchor;
        } else {
          return v.target;
        }
      },
      r);
}

std::vector<SpatialRelation> parse_relations(std::string_view text) {
  return RelationParser(text).run();
}

std::string render_relation(const SpatialRelation& relation) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, OnRelation>) {
          return "on(" + render_arg(v.object) + ", " + render_arg(v.base) + ")";
        } else if constexpr (std::is_same_v<T, AdjacentRelation>) {
          return "adjacent(" + render_arg(v.object) + ", " + render_arg(v.anchor) + ", " +
                 std::string(to_string(v.direction)) + ", " +
                 json_io::format_double(v.distance) + ")";
        } else {
          return "facing(" + render_arg(v.object) + ", " + render_arg(v.target) + ")";
        }
      },
      relation);
}

std::string render_relations(std::span<const SpatialRelation> relations) {
  std::string out;
  for (const auto& r : relations) {
    out += render_relation(r);
    out += '\n';
  }
  return out;
}

std::string action_text(std::string_view name) {
  std::string n(name);
  return "lift the " + n + ", move the " + n + ", put down the " + n;
}

std::vector<ActionStep> parse_plan(std::string_view text) {
  static constexpr std::array<std::string_view, 3> kPrefixes = {"lift the ", "move the ",
                                                                "put down the "};
  std::vector<ActionStep> steps;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    std::string line = to_lower_ascii(trim(raw));
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.back() == '.') line.pop_back();

    auto mismatch = [&] {
      return Error(ErrorCode::TemplateMismatch,
                   "line " + std::to_string(line_no) +
                       " does not match 'lift the X, move the X, put down the X'",
                   {{"line", line_no}, {"text", std::string(trim(raw))}});
    };

    std::vector<std::string> names;
    std::size_t clause_start = 0;
    for (std::size_t k = 0; k < kPrefixes.size(); ++k) {
      std::size_t clause_end = line.find(',', clause_start);
      if (k + 1 < kPrefixes.size()) {
        if (clause_end == std::string::npos) throw mismatch();
      } else {
        if (clause_end != std::string::npos) throw mismatch();
        clause_end = line.size();
      }
      std::string_view clause = trim(std::string_view(line).substr(clause_start, clause_end - clause_start));
      if (!clause.starts_with(kPrefixes[k])) throw mismatch();
      std::string_view name = trim(clause.substr(kPrefixes[k].size()));
      if (name.empty()) throw mismatch();
      names.emplace_back(name);
      clause_start = clause_end + 1;
    }
    if (names[0] != names[1] || names[0] != names[2]) {
      throw Error(ErrorCode::InconsistentObject,
                  "line " + std::to_string(line_no) + " names different objects",
                  {{"line", line_no}, {"objects", names}});
    }
    steps.push_back({names[0], action_text(names[0])});
    if (end == text.size()) break;
  }
  return steps;
}

std::string render_plan(std::span<const ActionStep> steps) {
  std::string out;
  for (const auto& s : steps) {
    out += s.text;
    out += '\n';
  }
  return out;
}

}  // namespace hoiplan
