#include "hoiplan/llm.hpp"

#include "hoiplan/error.hpp"
#include "hoiplan/relations.hpp"

#include <httplib.h>

#include <charconv>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <thread>

namespace hoiplan {

namespace {

using json_io::Json;
using json_io::format_double;

constexpr std::string_view kSystemPrompt =
    "You are a planner that rearranges objects in a 3D scene so that a person can carry out "
    "an instruction.\n"
    "Describe the target layout with these relation functions, one call per line:\n"
    "  on(object1, object2): object1 rests on the top surface of object2.\n"
    "  adjacent(object1, object2, direction, distance): object1 is placed distance meters "
    "from object2 in a compass direction (north, south, east, west, northeast, northwest, "
    "southeast, southwest).\n"
    "  facing(object1, object2): the front of object1 points toward object2.\n"
    "object1 is always an object that has to move. Static objects never move.\n"
    "Then give the execution plan with one object per line in a natural order, every line "
    "exactly in this form:\n"
    "  lift the <object>, move the <object>, put down the <object>\n"
    "An object that rests on another object is moved before the object below it.\n"
    "Answer with three sections in this order:\n"
    "Reasoning: a short explanation.\n"
    "Relations:\n"
    "```relations\n"
    "<relation calls>\n"
    "```\n"
    "Plan:\n"
    "```plan\n"
    "<plan lines>\n"
    "```\n";

std::string vec_text(std::initializer_list<double> values) {
  std::string s = "[";
  bool first = true;
  for (double v : values) {
    if (!first) s += ", ";
    s += format_double(v);
    first = false;
  }
  return s + "]";
}

enum class Kind { None, Relations, Plan, Reasoning };

Kind kind_of_name(std::string_view raw) {
  std::string name;
  for (char c : raw) {
    if (c == '*' || c == '_' || c == '`') continue;
    name += c;
  }
  name = to_lower_ascii(trim(name));
  if (name == "relations" || name == "relation" || name == "spatial relations" ||
      name == "spatial relationships" || name == "relationships" || name == "scene map") {
    return Kind::Relations;
  }
  if (name == "plan" || name == "execution plan" || name == "action plan" || name == "actions" ||
      name == "steps") {
    return Kind::Plan;
  }
  if (name == "reasoning" || name == "reason" || name == "explanation") return Kind::Reasoning;
  return Kind::None;
}

struct Label {
  Kind kind = Kind::None;
  std::string rest;
};

std::string_view strip_emphasis(std::string_view s) {
  s = trim(s);
  while (s.starts_with("**") || s.starts_with("__")) s = trim(s.substr(2));
  return s;
}

std::optional<Label> parse_label(std::string_view line) {
  std::string_view s = trim(line);
  bool heading = false;
  while (s.starts_with('#')) {
    heading = true;
    s.remove_prefix(1);
  }
  s = strip_emphasis(s);
  const auto colon = s.find(':');
  Label label;
  if (colon != std::string_view::npos) {
    label.kind = kind_of_name(s.substr(0, colon));
    label.rest = std::string(strip_emphasis(s.substr(colon + 1)));
  } else if (heading) {
    label.kind = kind_of_name(s);
  }
  if (label.kind == Kind::None) return std::nullopt;
  return label;
}

std::string strip_marker(std::string_view line) {
  std::string_view s = trim(line);
  if (s.starts_with("- ") || s.starts_with("* ") || s.starts_with("+ ")) {
    s = trim(s.substr(2));
  } else if (s.starts_with("\xe2\x80\xa2")) {
    s = trim(s.substr(3));
  } else {
    std::size_t i = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i > 0 && i + 1 < s.size() && (s[i] == '.' || s[i] == ')') && s[i + 1] == ' ') {
      s = trim(s.substr(i + 2));
    }
  }
  if (s.starts_with('`')) {
    const auto close = s.rfind('`');
    if (close > 0 && s.substr(close + 1).find_first_not_of(",.; ") == std::string_view::npos) {
      s = trim(s.substr(1, close - 1));
    }
  }
  return std::string(s);
}

bool looks_like_call(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  if (i == 0) return false;
  while (i < s.size() && s[i] == ' ') ++i;
  if (i >= s.size() || s[i] != '(') return false;
  std::string_view tail = s;
  while (!tail.empty() && (tail.back() == ';' || tail.back() == ',' || tail.back() == '.')) {
    tail.remove_suffix(1);
  }
  return !tail.empty() && tail.back() == ')';
}

bool looks_like_step(std::string_view s) {
  return to_lower_ascii(s.substr(0, std::min<std::size_t>(s.size(), 5))) == "lift ";
}

std::string clean_call(std::string_view s) {
  while (!s.empty() && (s.back() == ',' || s.back() == '.')) s.remove_suffix(1);
  return std::string(trim(s));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\r') {
      lines.push_back(cur);
      cur.clear();
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  lines.push_back(cur);
  return lines;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

Kind classify(const std::vector<std::string>& lines) {
  int calls = 0;
  int steps = 0;
  for (const auto& l : lines) {
    if (looks_like_step(l)) {
      ++steps;
    } else if (looks_like_call(l)) {
      ++calls;
    }
  }
  if (calls > 0 && calls >= steps) return Kind::Relations;
  if (steps > 0) return Kind::Plan;
  return Kind::None;
}

std::string body_of(Kind kind, const std::vector<std::string>& raw_lines, bool filter) {
  std::vector<std::string> kept;
  for (const auto& raw : raw_lines) {
    const std::string l = strip_marker(raw);
    if (l.empty()) continue;
    if (kind == Kind::Relations) {
      if (filter && !looks_like_call(l)) continue;
      kept.push_back(clean_call(l));
    } else if (kind == Kind::Plan) {
      if (filter && !looks_like_step(l)) continue;
      kept.push_back(l);
    } else {
      kept.push_back(std::string(trim(raw)));
    }
  }
  return std::string(trim(join(kept)));
}

std::optional<Sections> sections_from_json(std::string_view text) {
  Json j;
  try {
    j = json_io::parse(text);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!j.is_object() || !j.contains("relations") || !j.contains("plan")) return std::nullopt;
  auto text_of = [](const Json& v, Kind kind) -> std::optional<std::string> {
    std::vector<std::string> lines;
    if (v.is_string()) {
      lines = split_lines(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_string()) return std::nullopt;
        lines.push_back(e.get<std::string>());
      }
    } else {
      return std::nullopt;
    }
    return body_of(kind, lines, false);
  };
  auto rel = text_of(j["relations"], Kind::Relations);
  auto plan = text_of(j["plan"], Kind::Plan);
  if (!rel || !plan) return std::nullopt;
  Sections s{*rel, *plan, ""};
  if (j.contains("reasoning") && j["reasoning"].is_string()) {
    s.reasoning_text = std::string(trim(j["reasoning"].get<std::string>()));
  }
  return s;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

PromptBundle render_prompt(const Scene& scene, std::string_view instruction) {
  PromptBundle b;
  b.system_text = std::string(kSystemPrompt);
  std::string u;
  u += "Instruction: ";
  u += instruction;
  u += "\n\nScene bounds [x0, y0, x1, y1] in meters: " +
       vec_text({scene.bounds.x0, scene.bounds.y0, scene.bounds.x1, scene.bounds.y1}) + "\n";
  u += "North direction: " + vec_text({scene.north.x(), scene.north.y()}) + " (z is up)\n";
  u += "Objects:\n";
  for (const auto& o : scene.objects) {
    const Vec3& p = o.initial_pose.position();
    const Quat& q = o.initial_pose.orientation();
    u += "- " + o.id + ": " + (o.is_static ? "static" : "movable") +
         "; half_extents " + vec_text({o.half_extents.x(), o.half_extents.y(), o.half_extents.z()}) +
         "; position " + vec_text({p.x(), p.y(), p.z()}) +
         "; orientation [w, x, y, z] " + vec_text({q.w(), q.x(), q.y(), q.z()}) +
         "; front " + vec_text({o.canonical_dir.x(), o.canonical_dir.y(), o.canonical_dir.z()}) +
         "\n";
  }
  b.user_text = std::move(u);
  return b;
}

std::string prompt_hash(const PromptBundle& bundle) {
  std::uint64_t h = fnv1a(bundle.system_text);
  h = fnv1a(std::string_view("\0", 1), h);
  h = fnv1a(bundle.user_text, h);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

Sections extract_sections(std::string_view raw_text) {
  const std::string_view whole = trim(raw_text);
  if (whole.starts_with('{')) {
    if (auto s = sections_from_json(whole)) return *s;
  }
  const std::vector<std::string> lines = split_lines(raw_text);
  std::optional<std::string> relations;
  std::optional<std::string> plan;
  std::optional<std::string> reasoning;
  auto offer = [&](Kind kind, std::string body) {
    if (body.empty()) return;
    if (kind == Kind::Relations && !relations) relations = std::move(body);
    if (kind == Kind::Plan && !plan) plan = std::move(body);
    if (kind == Kind::Reasoning && !reasoning) reasoning = std::move(body);
  };

  Kind pending = Kind::None;  // label awaiting its body
  std::vector<std::string> section;
  auto flush = [&]() {
    if (pending != Kind::None) offer(pending, body_of(pending, section, true));
    section.clear();
  };

  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string_view t = trim(lines[i]);
    if (t.starts_with("```") || t.starts_with("~~~")) {
      const std::string fence(t.substr(0, 3));
      const std::string info = to_lower_ascii(trim(t.substr(3)));
      std::vector<std::string> body;
      ++i;
      while (i < lines.size() && !trim(lines[i]).starts_with(fence)) body.push_back(lines[i++]);
      ++i;  // closing fence
      Kind kind = kind_of_name(info);
      if (info == "json") {
        if (auto s = sections_from_json(join(body))) {
          offer(Kind::Relations, s->relations_text);
          offer(Kind::Plan, s->plan_text);
          offer(Kind::Reasoning, s->reasoning_text);
          continue;
        }
      }
      if (kind == Kind::None || kind == Kind::Reasoning) {
        kind = (pending == Kind::Relations || pending == Kind::Plan) ? pending : classify(body);
      }
      if (!section.empty() && pending != Kind::None && pending != kind) flush();
      section.clear();
      pending = Kind::None;
      if (kind != Kind::None) offer(kind, body_of(kind, body, false));
      continue;
    }
    if (auto label = parse_label(lines[i])) {
      flush();
      pending = label->kind;
      if (!label->rest.empty()) section.push_back(label->rest);
      ++i;
      continue;
    }
    if (pending != Kind::None) section.push_back(lines[i]);
    ++i;
  }
  flush();

  if (!relations) {
    throw Error(ErrorCode::SectionMissing, "response has no relations section",
                {{"which", "relations"}});
  }
  if (!plan) {
    throw Error(ErrorCode::SectionMissing, "response has no plan section", {{"which", "plan"}});
  }
  return {*relations, *plan, reasoning.value_or("")};
}

std::string render_sections(const Sections& s) {
  std::string out;
  if (!s.reasoning_text.empty()) out += "Reasoning:\n" + s.reasoning_text + "\n\n";
  out += "Relations:\n```relations\n" + s.relations_text + "\n```\n\n";
  out += "Plan:\n```plan\n" + s.plan_text + "\n```\n";
  return out;
}

MockBackend::MockBackend(std::filesystem::path fixtures_dir) : dir_(std::move(fixtures_dir)) {}

std::filesystem::path MockBackend::fixture_path(const PromptBundle& bundle) const {
  return dir_ / (prompt_hash(bundle) + ".txt");
}

std::string MockBackend::complete_raw(const PromptBundle& bundle) {
  const auto path = fixture_path(bundle);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::MissingFixture, "no mock response registered for this prompt",
                {{"hash", prompt_hash(bundle)}, {"path", path.string()}});
  }
  return json_io::read_file(path);
}

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttpReply post(const std::string& url,
                 const std::vector<std::pair<std::string, std::string>>& headers,
                 const std::string& body, double timeout_seconds) override {
    HttpReply reply;
    const auto scheme_end = url.find("://");
    const auto path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    if (!client.is_valid()) {
      reply.body = "unsupported endpoint: " + origin;
      return reply;
    }
    const auto timeout = std::chrono::milliseconds(
        static_cast<long long>(std::max(0.001, timeout_seconds) * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      const auto err = res.error();
      reply.timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
      reply.body = httplib::to_string(err);
      return reply;
    }
    reply.status = res->status;
    reply.body = res->body;
    return reply;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

HttpConfig http_config_from_env() {
  HttpConfig c;
  if (const char* v = std::getenv("HOIPLAN_LLM_URL"); v && *v) c.url = v;
  if (const char* v = std::getenv("HOIPLAN_LLM_API_KEY"); v && *v) c.api_key = v;
  if (const char* v = std::getenv("HOIPLAN_LLM_MODEL"); v && *v) c.model = v;
  if (const char* v = std::getenv("HOIPLAN_LLM_TIMEOUT"); v && *v) {
    const std::string_view s(v);
    double t = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), t);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::SchemaError, "HOIPLAN_LLM_TIMEOUT must be a positive number",
                  {{"value", std::string(s)}});
    }
    c.timeout_seconds = t;
  }
  return c;
}

Json chat_payload(const PromptBundle& bundle, const std::string& model) {
  Json j = Json::object();
  j["model"] = model;
  j["temperature"] = 0;
  Json messages = Json::array();
  messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
  messages.push_back({{"role", "user"}, {"content", bundle.user_text}});
  j["messages"] = std::move(messages);
  return j;
}

std::string parse_chat_response(std::string_view body, int status) {
  Json j;
  try {
    j = json_io::parse(body);
  } catch (const Error&) {
    throw Error(ErrorCode::Transport, "response body is not JSON", {{"status", status}});
  }
  if (j.is_object() && j.contains("choices") && j["choices"].is_array() &&
      !j["choices"].empty()) {
    const Json& c = j["choices"][0];
    if (c.is_object() && c.contains("message") && c["message"].is_object() &&
        c["message"].contains("content") && c["message"]["content"].is_string()) {
      return c["message"]["content"].get<std::string>();
    }
  }
  throw Error(ErrorCode::Transport, "response has no choices[0].message.content",
              {{"status", status}});
}

HttpBackend::HttpBackend(HttpConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!config_.sleep) {
    config_.sleep = [](double s) {
      std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
  }
}

std::string HttpBackend::complete_raw(const PromptBundle& bundle) {
  const std::string payload = json_io::dump(chat_payload(bundle, config_.model));
  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const int attempts = std::max(0, config_.retries) + 1;
  HttpReply last;
  for (int a = 0; a < attempts; ++a) {
    last = transport_->post(config_.url, headers, payload, config_.timeout_seconds);
    if (!last.timed_out) {
      if (last.status >= 200 && last.status < 300) {
        return parse_chat_response(last.body, last.status);
      }
      if (last.status >= 400 && last.status < 500) {
        throw Error(ErrorCode::Transport, "endpoint rejected the request",
                    {{"status", last.status}, {"attempts", a + 1}});
      }
    }
    if (a + 1 < attempts) config_.sleep(config_.backoff_seconds * std::pow(2.0, a));
  }
  if (last.timed_out) {
    throw Error(ErrorCode::Timeout, "endpoint timed out",
                {{"attempts", attempts}, {"timeout_seconds", config_.timeout_seconds}});
  }
  throw Error(ErrorCode::Transport, "endpoint failed",
              {{"status", last.status}, {"attempts", attempts}});
}

std::unique_ptr<LlmBackend> make_backend(std::string_view name,
                                         const std::filesystem::path& fixtures_dir,
                                         const TransportFactory& transport) {
  if (name == "mock") return std::make_unique<MockBackend>(fixtures_dir);
  if (name == "http") return std::make_unique<HttpBackend>(http_config_from_env(), transport());
  throw Error(ErrorCode::SchemaError, "unknown LLM backend", {{"backend", std::string(name)}});
}

LlmResponse complete(const PromptBundle& bundle, LlmBackend& backend) {
  LlmResponse r;
  r.raw_text = backend.complete_raw(bundle);
  r.extracted = extract_sections(r.raw_text);
  return r;
}

}  // namespace hoiplan
