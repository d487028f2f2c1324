#pragma once

#include "hoiplan/json_io.hpp"
#include "hoiplan/scene.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hoiplan {

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::vector<std::string> expected_sections{"reasoning", "relations", "plan"};
};

/// Fixed guidance in the system role; instruction and object listing in the
/// user role. Byte-stable for equal inputs.
PromptBundle render_prompt(const Scene& scene, std::string_view instruction);

/// 16 lowercase hex digits of FNV-1a 64 over system, NUL, user.
std::string prompt_hash(const PromptBundle& bundle);

struct Sections {
  std::string relations_text;
  std::string plan_text;
  std::string reasoning_text;  // may be empty
};

/// Finds the relations and plan bodies in fenced blocks (tagged or labelled
/// by the preceding line), "Label:" / heading sections, or a JSON object with
/// "relations" and "plan" members. List markers are stripped and surrounding
/// commentary dropped. Errors: SectionMissing{which}.
Sections extract_sections(std::string_view raw_text);

/// Canonical form that extract_sections maps back to the same sections.
std::string render_sections(const Sections& sections);

struct LlmResponse {
  std::string raw_text;
  Sections extracted;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// Raw completion text for the prompt.
  virtual std::string complete_raw(const PromptBundle& bundle) = 0;
};

/// Canned responses: `<dir>/<prompt_hash>.txt`. Errors: MissingFixture.
class MockBackend : public LlmBackend {
 public:
  explicit MockBackend(std::filesystem::path fixtures_dir);
  std::string complete_raw(const PromptBundle& bundle) override;
  std::filesystem::path fixture_path(const PromptBundle& bundle) const;

 private:
  std::filesystem::path dir_;
};

struct HttpReply {
  int status = 0;  // 0 when no response arrived
  std::string body;
  bool timed_out = false;
};

/// Seam for the HTTP layer so retries and payloads can be tested offline.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpReply post(const std::string& url,
                         const std::vector<std::pair<std::string, std::string>>& headers,
                         const std::string& body, double timeout_seconds) = 0;
};

/// cpp-httplib client; https needs OpenSSL at build time.
std::shared_ptr<HttpTransport> make_default_transport();

struct HttpConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  std::string model = "gpt-4o";
  double timeout_seconds = 60.0;
  int retries = 2;
  double backoff_seconds = 0.5;
  std::function<void(double)> sleep;  // default: real sleep
};

/// HOIPLAN_LLM_URL, HOIPLAN_LLM_API_KEY, HOIPLAN_LLM_MODEL,
/// HOIPLAN_LLM_TIMEOUT (seconds) override the defaults.
HttpConfig http_config_from_env();

/// {"model", "temperature": 0, "messages": [system, user]}
json_io::Json chat_payload(const PromptBundle& bundle, const std::string& model);

/// choices[0].message.content. Errors: Transport when the body is not a
/// chat completion.
std::string parse_chat_response(std::string_view body, int status);

/// Retries 5xx, connection failures and timeouts with exponential backoff;
/// 4xx fails at once. Errors: Transport{status}, Timeout.
class HttpBackend : public LlmBackend {
 public:
  HttpBackend(HttpConfig config, std::shared_ptr<HttpTransport> transport);
  std::string complete_raw(const PromptBundle& bundle) override;

 private:
  HttpConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

using TransportFactory = std::function<std::shared_ptr<HttpTransport>()>;

/// "mock" reads fixtures from `fixtures_dir`; "http" is configured from the
/// environment and is the only caller of `transport`. Errors: SchemaError
/// for any other name.
std::unique_ptr<LlmBackend> make_backend(std::string_view name,
                                         const std::filesystem::path& fixtures_dir,
                                         const TransportFactory& transport = make_default_transport);

/// Queries the backend and extracts both sections.
LlmResponse complete(const PromptBundle& bundle, LlmBackend& backend);

}  // namespace hoiplan
