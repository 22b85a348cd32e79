#include "skill/provider.hpp"

#include <cstdlib>
#include <fstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace skill::llm {

using Json = nlohmann::json;

MockChatProvider::MockChatProvider(const std::string& script_path) {
  std::ifstream in(script_path);
  if (!in) throw Error("io", "cannot open mock script '" + script_path + "'");
  try {
    in >> script_;
  } catch (const Json::parse_error& e) {
    throw Error("schema-violation",
                "invalid mock script '" + script_path + "': " + e.what());
  }
}

MockChatProvider::MockChatProvider(Json script) : script_(std::move(script)) {}

std::string MockChatProvider::complete(const std::vector<Message>&) {
  std::string key = std::to_string(calls_);
  const Json* entry = nullptr;
  if (script_.is_object() && script_.contains(key))
    entry = &script_[key];
  else if (script_.is_array() && calls_ < static_cast<int>(script_.size()))
    entry = &script_[calls_];
  if (!entry || !entry->is_string())
    throw Error("provider-unreachable",
                "mock script has no response for call " + key);
  ++calls_;
  return entry->get<std::string>();
}

HttpChatProvider::Options HttpChatProvider::from_env() {
  Options opt;
  if (const char* url = std::getenv("SKILL_LLM_BASE_URL")) opt.base_url = url;
  if (const char* key = std::getenv("SKILL_LLM_API_KEY")) opt.api_key = key;
  return opt;
}

HttpChatProvider::HttpChatProvider(Options options)
    : options_(std::move(options)) {
  if (options_.base_url.empty())
    throw Error("provider-unreachable",
                "no base URL configured (set SKILL_LLM_BASE_URL)");
}

std::string HttpChatProvider::complete(const std::vector<Message>& messages) {
  // Split scheme://host[:port] from the endpoint path.
  std::string base = options_.base_url;
  std::string path = "/v1/chat/completions";
  auto scheme_end = base.find("://");
  if (scheme_end != std::string::npos) {
    auto path_start = base.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
      path = base.substr(path_start);
      base = base.substr(0, path_start);
    }
  }

  Json body;
  body["model"] = options_.model;
  body["temperature"] = options_.temperature;
  Json msgs = Json::array();
  for (const auto& m : messages)
    msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);

  httplib::Client client(base);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  httplib::Headers headers;
  if (!options_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw Error("provider-unreachable",
                "POST " + options_.base_url + " failed: " +
                    httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error("provider-unreachable",
                "POST " + options_.base_url + " returned status " +
                    std::to_string(res->status));
  Json reply;
  try {
    reply = Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw Error("provider-unreachable",
                std::string("invalid JSON from provider: ") + e.what());
  }
  if (!reply.contains("choices") || reply["choices"].empty() ||
      !reply["choices"][0].contains("message"))
    throw Error("provider-unreachable", "provider reply has no choices");
  return reply["choices"][0]["message"].value("content", "");
}

}  // namespace skill::llm
