// core/src/harness/external.cc
#include "revoice/harness/external.h"

#include <fstream>
#include <iostream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "revoice/base/error.h"

using nlohmann::json;

namespace revoice::harness {

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  std::string rest = url;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) != 0) {
    throw DataError("external_score: only http:// endpoints are supported: " + url);
  }
  rest = rest.substr(scheme.size());
  const size_t slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const size_t colon = hostport.find(':');
  if (colon == std::string::npos) {
    out.host = hostport;
  } else {
    out.host = hostport.substr(0, colon);
    out.port = std::stoi(hostport.substr(colon + 1));
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("external_score: cannot read wav: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// one POST; returns parsed json body or nullopt (with a logged warning)
std::optional<json> post_wav(const std::string& url, const std::string& body, int timeout_ms,
                             const std::string& wav_path) {
  try {
    const ParsedUrl u = parse_url(url);
    httplib::Client client(u.host, u.port);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    auto res = client.Post(u.path, body, "audio/wav");
    if (!res || res->status != 200) {
      std::cerr << "[warn] external scorer " << url << " failed for " << wav_path
                << (res ? " (status " + std::to_string(res->status) + ")" : " (no response)")
                << "\n";
      return std::nullopt;
    }
    return json::parse(res->body);
  } catch (const std::exception& e) {
    std::cerr << "[warn] external scorer " << url << " failed for " << wav_path << ": "
              << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

ExternalScore external_score(const ExternalClientConfig& config, const std::string& wav_path) {
  ExternalScore out;
  if (!config.configured()) return out;

  const std::string body = slurp(wav_path);
  if (!config.asr_url.empty()) {
    auto j = post_wav(config.asr_url, body, config.timeout_ms, wav_path);
    if (j && j->contains("text") && (*j)["text"].is_string()) {
      out.transcript = (*j)["text"].get<std::string>();
    } else {
      ++out.warnings;
    }
  }
  if (!config.mos_url.empty()) {
    auto j = post_wav(config.mos_url, body, config.timeout_ms, wav_path);
    if (j && j->contains("mos") && (*j)["mos"].is_number()) {
      out.mos = (*j)["mos"].get<double>();
    } else {
      ++out.warnings;
    }
  }
  return out;
}

}  // namespace revoice::harness
