// Copyright 2026 The Privacy Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cascade/gateway.hpp"

#include "httplib.h"
#include "json.hpp"

#include "cascade/errors.hpp"

namespace cascade {

using nlohmann::ordered_json;

namespace {

void write_error(httplib::Response& res, int status, const std::string& msg) {
  ordered_json j;
  j["error"] = msg;
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

}  // namespace

Gateway::Gateway(std::shared_ptr<const CascadeEngine> engine,
                 std::shared_ptr<const PolicyParams> policy)
    : engine_(std::move(engine)),
      policy_(std::move(policy)),
      server_(std::make_unique<httplib::Server>()) {
  if (!engine_) throw ConfigError("gateway needs an engine");
  if (engine_->config().strategy == DeferralStrategy::policy && !policy_) {
    throw ConfigError("gateway with the policy strategy needs parameters");
  }

  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  server_->Post("/v1/cascade", [this](const httplib::Request& req,
                                      httplib::Response& res) {
    ordered_json body;
    try {
      body = ordered_json::parse(req.body);
    } catch (const std::exception& e) {
      write_error(res, 400, std::string("invalid JSON: ") + e.what());
      return;
    }
    if (!body.is_object() || !body.contains("query") ||
        !body["query"].is_string()) {
      write_error(res, 400, "request must be an object with a string 'query'");
      return;
    }
    const std::string query = body["query"].get<std::string>();
    if (query.empty()) {
      write_error(res, 400, "'query' must be nonempty");
      return;
    }
    try {
      const EpisodeOutcome out = engine_->infer(query, policy_.get());
      ordered_json reply;
      if (body.contains("request_id")) reply["request_id"] = body["request_id"];
      reply["answer"] = out.final_answer;
      reply["action"] = action_wire_name(out.action);
      reply["masked"] = out.masked;
      reply["model_tag"] = out.model_tag;
      reply["latency_ms"] = out.latency_ms;
      if (out.degraded) res.set_header("X-Cascade-Degraded", "1");
      res.set_content(reply.dump(), "application/json");
    } catch (const Error& e) {
      write_error(res, 500, e.what());
    }
  });
}

Gateway::~Gateway() { stop(); }

int Gateway::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Gateway::serve_after_bind() { return server_->listen_after_bind(); }

bool Gateway::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

void Gateway::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace cascade
