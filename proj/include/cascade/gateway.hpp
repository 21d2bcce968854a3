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

#pragma once

#include <memory>
#include <string>

#include "cascade/engine.hpp"

namespace httplib {
class Server;
}

namespace cascade {

/// HTTP gateway exposing the trained cascade:
///   POST /v1/cascade  {"query": ..., "request_id"?} ->
///        {"request_id"?, "answer", "action", "masked", "model_tag",
///         "latency_ms"}
///   GET  /healthz     -> {"status": "ok"}
/// Malformed requests get a 400 with an error message; a server-backend
/// failure degrades to the local answer (action "local") with the
/// X-Cascade-Degraded: 1 response header. Requests are served concurrently
/// over immutable engine/policy snapshots.
class Gateway {
 public:
  Gateway(std::shared_ptr<const CascadeEngine> engine,
          std::shared_ptr<const PolicyParams> policy);
  ~Gateway();

  /// Binds to host:port (port 0 picks a free port) and returns the bound
  /// port, or -1 on failure.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called. Returns false if the listener failed.
  bool serve_after_bind();

  /// Bind + serve in one call (CLI path).
  bool listen(const std::string& host, int port);

  void stop();

 private:
  std::shared_ptr<const CascadeEngine> engine_;
  std::shared_ptr<const PolicyParams> policy_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace cascade
