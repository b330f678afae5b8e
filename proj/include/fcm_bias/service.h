// Copyright 2026 The fcm-bias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON-over-HTTP front end:
//
//   POST /models                 multipart: data (CSV), schema (JSON), options
//   GET  /models/{id}/weights    ?format=edges for the undirected edge list
//   POST /models/{id}/simulate   {"initial": {...}, "phi", "iters", ...}
//   POST /models/{id}/sweep      {"scenario": {...}, "phis": [...], "seed"}
//
// Errors use {"code", "message", "detail"?}. Handlers are plain methods on
// Service so they can be exercised without a socket.

#ifndef FCM_BIAS_SERVICE_H_
#define FCM_BIAS_SERVICE_H_

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "fcm_bias/correlation.h"

namespace httplib {
class Server;
}

namespace fcm_bias {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Immutable once registered.
struct ModelEntry {
  std::string id;
  WeightMatrix weights;
  std::vector<std::string> warnings;
};

// Registration takes a unique lock; lookups share it and hand out
// shared_ptr<const> so simulations never hold the lock while running.
class ModelRegistry {
 public:
  // With a directory, every entry is also written as <dir>/<id>.json and
  // existing files are loaded on construction.
  explicit ModelRegistry(std::optional<std::string> persist_dir = std::nullopt);

  // Returns the stored entry and whether it was newly inserted.
  std::pair<std::shared_ptr<const ModelEntry>, bool> Register(ModelEntry entry);
  std::shared_ptr<const ModelEntry> Get(const std::string& id) const;
  std::size_t size() const;

 private:
  void Persist(const ModelEntry& entry) const;
  void LoadDirectory();

  std::optional<std::string> persist_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const ModelEntry>> entries_;
};

struct ServiceOptions {
  std::optional<std::string> persist_dir;
  std::string cors_origin;  // empty disables CORS headers
};

class Service {
 public:
  explicit Service(ServiceOptions options = {});

  Response CreateModel(std::string_view csv_text, std::string_view schema_json,
                       std::string_view options_json);
  Response GetWeights(const std::string& id, std::string_view format);
  Response Simulate(const std::string& id, std::string_view body);
  Response Sweep(const std::string& id, std::string_view body);

  // Installs the routes (and CORS handling) on `server`.
  void Mount(httplib::Server& server);

  const ModelRegistry& registry() const { return registry_; }

 private:
  ServiceOptions options_;
  ModelRegistry registry_;
};

// "host:port" -> (host, port). Throws kInvalidConfig.
std::pair<std::string, int> ParseListenAddress(std::string_view listen);

// Blocks until the server stops. Returns false when binding fails.
bool Serve(const std::string& listen, ServiceOptions options);

}  // namespace fcm_bias

#endif  // FCM_BIAS_SERVICE_H_
