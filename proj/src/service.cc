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

#include "fcm_bias/service.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <fmt/format.h>

#include "httplib.h"

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"
#include "fcm_bias/io.h"
#include "fcm_bias/scenario.h"

namespace fcm_bias {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

Response ErrorResponse(int status, std::string_view code, const std::string& message,
                       const std::string& detail = "") {
  json body = {{"code", code}, {"message", message}};
  if (!detail.empty()) body["detail"] = detail;
  return {status, DumpJson(body)};
}

Response ErrorResponse(int status, const Error& e) {
  return ErrorResponse(status, ErrorCodeName(e.code()), e.what());
}

Response NotFound(const std::string& id) {
  return ErrorResponse(404, "not_found", "unknown model id '" + id + "'");
}

// Parses a request body; an empty body reads as {}.
std::optional<json> ParseBody(std::string_view text, Response& failure, const char* what) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    failure = ErrorResponse(400, "invalid_json", std::string(what) + " is not valid JSON",
                            e.what());
    return std::nullopt;
  }
}

}  // namespace

ModelRegistry::ModelRegistry(std::optional<std::string> persist_dir)
    : persist_dir_(std::move(persist_dir)) {
  if (persist_dir_) {
    fs::create_directories(*persist_dir_);
    LoadDirectory();
  }
}

std::pair<std::shared_ptr<const ModelEntry>, bool> ModelRegistry::Register(ModelEntry entry) {
  std::unique_lock lock(mutex_);
  if (auto it = entries_.find(entry.id); it != entries_.end()) return {it->second, false};
  auto stored = std::make_shared<const ModelEntry>(std::move(entry));
  if (persist_dir_) Persist(*stored);
  entries_.emplace(stored->id, stored);
  return {stored, true};
}

std::shared_ptr<const ModelEntry> ModelRegistry::Get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second;
}

std::size_t ModelRegistry::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void ModelRegistry::Persist(const ModelEntry& entry) const {
  const fs::path path = fs::path(*persist_dir_) / (entry.id + ".json");
  std::ofstream out(path, std::ios::binary);
  out << DumpJson({{"id", entry.id},
                   {"weights", WeightMatrixToJson(entry.weights)},
                   {"warnings", entry.warnings}});
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void ModelRegistry::LoadDirectory() {
  for (const auto& file : fs::directory_iterator(*persist_dir_)) {
    if (file.path().extension() != ".json") continue;
    const json j = json::parse(csv::ReadFile(file.path().string()), nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("weights")) continue;
    ModelEntry entry;
    entry.id = j["id"].get<std::string>();
    entry.weights = WeightMatrixFromJson(j["weights"]);
    entry.warnings = j.value("warnings", std::vector<std::string>{});
    auto stored = std::make_shared<const ModelEntry>(std::move(entry));
    entries_.emplace(stored->id, std::move(stored));
  }
}

Service::Service(ServiceOptions options)
    : options_(std::move(options)), registry_(options_.persist_dir) {}

Response Service::CreateModel(std::string_view csv_text, std::string_view schema_json,
                              std::string_view options_json) {
  Response failure;
  const auto schema_doc = ParseBody(schema_json, failure, "schema");
  if (!schema_doc) return failure;
  const auto options_doc = ParseBody(options_json, failure, "options");
  if (!options_doc) return failure;
  try {
    const FeatureSchema schema = SchemaFromJson(*schema_doc);
    const BuildRequest request = BuildRequestFromJson(*options_doc);
    std::string key(csv_text);
    key += '\0';
    key += schema_doc->dump();
    key += '\0';
    key += options_doc->dump();
    const std::string id = ContentHash(key);
    if (auto existing = registry_.Get(id)) {
      CorrelationModel summary{existing->weights, {}, existing->warnings};
      return {200, DumpJson(ModelSummaryToJson(id, summary))};
    }
    CorrelationModel model = BuildModel(csv_text, schema, request);
    const json summary = ModelSummaryToJson(id, model);
    const auto [entry, created] =
        registry_.Register({id, std::move(model.weights), std::move(model.warnings)});
    return {created ? 201 : 200, DumpJson(summary)};
  } catch (const Error& e) {
    return ErrorResponse(400, e);
  }
}

Response Service::GetWeights(const std::string& id, std::string_view format) {
  const auto entry = registry_.Get(id);
  if (!entry) return NotFound(id);
  if (format.empty() || format == "matrix") return {200, DumpJson(WeightMatrixToJson(entry->weights))};
  if (format == "edges") return {200, DumpJson(EdgeListJson(entry->weights))};
  return ErrorResponse(400, "invalid_config",
                       fmt::format("unknown format '{}' (expected matrix|edges)", format));
}

Response Service::Simulate(const std::string& id, std::string_view body) {
  const auto entry = registry_.Get(id);
  if (!entry) return NotFound(id);
  Response failure;
  const auto request = ParseBody(body, failure, "request body");
  if (!request) return failure;
  try {
    if (!request->is_object()) throw Error(ErrorCode::kInvalidConfig, "expected a JSON object");
    const ReasoningConfig config = ReasoningConfigFromJson(*request);
    const Activation a0 =
        ActivationFromJson(request->value("initial", json::object()), entry->weights);
    const SimulationTrace trace = Run(a0, entry->weights, config);
    return {200, DumpJson(SimulationToJson(trace, entry->weights, config))};
  } catch (const Error& e) {
    return ErrorResponse(422, e);
  }
}

Response Service::Sweep(const std::string& id, std::string_view body) {
  const auto entry = registry_.Get(id);
  if (!entry) return NotFound(id);
  Response failure;
  const auto request = ParseBody(body, failure, "request body");
  if (!request) return failure;
  try {
    if (!request->is_object()) throw Error(ErrorCode::kInvalidConfig, "expected a JSON object");
    if (!request->contains("scenario")) throw Error(ErrorCode::kInvalidConfig, "scenario: required");
    if (!request->contains("phis") || !(*request)["phis"].is_array()) {
      throw Error(ErrorCode::kInvalidConfig, "phis: expected an array");
    }
    ScenarioSpec spec = ScenarioSpecFromJson((*request)["scenario"]);
    if (request->contains("seed")) {
      if (!(*request)["seed"].is_number_unsigned()) {
        throw Error(ErrorCode::kInvalidConfig, "seed: expected a non-negative integer");
      }
      spec.seed = (*request)["seed"].get<std::uint64_t>();
    }
    std::vector<double> phis;
    for (const auto& p : (*request)["phis"]) {
      if (!p.is_number()) throw Error(ErrorCode::kInvalidConfig, "phis: expected numbers");
      phis.push_back(p.get<double>());
    }
    json config_doc = *request;
    config_doc.erase("phi");
    const ReasoningConfig config = ReasoningConfigFromJson(config_doc);
    const BiasReport report = PhiSweep(spec, entry->weights, config, phis);
    return {200, DumpJson(BiasReportToJson(report))};
  } catch (const Error& e) {
    return ErrorResponse(422, e);
  }
}

void Service::Mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const std::string origin = options_.cors_origin;
  if (!origin.empty()) {
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

  server.Post("/models", [this, send](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("data") || !req.has_file("schema")) {
      send(res, ErrorResponse(400, "invalid_schema",
                              "multipart fields 'data' and 'schema' are required"));
      return;
    }
    const std::string options = req.has_file("options") ? req.get_file_value("options").content : "";
    send(res, CreateModel(req.get_file_value("data").content,
                          req.get_file_value("schema").content, options));
  });
  server.Get("/models/:id/weights", [this, send](const httplib::Request& req,
                                                 httplib::Response& res) {
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "";
    send(res, GetWeights(req.path_params.at("id"), format));
  });
  server.Post("/models/:id/simulate", [this, send](const httplib::Request& req,
                                                   httplib::Response& res) {
    send(res, Simulate(req.path_params.at("id"), req.body));
  });
  server.Post("/models/:id/sweep", [this, send](const httplib::Request& req,
                                                httplib::Response& res) {
    send(res, Sweep(req.path_params.at("id"), req.body));
  });
  server.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send(res, ErrorResponse(404, "not_found", "no route for " + req.method + " " + req.path));
    }
  });
  server.set_exception_handler(
      [send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          message = e.what();
        } catch (...) {
        }
        send(res, ErrorResponse(500, "internal", message));
      });
}

std::pair<std::string, int> ParseListenAddress(std::string_view listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidConfig,
                fmt::format("listen address '{}' is not host:port", listen));
  }
  int port = -1;
  const std::string_view digits = listen.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("invalid port in '{}'", listen));
  }
  return {std::string(listen.substr(0, colon)), port};
}

bool Serve(const std::string& listen, ServiceOptions options) {
  const auto [host, port] = ParseListenAddress(listen);
  Service service(std::move(options));
  httplib::Server server;
  service.Mount(server);
  return server.listen(host, port);
}

}  // namespace fcm_bias
