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

#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"
#include "fcm_bias/io.h"
#include "fcm_bias/scenario.h"
#include "fcm_bias/service.h"

namespace fcm_bias {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20220101;

// Exit-code carrying failure for conditions that are not library errors.
struct ExitError {
  int code;
  std::string message;
};

struct Defaults {
  ReasoningConfig config;
  std::uint64_t seed = kDefaultSeed;
  std::string diagonal = "zero";
  json echo = json::object();  // the defaults file, echoed in the manifest
};

json ReadJsonFile(const std::string& path) {
  const std::string text = csv::ReadFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": malformed JSON: " + e.what());
  }
}

Defaults LoadDefaults() {
  Defaults d;
  const char* path = std::getenv("FCM_BIAS_CONFIG");
  if (path == nullptr || *path == '\0') return d;
  d.echo = ReadJsonFile(path);
  try {
    d.config = ReasoningConfigFromJson(d.echo);
    if (d.echo.contains("seed")) d.seed = d.echo["seed"].get<std::uint64_t>();
    if (d.echo.contains("diagonal")) d.diagonal = d.echo["diagonal"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string(path) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), std::string(path) + ": " + e.what());
  }
  return d;
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

fs::path PrepareOut(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

// The only file carrying a timestamp; data files stay byte-identical.
void WriteManifest(const fs::path& out_dir, const std::string& command, const json& inputs,
                   const json& config, const std::vector<std::string>& outputs) {
  const json manifest = {{"tool", "fcm-bias"},
                         {"version", FCM_BIAS_VERSION},
                         {"command", command},
                         {"inputs", inputs},
                         {"config", config},
                         {"outputs", outputs},
                         {"createdAt", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                                                   fmt::gmtime(std::time(nullptr)))}};
  WriteFile(out_dir / "manifest.json", DumpJson(manifest));
}

std::vector<double> ParsePhis(const std::string& text) {
  std::vector<double> phis;
  for (const auto& record : csv::Parse(text)) {
    for (const auto& field : record.fields) {
      try {
        std::size_t used = 0;
        phis.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidConfig, "--phis: '" + field + "' is not a number");
      }
    }
  }
  return phis;
}

Activation ParseInitial(const std::string& arg, const WeightMatrix& w) {
  if (arg == "all-zeros" || arg == "zeros") return Activation(w.size(), 0.0);
  const bool inline_json = !arg.empty() && (arg.front() == '{' || arg.front() == '[');
  json doc;
  if (inline_json) {
    try {
      doc = json::parse(arg);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kInvalidConfig, std::string("--initial: malformed JSON: ") + e.what());
    }
  } else {
    doc = ReadJsonFile(arg);
  }
  return ActivationFromJson(doc, w);
}

int ExitCodeFor(const Error& e) {
  return e.code() == ErrorCode::kDimensionMismatch ? kExitDimension : kExitInput;
}

void PrintReport(const BiasReport& report, std::ostream& out) {
  for (const PhiReport& r : report.per_phi) {
    out << fmt::format("phi={} fixed_point={} limit_cycle={} inconclusive={} failed={} "
                       "dispersion={:.3g}\n",
                       r.phi, r.convergence.fixed_point, r.convergence.limit_cycle,
                       r.convergence.inconclusive, r.convergence.failed, r.dispersion);
    for (const ConceptStatistics& c : r.concepts) {
      out << fmt::format("  {}\tmean={:.6f}\tmin={:.6f}\tmax={:.6f}\tstddev={:.6f}\n", c.name,
                         c.mean, c.min, c.max, c.stddev);
    }
  }
}

bool AllInconclusive(const BiasReport& report) {
  for (const PhiReport& r : report.per_phi) {
    if (r.convergence.fixed_point + r.convergence.limit_cycle > 0) return false;
  }
  return true;
}

std::string DispersionCsv(const BiasReport& report) {
  std::string out = "phi,dispersion,fixed_point,limit_cycle,inconclusive,failed\n";
  for (const PhiReport& r : report.per_phi) {
    out += fmt::format("{},{},{},{},{},{}\n", FormatDouble(r.phi), FormatDouble(r.dispersion),
                       r.convergence.fixed_point, r.convergence.limit_cycle,
                       r.convergence.inconclusive, r.convergence.failed);
  }
  return out;
}

struct ReasoningFlags {
  std::optional<double> phi;
  std::optional<int> iters;
  std::optional<std::string> transfer;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;

  void Add(CLI::App* cmd, bool with_phi) {
    if (with_phi) cmd->add_option("--phi", phi, "Nonlinearity degree in [0,1]");
    cmd->add_option("--iters", iters, "Maximal number of iterations T");
    cmd->add_option("--transfer", transfer, "rescaled|sigmoid|tanh");
    cmd->add_option("--lambda", lambda, "Sigmoid slope");
    cmd->add_option("--epsilon", epsilon, "Fixed-point tolerance");
    cmd->add_option("--seed", seed, "Scenario sampling seed");
  }

  ReasoningConfig Resolve(const Defaults& d) const {
    json overrides = json::object();
    if (phi) overrides["phi"] = *phi;
    if (iters) overrides["iters"] = *iters;
    if (transfer) overrides["transfer"] = *transfer;
    if (lambda) overrides["lambda"] = *lambda;
    if (epsilon) overrides["epsilon"] = *epsilon;
    return ReasoningConfigFromJson(overrides, d.config);
  }
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Implicit-bias analysis with fuzzy cognitive maps", "fcm-bias"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FCM_BIAS_VERSION);

  // build
  std::string data_path, schema_path, out_dir, diagonal, missing;
  CLI::App* build = app.add_subcommand("build", "Estimate the weight matrix from a dataset");
  build->add_option("--data", data_path, "CSV dataset")->required();
  build->add_option("--schema", schema_path, "Feature schema JSON")->required();
  build->add_option("--out", out_dir, "Output directory")->required();
  build->add_option("--diagonal", diagonal, "zero|one");
  build->add_option("--missing", missing, "drop|strict");

  // simulate
  std::string weights_path, initial_arg, scenario_path;
  ReasoningFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "Run one stimulus or a scenario batch");
  simulate->add_option("--weights", weights_path, "Weight matrix (JSON or CSV)")->required();
  auto* initial_opt =
      simulate->add_option("--initial", initial_arg, "JSON file, inline JSON or all-zeros");
  auto* scenario_opt = simulate->add_option("--scenario", scenario_path, "Scenario spec JSON");
  initial_opt->excludes(scenario_opt);
  simulate->add_option("--out", out_dir, "Output directory");
  sim_flags.Add(simulate, true);

  // eigen
  double tol = 1e-12;
  int max_iter = 100000;
  std::optional<std::uint64_t> eigen_seed;
  CLI::App* eigen = app.add_subcommand("eigen", "Dominant eigenvector by power iteration");
  eigen->add_option("--weights", weights_path, "Weight matrix (JSON or CSV)")->required();
  eigen->add_option("--tol", tol, "Convergence tolerance");
  eigen->add_option("--max-iter", max_iter, "Iteration cap");
  eigen->add_option("--seed", eigen_seed, "Seed for the cross-check start vector");
  eigen->add_option("--out", out_dir, "Output directory");

  // sweep
  std::string phis_arg = "0.6,0.8,1.0";
  ReasoningFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "Same scenario batch over several phi values");
  sweep->add_option("--weights", weights_path, "Weight matrix (JSON or CSV)")->required();
  sweep->add_option("--scenario", scenario_path, "Scenario spec JSON")->required();
  sweep->add_option("--phis", phis_arg, "Comma separated phi grid");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep_flags.Add(sweep, false);

  // serve
  std::string listen = "127.0.0.1:8080", cors_origin, persist_dir;
  CLI::App* serve = app.add_subcommand("serve", "Start the HTTP JSON API");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--cors-origin", cors_origin, "Allowed browser origin");
  serve->add_option("--persist-dir", persist_dir, "Directory for registered models");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const Defaults defaults = LoadDefaults();

    if (*build) {
      if (!fs::exists(schema_path)) {
        throw Error(ErrorCode::kIo, "schema file not found: " + schema_path);
      }
      if (!fs::exists(data_path)) throw Error(ErrorCode::kIo, "data file not found: " + data_path);
      const json schema_doc = ReadJsonFile(schema_path);
      FeatureSchema schema;
      try {
        schema = SchemaFromJson(schema_doc);
      } catch (const Error& e) {
        throw Error(e.code(), schema_path + ": " + e.what());
      }
      json options = json::object();
      if (!diagonal.empty()) {
        options["diagonal"] = diagonal;
      } else if (defaults.echo.contains("diagonal")) {
        options["diagonal"] = defaults.diagonal;
      }
      if (!missing.empty()) options["missing"] = missing;
      const BuildRequest request = BuildRequestFromJson(options);
      const std::string csv_text = csv::ReadFile(data_path);
      CorrelationModel model;
      try {
        model = BuildModel(csv_text, schema, request);
      } catch (const Error& e) {
        throw Error(e.code(), data_path + ": " + e.what());
      }
      std::string key = csv_text;
      key += '\0';
      key += schema_doc.dump();
      key += '\0';
      key += options.dump();
      const std::string id = ContentHash(key);

      const fs::path dir = PrepareOut(out_dir);
      WriteFile(dir / "weights.json", DumpJson(WeightMatrixToJson(model.weights)));
      WriteFile(dir / "weights.csv", WeightMatrixToCsv(model.weights));
      WriteFile(dir / "edges.csv", EdgeListCsv(model.weights));
      WriteFile(dir / "correlation_table.csv", CorrelationTableCsv(model.weights));
      WriteFile(dir / "model.json", DumpJson(ModelSummaryToJson(id, model)));
      WriteManifest(dir, "build", {{"data", data_path}, {"schema", schema_path}}, options,
                    {"weights.json", "weights.csv", "edges.csv", "correlation_table.csv",
                     "model.json"});
      for (const auto& w : model.warnings) err << "warning: " << w << "\n";
      out << fmt::format("{} concepts, {} protected; model {}\n", model.weights.size(),
                         model.weights.ProtectedIndices().size(), id);
      return kExitOk;
    }

    if (*simulate) {
      const WeightMatrix w = LoadWeightMatrix(weights_path);
      const ReasoningConfig config = sim_flags.Resolve(defaults);
      if (scenario_path.empty()) {
        const Activation a0 =
            initial_arg.empty() ? Activation(w.size(), 0.0) : ParseInitial(initial_arg, w);
        const SimulationTrace trace = Run(a0, w, config);
        const json result = SimulationToJson(trace, w, config);
        if (!out_dir.empty()) {
          const fs::path dir = PrepareOut(out_dir);
          WriteFile(dir / "trace.json", DumpJson(result));
          WriteFile(dir / "trace.csv", TraceToCsv(trace, w));
          WriteManifest(dir, "simulate", {{"weights", weights_path}, {"initial", initial_arg}},
                        ReasoningConfigToJson(config), {"trace.json", "trace.csv"});
        }
        out << fmt::format("terminal: {} after {} iterations\n",
                           TerminalKindName(trace.terminal.kind), trace.states.size() - 1);
        for (std::size_t i : w.ProtectedIndices()) {
          out << fmt::format("{}\t{:.6f}\n", w.concept_names()[i], trace.final_state()[i]);
        }
        return trace.terminal.kind == TerminalKind::kInconclusive ? kExitNoConvergence : kExitOk;
      }
      ScenarioSpec spec = LoadScenarioSpec(scenario_path);
      if (sim_flags.seed) spec.seed = *sim_flags.seed;
      const BiasReport report = PhiSweep(spec, w, config, {config.phi});
      if (!out_dir.empty()) {
        const fs::path dir = PrepareOut(out_dir);
        WriteFile(dir / "report.json", DumpJson(BiasReportToJson(report)));
        WriteFile(dir / "report.csv", BiasReportToCsv(report));
        json cfg = ReasoningConfigToJson(config);
        cfg["scenario"] = ScenarioSpecToJson(spec);
        WriteManifest(dir, "simulate", {{"weights", weights_path}, {"scenario", scenario_path}},
                      cfg, {"report.json", "report.csv"});
      }
      PrintReport(report, out);
      return AllInconclusive(report) ? kExitNoConvergence : kExitOk;
    }

    if (*eigen) {
      const WeightMatrix w = LoadWeightMatrix(weights_path);
      const double asym = w.MaxAsymmetry();
      if (asym > 1e-12) {
        throw ExitError{kExitAsymmetric,
                        fmt::format("weight matrix is not symmetric (max |w_ij - w_ji| = {})",
                                    asym)};
      }
      const EigenReport report =
          ComputeEigenReport(w, tol, max_iter, eigen_seed.value_or(defaults.seed));
      if (!out_dir.empty()) {
        const fs::path dir = PrepareOut(out_dir);
        WriteFile(dir / "eigen.json", DumpJson(EigenReportToJson(report, w)));
        WriteManifest(dir, "eigen", {{"weights", weights_path}},
                      {{"tol", tol}, {"maxIter", max_iter},
                       {"seed", eigen_seed.value_or(defaults.seed)}},
                      {"eigen.json"});
      }
      out << fmt::format("lambda\t{:.12g}\nconverged\t{}\niterations\t{}\n", report.eigen.lambda,
                         report.eigen.converged, report.eigen.iterations);
      for (std::size_t i = 0; i < w.size(); ++i) {
        out << fmt::format("{}\t{:.10f}\n", w.concept_names()[i], report.eigen.vector[i]);
      }
      out << fmt::format("cross_check\t{}\t{:.3g}\n",
                         TerminalKindName(report.cross_check_terminal),
                         report.cross_check_distance);
      return kExitOk;
    }

    if (*sweep) {
      const WeightMatrix w = LoadWeightMatrix(weights_path);
      const ReasoningConfig config = sweep_flags.Resolve(defaults);
      ScenarioSpec spec = LoadScenarioSpec(scenario_path);
      if (sweep_flags.seed) spec.seed = *sweep_flags.seed;
      const std::vector<double> phis = ParsePhis(phis_arg);
      const BiasReport report = PhiSweep(spec, w, config, phis);
      if (!out_dir.empty()) {
        const fs::path dir = PrepareOut(out_dir);
        WriteFile(dir / "report.json", DumpJson(BiasReportToJson(report)));
        WriteFile(dir / "report.csv", BiasReportToCsv(report));
        WriteFile(dir / "dispersion.csv", DispersionCsv(report));
        json cfg = ReasoningConfigToJson(config);
        cfg.erase("phi");
        cfg["phis"] = phis;
        cfg["scenario"] = ScenarioSpecToJson(spec);
        WriteManifest(dir, "sweep", {{"weights", weights_path}, {"scenario", scenario_path}},
                      cfg, {"report.json", "report.csv", "dispersion.csv"});
      }
      PrintReport(report, out);
      return AllInconclusive(report) ? kExitNoConvergence : kExitOk;
    }

    if (*serve) {
      ServiceOptions options;
      if (!persist_dir.empty()) options.persist_dir = persist_dir;
      options.cors_origin = cors_origin;
      ParseListenAddress(listen);
      out << "listening on " << listen << std::endl;
      if (!Serve(listen, std::move(options))) {
        err << "error: cannot bind " << listen << "\n";
        return kExitInput;
      }
      return kExitOk;
    }
  } catch (const ExitError& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io_error]: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace fcm_bias
