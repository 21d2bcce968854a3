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

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "cascade/corpus.hpp"
#include "cascade/engine.hpp"
#include "cascade/errors.hpp"
#include "cascade/gateway.hpp"
#include "cascade/policy_agent.hpp"
#include "cascade/privacy_memory.hpp"
#include "cascade/scoring.hpp"
#include "cascade/tuning_losses.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using namespace cascade;
using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << body;
}

EngineConfig resolve_config(const std::string& config_path,
                            std::optional<std::uint64_t> seed_override) {
  EngineConfig cfg =
      config_path.empty() ? EngineConfig{} : load_engine_config(config_path);
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.train.seed = *seed_override;
  }
  return cfg;
}

int cmd_train(const std::string& config_path, const std::string& corpus_path,
              const std::string& params_path, const std::string& log_path,
              const std::string& report_path,
              std::optional<std::uint64_t> seed) {
  const EngineConfig cfg = resolve_config(config_path, seed);
  const Corpus corpus = load_corpus(corpus_path);
  CascadeEngine engine(cfg);
  const TrainResult result = engine.train(corpus);

  save_params(params_path, result.policy, result.value);
  if (!log_path.empty()) {
    write_text(log_path, training_log_to_jsonl(result.log));
  }
  if (!report_path.empty()) {
    const auto outcomes = engine.evaluate(corpus, &result.policy);
    write_text(report_path,
               metric_report_to_json(aggregate_metrics(outcomes, corpus)));
  }
  std::cout << "trained " << cfg.train.iterations << " iterations over "
            << corpus.records.size() << " records; params -> " << params_path
            << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& corpus_path,
             const std::string& params_path, const std::string& strategy,
             std::optional<double> threshold, bool sweep,
             const std::string& report_path, const std::string& csv_path,
             const std::string& episodes_path,
             std::optional<std::uint64_t> seed) {
  EngineConfig cfg = resolve_config(config_path, seed);
  if (!strategy.empty()) {
    cfg.strategy = deferral_strategy_from_string(strategy);
  }
  if (threshold) cfg.threshold = *threshold;
  if (cfg.strategy != DeferralStrategy::policy &&
      (cfg.threshold <= 0.0 || cfg.threshold >= 1.0)) {
    throw ConfigError("deferral threshold must lie in (0,1)");
  }
  const Corpus corpus = load_corpus(corpus_path);

  std::optional<PolicyParams> policy;
  if (cfg.strategy == DeferralStrategy::policy && !sweep) {
    if (params_path.empty()) {
      throw ConfigError("policy strategy evaluation needs --params");
    }
    policy = load_params(params_path).first;
  }

  if (sweep) {
    std::ostringstream os;
    os << "threshold,call_rate,safe_call_rate,mean_quality,mean_reward,"
          "leakage_ratio\n";
    for (int i = 1; i <= 9; ++i) {
      EngineConfig point = cfg;
      point.strategy = DeferralStrategy::threshold;
      point.threshold = i / 10.0;
      CascadeEngine engine(point);
      const auto outcomes = engine.evaluate(corpus, nullptr);
      const MetricReport rep = aggregate_metrics(outcomes, corpus);
      os << point.threshold << "," << rep.call_rate << ","
         << rep.safe_call_rate << "," << rep.mean_quality << ","
         << rep.mean_reward << "," << rep.leakage_ratio << "\n";
    }
    if (csv_path.empty()) {
      std::cout << os.str();
    } else {
      write_text(csv_path, os.str());
    }
    return 0;
  }

  CascadeEngine engine(cfg);
  const auto outcomes = engine.evaluate(corpus, policy ? &*policy : nullptr);
  const MetricReport rep = aggregate_metrics(outcomes, corpus);
  if (!report_path.empty()) {
    write_text(report_path, metric_report_to_json(rep));
  }
  if (!csv_path.empty()) {
    write_text(csv_path, metric_report_to_csv(rep));
  }
  if (!episodes_path.empty()) {
    write_text(episodes_path, episodes_to_csv(outcomes));
  }
  std::cout << metric_report_to_json(rep);
  return 0;
}

Gateway* g_gateway = nullptr;

void handle_signal(int) {
  if (g_gateway != nullptr) g_gateway->stop();
}

int cmd_serve(const std::string& config_path, const std::string& params_path,
              const std::string& host, int port,
              std::optional<std::uint64_t> seed) {
  const EngineConfig cfg = resolve_config(config_path, seed);
  std::shared_ptr<const PolicyParams> policy;
  if (cfg.strategy == DeferralStrategy::policy) {
    if (params_path.empty()) {
      throw ConfigError("serve with the policy strategy needs --params");
    }
    policy =
        std::make_shared<const PolicyParams>(load_params(params_path).first);
  }
  auto engine = std::make_shared<const CascadeEngine>(cfg);
  Gateway gateway(engine, policy);

  g_gateway = &gateway;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  const int bound = gateway.bind(host, port);
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  std::cout << "cascade gateway listening on http://" << host << ":" << bound
            << "\n";
  gateway.serve_after_bind();
  g_gateway = nullptr;
  std::cout << "gateway stopped\n";
  return 0;
}

int cmd_simulate(const std::string& synth_path, const std::string& out_path,
                 const std::string& memory_path,
                 std::optional<std::uint64_t> seed) {
  const SynthConfig synth = load_synth_config(synth_path);
  const Corpus corpus = generate_synthetic_corpus(synth, seed.value_or(42));
  save_corpus(corpus, out_path);
  std::cout << "wrote " << corpus.records.size() << " records to " << out_path
            << "\n";
  if (!memory_path.empty()) {
    PrivateMemory memory;
    std::vector<std::pair<std::string, PiiCategory>> tokens;
    for (const auto& name : synth.lexicon) {
      tokens.emplace_back(name, PiiCategory::name);
    }
    memory = extend_memory(std::move(memory), tokens);
    save_memory(memory, memory_path);
    std::cout << "wrote " << memory.entries.size() << " memory entries to "
              << memory_path << "\n";
  }
  return 0;
}

PrivateMemory load_or_empty(const std::string& path) {
  std::ifstream probe(path);
  if (!probe.good()) return PrivateMemory{};
  return load_memory(path, 0.2);
}

int cmd_memory_add(const std::string& file, const std::string& token,
                   const std::string& category) {
  PrivateMemory memory = load_or_empty(file);
  const std::size_t before = memory.entries.size();
  memory = extend_memory(std::move(memory),
                         {{token, pii_category_from_string(category)}});
  save_memory(memory, file);
  std::cout << (memory.entries.size() > before ? "added " : "already present ")
            << token << "\n";
  return 0;
}

int cmd_memory_list(const std::string& file) {
  const PrivateMemory memory = load_memory(file, 0.2);
  for (const auto& e : memory.entries) {
    std::cout << e.token << "\t" << to_string(e.category) << "\n";
  }
  return 0;
}

int cmd_memory_import(const std::string& file, const std::string& corpus_path,
                      const std::string& category) {
  PrivateMemory memory = load_or_empty(file);
  const Corpus corpus = load_corpus(corpus_path);
  const PiiCategory cat = pii_category_from_string(category);
  std::vector<std::pair<std::string, PiiCategory>> tokens;
  for (const auto& rec : corpus.records) {
    for (const auto& t : rec.private_tokens) tokens.emplace_back(t, cat);
  }
  const std::size_t before = memory.entries.size();
  memory = extend_memory(std::move(memory), tokens);
  save_memory(memory, file);
  std::cout << "imported " << (memory.entries.size() - before)
            << " new tokens (memory size " << memory.entries.size() << ")\n";
  return 0;
}

TokenDistributionSequence sequence_from_json(const ordered_json& rows) {
  TokenDistributionSequence seq;
  const auto data = rows.get<std::vector<std::vector<double>>>();
  if (data.empty()) throw ParseError("distribution sequence is empty");
  seq.probs.resize(static_cast<Eigen::Index>(data.size()),
                   static_cast<Eigen::Index>(data[0].size()));
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (data[t].size() != data[0].size()) {
      throw ParseError("distribution rows have inconsistent widths");
    }
    for (std::size_t v = 0; v < data[t].size(); ++v) {
      seq.probs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)) =
          data[t][v];
    }
  }
  return seq;
}

int cmd_losses_eval(const std::string& fixtures_path) {
  std::ifstream in(fixtures_path);
  if (!in) throw ConfigError("cannot open fixtures file: " + fixtures_path);
  ordered_json j;
  in >> j;

  ordered_json out;
  std::optional<double> l_inst;
  std::optional<double> l_kd;
  if (j.contains("instruction")) {
    TokenDistributionSequence seq =
        sequence_from_json(j["instruction"].at("probs"));
    seq.target_ids = j["instruction"].at("target_ids").get<std::vector<int>>();
    l_inst = instruction_loss(seq);
    out["instruction_loss"] = *l_inst;
  }
  if (j.contains("kd")) {
    const auto server = sequence_from_json(j["kd"].at("server"));
    const auto local = sequence_from_json(j["kd"].at("local"));
    l_kd = kd_loss(server, local);
    out["kd_loss"] = *l_kd;
  }
  if (l_inst && l_kd) {
    const double lambda_kd = j.value("lambda_kd", 1.0);
    out["combined_tuning_loss"] =
        combined_tuning_loss(*l_inst, *l_kd, lambda_kd);
  }
  if (j.contains("multi_objective")) {
    const auto& m = j["multi_objective"];
    MultiObjLossConfig cfg;
    cfg.objective_weights = m.at("weights").get<std::vector<double>>();
    cfg.w_local = m.at("w_local").get<double>();
    cfg.w_server = m.at("w_server").get<double>();
    cfg.threshold = m.at("threshold").get<double>();
    cfg.logit_summary = m.at("logit_summary").get<double>();
    out["multi_objective_cascade_loss"] = multi_objective_cascade_loss(
        m.at("objective_losses").get<std::vector<double>>(),
        m.at("l_local").get<double>(), m.at("l_server").get<double>(), cfg);
  }
  if (j.contains("privacy_bce")) {
    const auto& p = j["privacy_bce"];
    out["privacy_objective_loss"] = privacy_objective_loss(
        p.at("predicted").get<double>(), p.at("gold").get<bool>());
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware local/server LLM cascade engine"};
  app.require_subcommand(1);

  std::string config_path, corpus_path, params_path, log_path, report_path;
  std::string csv_path, episodes_path, strategy, host = "127.0.0.1";
  std::string synth_path, out_path, memory_out, mem_file, token, corpus_file;
  std::string category = "name", fixtures_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool sweep = false;
  int port = 8080;

  auto* train = app.add_subcommand("train", "Train the deferral policy");
  train->add_option("--config", config_path, "Engine config JSON");
  train->add_option("--corpus", corpus_path, "Training corpus JSONL")
      ->required();
  train->add_option("--out", params_path, "Output params file")->required();
  train->add_option("--log", log_path, "Per-iteration training log (JSONL)");
  train->add_option("--report", report_path, "Final metric report (JSON)");
  train->add_option("--seed", seed, "Override the config seed");

  auto* eval = app.add_subcommand("eval", "Evaluate a deferral strategy");
  eval->add_option("--config", config_path, "Engine config JSON");
  eval->add_option("--corpus", corpus_path, "Evaluation corpus JSONL")
      ->required();
  eval->add_option("--params", params_path, "Trained params file");
  eval->add_option("--strategy", strategy,
                   "policy | threshold | confidence (default: config)");
  eval->add_option("--threshold", threshold, "Baseline threshold in (0,1)");
  eval->add_flag("--sweep-threshold", sweep,
                 "Emit the 9-point threshold sweep CSV instead");
  eval->add_option("--report", report_path, "Metric report JSON path");
  eval->add_option("--report-csv", csv_path, "Metric report CSV path");
  eval->add_option("--episodes", episodes_path, "Per-episode CSV path");
  eval->add_option("--seed", seed, "Override the config seed");

  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", config_path, "Engine config JSON");
  serve->add_option("--params", params_path, "Trained params file");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--seed", seed, "Override the config seed");

  auto* simulate =
      app.add_subcommand("simulate", "Generate a synthetic corpus");
  simulate->add_option("--synth", synth_path, "Synthetic config JSON")
      ->required();
  simulate->add_option("--out", out_path, "Output corpus JSONL")->required();
  simulate->add_option("--emit-memory", memory_out,
                       "Also write a memory file covering the lexicon");
  simulate->add_option("--seed", seed, "Generation seed (default 42)");

  auto* memory = app.add_subcommand("memory", "Manage the private memory");
  memory->require_subcommand(1);
  auto* mem_add = memory->add_subcommand("add", "Add one token");
  mem_add->add_option("--file", mem_file, "Memory JSONL file")->required();
  mem_add->add_option("--token", token, "Token or phrase")->required();
  mem_add->add_option("--category", category,
                      "name | identifier | medical | other");
  auto* mem_list = memory->add_subcommand("list", "Print all entries");
  mem_list->add_option("--file", mem_file, "Memory JSONL file")->required();
  auto* mem_import =
      memory->add_subcommand("import", "Import a corpus's annotations");
  mem_import->add_option("--file", mem_file, "Memory JSONL file")->required();
  mem_import->add_option("--corpus", corpus_file, "Corpus JSONL")->required();
  mem_import->add_option("--category", category,
                         "Category for imported tokens");

  auto* losses = app.add_subcommand("losses", "Tuning-loss utilities");
  losses->require_subcommand(1);
  auto* losses_eval =
      losses->add_subcommand("eval", "Evaluate losses on a fixture file");
  losses_eval->add_option("--fixtures", fixtures_path, "Fixture JSON")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      return cmd_train(config_path, corpus_path, params_path, log_path,
                       report_path, seed);
    }
    if (*eval) {
      return cmd_eval(config_path, corpus_path, params_path, strategy,
                      threshold, sweep, report_path, csv_path, episodes_path,
                      seed);
    }
    if (*serve) return cmd_serve(config_path, params_path, host, port, seed);
    if (*simulate) return cmd_simulate(synth_path, out_path, memory_out, seed);
    if (*mem_add) return cmd_memory_add(mem_file, token, category);
    if (*mem_list) return cmd_memory_list(mem_file);
    if (*mem_import) return cmd_memory_import(mem_file, corpus_file, category);
    if (*losses_eval) return cmd_losses_eval(fixtures_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
