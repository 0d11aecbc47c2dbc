#include "d2d/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "d2d/parallel.hpp"
#include "d2d/runner.hpp"

namespace d2d {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::optional<std::string> base_url;
  std::optional<std::string> api_key_env;
  std::optional<std::string> cache_path;
  bool replay_only = false;
  std::string script_path;
  std::optional<int> parallelism;
  std::string out_dir = "runs";
  std::string templates_dir;
  std::optional<int> rounds;
  std::optional<std::string> variant;
  std::optional<std::string> model;
  std::optional<std::string> positive_class;
  bool neutral_labels = false;
  bool order_reversed = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file (CLI flags override it)");
  cmd->add_option("--base-url", o.base_url, "chat-completions base URL");
  cmd->add_option("--api-key-env", o.api_key_env, "environment variable holding the API key");
  cmd->add_option("--cache", o.cache_path, "record/replay cache file");
  cmd->add_flag("--replay-only", o.replay_only, "serve only from the cache, never the network");
  cmd->add_option("--script", o.script_path, "scripted backend fixture (JSON) instead of HTTP");
  cmd->add_option("-j,--parallelism", o.parallelism, "concurrent items")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", o.out_dir, "output directory");
  cmd->add_option("--templates", o.templates_dir, "directory of prompt template overrides");
  cmd->add_option("--rounds", o.rounds, "debate rounds (1-6)")->check(CLI::Range(1, 6));
  cmd->add_option("--variant", o.variant, "FULL | NO_DOMAIN_PROFILE | NO_STAGE_DESIGN | NO_MULTI_JUDGE");
  cmd->add_option("--model", o.model, "default model id");
  cmd->add_option("--positive-class", o.positive_class, "REAL or FAKE");
  cmd->add_flag("--neutral-labels", o.neutral_labels, "Supporter/Skeptic instead of Affirmative/Negative");
  cmd->add_flag("--reverse-order", o.order_reversed, "Negative side speaks first");
}

struct Setup {
  RunConfig config;
  HttpBackendOptions http;
  std::unique_ptr<Backend> base;
  std::unique_ptr<CachedBackend> cache;
  Backend* backend = nullptr;
  PromptRegistry prompts;
};

std::unique_ptr<Setup> make_setup(const CommonOptions& o) {
  auto s = std::make_unique<Setup>();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw Error(ErrorCode::IO_ERROR, "cannot open config " + o.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SCHEMA_ERROR, o.config_path + ": " + e.what());
    }
    s->config = j.get<RunConfig>();
    if (j.contains("backend")) s->http = j.at("backend").get<HttpBackendOptions>();
  }
  if (o.base_url) s->http.base_url = *o.base_url;
  if (o.api_key_env) s->http.api_key_env = *o.api_key_env;
  if (o.cache_path) s->config.cache_path = *o.cache_path;
  if (o.parallelism) s->config.parallelism = *o.parallelism;
  if (o.rounds) s->config.rounds = *o.rounds;
  if (o.variant) s->config.variant = parse_variant(*o.variant);
  if (o.model) s->config.models.default_model = *o.model;
  if (o.positive_class) s->config.positive_class = parse_label(*o.positive_class);
  if (o.neutral_labels) s->config.neutral_labels = true;
  if (o.order_reversed) s->config.order_reversed = true;
  s->config.validate();

  if (!o.templates_dir.empty()) s->prompts = PromptRegistry::with_overrides(o.templates_dir);

  if (!o.replay_only) {
    if (!o.script_path.empty()) s->base = ScriptedBackend::from_fixture(o.script_path);
    else s->base = std::make_unique<HttpBackend>(s->http);
  }
  if (s->config.cache_path || o.replay_only) {
    s->cache = std::make_unique<CachedBackend>(s->base.get(), s->config.cache_path);
    s->backend = s->cache.get();
  } else {
    s->backend = s->base.get();
  }
  return s;
}

Dataset load_for_run(const std::string& path, double fraction, bool drop) {
  auto ds = load_dataset(path);
  return drop ? drop_longest(ds, fraction) : ds;
}

std::string percent(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * v;
  return ss.str();
}

void print_metrics(std::ostream& out, const std::string& name, const MetricsReport& m) {
  out << std::left << std::setw(20) << name << " acc " << percent(m.accuracy) << "  prec " << percent(m.precision)
      << "  rec " << percent(m.recall) << "  f1 " << percent(m.f1) << "  (n=" << m.n_evaluated
      << ", failed=" << m.n_failed << ", positive=" << to_string(m.positive_class) << ")\n";
}

long failed_items(const RunRecord& r) {
  return std::count_if(r.items.begin(), r.items.end(), [](const auto& i) { return i.failure.has_value(); });
}

int finish_runs(std::ostream& out, std::ostream& err, const std::vector<std::pair<std::string, RunRecord>>& runs) {
  long failed = 0;
  for (const auto& [dir, rec] : runs) {
    write_run_record(dir, rec);
    print_metrics(out, rec.method + (rec.config.variant == Variant::FULL ? "" : "/" + std::string(to_string(rec.config.variant))),
                  rec.metrics);
    failed += failed_items(rec);
  }
  if (failed > 0) {
    err << failed << " item(s) failed; see the failure fields in results.jsonl\n";
    return 2;
  }
  return 0;
}

void print_debate(std::ostream& out, const DebateResult& r) {
  out << "claim:   " << r.claim_id << "\n";
  out << "domain:  " << r.domain << "\n";
  for (const auto& e : r.verdict.sheet.entries) {
    out << "  " << std::left << std::setw(20) << display_name(e.dimension) << e.affirmative << ":" << e.negative
        << "\n";
  }
  out << "totals:  " << r.verdict.sheet.affirmative_total << ":" << r.verdict.sheet.negative_total << "\n";
  out << "verdict: " << to_string(r.verdict.label) << "\n";
}

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Misinformation detection through structured multi-agent debate", "d2d"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string dataset_path, text, claim_id = "claim", transcript_path, record_dir, stage_name, sub_model;
  std::string methods = "ZS,COT,SR,SMAD", kinds = "ORDER,RELABEL";
  std::vector<std::string> variants;
  std::vector<int> sweep_rounds_list = {1, 2, 3, 4, 5, 6};
  std::string method = "D2D";
  bool no_drop = false, json_out = false, write_metrics = false;

  auto* detect = app.add_subcommand("detect", "debate a single claim");
  add_common(detect, common);
  detect->add_option("--text", text, "claim text")->required();
  detect->add_option("--id", claim_id, "claim id");
  detect->add_option("--transcript", transcript_path, "write the full result document here");
  detect->add_flag("--json", json_out, "print the result document instead of a summary");

  auto* run = app.add_subcommand("run", "run one method over a dataset");
  add_common(run, common);
  run->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
  run->add_option("--method", method, "D2D | ZS | COT | SR | SMAD");
  run->add_flag("--no-drop", no_drop, "keep the longest items");

  auto* bench = app.add_subcommand("bench", "run the baselines over a dataset");
  add_common(bench, common);
  bench->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
  bench->add_option("--methods", methods, "comma-separated baseline list");
  bench->add_flag("--no-drop", no_drop, "keep the longest items");

  auto* ablate = app.add_subcommand("ablate", "run the full debate and its ablated variants");
  add_common(ablate, common);
  ablate->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
  ablate->add_option("--variants", variants, "subset of variants (default: all four)");
  ablate->add_flag("--no-drop", no_drop, "keep the longest items");

  auto* perturb = app.add_subcommand("perturb", "speaking-order and label perturbation consistency");
  add_common(perturb, common);
  perturb->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
  perturb->add_option("--kinds", kinds, "ORDER, RELABEL or both (comma-separated)");

  auto* sweep = app.add_subcommand("sweep-rounds", "F1 by text length and number of rounds");
  add_common(sweep, common);
  sweep->add_option("--dataset", dataset_path, "JSON-lines dataset with labels")->required();
  sweep->add_option("--round-list", sweep_rounds_list, "rounds to evaluate")->check(CLI::Range(1, 6));

  auto* substitute = app.add_subcommand("substitute", "swap the model serving one stage");
  add_common(substitute, common);
  substitute->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
  substitute->add_option("--stage", stage_name, "OPENING | REBUTTAL | FREE_DEBATE | CLOSING | JUDGEMENT | ALL")
      ->required();
  substitute->add_option("--with", sub_model, "model id to substitute")->required();
  substitute->add_flag("--no-drop", no_drop, "keep the longest items");

  auto* metrics = app.add_subcommand("metrics", "recompute metrics for a stored run");
  metrics->add_option("--record", record_dir, "run directory")->required();
  metrics->add_option("--positive-class", common.positive_class, "REAL or FAKE");
  metrics->add_flag("--write", write_metrics, "overwrite metrics.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (metrics->parsed()) {
      auto rec = read_run_record(record_dir);
      const auto positive = common.positive_class ? parse_label(*common.positive_class) : rec.config.positive_class;
      rec.metrics = recompute_metrics(rec, positive);
      print_metrics(out, rec.method, rec.metrics);
      if (write_metrics) write_run_record(record_dir, rec);
      return 0;
    }

    auto setup = make_setup(common);
    auto& backend = *setup->backend;
    const auto& cfg = setup->config;

    if (detect->parsed()) {
      const DebateEngine engine(backend, setup->prompts, cfg);
      const auto result = engine.run_debate(Claim::make(claim_id, text));
      if (json_out) out << json(result).dump(2) << "\n";
      else print_debate(out, result);
      if (!transcript_path.empty()) {
        std::ofstream f(transcript_path);
        if (!f) throw Error(ErrorCode::IO_ERROR, "cannot write " + transcript_path);
        f << json(result).dump(2) << "\n";
      }
      return 0;
    }

    if (run->parsed()) {
      const auto ds = load_for_run(dataset_path, cfg.drop_longest_fraction, !no_drop);
      const auto spec = MethodSpec::parse(method);
      auto rec = run_dataset(backend, setup->prompts, ds, cfg, spec);
      return finish_runs(out, err, {{(fs::path(common.out_dir) / spec.name()).string(), std::move(rec)}});
    }

    if (bench->parsed()) {
      const auto ds = load_for_run(dataset_path, cfg.drop_longest_fraction, !no_drop);
      std::vector<std::pair<std::string, RunRecord>> runs;
      std::stringstream list(methods);
      for (std::string m; std::getline(list, m, ',');) {
        if (m.empty()) continue;
        const auto spec = MethodSpec::parse(m);
        runs.emplace_back((fs::path(common.out_dir) / spec.name()).string(),
                          run_dataset(backend, setup->prompts, ds, cfg, spec));
      }
      return finish_runs(out, err, runs);
    }

    if (ablate->parsed()) {
      const auto ds = load_for_run(dataset_path, cfg.drop_longest_fraction, !no_drop);
      std::vector<Variant> chosen(kAllVariants.begin(), kAllVariants.end());
      if (!variants.empty()) {
        chosen.clear();
        for (const auto& v : variants) chosen.push_back(parse_variant(v));
      }
      std::vector<std::pair<std::string, RunRecord>> runs;
      for (Variant v : chosen) {
        auto c = cfg;
        c.variant = v;
        runs.emplace_back((fs::path(common.out_dir) / std::string(to_string(v))).string(),
                          run_dataset(backend, setup->prompts, ds, c, MethodSpec{}));
      }
      return finish_runs(out, err, runs);
    }

    if (substitute->parsed()) {
      const auto ds = load_for_run(dataset_path, cfg.drop_longest_fraction, !no_drop);
      std::vector<Stage> stages;
      if (stage_name == "ALL" || stage_name == "all") {
        stages = {Stage::OPENING, Stage::REBUTTAL, Stage::FREE_DEBATE, Stage::CLOSING, Stage::JUDGEMENT};
      } else {
        stages = {parse_stage(stage_name)};
      }
      std::vector<std::pair<std::string, RunRecord>> runs;
      for (Stage st : stages) {
        auto rec = run_dataset(backend, setup->prompts, ds, substitute_stage_model(cfg, st, sub_model), MethodSpec{});
        rec.method = "D2D@" + std::string(to_string(st)) + "=" + sub_model;
        runs.emplace_back((fs::path(common.out_dir) / ("substitute_" + std::string(to_string(st)))).string(),
                          std::move(rec));
      }
      return finish_runs(out, err, runs);
    }

    if (perturb->parsed()) {
      const auto ds = load_dataset(dataset_path);
      fs::create_directories(common.out_dir);
      long failed = 0;
      std::stringstream list(kinds);
      for (std::string k; std::getline(list, k, ',');) {
        if (k.empty()) continue;
        const auto kind = parse_perturbation(k);
        std::vector<PerturbationReport> reports(ds.items.size());
        parallel_for(reports.size(), cfg.parallelism, [&](size_t i) {
          reports[i] = run_perturbation(backend, setup->prompts, ds.items[i], cfg, kind);
        });

        std::ofstream f(fs::path(common.out_dir) / ("perturb_" + std::string(to_string(kind)) + ".jsonl"));
        // label -> consistent -> bucket -> count
        std::map<std::string, std::map<bool, std::map<ConsistencyBucket, int>>> table;
        for (size_t i = 0; i < reports.size(); ++i) {
          f << json(reports[i]).dump() << "\n";
          if (reports[i].failed()) {
            ++failed;
            continue;
          }
          const auto gold = ds.items[i].gold_label;
          table[gold ? std::string(to_string(*gold)) : "UNLABELED"][reports[i].verdict_consistent][reports[i].bucket]++;
        }
        out << "perturbation " << to_string(kind) << "\n";
        for (const auto& [label, by_consistency] : table) {
          for (bool consistent : {true, false}) {
            const auto it = by_consistency.find(consistent);
            auto count = [&](ConsistencyBucket b) {
              if (it == by_consistency.end()) return 0;
              const auto c = it->second.find(b);
              return c == it->second.end() ? 0 : c->second;
            };
            out << "  " << std::left << std::setw(10) << label << std::setw(13)
                << (consistent ? "consistent" : "inconsistent") << " d<=5: " << count(ConsistencyBucket::STRONG)
                << "  5<d<=10: " << count(ConsistencyBucket::MODERATE)
                << "  d>10: " << count(ConsistencyBucket::LARGE) << "\n";
          }
        }
      }
      if (failed > 0) {
        err << failed << " perturbation pair(s) failed\n";
        return 2;
      }
      return 0;
    }

    if (sweep->parsed()) {
      const auto ds = load_dataset(dataset_path);
      const auto points = sweep_rounds(backend, setup->prompts, ds.items, cfg, SweepOptions{sweep_rounds_list});
      fs::create_directories(common.out_dir);
      std::ofstream f(fs::path(common.out_dir) / "sweep_rounds.jsonl");
      for (const auto& p : points) {
        f << json(p).dump() << "\n";
        out << std::left << std::setw(10) << to_string(p.length_bin) << " rounds " << p.rounds << "  f1 "
            << percent(p.f1) << "  (n=" << p.n << ", failed=" << p.n_failed << ")\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace d2d
