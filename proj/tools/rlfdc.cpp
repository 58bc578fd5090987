// Command-line front end: benchmark generation, training, selection,
// generation, metric inspection and evaluation reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rlfdc/datagen.hpp"
#include "rlfdc/dataset.hpp"
#include "rlfdc/generation.hpp"
#include "rlfdc/io_util.hpp"
#include "rlfdc/metrics.hpp"
#include "rlfdc/selection.hpp"
#include "rlfdc/trainer.hpp"

namespace fs = std::filesystem;
using namespace rlfdc;

namespace {

constexpr double kDefaultTriggerProb = 0.8;

void print_summary(const std::string& subcommand, int artifacts, std::uint64_t seed) {
  std::cout << "subcommand=" << subcommand << " status=ok artifacts=" << artifacts
            << " seed=" << seed << "\n";
}

// A --data argument may name one dataset document or a directory of them
// (manifest files are skipped). Directory order is by filename.
std::vector<std::string> dataset_paths(const std::string& data) {
  std::vector<std::string> paths;
  if (fs::is_directory(data)) {
    for (const auto& entry : fs::directory_iterator(data)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name.size() < 5 || name.substr(name.size() - 5) != ".json") continue;
      if (name == "manifest.json") continue;
      paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
  } else {
    paths.push_back(data);
  }
  if (paths.empty()) throw std::runtime_error("no dataset documents under " + data);
  return paths;
}

std::vector<Dataset> load_datasets(const std::vector<std::string>& paths) {
  std::vector<Dataset> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    try {
      out.push_back(load_dataset(read_file(p)));
    } catch (const std::exception& e) {
      throw std::runtime_error(p + ": " + e.what());
    }
  }
  return out;
}

std::shared_ptr<const QModel> load_model_file(const std::string& path) {
  return std::make_shared<QModel>(load_model(path));
}

ScorerSpec build_spec(const std::string& kind_name, double alpha,
                      const std::string& model_path, std::uint64_t seed) {
  ScorerSpec spec;
  spec.kind = scorer_kind_from_name(kind_name);
  if (spec.kind == ScorerKind::Fdg || spec.kind == ScorerKind::Weighted) spec.alpha = alpha;
  if (spec.kind == ScorerKind::Rlfdc) {
    if (model_path.empty()) throw std::runtime_error("metric 'rlfdc' requires --model");
    spec.model = load_model_file(model_path);
  }
  if (spec.kind == ScorerKind::Random) spec.seed = seed;
  spec.validate();
  return spec;
}

std::pair<int, int> parse_stmt_range(const std::string& s) {
  try {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw std::runtime_error("--stmts expects N or LO:HI, got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RL-based fault-diagnosis-capability metric toolkit"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "generate a synthetic labeled benchmark");
  int bench_faults = 10, bench_methods = 6, bench_tests = 40;
  std::string bench_stmts = "2:6", bench_out;
  double bench_trigger = kDefaultTriggerProb;
  std::uint64_t bench_seed = 0;
  bench->add_option("--faults", bench_faults, "number of faulty programs");
  bench->add_option("--methods", bench_methods, "methods per program");
  bench->add_option("--stmts", bench_stmts, "statements per method (N or LO:HI)");
  bench->add_option("--tests", bench_tests, "tests per program");
  bench->add_option("--trigger-prob", bench_trigger, "fault trigger probability");
  bench->add_option("--seed", bench_seed, "generator seed");
  bench->add_option("--out", bench_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train the FDC prediction model");
  std::string train_data, train_out, train_variant = "default";
  int train_epochs = 30;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--data", train_data, "dataset file or directory")->required();
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--variant", train_variant, "default, no-embed or regular-q")
      ->check(CLI::IsMember({"default", "no-embed", "regular-q"}));
  train_cmd->add_option("--seed", train_seed, "training seed");
  train_cmd->add_option("--out", train_out, "model output file")->required();

  // select
  auto* select_cmd = app.add_subcommand("select", "greedy metric-guided test selection");
  std::string sel_data, sel_metric, sel_model, sel_trace;
  double sel_alpha = 0.5;
  int sel_k = 10;
  std::uint64_t sel_seed = 0;
  select_cmd->add_option("--data", sel_data, "dataset file")->required();
  select_cmd->add_option("--metric", sel_metric, "scorer kind")->required();
  select_cmd->add_option("--model", sel_model, "model file (rlfdc)");
  select_cmd->add_option("--alpha", sel_alpha, "weight for fdg/weighted");
  select_cmd->add_option("--k", sel_k, "tests to select");
  select_cmd->add_option("--seed", sel_seed, "seed (random scorer)");
  select_cmd->add_option("--trace", sel_trace, "trace CSV output")->required();

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "simulated FDC-guided test generation");
  std::string gen_data, gen_fitness, gen_model, gen_out;
  int gen_generations = 60, gen_pop = 50, gen_count = 10;
  double gen_alpha = 0.5;
  std::uint64_t gen_seed = 0;
  gen_cmd->add_option("--data", gen_data, "dataset file")->required();
  gen_cmd->add_option("--fitness", gen_fitness, "fitness scorer kind")->required();
  gen_cmd->add_option("--model", gen_model, "model file (rlfdc)");
  gen_cmd->add_option("--alpha", gen_alpha, "weight for fdg/weighted");
  gen_cmd->add_option("--generations", gen_generations, "GA generations");
  gen_cmd->add_option("--pop", gen_pop, "population size");
  gen_cmd->add_option("--count", gen_count, "tests to emit");
  gen_cmd->add_option("--seed", gen_seed, "GA seed");
  gen_cmd->add_option("--out", gen_out, "output document")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "multi-metric acc@n / mAP sweep");
  std::string eval_data, eval_metrics, eval_model, eval_report;
  double eval_alpha = 0.5;
  int eval_k = 10, eval_jobs = 1;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--data", eval_data, "dataset file or directory")->required();
  eval_cmd->add_option("--metrics", eval_metrics, "comma-separated scorer kinds")->required();
  eval_cmd->add_option("--model", eval_model, "model file (rlfdc)");
  eval_cmd->add_option("--alpha", eval_alpha, "weight for fdg/weighted");
  eval_cmd->add_option("--k", eval_k, "tests to select per fault");
  eval_cmd->add_option("--jobs", eval_jobs, "parallel fault traces");
  eval_cmd->add_option("--seed", eval_seed, "base seed (random scorer)");
  eval_cmd->add_option("--report", eval_report, "report CSV output")->required();

  // metric
  auto* metric_cmd = app.add_subcommand("metric", "print suite-level or per-candidate values");
  std::string met_data, met_metric, met_model;
  double met_alpha = 0.5;
  std::uint64_t met_seed = 0;
  metric_cmd->add_option("--data", met_data, "dataset file")->required();
  metric_cmd->add_option("--metric", met_metric, "scorer kind")->required();
  metric_cmd->add_option("--model", met_model, "model file (rlfdc)");
  metric_cmd->add_option("--alpha", met_alpha, "weight for fdg/weighted");
  metric_cmd->add_option("--seed", met_seed, "seed (random scorer)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      SyntheticSpec spec;
      spec.methods = bench_methods;
      const auto [lo, hi] = parse_stmt_range(bench_stmts);
      spec.stmts_min = lo;
      spec.stmts_max = hi;
      spec.tests = bench_tests;
      spec.trigger_prob = bench_trigger;
      spec.seed = bench_seed;
      const auto datasets = generate_benchmark(spec, bench_faults);
      nlohmann::ordered_json manifest;
      manifest["version"] = 1;
      manifest["seed"] = bench_seed;
      manifest["count"] = bench_faults;
      manifest["files"] = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < datasets.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "fault_%03zu.json", i);
        write_file_atomic((fs::path(bench_out) / name).string(), serialize_dataset(datasets[i]));
        nlohmann::ordered_json entry;
        entry["file"] = name;
        entry["program_index"] = static_cast<int>(i);
        entry["seed"] = mix_seed(bench_seed, static_cast<std::uint64_t>(i));
        manifest["files"].push_back(std::move(entry));
      }
      write_file_atomic((fs::path(bench_out) / "manifest.json").string(),
                        manifest.dump(2) + "\n");
      print_summary("bench", bench_faults + 1, bench_seed);
    } else if (train_cmd->parsed()) {
      const auto datasets = load_datasets(dataset_paths(train_data));
      TrainConfig cfg;
      cfg.epochs = train_epochs;
      cfg.seed = train_seed;
      if (train_variant == "no-embed") cfg.variant.no_embed = true;
      if (train_variant == "regular-q") cfg.variant.regular_q = true;
      const QModel model = train(datasets, cfg);
      save_model(model, train_out);
      print_summary("train", 1, train_seed);
    } else if (select_cmd->parsed()) {
      const Dataset d = load_datasets({sel_data}).front();
      if (d.initial_failing.empty())
        throw std::runtime_error("dataset has no initial failing test");
      Scorer scorer(build_spec(sel_metric, sel_alpha, sel_model, sel_seed));
      const SelectionTrace trace = select(d, d.initial_failing.front(), scorer, sel_k);
      write_file_atomic(sel_trace, trace_to_csv(trace));
      print_summary("select", 1, sel_seed);
    } else if (gen_cmd->parsed()) {
      const Dataset d = load_datasets({gen_data}).front();
      if (d.initial_failing.empty())
        throw std::runtime_error("dataset has no initial failing test");
      Scorer fitness(build_spec(gen_fitness, gen_alpha, gen_model, gen_seed));
      GenConfig cfg;
      cfg.population = gen_pop;
      cfg.generations = gen_generations;
      cfg.output_count = gen_count;
      cfg.seed = gen_seed;
      const auto vectors = ga_generate(d, d.initial_failing.front(), fitness, cfg);
      const auto outcomes = label_generated(d, vectors, kDefaultTriggerProb, gen_seed);
      write_file_atomic(gen_out, serialize_generated(vectors, outcomes));
      print_summary("generate", 1, gen_seed);
    } else if (eval_cmd->parsed()) {
      const auto paths = dataset_paths(eval_data);
      const auto datasets = load_datasets(paths);
      std::vector<std::string> labels;
      for (const auto& p : paths) labels.push_back(fs::path(p).filename().string());
      std::vector<ScorerSpec> specs;
      std::string token;
      for (char c : eval_metrics + ",") {
        if (c == ',') {
          if (!token.empty()) specs.push_back(build_spec(token, eval_alpha, eval_model, eval_seed));
          token.clear();
        } else {
          token += c;
        }
      }
      if (specs.empty()) throw std::runtime_error("--metrics lists no metric");
      const EvalReport report = evaluate(datasets, labels, specs, eval_k, eval_jobs);
      for (const auto& s : report.skipped) std::cerr << "skipped " << s << "\n";
      write_file_atomic(eval_report, report_to_csv(report));
      print_summary("eval", 1, eval_seed);
    } else if (metric_cmd->parsed()) {
      const Dataset d = load_datasets({met_data}).front();
      const ScorerKind kind = scorer_kind_from_name(met_metric);
      if (kind == ScorerKind::Tfd || kind == ScorerKind::Ddu || kind == ScorerKind::Entbug) {
        std::vector<TestId> all;
        for (TestId t = 0; t < d.num_tests(); ++t) all.push_back(t);
        double value = 0.0;
        if (kind == ScorerKind::Tfd) {
          std::vector<ElementId> scope;
          for (ElementId e = 0; e < d.num_elements(); ++e) scope.push_back(e);
          value = static_cast<double>(tfd(d, all, scope));
        } else if (kind == ScorerKind::Ddu) {
          value = ddu(d, all);
        } else {
          value = entbug(d, all);
        }
        std::cout << "suite value=" << format_fixed(value) << "\n";
      } else {
        if (d.initial_failing.empty())
          throw std::runtime_error("dataset has no initial failing test");
        const TestId failing = d.initial_failing.front();
        Scorer scorer(build_spec(met_metric, met_alpha, met_model, met_seed));
        SuiteContext ctx(d, failing);
        for (TestId t = 0; t < d.num_tests(); ++t) {
          if (t == failing) continue;
          std::cout << "candidate=" << t << " value=" << format_fixed(scorer.score(ctx, t))
                    << "\n";
        }
      }
      print_summary("metric", 0, met_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
