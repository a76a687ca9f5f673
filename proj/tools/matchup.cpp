// Command-line front end: convert, stages, solve, eval-llm, score, report,
// serve. Every subcommand reads a run configuration via --config.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "matchup/http_server.hpp"
#include "matchup/http_transport.hpp"
#include "matchup/runner.hpp"
#include "matchup/session.hpp"

using namespace matchup;

namespace {

void print_diagnostics(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) std::cerr << "warning: " << d.puzzle_id << " (" << d.path << "): " << d.message << "\n";
}

int run_convert(const RunConfig& c) {
  const ConvertSummary s = convert_corpus(c);
  print_diagnostics(s.diagnostics);
  for (const auto& f : s.not_convertible) std::cout << "not convertible: " << f.puzzle_id << ": " << f.reason << "\n";
  std::cout << s.converted.size() << " converted, " << s.not_convertible.size() << " not convertible -> "
            << (c.output_dir / "convert_summary.json").string() << "\n";
  return 0;
}

int run_stages(const RunConfig& c, int balance_k, int evaluators, const std::string& format) {
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  const StageListing l = select_stages(corpus, balance_k > 0 ? balance_k : c.balance_k, evaluators);
  if (format == "json") {
    std::cout << canonical_dump(l.to_json());
  } else {
    std::cout << l.to_csv();
    for (const auto& s : l.shortfalls) {
      std::cerr << "shortfall: " << s.topic_set << " " << to_string(s.stage) << ": " << s.found << " of " << s.wanted
                << "\n";
    }
  }
  return 0;
}

int run_solve(const RunConfig& c, bool dump) {
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  const SolveRun run = solve_corpus(c, corpus, dump);
  for (const auto& r : run.reports) std::cout << r.puzzle_id << "\t" << format_percent(r.percent) << "\n";
  std::cout << run.reports.size() << " puzzles solved -> " << (c.output_dir / "predictions" / "baseline.jsonl").string()
            << "\n";
  return 0;
}

int run_eval(RunConfig c, const std::vector<std::string>& models, bool cache_only) {
  if (!models.empty()) {
    std::erase_if(c.models, [&](const ModelSpec& m) {
      return std::find(models.begin(), models.end(), m.model_name) == models.end();
    });
  }
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  ResponseCache cache(c.cache_dir);
  QueryContext ctx;
  ctx.cache = &cache;
  if (cache_only) {
    ctx.transport = [](const HttpRequest&) -> HttpResponse { throw NetworkError("cache miss in cache-only mode"); };
    ctx.getenv = [](const std::string&) { return std::optional<std::string>("unused"); };
  } else {
    ctx.transport = http_transport();
  }
  const EvalOutcome out = eval_llm(c, corpus, ctx);
  for (const auto& f : out.failures) std::cerr << "failed: " << f.puzzle_id << " [" << f.path << "]: " << f.message << "\n";
  std::map<std::string, std::pair<std::vector<json>, std::vector<json>>> by_model;
  for (const auto& p : out.predictions) by_model[p.solver_id].first.push_back(prediction_to_json(p));
  for (const auto& r : out.reports) by_model[r.solver_id].second.push_back(report_to_json(r));
  for (const auto& [model, rows] : by_model) {
    write_file(c.output_dir / "predictions" / (model + ".jsonl"), to_jsonl(rows.first));
    write_file(c.output_dir / "reports" / (model + ".jsonl"), to_jsonl(rows.second));
  }
  std::cout << out.reports.size() << " responses scored, " << out.failures.size() << " failed\n";
  return out.failures.empty() ? 0 : 2;
}

int run_score(const RunConfig& c, const std::string& predictions, std::string out) {
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  const auto reports = score_predictions(read_jsonl(predictions), corpus);
  std::vector<json> rows;
  for (const auto& r : reports) rows.push_back(report_to_json(r));
  if (out.empty()) out = (c.output_dir / "reports" / fs::path(predictions).filename()).string();
  write_file(out, to_jsonl(rows));
  std::cout << reports.size() << " reports -> " << out << "\n";
  return 0;
}

int run_report(const RunConfig& c, const std::vector<std::string>& inputs, std::string out_dir) {
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  std::vector<ScoreReport> reports;
  for (const auto& in : inputs) {
    for (const auto& row : read_jsonl(in)) reports.push_back(score_report_from_json(row));
  }
  const ReportFiles files = make_report(reports, meta_index(corpus));
  const fs::path dir = out_dir.empty() ? c.output_dir : fs::path(out_dir);
  write_file(dir / "report.csv", files.csv);
  write_file(dir / "report.json", files.json_text);
  std::cout << files.csv;
  return 0;
}

httplib::Server* g_server = nullptr;

int run_serve(RunConfig c, const std::string& bind, int port) {
  if (!bind.empty()) c.serve.bind_address = bind;
  if (port > 0) c.serve.port = port;
  const LoadedCorpus corpus = load_run_corpus(c);
  print_diagnostics(corpus.diagnostics);
  SessionService service(corpus, c.serve.session_store, c.serve.default_feedback);
  httplib::Server server;
  install_routes(server, service, c.serve.static_dir);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "serving " << corpus.puzzles.size() << " puzzles on http://" << c.serve.bind_address << ":"
            << c.serve.port << "\n";
  if (!server.listen(c.serve.bind_address, c.serve.port)) {
    std::cerr << "error: cannot listen on " << c.serve.bind_address << ":" << c.serve.port << "\n";
    return 1;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rosetta Stone to Match-Up puzzle conversion, solving, scoring and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  };

  auto* convert_cmd = app.add_subcommand("convert", "Convert every convertible Rosetta Stone puzzle");
  add_config(convert_cmd);
  std::optional<std::uint64_t> seed_override;
  convert_cmd->add_option("--seed", seed_override, "Override the global seed");

  auto* stages_cmd = app.add_subcommand("stages", "Classify puzzles by stage and optionally balance them");
  add_config(stages_cmd);
  int balance_k = 0, evaluators = 0;
  std::string stages_format = "csv";
  stages_cmd->add_option("--balance-k", balance_k, "Puzzles wanted per (topic set, stage)");
  stages_cmd->add_option("--evaluators", evaluators, "Split balanced pairs across this many evaluators");
  stages_cmd->add_option("--format", stages_format)->check(CLI::IsMember({"csv", "json"}));

  auto* solve_cmd = app.add_subcommand("solve", "Run the baseline solver on Match-Up puzzles");
  add_config(solve_cmd);
  bool dump = false;
  solve_cmd->add_flag("--dump-matrices", dump, "Write feature matrices as CSV");
  std::optional<double> w_length, w_names, w_cooccur;
  solve_cmd->add_option("--w-length", w_length, "Length feature weight");
  solve_cmd->add_option("--w-names", w_names, "Name-anchor feature weight");
  solve_cmd->add_option("--w-cooccur", w_cooccur, "Co-occurrence feature weight");

  auto* eval_cmd = app.add_subcommand("eval-llm", "Query configured models zero-shot and score them");
  add_config(eval_cmd);
  std::vector<std::string> models;
  bool cache_only = false;
  eval_cmd->add_option("--model", models, "Restrict to these model names");
  eval_cmd->add_flag("--cache-only", cache_only, "Use cached responses only; never touch the network");

  auto* score_cmd = app.add_subcommand("score", "Score a predictions JSONL file");
  add_config(score_cmd);
  std::string predictions, score_out;
  score_cmd->add_option("--predictions", predictions)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--out", score_out, "Reports JSONL path");

  auto* report_cmd = app.add_subcommand("report", "Aggregate score reports into a topic by stage table");
  add_config(report_cmd);
  std::vector<std::string> report_inputs;
  std::string report_dir;
  report_cmd->add_option("--reports", report_inputs, "Score report JSONL files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--out-dir", report_dir);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the session API for human solvers");
  add_config(serve_cmd);
  std::string bind;
  int port = 0;
  serve_cmd->add_option("--bind", bind);
  serve_cmd->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig c = load_run_config(config_path);
    if (*convert_cmd) {
      if (seed_override) c.seed = *seed_override;
      return run_convert(c);
    }
    if (*stages_cmd) return run_stages(c, balance_k, evaluators, stages_format);
    if (*solve_cmd) {
      if (w_length) c.solver_weights.w_length = *w_length;
      if (w_names) c.solver_weights.w_names = *w_names;
      if (w_cooccur) c.solver_weights.w_cooccur = *w_cooccur;
      c.solver_weights.validate();
      return run_solve(c, dump);
    }
    if (*eval_cmd) return run_eval(c, models, cache_only);
    if (*score_cmd) return run_score(c, predictions, score_out);
    if (*report_cmd) return run_report(c, report_inputs, report_dir);
    if (*serve_cmd) return run_serve(c, bind, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
