#pragma once

// Batch orchestration behind the CLI: run configuration, corpus-wide
// conversion, stage selection, baseline solving, scoring of prediction
// files, LLM evaluation and report emission. Every step is deterministic
// under a fixed configuration.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "matchup/converter.hpp"
#include "matchup/corpus_io.hpp"
#include "matchup/llm_client.hpp"
#include "matchup/prompt.hpp"
#include "matchup/random.hpp"
#include "matchup/report.hpp"
#include "matchup/response_parser.hpp"
#include "matchup/scorer.hpp"
#include "matchup/solver.hpp"

namespace matchup {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Serialization of keys, attempts and reports

inline json key_to_json(const AnswerKey& k) {
  json a = json::array();
  for (const auto& l : k.labels) a.push_back(l ? render_label(*l) : std::string());
  return a;
}

/// Array of label strings; "" marks a missing prediction.
inline AnswerKey key_from_json(const json& a) {
  if (!a.is_array()) throw SchemaViolation("key", "must be an array of labels");
  AnswerKey k;
  for (const auto& v : a) {
    if (!v.is_string()) throw SchemaViolation("key", "entries must be strings");
    const auto s = v.get<std::string>();
    if (s.empty()) {
      k.labels.push_back(std::nullopt);
      continue;
    }
    auto r = parse_label(s);
    if (!r) throw SchemaViolation("key", "'" + s + "' is not a label");
    k.labels.push_back(Label{*r});
  }
  return k;
}

inline json report_to_json(const ScoreReport& r) {
  json items = json::array();
  for (const auto& it : r.per_item) {
    items.push_back({{"index", it.index}, {"expected", it.expected}, {"got", it.got}, {"correct", it.correct}});
  }
  return json{{"puzzle_id", r.puzzle_id},
              {"solver_id", r.solver_id},
              {"format", std::string(to_string(r.format))},
              {"n_items", r.n_items},
              {"n_correct", r.n_correct},
              {"percent", r.percent},
              {"zeroed_for_alphabetical", r.zeroed_for_alphabetical},
              {"irregular", r.irregular},
              {"per_item", items}};
}

inline ScoreReport score_report_from_json(const json& j) {
  ScoreReport r;
  r.puzzle_id = j.at("puzzle_id").get<std::string>();
  r.solver_id = j.value("solver_id", std::string());
  auto f = format_from_string(j.at("format").get<std::string>());
  if (!f) throw SchemaViolation("format", "unknown format");
  r.format = *f;
  r.n_items = j.value("n_items", 0);
  r.n_correct = j.value("n_correct", 0);
  r.percent = j.at("percent").get<double>();
  r.zeroed_for_alphabetical = j.value("zeroed_for_alphabetical", false);
  r.irregular = j.value("irregular", false);
  for (const auto& it : j.value("per_item", json::array())) {
    r.per_item.push_back({it.at("index").get<int>(), it.value("expected", std::string()),
                          it.value("got", std::string()), it.value("correct", false)});
  }
  return r;
}

inline std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump(-1, ' ', false) + "\n";
  return out;
}

inline std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(read_file(p));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw MalformedSyntax(p.string() + ":" + std::to_string(lineno) + ": " + e.what(), e.byte);
    }
  }
  return out;
}

/// A solver's answer to one puzzle: a key (Match-Up) or answers (Rosetta).
struct Prediction {
  std::string solver_id;
  std::string puzzle_id;
  Format format = Format::MatchUp;
  AnswerKey key;
  std::vector<std::string> answers;
};

inline json prediction_to_json(const Prediction& p) {
  json j{{"solver_id", p.solver_id}, {"puzzle_id", p.puzzle_id}, {"format", std::string(to_string(p.format))}};
  if (p.format == Format::MatchUp) {
    j["key"] = key_to_json(p.key);
  } else {
    j["answers"] = p.answers;
  }
  return j;
}

inline Prediction prediction_from_json(const json& j) {
  Prediction p;
  p.solver_id = j.at("solver_id").get<std::string>();
  p.puzzle_id = j.at("puzzle_id").get<std::string>();
  auto f = format_from_string(j.at("format").get<std::string>());
  if (!f) throw SchemaViolation("format", "unknown format");
  p.format = *f;
  if (p.format == Format::MatchUp) {
    p.key = key_from_json(j.at("key"));
  } else {
    p.answers = j.at("answers").get<std::vector<std::string>>();
  }
  return p;
}

/// Scores one prediction against the puzzle it names.
inline ScoreReport score_prediction(const Prediction& pred, const Puzzle& puzzle) {
  ScoreReport r;
  if (const auto* mu = std::get_if<MatchUpPuzzle>(&puzzle)) {
    if (pred.format != Format::MatchUp) throw SchemaViolation("format", "prediction format differs from puzzle");
    r = score_matchup(pred.key, *mu);
  } else {
    if (pred.format != Format::RosettaStone) throw SchemaViolation("format", "prediction format differs from puzzle");
    r = score_rosetta({pred.puzzle_id, pred.answers}, std::get<RosettaPuzzle>(puzzle));
  }
  r.solver_id = pred.solver_id;
  return r;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class SeedPolicy { Fixed, PerPuzzle };
enum class FeedbackMode { Blind, AfterSubmit };

inline std::string_view to_string(FeedbackMode m) { return m == FeedbackMode::Blind ? "Blind" : "AfterSubmit"; }
inline std::optional<FeedbackMode> feedback_mode_from_string(std::string_view s) {
  if (s == "Blind") return FeedbackMode::Blind;
  if (s == "AfterSubmit") return FeedbackMode::AfterSubmit;
  return std::nullopt;
}

struct ServeSettings {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  fs::path session_store;
  fs::path static_dir;
  FeedbackMode default_feedback = FeedbackMode::Blind;
};

struct RunConfig {
  fs::path manifest;
  fs::path output_dir;
  SeedPolicy seed_policy = SeedPolicy::PerPuzzle;
  std::uint64_t seed = 0;
  std::set<Stage> stage_filter;
  std::set<Topic> topic_filter;
  int balance_k = 0;
  std::vector<ModelSpec> models;
  FeatureWeights solver_weights;
  fs::path cache_dir;
  int concurrency = 4;
  ServeSettings serve;

  fs::path converted_dir() const { return output_dir / "matchup"; }
  fs::path converted_manifest() const { return converted_dir() / "manifest.json"; }
};

inline RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) { return p.empty() ? fs::path() : (base_dir / p).lexically_normal(); };
  RunConfig c;
  c.manifest = resolve(j.at("manifest").get<std::string>());
  c.output_dir = resolve(j.value("output_dir", std::string("out")));
  if (j.contains("seed")) {
    const auto& s = j["seed"];
    const auto policy = s.value("policy", std::string("per_puzzle"));
    if (policy == "fixed") {
      c.seed_policy = SeedPolicy::Fixed;
    } else if (policy == "per_puzzle") {
      c.seed_policy = SeedPolicy::PerPuzzle;
    } else {
      throw Error("seed.policy must be 'fixed' or 'per_puzzle'");
    }
    c.seed = s.value("value", std::uint64_t{0});
  }
  for (const auto& s : j.value("stages", json::array())) {
    auto st = stage_from_string(s.get<std::string>());
    if (!st) throw Error("unknown stage filter '" + s.get<std::string>() + "'");
    c.stage_filter.insert(*st);
  }
  for (const auto& t : j.value("topics", json::array())) {
    auto tp = topic_from_string(t.get<std::string>());
    if (!tp) throw Error("unknown topic filter '" + t.get<std::string>() + "'");
    c.topic_filter.insert(*tp);
  }
  c.balance_k = j.value("balance_k", 0);
  for (const auto& m : j.value("models", json::array())) c.models.push_back(model_spec_from_json(m));
  if (j.contains("solver_weights")) {
    const auto& w = j["solver_weights"];
    c.solver_weights = {w.value("w_length", 1.0), w.value("w_names", 3.0), w.value("w_cooccur", 2.0)};
  }
  c.solver_weights.validate();
  c.cache_dir = resolve(j.value("cache_dir", std::string("cache")));
  c.concurrency = std::max(1, j.value("concurrency", 4));
  if (j.contains("serve")) {
    const auto& s = j["serve"];
    c.serve.bind_address = s.value("bind", std::string("127.0.0.1"));
    c.serve.port = s.value("port", 8080);
    c.serve.session_store = resolve(s.value("session_store", std::string("sessions.jsonl")));
    c.serve.static_dir = resolve(s.value("static_dir", std::string()));
    auto fm = feedback_mode_from_string(s.value("feedback_mode", std::string("Blind")));
    if (!fm) throw Error("serve.feedback_mode must be Blind or AfterSubmit");
    c.serve.default_feedback = *fm;
  } else {
    c.serve.session_store = c.output_dir / "sessions.jsonl";
  }
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error("config not found: " + path.string());
  return parse_run_config(json::parse(read_file(path)), path.parent_path());
}

/// Fixed policy: the global seed. Per-puzzle policy:
/// splitmix64(global ^ fnv1a64(puzzle_id)).
inline std::uint64_t derive_seed(SeedPolicy policy, std::uint64_t global, std::string_view puzzle_id) {
  if (policy == SeedPolicy::Fixed) return global;
  return splitmix64(global ^ stable_hash(puzzle_id));
}

inline bool passes_filters(const RunConfig& c, const PuzzleMeta& m) {
  if (!c.stage_filter.empty() && !c.stage_filter.contains(classify_stage(m.difficulty_levels))) return false;
  if (!c.topic_filter.empty()) {
    bool any = std::any_of(m.topics.begin(), m.topics.end(), [&](Topic t) { return c.topic_filter.contains(t); });
    if (!any) return false;
  }
  return true;
}

/// The configured corpus plus the converted Match-Up corpus when present.
inline LoadedCorpus load_run_corpus(const RunConfig& c) {
  LoadedCorpus corpus = load_corpus(c.manifest);
  if (fs::is_regular_file(c.converted_manifest())) {
    LoadedCorpus extra = load_corpus(c.converted_manifest());
    for (auto& p : extra.puzzles) {
      if (!corpus.find(meta_of(p).id)) corpus.puzzles.push_back(std::move(p));
    }
    corpus.diagnostics.insert(corpus.diagnostics.end(), extra.diagnostics.begin(), extra.diagnostics.end());
  }
  return corpus;
}

inline MetaIndex meta_index(const LoadedCorpus& corpus) {
  MetaIndex idx;
  for (const auto& p : corpus.puzzles) idx.emplace(meta_of(p).id, meta_of(p));
  return idx;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertSummary {
  struct Converted {
    std::string puzzle_id;
    std::string output_id;
    std::string path;
    std::uint64_t seed = 0;
  };
  struct Failure {
    std::string puzzle_id;
    std::string reason;
  };
  std::vector<Converted> converted;
  std::vector<Failure> not_convertible;
  std::vector<Diagnostic> diagnostics;

  json to_json() const {
    json conv = json::array(), fails = json::array(), diags = json::array();
    for (const auto& c : converted) {
      conv.push_back({{"puzzle_id", c.puzzle_id}, {"output_id", c.output_id}, {"path", c.path}, {"seed", c.seed}});
    }
    for (const auto& f : not_convertible) fails.push_back({{"puzzle_id", f.puzzle_id}, {"reason", f.reason}});
    for (const auto& d : diagnostics) {
      diags.push_back({{"puzzle_id", d.puzzle_id}, {"path", d.path}, {"message", d.message}});
    }
    return json{{"converted", conv}, {"not_convertible", fails}, {"diagnostics", diags}};
  }
};

/// Converts every convertible Rosetta puzzle in the manifest, writing one
/// canonical file per Match-Up puzzle, a manifest for them and a summary.
inline ConvertSummary convert_corpus(const RunConfig& c) {
  LoadedCorpus corpus = load_corpus(c.manifest);
  ConvertSummary summary;
  summary.diagnostics = corpus.diagnostics;
  CorpusManifest out_manifest{"converted-matchup", "1.0.0", {}};
  for (const auto& p : corpus.puzzles) {
    const auto* rosetta = std::get_if<RosettaPuzzle>(&p);
    if (!rosetta || !passes_filters(c, rosetta->meta)) continue;
    const std::uint64_t seed = derive_seed(c.seed_policy, c.seed, rosetta->meta.id);
    try {
      MatchUpPuzzle mu = convert(*rosetta, {seed, 16});
      const std::string file = mu.meta.id + ".json";
      write_file(c.converted_dir() / file, serialize_puzzle(mu));
      out_manifest.entries.push_back({mu.meta.id, file, Format::MatchUp, meta_summary(mu.meta), ""});
      summary.converted.push_back({rosetta->meta.id, mu.meta.id, (fs::path("matchup") / file).string(), seed});
    } catch (const NotConvertible& e) {
      summary.not_convertible.push_back({rosetta->meta.id, e.reason()});
    } catch (const DegenerateShuffle& e) {
      summary.not_convertible.push_back({rosetta->meta.id, e.what()});
    }
  }
  write_file(c.converted_manifest(), canonical_dump(manifest_to_json(out_manifest)));
  write_file(c.output_dir / "convert_summary.json", canonical_dump(summary.to_json()));
  return summary;
}

// ---------------------------------------------------------------------------
// stages

struct StageEntry {
  std::string puzzle_id;
  Format format = Format::RosettaStone;
  std::string topic_set;
  std::set<Difficulty> levels;
  Stage stage = Stage::Unstaged;
  bool selected = false;
};

struct StageShortfall {
  std::string topic_set;
  Stage stage = Stage::Unstaged;
  int wanted = 0;
  int found = 0;
};

struct EvaluatorAssignment {
  int evaluator = 0;
  std::vector<std::string> puzzle_ids;
};

struct StageListing {
  std::vector<StageEntry> entries;
  std::vector<StageShortfall> shortfalls;
  std::vector<EvaluatorAssignment> assignments;

  json to_json() const {
    json es = json::array(), ss = json::array(), as = json::array();
    for (const auto& e : entries) {
      json levels = json::array();
      for (auto d : e.levels) levels.push_back(std::string(to_string(d)));
      es.push_back({{"puzzle_id", e.puzzle_id},
                    {"format", std::string(to_string(e.format))},
                    {"topics", e.topic_set},
                    {"difficulty_levels", levels},
                    {"stage", std::string(to_string(e.stage))},
                    {"selected", e.selected}});
    }
    for (const auto& s : shortfalls) {
      ss.push_back({{"topics", s.topic_set},
                    {"stage", std::string(to_string(s.stage))},
                    {"wanted", s.wanted},
                    {"found", s.found}});
    }
    for (const auto& a : assignments) as.push_back({{"evaluator", a.evaluator}, {"puzzle_ids", a.puzzle_ids}});
    return json{{"entries", es}, {"shortfalls", ss}, {"assignments", as}};
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "puzzle_id,format,topics,difficulty_levels,stage,selected\n";
    for (const auto& e : entries) {
      std::string levels;
      for (auto d : e.levels) levels += (levels.empty() ? "" : "/") + std::string(to_string(d));
      os << csv_field(e.puzzle_id) << ',' << to_string(e.format) << ',' << csv_field(e.topic_set) << ',' << levels
         << ',' << to_string(e.stage) << ',' << (e.selected ? "true" : "false") << '\n';
    }
    return os.str();
  }
};

/// Classifies every puzzle by stage. With balance_k > 0, picks the first k
/// Rosetta puzzles (by id) per (topic set, stage) and reports shortfalls for
/// Stage 1 / Stage 2 groups with fewer than k. With evaluators > 0, gives
/// each evaluator, per group, the Rosetta puzzle of one pair and the
/// Match-Up conversion of a different pair.
inline StageListing select_stages(const LoadedCorpus& corpus, int balance_k, int evaluators = 0) {
  StageListing out;
  for (const auto& p : corpus.puzzles) {
    const auto& m = meta_of(p);
    out.entries.push_back({m.id, m.format, topic_set_label(m.topics), m.difficulty_levels,
                           classify_stage(m.difficulty_levels), false});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const StageEntry& a, const StageEntry& b) { return a.puzzle_id < b.puzzle_id; });
  if (balance_k <= 0) return out;

  std::map<std::string, std::map<Stage, std::vector<StageEntry*>>> groups;
  for (auto& e : out.entries) {
    if (e.format == Format::RosettaStone) groups[e.topic_set][e.stage].push_back(&e);
  }
  for (auto& [topics, by_stage] : groups) {
    for (Stage s : {Stage::Stage1, Stage::Stage2}) {
      auto& members = by_stage[s];
      const int take = std::min<int>(balance_k, static_cast<int>(members.size()));
      for (int k = 0; k < take; ++k) members[static_cast<std::size_t>(k)]->selected = true;
      if (take < balance_k) out.shortfalls.push_back({topics, s, balance_k, take});
      if (evaluators > 0 && take >= 2) {
        if (out.assignments.empty()) {
          for (int e = 0; e < evaluators; ++e) out.assignments.push_back({e + 1, {}});
        }
        for (int e = 0; e < evaluators && e < take; ++e) {
          auto& a = out.assignments[static_cast<std::size_t>(e)].puzzle_ids;
          a.push_back(members[static_cast<std::size_t>(e)]->puzzle_id);
          a.push_back(members[static_cast<std::size_t>((e + 1) % take)]->puzzle_id + "-mu");
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// solve / score / report

inline constexpr std::string_view kBaselineSolverId = "baseline";

struct SolveRun {
  std::vector<Prediction> predictions;
  std::vector<ScoreReport> reports;
};

/// Runs the baseline solver on every Match-Up puzzle that passes the
/// filters. Writes predictions, reports and, when requested, the feature
/// matrices as CSV.
inline SolveRun solve_corpus(const RunConfig& c, const LoadedCorpus& corpus, bool dump_matrices) {
  SolveRun run;
  const fs::path dir = c.output_dir / "solver";
  for (const auto& p : corpus.puzzles) {
    const auto* mu = std::get_if<MatchUpPuzzle>(&p);
    if (!mu || !passes_filters(c, mu->meta)) continue;
    const SolveResult r = solve(*mu, c.solver_weights);
    Prediction pred{std::string(kBaselineSolverId), mu->meta.id, Format::MatchUp, r.key, {}};
    ScoreReport rep = score_prediction(pred, p);
    run.predictions.push_back(pred);
    run.reports.push_back(rep);
    if (dump_matrices) {
      const fs::path m = dir / mu->meta.id;
      write_file(m / "length.csv", r.features.length.to_csv());
      write_file(m / "names.csv", r.features.names.to_csv());
      write_file(m / "cooccur.csv", r.features.cooccur.to_csv());
      write_file(m / "combined.csv", r.combined.to_csv());
      write_file(m / "diagnostics.json",
                 canonical_dump(json{{"puzzle_id", mu->meta.id},
                                     {"key", key_to_json(r.key)},
                                     {"total", r.total},
                                     {"uninformative", r.uninformative},
                                     {"weights",
                                      {{"w_length", c.solver_weights.w_length},
                                       {"w_names", c.solver_weights.w_names},
                                       {"w_cooccur", c.solver_weights.w_cooccur}}}}));
    }
  }
  std::vector<json> preds, reps;
  for (const auto& p : run.predictions) preds.push_back(prediction_to_json(p));
  for (const auto& r : run.reports) reps.push_back(report_to_json(r));
  write_file(c.output_dir / "predictions" / "baseline.jsonl", to_jsonl(preds));
  write_file(c.output_dir / "reports" / "baseline.jsonl", to_jsonl(reps));
  return run;
}

/// Scores a predictions JSONL file. Unknown puzzle ids are errors.
inline std::vector<ScoreReport> score_predictions(const std::vector<json>& rows, const LoadedCorpus& corpus) {
  std::vector<ScoreReport> out;
  for (const auto& row : rows) {
    Prediction pred = prediction_from_json(row);
    const Puzzle* p = corpus.find(pred.puzzle_id);
    if (!p) throw UnknownPuzzleId(pred.puzzle_id);
    out.push_back(score_prediction(pred, *p));
  }
  return out;
}

struct ReportFiles {
  std::string csv;
  std::string json_text;
};

inline ReportFiles make_report(const std::vector<ScoreReport>& reports, const MetaIndex& metadata) {
  const ReportTable t = build_report(aggregate(reports, metadata));
  return {report_to_csv(t), canonical_dump(report_to_json(t))};
}

// ---------------------------------------------------------------------------
// eval-llm

struct EvalOutcome {
  std::vector<Prediction> predictions;
  std::vector<ScoreReport> reports;
  std::vector<Diagnostic> failures;
};

/// Queries every model on every filtered puzzle (both formats), parses and
/// scores the responses. Unparseable Match-Up output scores as an empty key.
/// Queries run on up to `concurrency` threads; results keep corpus order.
inline EvalOutcome eval_llm(const RunConfig& c, const LoadedCorpus& corpus, QueryContext& ctx) {
  struct Job {
    const ModelSpec* model;
    const Puzzle* puzzle;
  };
  std::vector<Job> jobs;
  for (const auto& m : c.models) {
    for (const auto& p : corpus.puzzles) {
      if (passes_filters(c, meta_of(p))) jobs.push_back({&m, &p});
    }
  }
  struct Slot {
    std::optional<Prediction> pred;
    std::optional<ScoreReport> report;
    std::optional<Diagnostic> failure;
  };
  std::vector<Slot> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      const auto& meta = meta_of(*job.puzzle);
      try {
        const std::string raw = query_model(*job.model, build_prompt(*job.puzzle), ctx);
        Prediction pred{job.model->model_name, meta.id, meta.format, {}, {}};
        if (const auto* mu = std::get_if<MatchUpPuzzle>(job.puzzle)) {
          try {
            pred.key = parse_matchup_response(raw, *mu);
          } catch (const Unparseable&) {
            pred.key.labels.assign(mu->size(), std::nullopt);
          }
        } else {
          pred.answers = parse_rosetta_response(raw, std::get<RosettaPuzzle>(*job.puzzle)).answers;
        }
        slots[i].report = score_prediction(pred, *job.puzzle);
        slots[i].pred = std::move(pred);
      } catch (const std::exception& e) {
        slots[i].failure = Diagnostic{meta.id, job.model->model_name, e.what()};
      }
    }
  };
  const int threads = std::min<int>(c.concurrency, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  EvalOutcome out;
  for (auto& s : slots) {
    if (s.pred) out.predictions.push_back(std::move(*s.pred));
    if (s.report) out.reports.push_back(std::move(*s.report));
    if (s.failure) out.failures.push_back(std::move(*s.failure));
  }
  return out;
}

} // namespace matchup
