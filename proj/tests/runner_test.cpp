#include <gtest/gtest.h>

#include "matchup/runner.hpp"
#include "test_support.hpp"

using namespace matchup;
using namespace testing_support;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

RunConfig config_for(const fs::path& manifest, const fs::path& out) {
  json j{{"manifest", manifest.string()},
         {"output_dir", out.string()},
         {"seed", {{"policy", "per_puzzle"}, {"value", 7}}},
         {"cache_dir", (out / "cache").string()}};
  return parse_run_config(j, "/");
}

} // namespace

TEST(RunConfig, ResolvesPathsAgainstConfigDirectory) {
  const json j = json::parse(R"({
    "manifest": "corpus/manifest.json", "output_dir": "out",
    "seed": {"policy": "fixed", "value": 9}, "stages": ["s1"], "topics": ["Syntax"],
    "solver_weights": {"w_length": 2, "w_names": 1, "w_cooccur": 0},
    "serve": {"port": 9000, "feedback_mode": "AfterSubmit", "session_store": "s.jsonl"}})");
  const RunConfig c = parse_run_config(j, "/base");
  EXPECT_EQ(c.manifest, fs::path("/base/corpus/manifest.json"));
  EXPECT_EQ(c.output_dir, fs::path("/base/out"));
  EXPECT_EQ(c.seed_policy, SeedPolicy::Fixed);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.stage_filter, std::set<Stage>{Stage::Stage1});
  EXPECT_EQ(c.topic_filter, std::set<Topic>{Topic::Syntax});
  EXPECT_DOUBLE_EQ(c.solver_weights.w_length, 2.0);
  EXPECT_EQ(c.serve.port, 9000);
  EXPECT_EQ(c.serve.default_feedback, FeedbackMode::AfterSubmit);
  EXPECT_EQ(c.serve.session_store, fs::path("/base/s.jsonl"));
}

TEST(RunConfig, RejectsUnknownFilters) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"manifest":"m","stages":["s3"]})"), "/"), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"manifest":"m","topics":["Pragmatics"]})"), "/"), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"manifest":"m","seed":{"policy":"random"}})"), "/"), Error);
}

TEST(RunConfig, ShippedExampleConfigLoads) {
  const RunConfig c = load_run_config(source_dir() / "configs" / "run.json");
  EXPECT_EQ(c.models.size(), 2u);
  EXPECT_TRUE(fs::exists(c.manifest));
}

TEST(Seeds, DerivedPerPuzzle) {
  EXPECT_EQ(derive_seed(SeedPolicy::Fixed, 5, "a"), 5u);
  EXPECT_EQ(derive_seed(SeedPolicy::PerPuzzle, 5, "a"), splitmix64(5 ^ stable_hash("a")));
  EXPECT_NE(derive_seed(SeedPolicy::PerPuzzle, 5, "a"), derive_seed(SeedPolicy::PerPuzzle, 5, "b"));
}

TEST(ConvertCorpus, ShippedCorpusGivesOneConversion) {
  TempDir out;
  const auto c = config_for(corpus_dir() / "manifest.json", out.path());
  const ConvertSummary s = convert_corpus(c);
  ASSERT_EQ(s.converted.size(), 1u);
  EXPECT_TRUE(s.not_convertible.empty());
  EXPECT_EQ(s.converted[0].output_id, "uklo-2018-gilbertese-mu");
  EXPECT_EQ(s.converted[0].seed, derive_seed(SeedPolicy::PerPuzzle, 7, "uklo-2018-gilbertese"));
  const LoadedCorpus converted = load_corpus(c.converted_manifest());
  ASSERT_EQ(converted.puzzles.size(), 1u);
  EXPECT_TRUE(converted.diagnostics.empty());
  const auto& mu = std::get<MatchUpPuzzle>(converted.puzzles[0]);
  EXPECT_EQ(mu, convert(gilbertese(), {s.converted[0].seed, 16}));
}

TEST(ConvertCorpus, KairakStyleIsReported) {
  TempDir out;
  const ConvertSummary s = convert_corpus(config_for(fixture_dir() / "manifest_with_kairak.json", out.path()));
  EXPECT_EQ(s.converted.size(), 1u);
  ASSERT_EQ(s.not_convertible.size(), 1u);
  EXPECT_EQ(s.not_convertible[0].puzzle_id, "synthetic-kairak-style");
  EXPECT_EQ(s.not_convertible[0].reason, "multi-template answer");
  const json summary = json::parse(read_file(out.path() / "convert_summary.json"));
  EXPECT_EQ(summary["not_convertible"][0]["reason"], "multi-template answer");
}

TEST(ConvertCorpus, RerunIsByteIdentical) {
  TempDir out;
  const auto c = config_for(fixture_dir() / "manifest_with_kairak.json", out.path());
  convert_corpus(c);
  const auto first = snapshot(out.path());
  convert_corpus(c);
  EXPECT_EQ(snapshot(out.path()), first);
  TempDir other;
  convert_corpus(config_for(fixture_dir() / "manifest_with_kairak.json", other.path()));
  EXPECT_EQ(snapshot(other.path()), first);
}

TEST(ConvertCorpus, FiltersApply) {
  TempDir out;
  auto c = config_for(corpus_dir() / "manifest.json", out.path());
  c.stage_filter = {Stage::Stage2};
  EXPECT_TRUE(convert_corpus(c).converted.empty());
  c.stage_filter = {Stage::Stage1};
  c.topic_filter = {Topic::Morphology};
  EXPECT_TRUE(convert_corpus(c).converted.empty());
  c.topic_filter = {Topic::Syntax, Topic::Morphology};
  EXPECT_EQ(convert_corpus(c).converted.size(), 1u);
}

namespace {

RosettaPuzzle stage_puzzle(const std::string& id, std::set<Difficulty> levels, std::set<Topic> topics) {
  RosettaPuzzle p = gilbertese();
  p.meta.id = id;
  p.meta.difficulty_levels = std::move(levels);
  p.meta.topics = std::move(topics);
  return p;
}

} // namespace

TEST(Stages, ClassifiesBalancesAndReportsShortfalls) {
  using D = Difficulty;
  LoadedCorpus corpus;
  corpus.puzzles = {stage_puzzle("a", {D::Breakthrough, D::Foundation}, {Topic::Morphology}),
                    stage_puzzle("b", {D::Foundation, D::Intermediate}, {Topic::Morphology}),
                    stage_puzzle("c", {D::Breakthrough}, {Topic::Morphology}),
                    stage_puzzle("d", {D::Advanced}, {Topic::Morphology}),
                    stage_puzzle("e", {D::Intermediate, D::Advanced}, {Topic::Morphology}),
                    stage_puzzle("f", {D::Round2}, {Topic::Syntax, Topic::Semantics})};
  const StageListing l = select_stages(corpus, 2, 2);
  ASSERT_EQ(l.entries.size(), 6u);
  EXPECT_EQ(l.entries[0].stage, Stage::Stage1);
  EXPECT_EQ(l.entries[3].stage, Stage::Stage2);
  EXPECT_EQ(l.entries[4].stage, Stage::Unstaged);
  EXPECT_TRUE(l.entries[0].selected);
  EXPECT_TRUE(l.entries[1].selected);
  EXPECT_FALSE(l.entries[2].selected);
  EXPECT_TRUE(l.entries[3].selected);
  EXPECT_FALSE(l.entries[4].selected);
  ASSERT_EQ(l.shortfalls.size(), 3u);
  EXPECT_EQ(l.shortfalls[0].topic_set, "Morphology");
  EXPECT_EQ(l.shortfalls[0].stage, Stage::Stage2);
  EXPECT_EQ(l.shortfalls[0].found, 1);
  EXPECT_EQ(l.shortfalls[1].topic_set, "Syntax, Semantics");
  // Each evaluator sees one format of each pair, never both.
  ASSERT_EQ(l.assignments.size(), 2u);
  EXPECT_EQ(l.assignments[0].puzzle_ids, (std::vector<std::string>{"a", "b-mu"}));
  EXPECT_EQ(l.assignments[1].puzzle_ids, (std::vector<std::string>{"b", "a-mu"}));
  EXPECT_NE(l.to_csv().find("e,RosettaStone,Morphology,Intermediate/Advanced,unstaged,false"), std::string::npos);
}

TEST(Pipeline, SolveScoreReportIsDeterministic) {
  auto run = [](const fs::path& out) {
    auto c = config_for(corpus_dir() / "manifest.json", out);
    convert_corpus(c);
    const LoadedCorpus corpus = load_run_corpus(c);
    EXPECT_EQ(corpus.puzzles.size(), 3u);
    const SolveRun s = solve_corpus(c, corpus, true);
    EXPECT_EQ(s.reports.size(), 2u);
    const auto rescored = score_predictions(read_jsonl(out / "predictions" / "baseline.jsonl"), corpus);
    EXPECT_EQ(rescored, s.reports);
    const ReportFiles f = make_report(rescored, meta_index(corpus));
    write_file(out / "report.csv", f.csv);
    write_file(out / "report.json", f.json_text);
    return std::make_pair(f.csv, f.json_text);
  };
  TempDir a, b;
  const auto ra = run(a.path());
  const auto rb = run(b.path());
  EXPECT_EQ(ra, rb);
  EXPECT_TRUE(fs::exists(a.path() / "solver" / "uklo-2015-polish" / "names.csv"));
  EXPECT_NE(ra.first.find("Match-Up Conversion"), std::string::npos);
}

TEST(Pipeline, UnknownPuzzleInPredictions) {
  LoadedCorpus corpus = load_corpus(corpus_dir() / "manifest.json");
  const std::vector<json> rows{json::parse(R"({"solver_id":"x","puzzle_id":"nope","format":"MatchUp","key":["A","B"]})")};
  EXPECT_THROW(score_predictions(rows, corpus), UnknownPuzzleId);
}

TEST(Serialization, ReportAndPredictionRoundTrip) {
  const auto p = polish();
  Prediction pred{"s", p.meta.id, Format::MatchUp, AnswerKey::from_ranks({4, 6, 2, 5, 1, 3}), {}};
  pred.key.labels[2].reset();
  const Prediction back = prediction_from_json(prediction_to_json(pred));
  EXPECT_EQ(back.key, pred.key);
  ScoreReport r = score_prediction(pred, p);
  EXPECT_EQ(score_report_from_json(report_to_json(r)), r);
  Prediction ros{"s", "uklo-2018-gilbertese", Format::RosettaStone, {}, {"a", "ŋ"}};
  EXPECT_EQ(prediction_from_json(prediction_to_json(ros)).answers, ros.answers);
}

TEST(EvalLlm, ScoresEveryModelOnEveryPuzzle) {
  TempDir out;
  auto c = config_for(corpus_dir() / "manifest.json", out.path());
  c.concurrency = 3;
  for (const char* name : {"model-a", "model-b"}) {
    ModelSpec m;
    m.provider_id = "openai";
    m.model_name = name;
    m.endpoint_url = "https://example.invalid/v1";
    c.models.push_back(m);
  }
  const LoadedCorpus corpus = load_corpus(corpus_dir() / "manifest.json");
  std::atomic<int> calls{0};
  QueryContext ctx;
  ctx.transport = [&](const HttpRequest& req) -> HttpResponse {
    ++calls;
    const std::string prompt = json::parse(req.body)["messages"][0]["content"];
    const bool matchup = prompt.find("i → L") != std::string::npos;
    const std::string text = matchup ? "1 → D\n2 → F\n3 → B\n4 → E\n5 → A\n6 → C"
                                     : "Q1: A takaakaro aiine ningaabong\nQ2: wrong";
    return {200, json{{"choices", json::array({{{"message", {{"content", text}}}}})}}.dump()};
  };
  const EvalOutcome o = eval_llm(c, corpus, ctx);
  EXPECT_EQ(calls.load(), 4);
  EXPECT_TRUE(o.failures.empty());
  ASSERT_EQ(o.reports.size(), 4u);
  for (const auto& r : o.reports) {
    EXPECT_DOUBLE_EQ(r.percent, r.format == Format::MatchUp ? 100.0 : 50.0) << r.solver_id << " " << r.puzzle_id;
  }
  EXPECT_EQ(o.reports[0].solver_id, "model-a");
  EXPECT_EQ(o.reports[3].solver_id, "model-b");
}

TEST(EvalLlm, FailuresAreCollectedNotThrown) {
  TempDir out;
  auto c = config_for(corpus_dir() / "manifest.json", out.path());
  ModelSpec m;
  m.provider_id = "openai";
  m.model_name = "needs-key";
  m.endpoint_url = "https://example.invalid/v1";
  m.auth_env_var = "MATCHUP_TEST_UNSET_KEY";
  c.models.push_back(m);
  QueryContext ctx;
  ctx.transport = [](const HttpRequest&) -> HttpResponse { return {200, "{}"}; };
  ctx.getenv = [](const std::string&) { return std::optional<std::string>(); };
  const EvalOutcome o = eval_llm(c, load_corpus(corpus_dir() / "manifest.json"), ctx);
  EXPECT_TRUE(o.reports.empty());
  EXPECT_EQ(o.failures.size(), 2u);
}
