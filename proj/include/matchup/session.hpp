#pragma once

// Human solve sessions. A session holds a display name, a list of assigned
// puzzles and at most one immutable submission per puzzle. State lives in an
// append-only JSONL log that is replayed on start. Requests are handled as
// (method, path, body) triples so the service can be exercised without a
// socket; http_server.hpp binds it to HTTP.

#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "matchup/corpus_io.hpp"
#include "matchup/llm_client.hpp"
#include "matchup/runner.hpp"
#include "matchup/scorer.hpp"

namespace matchup {

struct Submission {
  json payload;  ///< {"key": [...]} or {"answers": [...]}
  std::string submitted_at;
  ScoreReport report;
};

struct SolveSession {
  std::string session_id;
  std::string solver_display_name;
  std::vector<std::string> puzzle_ids;
  FeedbackMode feedback_mode = FeedbackMode::Blind;
  std::string created_at;
  std::map<std::string, Submission> submissions;
};

struct ApiResponse {
  int status = 200;
  json body = json::object();
};

/// Public view of a puzzle: everything a solver sees, nothing that reveals
/// the answer.
inline json presentation(const Puzzle& p) {
  const auto& m = meta_of(p);
  json j{{"puzzle_id", m.id},
         {"format", std::string(to_string(m.format))},
         {"language_name", m.language_name},
         {"year", m.year}};
  if (const auto* mu = std::get_if<MatchUpPuzzle>(&p)) {
    j["preamble"] = mu->preamble;
    j["source_items"] = mu->source_items;
    json targets = json::array();
    for (std::size_t k = 0; k < mu->target_items.size(); ++k) {
      targets.push_back({{"label", render_label(static_cast<int>(k + 1))}, {"text", mu->target_items[k]}});
    }
    j["target_items"] = targets;
  } else {
    const auto& r = std::get<RosettaPuzzle>(p);
    j["preamble"] = r.preamble;
    json pairs = json::array();
    for (const auto& tp : r.given_pairs) pairs.push_back({{"source", tp.source_text}, {"target", tp.target_text}});
    j["pairs"] = pairs;
    json qs = json::array();
    for (std::size_t k = 0; k < r.questions.size(); ++k) {
      qs.push_back({{"index", k + 1},
                    {"direction", std::string(to_string(r.questions[k].direction))},
                    {"prompt", r.questions[k].prompt_text}});
    }
    j["questions"] = qs;
  }
  return j;
}

class SessionService {
public:
  SessionService(const LoadedCorpus& corpus, std::filesystem::path log_path,
                 FeedbackMode default_mode = FeedbackMode::Blind)
      : corpus_(corpus), log_path_(std::move(log_path)), default_mode_(default_mode) {
    replay();
  }

  /// Routes one request. Never throws for client errors.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      const auto parts = split_path(path);
      if (parts.size() < 2 || parts[0] != "api" || parts[1] != "sessions") return error(404, "no such endpoint");
      if (parts.size() == 2) {
        if (method == "GET") return list_sessions();
        if (method == "POST") return create_session(body);
        return error(405, "method not allowed");
      }
      const std::string& sid = parts[2];
      if (parts.size() == 3 && method == "GET") return get_session(sid);
      if (parts.size() >= 5 && parts[3] == "puzzles") {
        const std::string& pid = parts[4];
        if (parts.size() == 5 && method == "GET") return get_puzzle(sid, pid);
        if (parts.size() == 6 && parts[5] == "submission" && method == "POST") return submit(sid, pid, body);
        if (parts.size() == 6 && parts[5] == "result" && method == "GET") return result(sid, pid);
      }
      return error(404, "no such endpoint");
    } catch (const std::exception& e) {
      return error(500, e.what());
    }
  }

  std::vector<SolveSession> sessions() const {
    std::shared_lock lock(mutex_);
    std::vector<SolveSession> out;
    for (const auto& [_, s] : sessions_) out.push_back(s);
    return out;
  }

  /// Stored reports whose recomputation through the scorer differs.
  std::vector<std::string> verify_store() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> bad;
    for (const auto& [sid, s] : sessions_) {
      for (const auto& [pid, sub] : s.submissions) {
        if (!(score_payload(pid, sub.payload) == sub.report)) bad.push_back(sid + "/" + pid);
      }
    }
    return bad;
  }

private:
  static std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
      if (c == '/') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }

  static ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

  static std::string new_token() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
    return os.str();
  }

  static json session_to_json(const SolveSession& s, bool with_submissions) {
    json j{{"session_id", s.session_id},
           {"solver_display_name", s.solver_display_name},
           {"puzzle_ids", s.puzzle_ids},
           {"feedback_mode", std::string(to_string(s.feedback_mode))},
           {"created_at", s.created_at}};
    if (with_submissions) {
      json subs = json::object();
      for (const auto& [pid, sub] : s.submissions) subs[pid] = {{"submitted_at", sub.submitted_at}};
      j["submissions"] = subs;
    }
    return j;
  }

  /// Parses a submission body against its puzzle and scores it with the
  /// library scorer. Throws SchemaViolation, LengthMismatch or UnknownLabel.
  ScoreReport score_payload(const std::string& pid, const json& payload) const {
    const Puzzle* p = corpus_.find(pid);
    if (!p) throw UnknownPuzzleId(pid);
    if (!payload.is_object()) throw SchemaViolation("<body>", "must be an object");
    Prediction pred;
    pred.solver_id = "human";
    pred.puzzle_id = pid;
    pred.format = meta_of(*p).format;
    if (pred.format == Format::MatchUp) {
      if (!payload.contains("key")) throw SchemaViolation("key", "missing required field");
      json key = payload["key"];
      if (!key.is_array()) throw SchemaViolation("key", "must be an array of labels");
      for (auto& v : key) {
        if (v.is_null()) v = "";
      }
      pred.key = key_from_json(key);
    } else {
      if (!payload.contains("answers") || !payload["answers"].is_array()) {
        throw SchemaViolation("answers", "must be an array of strings");
      }
      for (const auto& a : payload["answers"]) {
        if (!a.is_string()) throw SchemaViolation("answers", "must be an array of strings");
        pred.answers.push_back(a.get<std::string>());
      }
    }
    return score_prediction(pred, *p);
  }

  ApiResponse list_sessions() const {
    std::shared_lock lock(mutex_);
    json arr = json::array();
    for (const auto& [_, s] : sessions_) arr.push_back(session_to_json(s, false));
    return {200, json{{"sessions", arr}}};
  }

  ApiResponse create_session(const std::string& body) {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error&) {
      return error(422, "body is not JSON");
    }
    if (!req.is_object() || !req.contains("solver_display_name") || !req["solver_display_name"].is_string() ||
        !req.contains("puzzle_ids") || !req["puzzle_ids"].is_array() || req["puzzle_ids"].empty()) {
      return error(422, "expected solver_display_name and a non-empty puzzle_ids array");
    }
    SolveSession s;
    s.solver_display_name = req["solver_display_name"].get<std::string>();
    for (const auto& id : req["puzzle_ids"]) {
      if (!id.is_string()) return error(422, "puzzle_ids must be strings");
      const auto pid = id.get<std::string>();
      if (!corpus_.find(pid)) return error(404, "unknown puzzle " + pid);
      if (std::find(s.puzzle_ids.begin(), s.puzzle_ids.end(), pid) != s.puzzle_ids.end()) {
        return error(422, "duplicate puzzle id " + pid);
      }
      s.puzzle_ids.push_back(pid);
    }
    s.feedback_mode = default_mode_;
    if (req.contains("feedback_mode")) {
      auto fm = req["feedback_mode"].is_string() ? feedback_mode_from_string(req["feedback_mode"].get<std::string>())
                                                 : std::nullopt;
      if (!fm) return error(422, "feedback_mode must be Blind or AfterSubmit");
      s.feedback_mode = *fm;
    }
    s.created_at = utc_timestamp();
    std::unique_lock lock(mutex_);
    do {
      s.session_id = new_token();
    } while (sessions_.contains(s.session_id));
    append({{"event", "session_created"}, {"session", session_to_json(s, false)}});
    sessions_[s.session_id] = s;
    return {201, session_to_json(s, true)};
  }

  ApiResponse get_session(const std::string& sid) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) return error(404, "unknown session");
    return {200, session_to_json(it->second, true)};
  }

  const SolveSession* assigned(const std::string& sid, const std::string& pid, ApiResponse& err) const {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) {
      err = error(404, "unknown session");
      return nullptr;
    }
    const auto& ids = it->second.puzzle_ids;
    if (std::find(ids.begin(), ids.end(), pid) == ids.end()) {
      err = error(404, "puzzle not assigned to this session");
      return nullptr;
    }
    return &it->second;
  }

  ApiResponse get_puzzle(const std::string& sid, const std::string& pid) const {
    std::shared_lock lock(mutex_);
    ApiResponse err;
    if (!assigned(sid, pid, err)) return err;
    return {200, presentation(*corpus_.find(pid))};
  }

  ApiResponse submit(const std::string& sid, const std::string& pid, const std::string& body) {
    json payload;
    try {
      payload = json::parse(body);
    } catch (const json::parse_error&) {
      return error(422, "body is not JSON");
    }
    std::unique_lock lock(mutex_);
    ApiResponse err;
    const SolveSession* s = assigned(sid, pid, err);
    if (!s) return err;
    if (s->submissions.contains(pid)) return error(409, "already submitted");
    ScoreReport report;
    try {
      report = score_payload(pid, payload);
    } catch (const Error& e) {
      return error(422, e.what());
    }
    Submission sub{payload, utc_timestamp(), report};
    append({{"event", "submission"},
            {"session_id", sid},
            {"puzzle_id", pid},
            {"submission", payload},
            {"submitted_at", sub.submitted_at},
            {"report", report_to_json(report)}});
    sessions_[sid].submissions[pid] = sub;
    json out{{"session_id", sid}, {"puzzle_id", pid}, {"submitted_at", sub.submitted_at}};
    if (s->feedback_mode == FeedbackMode::AfterSubmit) out["report"] = report_to_json(report);
    return {201, out};
  }

  ApiResponse result(const std::string& sid, const std::string& pid) const {
    std::shared_lock lock(mutex_);
    ApiResponse err;
    const SolveSession* s = assigned(sid, pid, err);
    if (!s) return err;
    if (s->feedback_mode == FeedbackMode::Blind) return error(403, "results are hidden in Blind mode");
    auto it = s->submissions.find(pid);
    if (it == s->submissions.end()) return error(404, "not submitted");
    return {200, report_to_json(it->second.report)};
  }

  void append(const json& event) {
    if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
    std::ofstream out(log_path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to " + log_path_.string());
    out << event.dump(-1, ' ', false) << '\n';
    out.flush();
    if (!out) throw Error("write failed for " + log_path_.string());
  }

  void replay() {
    if (!std::filesystem::exists(log_path_)) return;
    for (const auto& ev : read_jsonl(log_path_)) {
      const auto kind = ev.at("event").get<std::string>();
      if (kind == "session_created") {
        const auto& j = ev.at("session");
        SolveSession s;
        s.session_id = j.at("session_id").get<std::string>();
        s.solver_display_name = j.at("solver_display_name").get<std::string>();
        s.puzzle_ids = j.at("puzzle_ids").get<std::vector<std::string>>();
        s.feedback_mode = feedback_mode_from_string(j.at("feedback_mode").get<std::string>()).value();
        s.created_at = j.value("created_at", std::string());
        sessions_[s.session_id] = s;
      } else if (kind == "submission") {
        auto it = sessions_.find(ev.at("session_id").get<std::string>());
        if (it == sessions_.end()) throw Error("session log references an unknown session");
        const auto pid = ev.at("puzzle_id").get<std::string>();
        it->second.submissions.emplace(pid, Submission{ev.at("submission"), ev.value("submitted_at", std::string()),
                                                       score_report_from_json(ev.at("report"))});
      } else {
        throw Error("unknown session log event '" + kind + "'");
      }
    }
  }

  const LoadedCorpus& corpus_;
  std::filesystem::path log_path_;
  FeedbackMode default_mode_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SolveSession> sessions_;
};

} // namespace matchup
