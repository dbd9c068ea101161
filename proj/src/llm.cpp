#include "testgen/llm.hpp"

#include "testgen/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace testgen {

// --- transcripts -----------------------------------------------------------

Json transcript_record_to_json(const TranscriptRecord& rec) {
  Json j;
  j["session_id"] = rec.session_id;
  j["seq"] = rec.seq;
  Json msgs = Json::array();
  for (const auto& m : rec.request_messages) {
    msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
  }
  j["request_messages"] = std::move(msgs);
  j["response_text"] = rec.response_text;
  j["model"] = rec.model;
  j["counted"] = rec.counted;
  if (rec.truncated) j["truncated"] = true;
  return j;
}

TranscriptRecord transcript_record_from_json(const Json& j) {
  TranscriptRecord rec;
  rec.session_id = j.at("session_id").get<std::string>();
  rec.seq = j.at("seq").get<int>();
  for (const auto& m : j.at("request_messages")) {
    rec.request_messages.push_back(
        ChatMessage{m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  rec.response_text = j.at("response_text").get<std::string>();
  rec.model = j.at("model").get<std::string>();
  rec.counted = j.at("counted").get<bool>();
  rec.truncated = j.value("truncated", false);
  return rec;
}

void TranscriptWriter::add(TranscriptRecord rec) {
  std::lock_guard<std::mutex> lock(mu_);
  records_.push_back(std::move(rec));
}

std::string TranscriptWriter::to_jsonl() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<const TranscriptRecord*> ordered;
  ordered.reserve(records_.size());
  for (const auto& r : records_) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const TranscriptRecord* a, const TranscriptRecord* b) {
    if (a->session_id != b->session_id) return a->session_id < b->session_id;
    return a->seq < b->seq;
  });
  std::string out;
  for (const auto* r : ordered) {
    out += transcript_record_to_json(*r).dump();
    out += "\n";
  }
  return out;
}

void TranscriptWriter::save(const std::string& path) const { write_text_file(path, to_jsonl()); }

std::size_t TranscriptWriter::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_.size();
}

std::vector<TranscriptRecord> parse_transcript_jsonl(const std::string& text) {
  std::vector<TranscriptRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(transcript_record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw ReplayDesync("transcript line " + std::to_string(lineno) + " is malformed: " + e.what());
    }
  }
  return out;
}

std::vector<TranscriptRecord> load_transcript(const std::string& path) {
  return parse_transcript_jsonl(read_text_file(path));
}

// --- gateway ---------------------------------------------------------------

Gateway::Gateway(LlmBackend& backend, std::string model_name, RetryPolicy retry,
                 TranscriptWriter* transcript)
    : backend_(backend), model_name_(std::move(model_name)), retry_(std::move(retry)),
      transcript_(transcript) {}

SendResult Gateway::send(ChatSession& session, const std::string& user_message) {
  session.messages.push_back(ChatMessage{"user", user_message});

  CompletionResult result;
  int attempt = 0;
  for (;;) {
    try {
      result = backend_.complete(session.id, session.messages, session.temperature);
      break;
    } catch (const TransportError& e) {
      ++session.transport_failures;
      if (attempt >= retry_.max_retries) {
        session.messages.pop_back();
        throw BackendUnavailable("retries exhausted for session '" + session.id +
                                 "': " + e.what());
      }
      auto delay = retry_.base_delay * (1 << attempt);
      if (retry_.sleeper) {
        retry_.sleeper(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
      ++attempt;
    }
  }

  ++session.counted_requests;
  TranscriptRecord rec;
  rec.session_id = session.id;
  rec.seq = session.counted_requests;
  rec.request_messages = session.messages;  // includes the new user message
  rec.response_text = result.text;
  rec.model = model_name_;
  rec.counted = true;
  rec.truncated = result.truncated;
  session.messages.push_back(ChatMessage{"assistant", result.text});
  if (transcript_) transcript_->add(std::move(rec));
  return SendResult{result.text, result.truncated};
}

// --- code block extraction ---------------------------------------------------

std::vector<std::string> extract_code_blocks(const std::string& reply) {
  std::vector<std::string> blocks;
  std::istringstream in(reply);
  std::string line;
  bool inside = false;
  std::string current;
  auto is_fence = [](const std::string& l) {
    std::size_t k = l.find_first_not_of(" \t");
    if (k == std::string::npos) return false;
    return l.compare(k, 3, "```") == 0;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_fence(line)) {
      if (inside) {
        blocks.push_back(current);
        current.clear();
        inside = false;
      } else {
        inside = true;  // opening fence; language tag ignored
      }
      continue;
    }
    if (inside) {
      current += line;
      current += "\n";
    }
  }
  if (inside) blocks.push_back(current);  // unterminated fence runs to EOF
  if (blocks.empty()) return {reply};
  return blocks;
}

// --- replay backend ----------------------------------------------------------

ReplayBackend::ReplayBackend(std::vector<TranscriptRecord> records) {
  for (auto& rec : records) {
    by_session_[rec.session_id].push_back(std::move(rec));
  }
  for (auto& [id, list] : by_session_) {
    std::sort(list.begin(), list.end(),
              [](const TranscriptRecord& a, const TranscriptRecord& b) { return a.seq < b.seq; });
  }
}

std::unique_ptr<ReplayBackend> ReplayBackend::from_file(const std::string& path) {
  return std::make_unique<ReplayBackend>(load_transcript(path));
}

namespace {

std::string preview(const std::string& s, std::size_t n = 80) {
  if (s.size() <= n) return s;
  return s.substr(0, n) + "...";
}

}  // namespace

CompletionResult ReplayBackend::complete(const std::string& session_id,
                                         const std::vector<ChatMessage>& messages,
                                         double /*temperature*/) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_session_.find(session_id);
  if (it == by_session_.end()) {
    throw ReplayDesync("no transcript for session '" + session_id + "'");
  }
  std::size_t idx = cursor_[session_id];
  if (idx >= it->second.size()) {
    throw ReplayDesync("transcript exhausted for session '" + session_id + "' after " +
                       std::to_string(idx) + " exchanges");
  }
  const TranscriptRecord& rec = it->second[idx];
  if (rec.request_messages.size() != messages.size()) {
    throw ReplayDesync("session '" + session_id + "' seq " + std::to_string(rec.seq) +
                       ": request has " + std::to_string(messages.size()) +
                       " messages, transcript recorded " +
                       std::to_string(rec.request_messages.size()));
  }
  for (std::size_t k = 0; k < messages.size(); ++k) {
    if (!(messages[k] == rec.request_messages[k])) {
      throw ReplayDesync("session '" + session_id + "' seq " + std::to_string(rec.seq) +
                         ": message " + std::to_string(k) + " diverges (got role=" +
                         messages[k].role + " content=" + preview(messages[k].content) +
                         "; recorded role=" + rec.request_messages[k].role +
                         " content=" + preview(rec.request_messages[k].content) + ")");
    }
  }
  cursor_[session_id] = idx + 1;
  return CompletionResult{rec.response_text, rec.truncated};
}

// --- scripted backend ---------------------------------------------------------

ScriptedBackend::ScriptedBackend(Json script) {
  auto parse_entry = [](const Json& e) {
    Entry entry;
    if (e.is_string()) {
      entry.text = e.get<std::string>();
    } else {
      entry.text = e.at("text").get<std::string>();
      entry.truncated = e.value("truncated", false);
      entry.transport_failures_before = e.value("transport_failures_before", 0);
    }
    return entry;
  };
  repeat_last_ = script.value("repeat_last", true);
  if (script.contains("default")) {
    for (const auto& e : script["default"]) default_.push_back(parse_entry(e));
  }
  if (script.contains("units")) {
    for (const auto& [unit, list] : script["units"].items()) {
      for (const auto& e : list) units_[unit].push_back(parse_entry(e));
    }
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  return std::make_unique<ScriptedBackend>(load_json_file(path));
}

CompletionResult ScriptedBackend::complete(const std::string& session_id,
                                           const std::vector<ChatMessage>& /*messages*/,
                                           double /*temperature*/) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::vector<Entry>* list = nullptr;
  auto it = units_.find(session_id);
  if (it != units_.end() && !it->second.empty()) {
    list = &it->second;
  } else if (!default_.empty()) {
    list = &default_;
  } else {
    throw BackendUnavailable("scripted backend has no reply for session '" + session_id + "'");
  }

  int turn = turn_[session_id];
  int idx = turn;
  if (idx >= static_cast<int>(list->size())) {
    if (!repeat_last_) {
      throw BackendUnavailable("scripted backend exhausted for session '" + session_id + "'");
    }
    idx = static_cast<int>(list->size()) - 1;
  }
  const Entry& entry = (*list)[static_cast<std::size_t>(idx)];

  int& tries = attempts_[session_id][turn];
  if (tries < entry.transport_failures_before) {
    ++tries;
    throw TransportError("scripted transport failure for session '" + session_id + "' turn " +
                         std::to_string(turn));
  }
  turn_[session_id] = turn + 1;
  return CompletionResult{entry.text, entry.truncated};
}

}  // namespace testgen
