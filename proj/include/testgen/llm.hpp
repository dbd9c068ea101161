#pragma once

#include "testgen/jsonio.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace testgen {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage& a, const ChatMessage& b) {
    return a.role == b.role && a.content == b.content;
  }
};

// One conversation with the model. counted_requests tracks successful
// completions only; transport failures are retried and tallied separately.
struct ChatSession {
  std::string id;
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  int counted_requests = 0;
  int transport_failures = 0;
};

struct CompletionResult {
  std::string text;
  bool truncated = false;  // backend reported a length-capped reply
};

class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  // Throws TransportError for retryable problems; anything else is fatal.
  virtual CompletionResult complete(const std::string& session_id,
                                    const std::vector<ChatMessage>& messages,
                                    double temperature) = 0;
  virtual std::string name() const = 0;
};

// --- transcripts -----------------------------------------------------------

struct TranscriptRecord {
  std::string session_id;
  int seq = 0;  // 1-based per session, successful completions only
  std::vector<ChatMessage> request_messages;
  std::string response_text;
  std::string model;
  bool counted = true;
  bool truncated = false;
};

Json transcript_record_to_json(const TranscriptRecord& rec);
TranscriptRecord transcript_record_from_json(const Json& j);

// Collects exchanges from any number of worker threads and writes them in
// canonical (session_id, seq) order so reruns are byte-identical.
class TranscriptWriter {
public:
  void add(TranscriptRecord rec);
  void save(const std::string& path) const;
  std::string to_jsonl() const;
  std::size_t size() const;

private:
  mutable std::mutex mu_;
  std::vector<TranscriptRecord> records_;
};

std::vector<TranscriptRecord> load_transcript(const std::string& path);
std::vector<TranscriptRecord> parse_transcript_jsonl(const std::string& text);

// --- gateway ---------------------------------------------------------------

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  // Injectable for tests; null uses std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleeper;
};

struct SendResult {
  std::string text;
  bool truncated = false;
};

class Gateway {
public:
  Gateway(LlmBackend& backend, std::string model_name, RetryPolicy retry = {},
          TranscriptWriter* transcript = nullptr);

  // Appends the user message and the assistant reply to the session and
  // bumps counted_requests by exactly one. Transport failures are retried
  // with exponential backoff and only bump transport_failures; once retries
  // are exhausted the user message is rolled back and BackendUnavailable is
  // thrown.
  SendResult send(ChatSession& session, const std::string& user_message);

  const std::string& model_name() const { return model_name_; }

private:
  LlmBackend& backend_;
  std::string model_name_;
  RetryPolicy retry_;
  TranscriptWriter* transcript_;
};

// Returns fenced code blocks in order; without fences the whole reply is one
// snippet. An unterminated fence runs to the end of the reply.
std::vector<std::string> extract_code_blocks(const std::string& assistant_reply);

// --- offline backends ------------------------------------------------------

// Deterministic stand-in answering from a recorded transcript. Any deviation
// between the incoming request and the recorded one is a desync.
class ReplayBackend : public LlmBackend {
public:
  explicit ReplayBackend(std::vector<TranscriptRecord> records);
  static std::unique_ptr<ReplayBackend> from_file(const std::string& path);

  CompletionResult complete(const std::string& session_id,
                            const std::vector<ChatMessage>& messages,
                            double temperature) override;
  std::string name() const override { return "replay"; }

private:
  std::map<std::string, std::vector<TranscriptRecord>> by_session_;
  std::map<std::string, std::size_t> cursor_;
  std::mutex mu_;
};

// Scripted replies keyed by session id (= unit id), with an optional default
// list. Entry format (JSON): a bare string, or an object
//   {"text": "...", "truncated": bool, "transport_failures_before": int}
// Per-session turns walk the list; with repeat_last (default) the final entry
// answers every later turn.
class ScriptedBackend : public LlmBackend {
public:
  explicit ScriptedBackend(Json script);
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);

  CompletionResult complete(const std::string& session_id,
                            const std::vector<ChatMessage>& messages,
                            double temperature) override;
  std::string name() const override { return "scripted"; }

private:
  struct Entry {
    std::string text;
    bool truncated = false;
    int transport_failures_before = 0;
  };
  std::map<std::string, std::vector<Entry>> units_;
  std::vector<Entry> default_;
  bool repeat_last_ = true;
  std::map<std::string, int> turn_;
  std::map<std::string, std::map<int, int>> attempts_;  // session -> turn -> tries
  std::mutex mu_;
};

// Live OpenAI-compatible chat-completions backend over HTTP(S).
struct LiveBackendConfig {
  std::string endpoint_url;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model_name;
  std::string api_key_env;  // empty: no Authorization header
  int http_timeout_s = 120;
};

std::unique_ptr<LlmBackend> make_live_backend(const LiveBackendConfig& config);

}  // namespace testgen
