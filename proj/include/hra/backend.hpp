#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hra/error.hpp"

namespace hra {

struct DecodeParams {
  double temperature = 0.0;
};

struct Completion {
  std::string text;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  bool estimated = false;  // token counts estimated from characters
};

inline std::int64_t estimate_tokens(const std::string& text) {
  return std::int64_t((text.size() + 3) / 4);
}

/// Pluggable completion backend. Implementations must be deterministic for
/// identical prompts at temperature 0 (mock/replay) so runs reproduce.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual Completion complete(const std::string& prompt, const DecodeParams& params = {}) = 0;
  virtual bool supports_concurrency() const { return true; }
};

// ---------------------------------------------------------------------------
// Mock backend

struct MockRule {
  std::function<bool(const std::string&)> matches;
  std::function<std::string(const std::string&)> respond;

  static MockRule substring(std::string pat, std::string response) {
    return {[pat](const std::string& p) { return p.find(pat) != std::string::npos; },
            [response](const std::string&) { return response; }};
  }
  static MockRule substring_fn(std::string pat, std::function<std::string(const std::string&)> fn) {
    return {[pat](const std::string& p) { return p.find(pat) != std::string::npos; }, std::move(fn)};
  }
  static MockRule regex(std::string pat, std::string response) {
    auto re = std::make_shared<std::regex>(pat);
    return {[re](const std::string& p) { return std::regex_search(p, *re); },
            [response](const std::string&) { return response; }};
  }
  static MockRule any(std::string response) {
    return {[](const std::string&) { return true; },
            [response](const std::string&) { return response; }};
  }
  static MockRule any_fn(std::function<std::string(const std::string&)> fn) {
    return {[](const std::string&) { return true; }, std::move(fn)};
  }
};

/// Ordered rule list; first matching rule wins. A catch-all always exists:
/// construction appends one when the caller did not provide it.
class MockRuleSet {
 public:
  MockRuleSet() = default;
  explicit MockRuleSet(std::vector<MockRule> rules, std::string catch_all_response = "")
      : rules_(std::move(rules)), catch_all_(MockRule::any(std::move(catch_all_response))) {}

  void add(MockRule r) { rules_.push_back(std::move(r)); }
  void set_catch_all(std::string response) { catch_all_ = MockRule::any(std::move(response)); }
  void set_catch_all_fn(std::function<std::string(const std::string&)> fn) {
    catch_all_ = MockRule::any_fn(std::move(fn));
  }

  std::string respond(const std::string& prompt) const {
    for (const auto& r : rules_)
      if (r.matches(prompt)) return r.respond(prompt);
    return catch_all_.respond(prompt);
  }

 private:
  std::vector<MockRule> rules_;
  MockRule catch_all_ = MockRule::any("");
};

/// Deterministic scripted backend for tests and desk-scale runs. Stateless
/// between calls; safe for concurrent use.
class MockBackend : public LlmBackend {
 public:
  explicit MockBackend(MockRuleSet rules) : rules_(std::move(rules)) {}

  Completion complete(const std::string& prompt, const DecodeParams& = {}) override {
    Completion c;
    c.text = rules_.respond(prompt);
    c.tokens_in = estimate_tokens(prompt);
    c.tokens_out = estimate_tokens(c.text);
    c.estimated = true;
    return c;
  }

 private:
  MockRuleSet rules_;
};

// ---------------------------------------------------------------------------
// Sequenced backend: fixed response script, consumed in call order. Useful
// for retry-loop fixtures where the same prompt must elicit different
// responses across attempts.

class SequenceBackend : public LlmBackend {
 public:
  explicit SequenceBackend(std::vector<std::string> responses, std::string after = "")
      : responses_(std::move(responses)), after_(std::move(after)) {}

  Completion complete(const std::string& prompt, const DecodeParams& = {}) override {
    std::lock_guard<std::mutex> lock(mu_);
    std::string text = next_ < responses_.size() ? responses_[next_++] : after_;
    return {text, estimate_tokens(prompt), estimate_tokens(text), true};
  }

  bool supports_concurrency() const override { return false; }

 private:
  std::mutex mu_;
  std::vector<std::string> responses_;
  std::string after_;
  std::size_t next_ = 0;
};

// ---------------------------------------------------------------------------
// Replay backend

/// Replays recorded responses from a JSON-lines fixture. Each line is an
/// object {"prompt": ..., "response": ...} or {"prompt_contains": ...,
/// "response": ...}; lines with the same key are consumed in file order.
class ReplayBackend : public LlmBackend {
 public:
  explicit ReplayBackend(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open replay fixture: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw LoadError("bad JSON in replay fixture at line " + std::to_string(lineno), lineno);
      Entry e;
      e.response = j.value("response", "");
      if (j.contains("prompt")) {
        e.exact = j["prompt"].get<std::string>();
      } else if (j.contains("prompt_contains")) {
        e.contains = j["prompt_contains"].get<std::string>();
      } else {
        throw LoadError("replay entry missing prompt key at line " + std::to_string(lineno), lineno);
      }
      entries_.push_back(std::move(e));
    }
  }

  Completion complete(const std::string& prompt, const DecodeParams& = {}) override {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& e : entries_) {
      if (e.used) continue;
      bool hit = e.exact ? *e.exact == prompt
                         : prompt.find(*e.contains) != std::string::npos;
      if (hit) {
        e.used = true;
        return {e.response, estimate_tokens(prompt), estimate_tokens(e.response), true};
      }
    }
    throw RetryableBackendError("no replay entry matches prompt");
  }

 private:
  struct Entry {
    std::optional<std::string> exact;
    std::optional<std::string> contains;
    std::string response;
    bool used = false;
  };
  std::mutex mu_;
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Retry wrapper

struct RetryOutcome {
  bool ok = false;
  std::string text;          // first accepted response when ok
  int attempts = 0;
  std::int64_t tokens_in = 0;   // includes rejected attempts
  std::int64_t tokens_out = 0;
  std::vector<std::string> rejected;
};

/// Calls the backend until `validator` accepts a response, making at most
/// 1 + max_retries attempts. Retryable backend failures count as attempts;
/// auth errors propagate immediately.
inline RetryOutcome complete_with_retry(LlmBackend& backend, const std::string& prompt,
                                        const std::function<bool(const std::string&)>& validator,
                                        int max_retries = 3) {
  RetryOutcome out;
  for (int attempt = 0; attempt < 1 + max_retries; ++attempt) {
    ++out.attempts;
    try {
      Completion c = backend.complete(prompt);
      out.tokens_in += c.tokens_in;
      out.tokens_out += c.tokens_out;
      if (validator(c.text)) {
        out.ok = true;
        out.text = c.text;
        return out;
      }
      out.rejected.push_back(c.text);
    } catch (const RetryableBackendError& e) {
      out.rejected.push_back(std::string("<backend failure: ") + e.what() + ">");
    }
  }
  return out;
}

}  // namespace hra
