#pragma once

// Language-model client interface and its dispatcher-backed implementation.

#include <optional>
#include <string>
#include <vector>

#include "roomforge/gen/dispatcher.hpp"

namespace roomforge::gen {

struct ChatMessage {
  std::string role;  // "system" | "human" | "ai"
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct LlmCall {
  std::vector<ChatMessage> messages;
  std::optional<std::string> attachment;  // image asset id
  std::uint64_t seed = 0;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const LlmCall& call) = 0;
  // Whether image attachments reach the model; otherwise callers describe
  // images in text.
  virtual bool supports_attachments() const { return false; }
};

GenerationRequest llm_request(const LlmCall& call);
LlmCall llm_call_from(const GenerationRequest& request);

// Routes calls through the dispatcher's llm lane (cached by idempotency key).
class DispatchedLlm : public LlmClient {
 public:
  explicit DispatchedLlm(Dispatcher& dispatcher, bool attachments = false)
      : dispatcher_(dispatcher), attachments_(attachments) {}
  std::string complete(const LlmCall& call) override;
  bool supports_attachments() const override { return attachments_; }

 private:
  Dispatcher& dispatcher_;
  bool attachments_;
};

}  // namespace roomforge::gen
