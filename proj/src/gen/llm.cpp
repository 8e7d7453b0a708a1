#include "roomforge/gen/llm.hpp"

#include "roomforge/core/error.hpp"

namespace roomforge::gen {

GenerationRequest llm_request(const LlmCall& call) {
  GenerationRequest request;
  request.kind = RequestKind::llm;
  Json messages = Json::array();
  for (const auto& m : call.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  request.payload = {{"messages", std::move(messages)}};
  request.payload["attachment"] = call.attachment ? Json(*call.attachment) : Json(nullptr);
  request.seed = call.seed;
  return request;
}

LlmCall llm_call_from(const GenerationRequest& request) {
  if (request.kind != RequestKind::llm) throw ValidationError("not an llm request", "kind");
  request.validate();
  LlmCall call;
  for (const auto& m : request.payload.at("messages")) {
    call.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  if (auto it = request.payload.find("attachment"); it != request.payload.end() && it->is_string()) {
    call.attachment = it->get<std::string>();
  }
  call.seed = request.seed;
  return call;
}

std::string DispatchedLlm::complete(const LlmCall& call) {
  LlmCall routed = call;
  if (!attachments_) routed.attachment.reset();
  const auto result = dispatcher_.submit(llm_request(routed)).wait();
  if (!result.text) throw BackendError("language model returned no text");
  return *result.text;
}

}  // namespace roomforge::gen
