#pragma once

// Offline language-model stand-in for the mock backend. It recognizes the
// style-extraction and mapping prompts and answers them deterministically
// from the prompt text alone: keywords from a small theme table, mapping rows
// from a label dictionary.

#include <string>

#include "roomforge/gen/llm.hpp"

namespace roomforge::style {

std::string heuristic_reply(const gen::LlmCall& call);

// Adapter for gen::MockOptions::llm.
std::string heuristic_responder(const gen::GenerationRequest& request);

}  // namespace roomforge::style
