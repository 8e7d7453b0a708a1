#pragma once

// Prompt templates compiled into the library byte-for-byte from
// resources/prompts/. Template text is stored evaluated (no source-language
// escapes) and without a trailing newline.

#include <string>
#include <string_view>
#include <vector>

namespace roomforge::style {

// Throws MissingInput for an unknown name.
std::string_view prompt_resource(std::string_view name);
std::vector<std::string> resource_names();

}  // namespace roomforge::style
