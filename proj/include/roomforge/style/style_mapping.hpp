#pragma once

// Style keyword extraction, mapping-table inference and the deterministic
// prompt builders for image, texture and skybox generation.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomforge/gen/llm.hpp"
#include "roomforge/scene/scene_model.hpp"

namespace roomforge::style {

inline constexpr std::string_view kDefaultStyle = "Modern Minimalist";
inline constexpr std::size_t kMinKeywords = 4;
inline constexpr std::size_t kMaxKeywords = 8;
inline constexpr int kMinAppearanceWords = 100;
inline constexpr int kMaxAppearanceWords = 200;

// ---- style extraction ----

// Splits a comma-separated reply into trimmed keywords, dropping quotes, a
// leading "Expected output:" and duplicates (first occurrence kept). Returns
// nullopt unless 4-8 usable keywords remain.
std::optional<std::vector<std::string>> parse_keywords(std::string_view reply);

// The user message: the raw text, plus a textual summary of the reference
// image when the client cannot take attachments.
std::string style_user_message(const scene::StyleSpec& intent, const std::optional<std::string>& image_summary);

// Short deterministic description of a PNG (size and dominant colors), used
// when the language model cannot see the image itself.
std::string describe_reference_image(std::string_view png_bytes);

struct ExtractOptions {
  std::uint64_t seed = 0;
  std::optional<std::string> image_summary{};
};

// Asks for 4-8 keywords; re-asks once on an unusable reply, then falls back
// to {"Modern Minimalist"} with `degraded` set. A reply that is exactly the
// default style is accepted as that fallback. Throws InvariantError when
// there is neither text nor a reference image; BackendError propagates.
scene::StyleSpec extract_style(scene::StyleSpec intent, gen::LlmClient& llm, const ExtractOptions& options = {});

// Keywords joined with ", ", or the default style when there are none.
std::string style_text(const scene::StyleSpec& style);

// ---- mapping table ----

struct SkyboxPrompt {
  std::string prompt;
  std::string negative_text;
  friend bool operator==(const SkyboxPrompt&, const SkyboxPrompt&) = default;
};

struct MappingTable {
  std::vector<scene::MappingRow> objects;  // scene entity order
  SkyboxPrompt skybox;
  std::string wall_texture;
  std::string floor_texture;
  friend bool operator==(const MappingTable&, const MappingTable&) = default;
};

struct MappingResult {
  MappingTable table;
  std::vector<std::string> warnings;  // appearance length, collision overrides
};

// {"objects": [[7 columns]...], "skybox": {"prompt", "negative_text"},
//  "wall_texture": {"prompt"}, "floor_texture": {"prompt"}}
Json table_to_json(const MappingTable& table);

// "id:label" pairs of the in-scene entities, joined with ", ".
std::string objects_list(const scene::SceneModel& scene);
// Compact JSON of walls and in-scene entities (ids, labels, centers, sizes,
// yaws rounded to millimeters / milliradians) for the prompt.
std::string scene_json_for_prompt(const scene::SceneModel& scene);
// Prefix, the two few-shot examples and the suffix, separated by blank lines.
std::string mapping_prompt(const scene::StyleSpec& style, const scene::SceneModel& scene);

// Labels whose rows must never be collision risks: curtains, doors, windows.
bool never_collision_risk(const scene::SceneEntity& entity);

// Parses and validates a reply against the scene. Accepts surrounding prose
// or code fences around the JSON object. Throws ValidationError whose path
// names the offending field ("floor_texture", "objects[2][6]", ...).
// Rows come back in scene entity order; rows for doors, windows and curtains
// are forced to collision_risk = false with a warning.
MappingResult parse_mapping_reply(std::string_view reply, const scene::SceneModel& scene);

// One request, one targeted re-ask on any validation failure, then the
// ValidationError propagates.
MappingResult infer_mapping_table(const scene::SceneModel& scene, const scene::StyleSpec& style,
                                  gen::LlmClient& llm, std::uint64_t seed = 0);

// ---- prompt builders (pure) ----

std::string build_object_image_prompt(const scene::MappingRow& row, const scene::SceneEntity& entity,
                                      const scene::StyleSpec& style);

enum class Surface { wall, floor };
std::string_view to_string(Surface surface);
std::string build_texture_prompt(Surface surface, const MappingTable& table);

struct SkyboxRequest {
  std::string prompt;
  std::string negative_text;
  std::string motion_instruction;  // video-assistant human message
  std::string system_prompt;       // video-assistant system message
  int duration_s = 10;
  friend bool operator==(const SkyboxRequest&, const SkyboxRequest&) = default;
};
SkyboxRequest build_skybox_request(const MappingTable& table);
Json skybox_payload(const SkyboxRequest& request);

}  // namespace roomforge::style
