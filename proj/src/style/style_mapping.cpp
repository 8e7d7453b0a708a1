#include "roomforge/style/style_mapping.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "roomforge/core/error.hpp"
#include "roomforge/core/raster.hpp"
#include "roomforge/style/resources.hpp"
#include "roomforge/style/templates.hpp"

namespace roomforge::style {

using scene::MappingRow;
using scene::SceneEntity;
using scene::SceneModel;
using scene::StyleSpec;

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

int word_count(std::string_view s) {
  int n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

double round_to(double v, double step) {
  const double r = std::round(v / step) * step;
  return r == 0.0 ? 0.0 : r;  // no negative zero in prompts
}

Json rounded(const Vec3& v) { return {round_to(v.x(), 1e-3), round_to(v.y(), 1e-3), round_to(v.z(), 1e-3)}; }

// Longest keyword still treated as a phrase rather than prose.
constexpr std::size_t kMaxKeywordChars = 48;
constexpr int kMaxKeywordWords = 6;

}  // namespace

// ---- style extraction ----

std::optional<std::vector<std::string>> parse_keywords(std::string_view reply) {
  std::string_view text = trim(reply);
  for (std::string_view prefix : {"Expected output:", "Output:", "Keywords:"}) {
    if (starts_with_ci(text, prefix)) text = trim(text.substr(prefix.size()));
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(",\n", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = trim(text.substr(start, end - start));
    // Bullet markers and numbering from list-style replies.
    while (!item.empty() && (item.front() == '-' || item.front() == '*')) item = trim(item.substr(1));
    if (item.size() > 2 && std::isdigit(static_cast<unsigned char>(item[0])) && item[1] == '.') {
      item = trim(item.substr(2));
    }
    while (!item.empty() && std::string_view("\"'`").find(item.front()) != std::string_view::npos) item.remove_prefix(1);
    while (!item.empty() && std::string_view("\"'`.;").find(item.back()) != std::string_view::npos) item.remove_suffix(1);
    item = trim(item);
    if (!item.empty()) {
      if (item.size() > kMaxKeywordChars || word_count(item) > kMaxKeywordWords) return std::nullopt;
      if (seen.insert(lower(item)).second) out.emplace_back(item);
    }
    start = end + 1;
  }
  if (out.size() < kMinKeywords || out.size() > kMaxKeywords) return std::nullopt;
  return out;
}

std::string style_user_message(const StyleSpec& intent, const std::optional<std::string>& image_summary) {
  std::string text(trim(intent.raw_text));
  if (image_summary) {
    if (!text.empty()) text += "\n";
    text += "Reference image: " + *image_summary;
  } else if (text.empty()) {
    text = "See the uploaded reference image.";
  }
  return text;
}

std::string describe_reference_image(std::string_view png_bytes) {
  const auto img = decode_png(png_bytes);
  // 4 levels per channel; report the three most common opaque bins.
  std::map<int, long> bins;
  long opaque = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto c = img.at(x, y);
      if (c[3] < 128) continue;
      ++opaque;
      ++bins[(c[0] / 64) * 16 + (c[1] / 64) * 4 + c[2] / 64];
    }
  }
  std::vector<std::pair<long, int>> ranked;
  for (const auto& [bin, count] : bins) ranked.emplace_back(-count, bin);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> colors;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i) {
    const int bin = ranked[i].second;
    const auto level = [](int v) { return v * 64 + 32; };
    colors.push_back(fmt::format("#{:02x}{:02x}{:02x} ({}%)", level(bin / 16), level((bin / 4) % 4), level(bin % 4),
                                 static_cast<int>(std::lround(100.0 * -ranked[i].first / opaque))));
  }
  return fmt::format("{}x{} pixels; dominant colors {}", img.width(), img.height(),
                     colors.empty() ? std::string("none (fully transparent)") : join(colors, ", "));
}

StyleSpec extract_style(StyleSpec intent, gen::LlmClient& llm, const ExtractOptions& options) {
  if (trim(intent.raw_text).empty() && !intent.reference_image) {
    throw InvariantError("style intent needs text or a reference image", "raw_text");
  }
  gen::LlmCall call;
  call.seed = options.seed;
  const bool attach = intent.reference_image && llm.supports_attachments();
  if (attach) call.attachment = intent.reference_image;
  call.messages = {{"system", std::string(prompt_resource("style_extraction_system.txt"))},
                   {"human", style_user_message(intent, attach ? std::nullopt : options.image_summary)}};

  const auto fallback = [&] {
    intent.keywords = {std::string(kDefaultStyle)};
    intent.degraded = true;
    return intent;
  };
  const auto accept = [&](const std::string& reply) -> std::optional<StyleSpec> {
    if (lower(trim(reply)) == lower(kDefaultStyle)) return fallback();
    if (auto keywords = parse_keywords(reply)) {
      intent.keywords = std::move(*keywords);
      intent.degraded = false;
      return intent;
    }
    return std::nullopt;
  };

  const auto first = llm.complete(call);
  if (auto done = accept(first)) return *done;
  call.messages.push_back({"ai", first});
  call.messages.push_back(
      {"human", fmt::format("Reply with {}-{} English style keywords separated by commas and nothing else.",
                            kMinKeywords, kMaxKeywords)});
  if (auto done = accept(llm.complete(call))) return *done;
  return fallback();
}

std::string style_text(const StyleSpec& style) {
  return style.keywords.empty() ? std::string(kDefaultStyle) : join(style.keywords, ", ");
}

// ---- mapping table ----

Json table_to_json(const MappingTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.objects) {
    rows.push_back({r.object_id, r.label, r.object_function, r.replica, r.replica_function, r.appearance_prompt,
                    r.collision_risk});
  }
  return {{"objects", std::move(rows)},
          {"skybox", {{"prompt", table.skybox.prompt}, {"negative_text", table.skybox.negative_text}}},
          {"wall_texture", {{"prompt", table.wall_texture}}},
          {"floor_texture", {{"prompt", table.floor_texture}}}};
}

std::string objects_list(const SceneModel& scene) {
  std::vector<std::string> parts;
  for (const auto& e : scene.entities) {
    if (scene::is_in_scene(e.kind)) parts.push_back(e.id + ":" + e.label);
  }
  return join(parts, ", ");
}

std::string scene_json_for_prompt(const SceneModel& scene) {
  Json walls = Json::array();
  for (const auto& w : scene.walls) {
    walls.push_back({{"id", w.id},
                     {"start", {round_to(w.a.x(), 1e-3), round_to(w.a.y(), 1e-3)}},
                     {"end", {round_to(w.b.x(), 1e-3), round_to(w.b.y(), 1e-3)}},
                     {"height", round_to(w.height, 1e-3)}});
  }
  Json objects = Json::array();
  for (const auto& e : scene.entities) {
    if (!scene::is_in_scene(e.kind)) continue;
    objects.push_back({{"id", e.id},
                       {"label", e.label},
                       {"category", scene::to_string(e.kind)},
                       {"center", rounded(e.box.center)},
                       {"size", rounded(e.box.size)},
                       {"yaw", round_to(e.box.yaw, 1e-3)}});
  }
  return Json{{"walls", std::move(walls)}, {"objects", std::move(objects)}}.dump();
}

std::string mapping_prompt(const StyleSpec& style, const SceneModel& scene) {
  const auto examples = Json::parse(prompt_resource("mapping_examples.json"));
  const auto example_tmpl = prompt_resource("mapping_example.txt");
  std::vector<std::string> parts{std::string(prompt_resource("mapping_prefix.txt"))};
  for (const auto& ex : examples) {
    parts.push_back(fill_template(example_tmpl, {{"style", ex.at("style").get<std::string>()},
                                                 {"objects", ex.at("objects").get<std::string>()},
                                                 {"output", ex.at("output").dump(2)}}));
  }
  parts.push_back(fill_template(prompt_resource("mapping_suffix.txt"), {{"style", style_text(style)},
                                                                        {"objects", objects_list(scene)},
                                                                        {"scene_json", scene_json_for_prompt(scene)}}));
  return join(parts, "\n\n");
}

bool never_collision_risk(const SceneEntity& entity) {
  if (entity.kind == scene::EntityKind::door || entity.kind == scene::EntityKind::window) return true;
  const auto label = lower(entity.label);
  for (std::string_view word : {"curtain", "door", "window"}) {
    if (label.find(word) != std::string::npos) return true;
  }
  return false;
}

namespace {

const Json& require_object(const Json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(fmt::format("reply is missing \"{}\"", key), key);
  if (!it->is_object()) throw ValidationError(fmt::format("\"{}\" must be an object", key), key);
  return *it;
}

std::string require_text(const Json& obj, const std::string& key, const std::string& path, bool allow_empty = false) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || (!allow_empty && trim(it->get<std::string>()).empty())) {
    throw ValidationError(fmt::format("\"{}\" must be a non-empty string", path), path);
  }
  return it->get<std::string>();
}

}  // namespace

MappingResult parse_mapping_reply(std::string_view reply, const SceneModel& scene) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ValidationError("reply contains no JSON object", "$");
  }
  Json doc;
  try {
    doc = Json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("reply is not valid JSON: {}", e.what()), "$");
  }

  MappingResult result;
  auto& table = result.table;
  auto objects = doc.find("objects");
  if (objects == doc.end()) throw ValidationError("reply is missing \"objects\"", "objects");
  if (!objects->is_array()) throw ValidationError("\"objects\" must be an array of rows", "objects");
  const auto& sky = require_object(doc, "skybox");
  table.skybox.prompt = require_text(sky, "prompt", "skybox.prompt");
  table.skybox.negative_text = require_text(sky, "negative_text", "skybox.negative_text", true);
  table.wall_texture = require_text(require_object(doc, "wall_texture"), "prompt", "wall_texture.prompt");
  table.floor_texture = require_text(require_object(doc, "floor_texture"), "prompt", "floor_texture.prompt");

  std::map<std::string, MappingRow> by_id;
  for (std::size_t i = 0; i < objects->size(); ++i) {
    const auto& row = (*objects)[i];
    const auto path = fmt::format("objects[{}]", i);
    if (!row.is_array() || row.size() != MappingRow::kColumns.size()) {
      throw ValidationError(fmt::format("{} must be an array of exactly {} columns ({})", path,
                                        MappingRow::kColumns.size(), fmt::join(MappingRow::kColumns, ", ")),
                            path);
    }
    std::array<std::string, 6> cells;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!row[k].is_string() || trim(row[k].get<std::string>()).empty()) {
        throw ValidationError(fmt::format("{}[{}] ({}) must be a non-empty string", path, k, MappingRow::kColumns[k]),
                              fmt::format("{}[{}]", path, k));
      }
      cells[k] = row[k].get<std::string>();
    }
    if (!row[6].is_boolean()) {
      throw ValidationError(fmt::format("{}[6] (collision_risk) must be true or false", path), path + "[6]");
    }
    const auto* entity = scene.find_entity(cells[0]);
    if (!entity || !scene::is_in_scene(entity->kind)) {
      throw ValidationError(fmt::format("{} names unknown object id '{}'", path, cells[0]), path + "[0]");
    }
    if (by_id.count(cells[0])) {
      throw ValidationError(fmt::format("{} repeats object id '{}'", path, cells[0]), path + "[0]");
    }
    MappingRow r{cells[0], cells[1], cells[2], cells[3], cells[4], cells[5], row[6].get<bool>()};
    if (r.collision_risk && never_collision_risk(*entity)) {
      r.collision_risk = false;
      result.warnings.push_back(fmt::format("{}: collision_risk forced to false for '{}'", r.object_id, entity->label));
    }
    const int words = word_count(r.appearance_prompt);
    if (words < kMinAppearanceWords || words > kMaxAppearanceWords) {
      result.warnings.push_back(fmt::format("{}: appearance_prompt has {} words (target {}-{})", r.object_id, words,
                                            kMinAppearanceWords, kMaxAppearanceWords));
    }
    by_id.emplace(r.object_id, std::move(r));
  }

  std::vector<std::string> missing;
  for (const auto& e : scene.entities) {
    if (!scene::is_in_scene(e.kind)) continue;
    if (auto it = by_id.find(e.id); it != by_id.end()) {
      table.objects.push_back(std::move(it->second));
    } else {
      missing.push_back(e.id);
    }
  }
  if (!missing.empty()) {
    throw ValidationError(fmt::format("objects is missing rows for: {}", join(missing, ", ")), "objects");
  }
  return result;
}

MappingResult infer_mapping_table(const SceneModel& scene, const StyleSpec& style, gen::LlmClient& llm,
                                  std::uint64_t seed) {
  if (style.keywords.empty()) throw InvariantError("style keywords are not populated", "style.keywords");
  if (std::none_of(scene.entities.begin(), scene.entities.end(),
                   [](const SceneEntity& e) { return scene::is_in_scene(e.kind); })) {
    throw InvariantError("scene has no object entities", "entities");
  }
  gen::LlmCall call;
  call.seed = seed;
  call.messages = {{"human", mapping_prompt(style, scene)}};
  const auto first = llm.complete(call);
  try {
    return parse_mapping_reply(first, scene);
  } catch (const ValidationError& e) {
    call.messages.push_back({"ai", first});
    call.messages.push_back(
        {"human", fmt::format("The JSON above is invalid: {} (at {}). Return the complete corrected JSON object with "
                              "exactly one row for each of these objects: {}. Only return JSON.",
                              e.what(), e.path(), objects_list(scene))});
  }
  return parse_mapping_reply(llm.complete(call), scene);
}

// ---- prompt builders ----

std::string build_object_image_prompt(const MappingRow& row, const SceneEntity& entity, const StyleSpec& style) {
  if (row.object_id != entity.id) {
    throw InvariantError(fmt::format("mapping row '{}' does not belong to entity '{}'", row.object_id, entity.id),
                         "object_id");
  }
  const auto size = python_list(entity.box.size);
  const auto size_req =
      fill_template(prompt_resource("object_image_size.txt"), {{"size", size}, {"rotation", python_repr(entity.box.yaw)}});
  return fill_template(prompt_resource("object_image.txt"), {{"object_function", row.object_function},
                                                             {"label", row.label},
                                                             {"replica", row.replica},
                                                             {"style", style_text(style)},
                                                             {"replica_function", row.replica_function},
                                                             {"prompt", row.appearance_prompt},
                                                             {"size_req", size_req},
                                                             {"size", size}});
}

std::string_view to_string(Surface surface) { return surface == Surface::wall ? "wall" : "floor"; }

std::string build_texture_prompt(Surface surface, const MappingTable& table) {
  std::string_view prompt = trim(surface == Surface::wall ? table.wall_texture : table.floor_texture);
  while (!prompt.empty() && prompt.back() == '.') prompt.remove_suffix(1);
  return fill_template(prompt_resource("texture_tileable.txt"),
                       {{"prompt", std::string(prompt)}, {"surface", std::string(to_string(surface))}});
}

SkyboxRequest build_skybox_request(const MappingTable& table) {
  SkyboxRequest r;
  r.prompt = table.skybox.prompt;
  r.negative_text = table.skybox.negative_text;
  r.motion_instruction = fill_template(prompt_resource("skybox_human.txt"), {{"image_description", table.skybox.prompt}});
  r.system_prompt = std::string(prompt_resource("skybox_system.txt"));
  r.duration_s = 10;
  return r;
}

Json skybox_payload(const SkyboxRequest& request) {
  return {{"prompt", request.prompt},
          {"negative_text", request.negative_text},
          {"motion_instruction", request.motion_instruction},
          {"system_prompt", request.system_prompt},
          {"duration_s", request.duration_s}};
}

}  // namespace roomforge::style
