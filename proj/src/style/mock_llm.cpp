#include "roomforge/style/mock_llm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>

#include "roomforge/core/canonical_json.hpp"
#include "roomforge/style/resources.hpp"
#include "roomforge/style/style_mapping.hpp"

namespace roomforge::style {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Theme {
  std::array<std::string_view, 3> triggers;
  std::array<std::string_view, 6> keywords;
};

// Triggers are matched as lowercase substrings of the user's text.
constexpr Theme kThemes[] = {
    {{"pirate", "caribbean", "ship"},
     {"Pirates of the Caribbean", "Nautical", "Rustic Wood", "Weathered Canvas", "Aged Bronze", "Dark Ocean Blue"}},
    {{"cyberpunk", "neon", "blade runner"},
     {"Cyberpunk", "Neon Lights", "Chrome Metal", "Electric Blue", "Hot Pink", "Futuristic"}},
    {{"gothic", "vampire", "cathedral"},
     {"Dark Gothic", "Black Stone", "Ironwork", "Candlelight", "Stained Glass", "Dramatic Shadows"}},
    {{"zombie", "plants vs", "cartoon"},
     {"Plants vs. Zombies", "Cartoonish", "Whimsical", "Bright Green", "Wooden Fence", "Vibrant Colors"}},
    {{"forest", "jungle", "woodland"},
     {"Enchanted Forest", "Mossy Wood", "Natural Stone", "Emerald Green", "Dappled Sunlight", "Organic Shapes"}},
    {{"space", "sci-fi", "spaceship"},
     {"Space Station", "Brushed Aluminum", "White Composite", "Soft Blue Lighting", "Futuristic", "Modular Panels"}},
    {{"japan", "zen", "tatami"},
     {"Japanese Zen", "Light Bamboo", "Rice Paper", "Natural Stone", "Muted Earth Tones", "Low Furniture"}},
    {{"minimal", "scandinavian", "nordic"},
     {"Modern Minimalist", "Clean Lines", "Matte White", "Light Oak", "Neutral Tones", "Soft Daylight"}},
};

// Whole words dropped when turning free text into a theme name.
constexpr std::string_view kFiller[] = {"i",    "i'd", "want", "to",    "like",   "please", "make",  "turn", "the",
                                        "room", "into", "in",  "a",     "an",     "it",     "my",    "would", "style",
                                        "themed", "theme", "look", "with", "and",  "of"};

std::string title_case(std::string_view s) {
  std::string out;
  bool start = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      start = true;
      continue;
    }
    out.push_back(start ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
    start = false;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string keywords_reply(std::string_view user_text) {
  // Only the user's own words count; an appended image summary is ignored.
  std::string text = lower(user_text.substr(0, user_text.find("Reference image:")));
  for (const auto& theme : kThemes) {
    for (auto trigger : theme.triggers) {
      if (!trigger.empty() && text.find(trigger) != std::string::npos) {
        return fmt::format("{}", fmt::join(theme.keywords, ", "));
      }
    }
  }
  std::string core;
  std::string word;
  const auto flush = [&] {
    if (!word.empty() && std::find(std::begin(kFiller), std::end(kFiller), word) == std::end(kFiller)) {
      core += (core.empty() ? "" : " ") + word;
    }
    word.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'') {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  core = title_case(core);
  if (core.empty() || core.size() > 40) return std::string(kDefaultStyle);
  return fmt::format("{}, Textured Materials, Harmonious Palette, Ambient Lighting, Handcrafted Details", core);
}

struct LabelInfo {
  std::string_view key;
  std::string_view function;
  std::string_view noun;
  bool collision;
};

constexpr LabelInfo kLabels[] = {
    {"sofa", "seating for several people", "lounge sofa", true},
    {"couch", "seating for several people", "lounge sofa", true},
    {"armchair", "single-person seating", "armchair", true},
    {"chair", "single-person seating", "chair", true},
    {"stool", "single-person seating", "stool", true},
    {"coffee table", "low surface for drinks and small items", "low table", true},
    {"dining table", "eating surface", "dining table", true},
    {"desk", "work surface", "writing desk", true},
    {"table", "raised surface", "table", true},
    {"bed", "sleeping surface", "bed", true},
    {"tv stand", "support for a screen", "media console", true},
    {"tv", "screen for viewing media", "display panel", false},
    {"monitor", "screen for viewing media", "display panel", false},
    {"bookshelf", "storage for books", "bookcase", true},
    {"shelf", "open storage", "shelving unit", true},
    {"cabinet", "closed storage", "cabinet", true},
    {"wardrobe", "clothing storage", "wardrobe", true},
    {"floor lamp", "standing light source", "standing lamp", true},
    {"lamp", "light source", "lamp", true},
    {"plant", "decorative greenery", "planter", true},
    {"curtain", "window covering", "drapery", false},
    {"rug", "floor covering", "rug", false},
    {"carpet", "floor covering", "carpet", false},
    {"painting", "wall decoration", "framed artwork", false},
    {"picture", "wall decoration", "framed artwork", false},
    {"mirror", "reflective wall surface", "mirror", false},
    {"door", "passage between rooms", "door", false},
    {"window", "daylight opening", "window", false},
};

LabelInfo lookup_label(const std::string& label) {
  const auto l = lower(label);
  for (const auto& info : kLabels) {
    if (l == info.key) return info;
  }
  const LabelInfo* best = nullptr;
  for (const auto& info : kLabels) {
    if (l.find(info.key) != std::string::npos && (!best || info.key.size() > best->key.size())) best = &info;
  }
  if (best) return *best;
  return {"", "", "", true};
}

std::string shape_hint(const Json& size) {
  const double x = size.at(0).get<double>(), y = size.at(1).get<double>(), z = size.at(2).get<double>();
  const double footprint = std::max(x, y);
  if (z < 0.1 * footprint) return "it is thin and flat, lying close to the surface it rests on";
  if (std::min(x, y) < 0.15 * std::max({x, y, z})) return "it is slim in depth and broad across its face";
  if (z > 1.8 * footprint) return "it is tall and narrow with a stable base";
  if (footprint > 1.8 * z) return "it is long and low with a wide, steady stance";
  return "it is compact and evenly proportioned";
}

std::string appearance(const std::string& replica, const std::string& label, const std::vector<std::string>& kw,
                       const Json& size) {
  const auto k = [&](std::size_t i) { return kw.empty() ? std::string(kDefaultStyle) : kw[i % kw.size()]; };
  return fmt::format(
      "A {replica} designed for a {theme} scene, shaped to keep the footprint and height of the original {label} so "
      "that it reads as the same object in the room. Its main body is built from {a} with accents of {b}, and the "
      "surface detail draws on {c} and {d}. The proportions stay true to the original piece: {shape}. The color "
      "palette stays within the tones suggested by {b} and {d}, with a matte base and a few brighter highlights where "
      "hands or light would naturally touch it. Fine texture, seams and small ornaments are visible at close range "
      "without cluttering the silhouette, and the object rests naturally on its base with no floating parts, facing "
      "the open side of the room as the original does, under soft and even lighting.",
      fmt::arg("replica", replica), fmt::arg("theme", k(0)), fmt::arg("label", label), fmt::arg("a", k(1)),
      fmt::arg("b", k(2)), fmt::arg("c", k(3)), fmt::arg("d", k(4)), fmt::arg("shape", shape_hint(size)));
}

std::vector<std::string> split_keywords(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(',', start);
    if (end == std::string_view::npos) end = line.size();
    auto item = line.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::string line_after(std::string_view text, std::string_view marker) {
  const auto pos = text.find(marker);
  if (pos == std::string_view::npos) return {};
  const auto start = pos + marker.size();
  const auto end = text.find('\n', start);
  return std::string(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::string mapping_reply(std::string_view prompt) {
  const auto task = prompt.substr(prompt.rfind("## Task Start"));
  const auto keywords = split_keywords(line_after(task, "User's expected style keywords: "));
  const Json scene = Json::parse(line_after(task, "Scene JSON information containing bbox positions, dimensions, etc.: "));
  const auto k = [&](std::size_t i) { return keywords.empty() ? std::string(kDefaultStyle) : keywords[i % keywords.size()]; };

  MappingTable table;
  for (const auto& obj : scene.at("objects")) {
    const auto label = obj.at("label").get<std::string>();
    auto info = lookup_label(label);
    const std::string function = info.function.empty() ? label : std::string(info.function);
    const std::string noun = info.noun.empty() ? label : std::string(info.noun);
    const std::string replica = fmt::format("{} {}", k(0), noun);
    table.objects.push_back({obj.at("id").get<std::string>(), label, function, replica, function,
                             appearance(replica, label, keywords, obj.at("size")), info.collision});
  }
  table.skybox = {fmt::format("{} panorama surrounding the room: distant landmarks in {} under {} light, wide horizon "
                              "and atmospheric depth",
                              k(0), k(1), k(2)),
                  "text, watermark, people, vehicles, blurry, distorted horizon"};
  table.wall_texture = fmt::format("{} wall surface with subtle {} detail", k(1), k(3));
  table.floor_texture = fmt::format("{} floor surface with gentle {} wear", k(3), k(1));
  return table_to_json(table).dump(2);
}

}  // namespace

std::string heuristic_reply(const gen::LlmCall& call) {
  if (call.messages.empty()) return {};
  if (call.messages.size() >= 2 && call.messages[0].role == "system" &&
      call.messages[0].content == prompt_resource("style_extraction_system.txt")) {
    return keywords_reply(call.messages[1].content);
  }
  const auto& first = call.messages[0].content;
  if (first.find("## Task Start") != std::string::npos) return mapping_reply(first);
  return "Unsupported request.";
}

std::string heuristic_responder(const gen::GenerationRequest& request) {
  return heuristic_reply(gen::llm_call_from(request));
}

}  // namespace roomforge::style
