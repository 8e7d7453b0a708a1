#include "roomforge/style/resources.hpp"

#include <fmt/format.h>

#include <map>

#include "roomforge/core/error.hpp"

namespace roomforge::style {

namespace detail {
const std::map<std::string, std::string_view, std::less<>>& resource_table();  // generated
}

std::string_view prompt_resource(std::string_view name) {
  const auto& table = detail::resource_table();
  if (auto it = table.find(name); it != table.end()) return it->second;
  throw MissingInput(fmt::format("no embedded prompt resource '{}'", name), std::string(name));
}

std::vector<std::string> resource_names() {
  std::vector<std::string> out;
  for (const auto& [name, bytes] : detail::resource_table()) out.push_back(name);
  return out;
}

}  // namespace roomforge::style
