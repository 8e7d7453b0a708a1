#pragma once

#include <map>
#include <string>
#include <string_view>

#include "roomforge/core/linalg.hpp"

namespace roomforge::style {

// Single-pass substitution of `{name}` for every name in `vars`. Any other
// brace text stays literal, so JSON examples inside templates survive, and
// substituted values are never re-scanned.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars);

// Shortest round-trip rendering with the repr rules of Python floats:
// "2.0", "0.52", "1e-05", "1e+16", "-0.0", "inf", "nan".
std::string python_repr(double value);
// "[2.0, 0.9, 0.8]"
std::string python_list(const Vec3& v);

}  // namespace roomforge::style
