#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace roomforge {

using Json = nlohmann::json;

// Canonical text form: object keys sorted, two-space indentation, arrays of
// scalars kept on one line, floating-point numbers printed with exactly six
// decimals (negative zero printed as zero), integers printed as integers,
// trailing newline. Equal documents produce identical bytes.
std::string canonical_dump(const Json& value);

// Six-decimal fixed rendering used by canonical_dump.
std::string format_fixed6(double value);

Json parse_json(std::string_view text, std::string_view what = "document");

std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so
// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace roomforge
