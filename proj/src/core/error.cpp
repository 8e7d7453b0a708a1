#include "roomforge/core/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace roomforge {

BlockedByAttention::BlockedByAttention(std::vector<std::string> ids)
    : Error("BlockedByAttention",
            fmt::format("unconfirmed red-flagged entities: {}", fmt::join(ids, ", "))),
      ids_(std::move(ids)) {}

}  // namespace roomforge
