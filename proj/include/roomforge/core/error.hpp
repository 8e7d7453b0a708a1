#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace roomforge {

// Base of every error the library raises. `code` is the stable identifier
// surfaced by the REST layer; `path` locates the offending field or entity
// (JSON-pointer-ish, e.g. "entities[3].box.size") and may be empty.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(std::move(code)), path_(std::move(path)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string code_;
  std::string path_;
};

#define ROOMFORGE_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message, std::string path = {})      \
        : Error(#Name, message, std::move(path)) {}                       \
  }

ROOMFORGE_DEFINE_ERROR(SchemaError);
ROOMFORGE_DEFINE_ERROR(InvariantError);
ROOMFORGE_DEFINE_ERROR(IllegalTransition);
ROOMFORGE_DEFINE_ERROR(UnknownEntity);
ROOMFORGE_DEFINE_ERROR(NoVisibleFrame);
ROOMFORGE_DEFINE_ERROR(ImageDecodeError);
ROOMFORGE_DEFINE_ERROR(ValidationError);
ROOMFORGE_DEFINE_ERROR(BackendError);
ROOMFORGE_DEFINE_ERROR(ContentRejected);
ROOMFORGE_DEFINE_ERROR(Timeout);
ROOMFORGE_DEFINE_ERROR(Cancelled);
ROOMFORGE_DEFINE_ERROR(MissingInput);
ROOMFORGE_DEFINE_ERROR(MissingAsset);
ROOMFORGE_DEFINE_ERROR(MissingHostWall);
ROOMFORGE_DEFINE_ERROR(DegenerateRoom);
ROOMFORGE_DEFINE_ERROR(Conflict);

#undef ROOMFORGE_DEFINE_ERROR

// Composition refused because red-flagged entities are still unconfirmed.
class BlockedByAttention : public Error {
 public:
  explicit BlockedByAttention(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

}  // namespace roomforge
