#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace tsq {

/// On-disk envelope for every trained model. Serialized with sorted keys so
/// identical contents give identical bytes.
struct ModelContainer {
  static constexpr const char* kMagic = "TSQK";
  static constexpr int kVersion = 1;
  static constexpr const char* kExtension = ".tsqk.json";

  std::string kind;  // nbsvm | crf | subword | vectorizer
  std::string created_at;
  nlohmann::json payload;
};

bool container_kind_ok(const std::string& kind);

/// The path must end in ".tsqk.json". Written atomically.
void save_container(const std::string& path, const ModelContainer& c);

/// Rejects wrong magic, unknown versions and unknown kinds.
ModelContainer load_container(const std::string& path);

/// Timestamp for a new container: the explicit value when given, otherwise
/// SOURCE_DATE_EPOCH (seconds, UTC) when set, otherwise the current time.
/// The two deterministic routes make repeated runs byte-identical.
std::string resolve_created_at(const std::optional<std::string>& explicit_value);

}  // namespace tsq
