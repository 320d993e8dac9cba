#include "tsq/container.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>

#include "tsq/corpus.hpp"
#include "tsq/error.hpp"

namespace tsq {

using nlohmann::json;

bool container_kind_ok(const std::string& kind) {
  return kind == "nbsvm" || kind == "crf" || kind == "subword" || kind == "vectorizer";
}

namespace {

bool has_extension(const std::string& path) {
  const std::string ext = ModelContainer::kExtension;
  return path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
}

}  // namespace

void save_container(const std::string& path, const ModelContainer& c) {
  if (!has_extension(path)) {
    throw Error::config("model path must end in " + std::string(ModelContainer::kExtension) +
                        ": " + path);
  }
  if (!container_kind_ok(c.kind)) throw Error::config("unknown container kind '" + c.kind + "'");
  json j;
  j["magic"] = ModelContainer::kMagic;
  j["version"] = ModelContainer::kVersion;
  j["kind"] = c.kind;
  j["created_at"] = c.created_at;
  j["payload"] = c.payload;
  atomic_write(path, j.dump(2) + "\n");
}

ModelContainer load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error::parse(path + ": bad JSON: " + e.what());
  }
  if (!j.is_object() || j.value("magic", "") != ModelContainer::kMagic) {
    throw Error::parse(path + ": not a model container (bad magic)");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != ModelContainer::kVersion) {
    throw Error::parse(path + ": unsupported container version");
  }
  ModelContainer c;
  c.kind = j.value("kind", "");
  if (!container_kind_ok(c.kind)) {
    throw Error::parse(path + ": unknown container kind '" + c.kind + "'");
  }
  if (!j.contains("payload")) throw Error::parse(path + ": missing payload");
  c.created_at = j.value("created_at", "");
  c.payload = j["payload"];
  return c;
}

std::string resolve_created_at(const std::optional<std::string>& explicit_value) {
  if (explicit_value.has_value()) return *explicit_value;
  time_t now = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 0) {
      throw Error::config("SOURCE_DATE_EPOCH must be a non-negative integer");
    }
    now = static_cast<time_t>(v);
  } else {
    now = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace tsq
