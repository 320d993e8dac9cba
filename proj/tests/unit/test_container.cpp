#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tsq/container.hpp"
#include "tsq/error.hpp"

using namespace tsq;
using nlohmann::json;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path(name) {}
  TempFile(const std::string& name, const std::string& contents) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Scoped override of one environment variable.
struct EnvGuard {
  std::string name;
  std::optional<std::string> saved;
  EnvGuard(const std::string& n, const char* value) : name(n) {
    if (const char* old = std::getenv(name.c_str())) saved = old;
    if (value) setenv(name.c_str(), value, 1);
    else unsetenv(name.c_str());
  }
  ~EnvGuard() {
    if (saved) setenv(name.c_str(), saved->c_str(), 1);
    else unsetenv(name.c_str());
  }
};

}  // namespace

TEST_CASE("container round trip preserves every field") {
  TempFile f("t_container_rt.tsqk.json");
  ModelContainer c;
  c.kind = "crf";
  c.created_at = "2020-06-01T12:00:00Z";
  c.payload = {{"alpha", 1}, {"nested", {{"x", true}}}};
  save_container(f.path, c);
  const auto back = load_container(f.path);
  CHECK(back.kind == "crf");
  CHECK(back.created_at == "2020-06-01T12:00:00Z");
  CHECK(back.payload == c.payload);
}

TEST_CASE("serialized form is sorted, indented and newline-terminated") {
  TempFile f("t_container_bytes.tsqk.json");
  ModelContainer c;
  c.kind = "crf";
  c.created_at = "2020-01-01T00:00:00Z";
  c.payload = {{"b", 1}, {"a", 2}};
  save_container(f.path, c);
  const std::string want =
      "{\n"
      "  \"created_at\": \"2020-01-01T00:00:00Z\",\n"
      "  \"kind\": \"crf\",\n"
      "  \"magic\": \"TSQK\",\n"
      "  \"payload\": {\n"
      "    \"a\": 2,\n"
      "    \"b\": 1\n"
      "  },\n"
      "  \"version\": 1\n"
      "}\n";
  CHECK(slurp(f.path) == want);
}

TEST_CASE("identical contents give identical bytes") {
  ModelContainer c;
  c.kind = "subword";
  c.created_at = "2021-01-01T00:00:00Z";
  c.payload = {{"pieces", {"a", "b"}}, {"score", 0.125}};
  TempFile f1("t_container_one.tsqk.json");
  TempFile f2("t_container_two.tsqk.json");
  save_container(f1.path, c);
  save_container(f2.path, load_container(f1.path));
  CHECK(slurp(f1.path) == slurp(f2.path));
}

TEST_CASE("saving enforces the extension and the kind") {
  ModelContainer c;
  c.kind = "nbsvm";
  c.payload = json::object();
  CHECK_THROWS_WITH_AS(save_container("t_container_wrong.json", c),
                       doctest::Contains(".tsqk.json"), Error);
  c.kind = "banana";
  CHECK_THROWS_WITH_AS(save_container("t_container_kind.tsqk.json", c),
                       doctest::Contains("banana"), Error);
}

TEST_CASE("loading rejects tampered envelopes") {
  auto valid = [] {
    json j;
    j["magic"] = "TSQK";
    j["version"] = 1;
    j["kind"] = "crf";
    j["created_at"] = "2020-01-01T00:00:00Z";
    j["payload"] = json::object();
    return j;
  };

  auto j = valid();
  j["magic"] = "NOPE";
  TempFile magic("t_container_magic.tsqk.json", j.dump());
  CHECK_THROWS_WITH_AS(load_container(magic.path), doctest::Contains("magic"), Error);

  j = valid();
  j["version"] = 2;
  TempFile ver("t_container_ver.tsqk.json", j.dump());
  CHECK_THROWS_WITH_AS(load_container(ver.path), doctest::Contains("version"), Error);

  j = valid();
  j["kind"] = "mystery";
  TempFile kind("t_container_kindload.tsqk.json", j.dump());
  CHECK_THROWS_WITH_AS(load_container(kind.path), doctest::Contains("mystery"), Error);

  j = valid();
  j.erase("payload");
  TempFile nopay("t_container_nopay.tsqk.json", j.dump());
  CHECK_THROWS_WITH_AS(load_container(nopay.path), doctest::Contains("payload"), Error);

  TempFile garbage("t_container_garbage.tsqk.json", "not json at all");
  CHECK_THROWS_WITH_AS(load_container(garbage.path), doctest::Contains("bad JSON"), Error);

  CHECK_THROWS_AS(load_container("t_container_missing.tsqk.json"), Error);
}

TEST_CASE("created_at resolution order") {
  // An explicit value always wins.
  {
    EnvGuard env("SOURCE_DATE_EPOCH", "1577836800");
    CHECK(resolve_created_at(std::string("2030-01-01T00:00:00Z")) == "2030-01-01T00:00:00Z");
  }
  // SOURCE_DATE_EPOCH formats as UTC.
  {
    EnvGuard env("SOURCE_DATE_EPOCH", "0");
    CHECK(resolve_created_at(std::nullopt) == "1970-01-01T00:00:00Z");
  }
  {
    EnvGuard env("SOURCE_DATE_EPOCH", "1577836800");
    CHECK(resolve_created_at(std::nullopt) == "2020-01-01T00:00:00Z");
  }
  // A malformed epoch is a configuration error, not silently ignored.
  {
    EnvGuard env("SOURCE_DATE_EPOCH", "not-a-number");
    CHECK_THROWS_WITH_AS(resolve_created_at(std::nullopt), doctest::Contains("SOURCE_DATE_EPOCH"),
                         Error);
  }
  {
    EnvGuard env("SOURCE_DATE_EPOCH", "-5");
    CHECK_THROWS_WITH_AS(resolve_created_at(std::nullopt), doctest::Contains("SOURCE_DATE_EPOCH"),
                         Error);
  }
  // Without either source the wall clock is used, in the same format.
  {
    EnvGuard env("SOURCE_DATE_EPOCH", nullptr);
    const auto now = resolve_created_at(std::nullopt);
    REQUIRE(now.size() == 20);
    CHECK(now[4] == '-');
    CHECK(now[10] == 'T');
    CHECK(now.back() == 'Z');
    CHECK(now.substr(0, 2) == "20");
  }
}
