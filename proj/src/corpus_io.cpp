#include "tsq/corpus.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tsq/error.hpp"

namespace tsq {

using nlohmann::json;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (!lines.empty() && lines[0].rfind("\xEF\xBB\xBF", 0) == 0) lines[0].erase(0, 3);
  return lines;
}

std::vector<std::string> string_list(const json& j, const std::string& path, size_t lineno,
                                     const char* field) {
  if (!j.is_array()) {
    throw Error::parse(path + ":" + std::to_string(lineno) + ": '" + field +
                       "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": '" + field +
                         "' must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus read_jsonl(const std::string& path) {
  const auto lines = read_lines(path);
  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": expected a JSON object");
    }
    Record rec;
    if (j.contains("id")) {
      if (j["id"].is_string()) {
        rec.id = j["id"].get<std::string>();
      } else if (j["id"].is_number_integer()) {
        rec.id = std::to_string(j["id"].get<long long>());
      } else {
        throw Error::parse(path + ":" + std::to_string(lineno) + ": 'id' must be a string");
      }
    } else {
      rec.id = std::to_string(i);
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": missing string field 'text'");
    }
    rec.text = j["text"].get<std::string>();
    if (j.contains("labels")) rec.labels = string_list(j["labels"], path, lineno, "labels");
    if (j.contains("tags")) rec.tags = string_list(j["tags"], path, lineno, "tags");
    if (!seen.insert(rec.id).second) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": duplicate id '" + rec.id + "'");
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

void write_jsonl(const std::string& path, const Corpus& corpus) {
  std::string buf;
  for (const auto& rec : corpus) {
    json j;
    j["id"] = rec.id;
    j["text"] = rec.text;
    if (!rec.labels.empty()) j["labels"] = rec.labels;
    if (!rec.tags.empty()) j["tags"] = rec.tags;
    buf += j.dump();
    buf += '\n';
  }
  atomic_write(path, buf);
}

Corpus read_tsv(const std::string& path, bool multi_label) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error::parse(path + ": empty file, expected a header row");
  Corpus corpus;
  for (size_t i = 1; i < lines.size(); ++i) {
    const size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    const size_t tab = lines[i].rfind('\t');
    if (tab == std::string::npos) {
      throw Error::parse(path + ":" + std::to_string(lineno) + ": expected two TAB-separated columns");
    }
    Record rec;
    rec.id = std::to_string(i - 1);
    rec.text = lines[i].substr(0, tab);
    const std::string cell = lines[i].substr(tab + 1);
    if (multi_label) {
      std::stringstream ss(cell);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) rec.labels.push_back(item);
      }
    } else {
      if (cell.empty()) {
        throw Error::parse(path + ":" + std::to_string(lineno) + ": empty label");
      }
      rec.labels.push_back(cell);
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

std::vector<TaggedSeq> read_conll(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<TaggedSeq> seqs;
  TaggedSeq cur;
  size_t with_tag = 0, without_tag = 0, first_line = 0;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    if (with_tag != 0 && without_tag != 0) {
      throw Error::parse(path + ":" + std::to_string(first_line) +
                         ": sequence mixes tagged and untagged lines");
    }
    if (without_tag > 0) cur.tags.clear();
    cur.id = std::to_string(seqs.size());
    seqs.push_back(std::move(cur));
    cur = TaggedSeq{};
    with_tag = without_tag = 0;
  };
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) {
      flush();
      continue;
    }
    if (cur.tokens.empty()) first_line = i + 1;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      cur.tokens.push_back(line);
      cur.tags.emplace_back();
      ++without_tag;
    } else {
      const std::string tag = line.substr(tab + 1);
      if (tag.empty() || tag.find('\t') != std::string::npos) {
        throw Error::parse(path + ":" + std::to_string(i + 1) + ": expected 'token<TAB>tag'");
      }
      cur.tokens.push_back(line.substr(0, tab));
      cur.tags.push_back(tag);
      ++with_tag;
    }
  }
  flush();
  return seqs;
}

void write_conll(const std::string& path, const std::vector<TaggedSeq>& seqs) {
  std::string buf;
  for (size_t s = 0; s < seqs.size(); ++s) {
    if (s > 0) buf += '\n';
    const auto& seq = seqs[s];
    for (size_t t = 0; t < seq.tokens.size(); ++t) {
      buf += seq.tokens[t];
      if (!seq.tags.empty()) {
        buf += '\t';
        buf += seq.tags[t];
      }
      buf += '\n';
    }
  }
  atomic_write(path, buf);
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error::io("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error::io("short write to " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error::io("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace tsq
