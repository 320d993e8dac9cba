#pragma once

#include <string>
#include <vector>

namespace tsq {

struct Record {
  std::string id;
  std::string text;
  std::vector<std::string> labels;
  std::vector<std::string> tags;
};

using Corpus = std::vector<Record>;

struct TaggedSeq {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

// JSONL: one {"id", "text", "labels"?, "tags"?} object per line. Missing ids
// are filled with the 0-based line index; duplicate ids are an error.
Corpus read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const Corpus& corpus);

// Two-column TSV with a header row: text <TAB> label. In multi-label data the
// label cell holds a comma-separated list (may be empty).
Corpus read_tsv(const std::string& path, bool multi_label);

// Token <TAB> tag lines, blank line between sequences. The tag column may be
// absent (prediction input).
std::vector<TaggedSeq> read_conll(const std::string& path);
void write_conll(const std::string& path, const std::vector<TaggedSeq>& seqs);

// Write via a temp file in the same directory plus rename, so readers never
// observe a half-written file.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace tsq
