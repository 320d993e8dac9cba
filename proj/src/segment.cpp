#include "tsq/segment.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "tsq/error.hpp"
#include "tsq/unicode.hpp"

namespace tsq {

LexiconKind lexicon_kind_from_string(const std::string& s) {
  if (s == "word") return LexiconKind::word;
  if (s == "syllable") return LexiconKind::syllable;
  throw Error::config("unknown lexicon kind '" + s + "' (expected word or syllable)");
}

std::string to_string(LexiconKind k) {
  return k == LexiconKind::word ? "word" : "syllable";
}

Lexicon Lexicon::from_file(const std::string& path, LexiconKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open lexicon file: " + path);
  Lexicon lex;
  lex.kind_ = kind;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      // Strip a UTF-8 BOM if present.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      first = false;
    }
    if (line.empty() || line[0] == '#') continue;
    lex.insert(decode_utf8(line));
  }
  if (lex.size_ == 0) throw Error::config("lexicon is empty: " + path);
  return lex;
}

Lexicon Lexicon::from_entries(const std::vector<std::string>& entries, LexiconKind kind) {
  Lexicon lex;
  lex.kind_ = kind;
  for (const auto& e : entries) lex.insert(decode_utf8(e));
  if (lex.size_ == 0) throw Error::config("lexicon is empty");
  return lex;
}

void Lexicon::insert(std::u32string_view entry) {
  if (entry.empty()) return;
  int32_t cur = 0;
  for (char32_t c : entry) {
    auto it = nodes_[cur].next.find(c);
    if (it == nodes_[cur].next.end()) {
      nodes_.push_back(Node{});
      it = nodes_[cur].next.emplace(c, static_cast<int32_t>(nodes_.size() - 1)).first;
    }
    cur = it->second;
  }
  if (!nodes_[cur].terminal) {
    nodes_[cur].terminal = true;
    ++size_;
    max_len_ = std::max(max_len_, entry.size());
  }
}

bool Lexicon::contains(std::u32string_view entry) const {
  int32_t cur = 0;
  for (char32_t c : entry) {
    auto it = nodes_[cur].next.find(c);
    if (it == nodes_[cur].next.end()) return false;
    cur = it->second;
  }
  return nodes_[cur].terminal;
}

void Lexicon::matches_at(std::u32string_view text, size_t pos, std::vector<size_t>& lengths) const {
  lengths.clear();
  int32_t cur = 0;
  for (size_t i = pos; i < text.size(); ++i) {
    auto it = nodes_[cur].next.find(text[i]);
    if (it == nodes_[cur].next.end()) return;
    cur = it->second;
    if (nodes_[cur].terminal) lengths.push_back(i - pos + 1);
  }
}

std::vector<std::string> Lexicon::entries() const {
  std::vector<std::string> out;
  out.reserve(size_);
  std::u32string prefix;
  // Depth-first over the trie; map keys keep children ordered by scalar value.
  struct Frame {
    int32_t node;
    std::map<char32_t, int32_t>::const_iterator it;
  };
  std::vector<Frame> stack{{0, nodes_[0].next.begin()}};
  if (nodes_[0].terminal) out.push_back("");
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.it == nodes_[top.node].next.end()) {
      stack.pop_back();
      if (!prefix.empty()) prefix.pop_back();
      continue;
    }
    const auto [c, child] = *top.it;
    ++top.it;
    prefix.push_back(c);
    if (nodes_[child].terminal) out.push_back(encode_utf8(prefix));
    if (!nodes_[child].next.empty()) {
      stack.push_back({child, nodes_[child].next.begin()});
    } else {
      prefix.pop_back();
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Costs ordered lexicographically: unknown characters dominate token count.
// Packed so ordinary integer compare does the job.
constexpr uint64_t kInfCost = std::numeric_limits<uint64_t>::max();

constexpr uint64_t pack_cost(uint64_t unknown_chars, uint64_t tokens) {
  return (unknown_chars << 24) | tokens;
}

}  // namespace

Segmentation segment_maximal_matching(const Lexicon& lex, std::u32string_view text) {
  const size_t n = text.size();
  Segmentation seg;
  if (n == 0) return seg;
  if (n >= (1u << 24)) throw Error::invalid("text too long to segment in one call");

  // best[i][s]: cheapest way to finish from position i; s == 1 when the
  // character before i already sits inside an unknown run, so extending it
  // costs no extra token.
  std::vector<uint64_t> best((n + 1) * 2, kInfCost);
  best[n * 2 + 0] = pack_cost(0, 0);
  best[n * 2 + 1] = pack_cost(0, 0);

  std::vector<size_t> lens;
  std::vector<std::vector<size_t>> match_lens(n);
  for (size_t i = n; i-- > 0;) {
    lex.matches_at(text, i, match_lens[i]);
    for (int s = 0; s < 2; ++s) {
      uint64_t cur = kInfCost;
      for (size_t len : match_lens[i]) {
        const uint64_t rest = best[(i + len) * 2 + 0];
        if (rest == kInfCost) continue;
        cur = std::min(cur, rest + pack_cost(0, 1));
      }
      const uint64_t rest = best[(i + 1) * 2 + 1];
      if (rest != kInfCost) {
        cur = std::min(cur, rest + pack_cost(1, s == 1 ? 0 : 1));
      }
      best[i * 2 + s] = cur;
    }
  }

  // Walk forward re-picking optimal moves. On ties the longest dictionary
  // match wins; a dictionary match beats opening or extending an unknown run.
  size_t i = 0;
  int s = 0;
  size_t run_start = std::u32string_view::npos;
  auto close_run = [&](size_t end) {
    if (run_start == std::u32string_view::npos) return;
    seg.tokens.push_back(encode_utf8(text.substr(run_start, end - run_start)));
    seg.spans.push_back({run_start, end});
    seg.unknown.push_back(true);
    seg.unknown_chars += end - run_start;
    run_start = std::u32string_view::npos;
  };
  while (i < n) {
    const uint64_t want = best[i * 2 + s];
    size_t chosen = 0;
    for (auto it = match_lens[i].rbegin(); it != match_lens[i].rend(); ++it) {
      const uint64_t rest = best[(i + *it) * 2 + 0];
      if (rest != kInfCost && rest + pack_cost(0, 1) == want) {
        chosen = *it;
        break;
      }
    }
    if (chosen > 0) {
      close_run(i);
      seg.tokens.push_back(encode_utf8(text.substr(i, chosen)));
      seg.spans.push_back({i, i + chosen});
      seg.unknown.push_back(false);
      i += chosen;
      s = 0;
    } else {
      if (run_start == std::u32string_view::npos) run_start = i;
      i += 1;
      s = 1;
    }
  }
  close_run(n);
  return seg;
}

Segmentation segment_maximal_matching(const Lexicon& lex, std::string_view text_utf8) {
  return segment_maximal_matching(lex, decode_utf8(text_utf8));
}

Segmentation segment_syllables(const Lexicon& lex, std::string_view text_utf8) {
  if (lex.kind() != LexiconKind::syllable) {
    throw Error::invalid("segment_syllables needs a syllable lexicon");
  }
  return segment_maximal_matching(lex, text_utf8);
}

}  // namespace tsq
