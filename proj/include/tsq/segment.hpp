#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tsq {

enum class LexiconKind { word, syllable };

LexiconKind lexicon_kind_from_string(const std::string& s);
std::string to_string(LexiconKind k);

/// Dictionary backed by a scalar-value trie. Entries are deduplicated;
/// empty entries are ignored.
class Lexicon {
public:
  Lexicon() = default;

  /// One entry per line. Lines starting with '#' and blank lines are skipped.
  static Lexicon from_file(const std::string& path, LexiconKind kind);
  static Lexicon from_entries(const std::vector<std::string>& entries, LexiconKind kind);

  size_t size() const { return size_; }
  LexiconKind kind() const { return kind_; }
  bool contains(std::u32string_view entry) const;
  size_t max_entry_len() const { return max_len_; }

  /// Lengths (ascending) of all entries that match text at position pos.
  void matches_at(std::u32string_view text, size_t pos, std::vector<size_t>& lengths) const;

  /// Entries in byte-lexicographic order, for serialization.
  std::vector<std::string> entries() const;

private:
  struct Node {
    std::map<char32_t, int32_t> next;
    bool terminal = false;
  };

  void insert(std::u32string_view entry);

  std::vector<Node> nodes_{Node{}};
  size_t size_ = 0;
  size_t max_len_ = 0;
  LexiconKind kind_ = LexiconKind::word;
};

/// Half-open span in Unicode scalar-value indices of the input.
struct Span {
  size_t begin = 0;
  size_t end = 0;
};

struct Segmentation {
  std::vector<std::string> tokens;
  std::vector<Span> spans;
  std::vector<bool> unknown;  // per token: true when not a dictionary entry
  size_t unknown_chars = 0;

  size_t size() const { return tokens.size(); }
};

/// Split text into dictionary tokens and unknown runs, minimizing first the
/// number of characters not covered by the dictionary, then the token count.
/// Maximal runs of out-of-vocabulary characters come back as single tokens.
/// Ties prefer the longest dictionary token at the earliest position.
/// Concatenating the tokens always reproduces the input.
Segmentation segment_maximal_matching(const Lexicon& lex, std::string_view text_utf8);
Segmentation segment_maximal_matching(const Lexicon& lex, std::u32string_view text);

/// Same algorithm over a syllable dictionary.
Segmentation segment_syllables(const Lexicon& lex, std::string_view text_utf8);

}  // namespace tsq
