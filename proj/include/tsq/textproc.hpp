#pragma once

#include <string>
#include <vector>

#include "tsq/corpus.hpp"
#include "tsq/segment.hpp"

namespace tsq {

enum class CleanMode { lm, classifier };

CleanMode clean_mode_from_string(const std::string& s);
std::string to_string(CleanMode m);

struct CleanConfig {
  CleanMode mode = CleanMode::lm;
  // Runs of one identical character at least this long collapse to a single
  // occurrence. Minimum 2.
  int rep_run_threshold = 3;
  std::string rep_marker = "<rep>";
  std::string wrep_marker = "<wrep>";
  std::string space_marker = "<_>";

  void validate() const;
};

/// Normalize raw text into a token stream. In order: decode the HTML forms
/// &nbsp; &amp; &lt; &gt; &quot; and the literal "<br />"; drop bracket pairs
/// () {} [] that enclose nothing or only whitespace (single pass); turn line
/// breaks into spaces; squeeze space runs; collapse long character runs
/// (classifier mode marks them with rep_marker); tokenize with the lexicon,
/// treating each space as its own token; collapse runs of identical tokens
/// (classifier mode marks them with wrep_marker). Classifier mode drops space
/// tokens; lm mode rewrites them to space_marker.
std::vector<std::string> clean_text(const std::string& text, const Lexicon& lex,
                                    const CleanConfig& cfg = {});

/// Inverse of the final tokenization step: concatenates tokens, mapping
/// space_marker back to a space.
std::string detokenize(const std::vector<std::string>& tokens, const CleanConfig& cfg = {});

/// Drop records whose text is a byte-for-byte repeat of an earlier one.
/// Keeps first occurrences and their order.
Corpus dedup(const Corpus& corpus);

/// Keep records whose word count lies in [min_words, max_words]. Words are
/// maximal-matching tokens of the text; tokens made only of spaces do not
/// count.
Corpus filter_by_length(const Corpus& corpus, const Lexicon& lex, size_t min_words = 5,
                        size_t max_words = 300);

}  // namespace tsq
