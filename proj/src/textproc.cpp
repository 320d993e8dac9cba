#include "tsq/textproc.hpp"

#include <unordered_set>

#include "tsq/error.hpp"
#include "tsq/unicode.hpp"

namespace tsq {

CleanMode clean_mode_from_string(const std::string& s) {
  if (s == "lm") return CleanMode::lm;
  if (s == "classifier") return CleanMode::classifier;
  throw Error::config("unknown clean mode '" + s + "' (expected lm or classifier)");
}

std::string to_string(CleanMode m) {
  return m == CleanMode::lm ? "lm" : "classifier";
}

void CleanConfig::validate() const {
  if (rep_run_threshold < 2) throw Error::config("rep_run_threshold must be at least 2");
  if (rep_marker.empty() || wrep_marker.empty() || space_marker.empty()) {
    throw Error::config("clean markers must be non-empty");
  }
  if (rep_marker == wrep_marker || rep_marker == space_marker || wrep_marker == space_marker) {
    throw Error::config("clean markers must be distinct");
  }
}

namespace {

bool is_ws(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r'; }

// Step 1: HTML forms back to characters.
std::u32string decode_entities(std::u32string_view in) {
  static const std::pair<std::u32string_view, char32_t> kSubs[] = {
      {U"&nbsp;", U' '}, {U"&amp;", U'&'},  {U"&lt;", U'<'},
      {U"&gt;", U'>'},   {U"&quot;", U'"'},
  };
  std::u32string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    if (in[i] == U'<' && in.substr(i, 6) == U"<br />") {
      out.push_back(U'\n');
      i += 6;
      continue;
    }
    bool hit = false;
    if (in[i] == U'&') {
      for (const auto& [pat, repl] : kSubs) {
        if (in.substr(i, pat.size()) == pat) {
          out.push_back(repl);
          i += pat.size();
          hit = true;
          break;
        }
      }
    }
    if (!hit) out.push_back(in[i++]);
  }
  return out;
}

// Step 2: drop () {} [] pairs that hold nothing or only whitespace. A single
// left-to-right pass; newly adjacent pairs are left alone.
std::u32string drop_empty_brackets(std::u32string_view in) {
  std::u32string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    char32_t close = 0;
    if (in[i] == U'(') close = U')';
    else if (in[i] == U'{') close = U'}';
    else if (in[i] == U'[') close = U']';
    if (close != 0) {
      size_t j = i + 1;
      while (j < in.size() && is_ws(in[j])) ++j;
      if (j < in.size() && in[j] == close) {
        i = j + 1;
        continue;
      }
    }
    out.push_back(in[i++]);
  }
  return out;
}

// Steps 3 and 4: line breaks to spaces, then squeeze space runs.
std::u32string squeeze_spaces(std::u32string_view in) {
  std::u32string out;
  out.reserve(in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    char32_t c = in[i];
    if (c == U'\r') {
      if (i + 1 < in.size() && in[i + 1] == U'\n') ++i;
      c = U' ';
    } else if (c == U'\n') {
      c = U' ';
    }
    if (c == U' ' && !out.empty() && out.back() == U' ') continue;
    out.push_back(c);
  }
  return out;
}

// A stretch of plain text, or a token that must pass through tokenization
// untouched (markers and the characters they annotate).
struct Piece {
  bool literal;
  std::u32string text;
};

// Step 5: collapse character runs. Classifier mode swaps the run for the
// marker plus one copy of the character, both as ready-made tokens.
std::vector<Piece> collapse_char_runs(std::u32string_view in, const CleanConfig& cfg) {
  std::vector<Piece> pieces;
  std::u32string cur;
  const auto threshold = static_cast<size_t>(cfg.rep_run_threshold);
  const std::u32string rep_marker = decode_utf8(cfg.rep_marker);
  size_t i = 0;
  while (i < in.size()) {
    size_t j = i;
    while (j < in.size() && in[j] == in[i]) ++j;
    const size_t run = j - i;
    if (run >= threshold && cfg.mode == CleanMode::classifier) {
      if (!cur.empty()) pieces.push_back({false, std::move(cur)});
      cur.clear();
      pieces.push_back({true, rep_marker});
      pieces.push_back({true, std::u32string(1, in[i])});
    } else {
      cur.append(run >= threshold ? 1 : run, in[i]);
    }
    i = j;
  }
  if (!cur.empty()) pieces.push_back({false, std::move(cur)});
  return pieces;
}

// Step 6: dictionary tokenization of the text pieces. Spaces become their own
// tokens so later steps can tell them apart.
std::vector<std::string> tokenize_pieces(const std::vector<Piece>& pieces, const Lexicon& lex) {
  std::vector<std::string> tokens;
  for (const auto& piece : pieces) {
    if (piece.literal) {
      tokens.push_back(encode_utf8(piece.text));
      continue;
    }
    size_t start = 0;
    const std::u32string& t = piece.text;
    for (size_t i = 0; i <= t.size(); ++i) {
      if (i < t.size() && t[i] != U' ') continue;
      if (i > start) {
        auto seg = segment_maximal_matching(lex, std::u32string_view(t).substr(start, i - start));
        for (auto& tok : seg.tokens) tokens.push_back(std::move(tok));
      }
      if (i < t.size()) tokens.push_back(" ");
      start = i + 1;
    }
  }
  return tokens;
}

}  // namespace

std::vector<std::string> clean_text(const std::string& text, const Lexicon& lex,
                                    const CleanConfig& cfg) {
  cfg.validate();
  const std::u32string u32 = decode_utf8(text);
  const auto pieces = collapse_char_runs(squeeze_spaces(drop_empty_brackets(decode_entities(u32))), cfg);
  std::vector<std::string> tokens = tokenize_pieces(pieces, lex);

  if (cfg.mode == CleanMode::classifier) {
    std::erase(tokens, " ");
  }

  // Step 7: collapse runs of identical tokens.
  std::vector<std::string> out;
  out.reserve(tokens.size());
  size_t i = 0;
  while (i < tokens.size()) {
    size_t j = i;
    while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
    if (j - i >= 2 && cfg.mode == CleanMode::classifier) out.push_back(cfg.wrep_marker);
    out.push_back(tokens[i]);
    i = j;
  }

  // Step 8: lm keeps spaces, under their marker.
  if (cfg.mode == CleanMode::lm) {
    for (auto& tok : out) {
      if (tok == " ") tok = cfg.space_marker;
    }
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens, const CleanConfig& cfg) {
  std::string out;
  for (const auto& tok : tokens) {
    out += (tok == cfg.space_marker) ? " " : tok;
  }
  return out;
}

Corpus dedup(const Corpus& corpus) {
  Corpus out;
  out.reserve(corpus.size());
  std::unordered_set<std::string> seen;
  for (const auto& rec : corpus) {
    if (seen.insert(rec.text).second) out.push_back(rec);
  }
  return out;
}

Corpus filter_by_length(const Corpus& corpus, const Lexicon& lex, size_t min_words,
                        size_t max_words) {
  if (min_words < 1 || min_words > max_words) {
    throw Error::config("length filter needs 1 <= min_words <= max_words");
  }
  Corpus out;
  for (const auto& rec : corpus) {
    const auto seg = segment_maximal_matching(lex, rec.text);
    size_t words = 0;
    for (const auto& tok : seg.tokens) {
      if (tok.find_first_not_of(' ') != std::string::npos) ++words;
    }
    if (words >= min_words && words <= max_words) out.push_back(rec);
  }
  return out;
}

}  // namespace tsq
