#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tsq {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
  // True when a zero denominator forced any of the three values to 0.
  bool zero_division = false;
};

struct Report {
  std::vector<std::pair<std::string, ClassMetrics>> per_class;  // sorted by name
  ClassMetrics micro, macro, weighted;                          // support: total gold
  std::optional<double> accuracy;
};

/// One-vs-rest metrics per class over single-label predictions. The class
/// list is the sorted union of gold and predicted labels. Micro averages pool
/// the counts (equal to accuracy here); macro averages are unweighted means;
/// weighted averages weight by gold support.
Report classification_report(const std::vector<std::string>& y_true,
                             const std::vector<std::string>& y_pred);

/// Same aggregation over label sets.
Report classification_report_multilabel(const std::vector<std::vector<std::string>>& y_true,
                                        const std::vector<std::vector<std::string>>& y_pred,
                                        const std::vector<std::string>& labels);

enum class TagScheme { iob, iobe };

TagScheme tag_scheme_from_string(const std::string& s);
std::string to_string(TagScheme s);

/// Half-open token span of one typed chunk.
struct Chunk {
  std::string type;
  size_t begin = 0;
  size_t end = 0;

  bool operator==(const Chunk& o) const = default;
};

/// Decode chunk spans from "O" / "B-TYPE" / "I-TYPE" (and "E-TYPE" under
/// iobe) tags. Lenient mode repairs dangling continuations the way conlleval
/// does: an I (or E) with no open chunk of its type starts (or closes) one.
/// Strict mode turns those repairs into parse errors naming the position.
/// A tag outside the scheme's alphabet is an error in both modes.
std::vector<Chunk> extract_chunks(const std::vector<std::string>& tags, TagScheme scheme,
                                  bool strict = false);

/// Entity-level report: a predicted chunk counts as a true positive only when
/// type, begin and end all match a gold chunk of the same sequence.
Report chunk_f1_report(const std::vector<std::vector<std::string>>& gold,
                       const std::vector<std::vector<std::string>>& pred, TagScheme scheme,
                       bool strict = false);

/// Rewrite chunk types in place: every B-/I-/E- tag whose type maps to "O"
/// becomes "O"; a type mapping to another name keeps its prefix.
std::vector<std::string> remap_rare_tags(const std::vector<std::string>& tags,
                                         const std::map<std::string, std::string>& type_map);

/// Fixed-width table: Tag / Precision / Recall / F1-score / Support rows per
/// class, then Micro avg, Macro avg and Weighted avg, four decimals. An
/// Accuracy row appears when the report carries one.
std::string render_report(const Report& report);

nlohmann::json report_to_json(const Report& report);

}  // namespace tsq
