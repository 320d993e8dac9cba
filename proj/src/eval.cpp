#include "tsq/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "tsq/error.hpp"

namespace tsq {

using nlohmann::json;

namespace {

struct Counts {
  size_t tp = 0, fp = 0, fn = 0;
};

ClassMetrics metrics_from(const Counts& c, size_t support) {
  ClassMetrics m;
  m.support = support;
  const size_t pd = c.tp + c.fp;
  const size_t gd = c.tp + c.fn;
  if (pd == 0 || gd == 0) m.zero_division = true;
  m.precision = pd == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(pd);
  m.recall = gd == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(gd);
  const double pr = m.precision + m.recall;
  m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
  if (pd != 0 && gd != 0 && pr == 0.0) m.zero_division = true;
  return m;
}

Report assemble(const std::vector<std::string>& names, const std::vector<Counts>& counts) {
  Report rep;
  Counts pooled;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  double pw_sum = 0.0, rw_sum = 0.0, fw_sum = 0.0;
  size_t total_support = 0;
  for (size_t c = 0; c < names.size(); ++c) {
    const auto m = metrics_from(counts[c], counts[c].tp + counts[c].fn);
    rep.per_class.emplace_back(names[c], m);
    pooled.tp += counts[c].tp;
    pooled.fp += counts[c].fp;
    pooled.fn += counts[c].fn;
    p_sum += m.precision;
    r_sum += m.recall;
    f_sum += m.f1;
    const auto w = static_cast<double>(m.support);
    pw_sum += w * m.precision;
    rw_sum += w * m.recall;
    fw_sum += w * m.f1;
    total_support += m.support;
  }
  rep.micro = metrics_from(pooled, total_support);
  const double n = names.empty() ? 1.0 : static_cast<double>(names.size());
  rep.macro.precision = p_sum / n;
  rep.macro.recall = r_sum / n;
  rep.macro.f1 = f_sum / n;
  rep.macro.support = total_support;
  const double tw = total_support == 0 ? 1.0 : static_cast<double>(total_support);
  rep.weighted.precision = pw_sum / tw;
  rep.weighted.recall = rw_sum / tw;
  rep.weighted.f1 = fw_sum / tw;
  rep.weighted.support = total_support;
  return rep;
}

}  // namespace

Report classification_report(const std::vector<std::string>& y_true,
                             const std::vector<std::string>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error::shape("classification_report: length mismatch");
  }
  if (y_true.empty()) throw Error::invalid("classification_report: empty input");
  std::set<std::string> label_set(y_true.begin(), y_true.end());
  label_set.insert(y_pred.begin(), y_pred.end());
  const std::vector<std::string> names(label_set.begin(), label_set.end());

  std::vector<Counts> counts(names.size());
  size_t correct = 0;
  auto id_of = [&](const std::string& l) {
    return static_cast<size_t>(std::lower_bound(names.begin(), names.end(), l) - names.begin());
  };
  for (size_t i = 0; i < y_true.size(); ++i) {
    const size_t g = id_of(y_true[i]);
    const size_t p = id_of(y_pred[i]);
    if (g == p) {
      ++counts[g].tp;
      ++correct;
    } else {
      ++counts[g].fn;
      ++counts[p].fp;
    }
  }
  Report rep = assemble(names, counts);
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  return rep;
}

Report classification_report_multilabel(const std::vector<std::vector<std::string>>& y_true,
                                        const std::vector<std::vector<std::string>>& y_pred,
                                        const std::vector<std::string>& labels) {
  if (y_true.size() != y_pred.size()) {
    throw Error::shape("classification_report_multilabel: length mismatch");
  }
  std::vector<std::string> names = labels;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<Counts> counts(names.size());
  for (size_t i = 0; i < y_true.size(); ++i) {
    for (size_t c = 0; c < names.size(); ++c) {
      const bool g = std::find(y_true[i].begin(), y_true[i].end(), names[c]) != y_true[i].end();
      const bool p = std::find(y_pred[i].begin(), y_pred[i].end(), names[c]) != y_pred[i].end();
      if (g && p) ++counts[c].tp;
      else if (p) ++counts[c].fp;
      else if (g) ++counts[c].fn;
    }
  }
  return assemble(names, counts);
}

TagScheme tag_scheme_from_string(const std::string& s) {
  if (s == "iob") return TagScheme::iob;
  if (s == "iobe") return TagScheme::iobe;
  throw Error::config("unknown tag scheme '" + s + "' (expected iob or iobe)");
}

std::string to_string(TagScheme s) { return s == TagScheme::iob ? "iob" : "iobe"; }

namespace {

struct ParsedTag {
  char prefix = 'O';  // 'O', 'B', 'I', 'E'
  std::string type;
};

ParsedTag parse_tag(const std::string& tag, TagScheme scheme, size_t pos) {
  if (tag == "O") return {};
  const auto hyphen = tag.find('-');
  if (hyphen == std::string::npos || hyphen == 0 || hyphen + 1 == tag.size()) {
    throw Error::decode("malformed tag '" + tag + "' at position " + std::to_string(pos));
  }
  const std::string prefix = tag.substr(0, hyphen);
  const bool ok = prefix == "B" || prefix == "I" || (scheme == TagScheme::iobe && prefix == "E");
  if (!ok) {
    throw Error::decode("tag prefix '" + prefix + "' not in scheme at position " +
                        std::to_string(pos));
  }
  return {prefix[0], tag.substr(hyphen + 1)};
}

}  // namespace

std::vector<Chunk> extract_chunks(const std::vector<std::string>& tags, TagScheme scheme,
                                  bool strict) {
  std::vector<Chunk> chunks;
  std::string open_type;
  size_t open_begin = 0;
  bool open = false;
  auto close = [&](size_t end) {
    if (open) chunks.push_back({open_type, open_begin, end});
    open = false;
  };
  // Under strict iobe a chunk may only leave through its E tag.
  auto strict_close_check = [&](size_t t) {
    if (strict && scheme == TagScheme::iobe && open) {
      throw Error::decode("chunk '" + open_type + "' not closed by E before position " +
                          std::to_string(t));
    }
  };
  for (size_t t = 0; t < tags.size(); ++t) {
    const auto tag = parse_tag(tags[t], scheme, t);
    switch (tag.prefix) {
      case 'O':
        strict_close_check(t);
        close(t);
        break;
      case 'B':
        strict_close_check(t);
        close(t);
        open = true;
        open_type = tag.type;
        open_begin = t;
        break;
      case 'I':
        if (open && open_type == tag.type) break;
        if (strict) {
          throw Error::decode("dangling continuation 'I-" + tag.type + "' at position " +
                              std::to_string(t));
        }
        close(t);  // conll-style repair: treat as a fresh begin
        open = true;
        open_type = tag.type;
        open_begin = t;
        break;
      case 'E':
        if (open && open_type == tag.type) {
          chunks.push_back({open_type, open_begin, t + 1});
          open = false;
        } else if (strict) {
          throw Error::decode("dangling end 'E-" + tag.type + "' at position " + std::to_string(t));
        } else {
          close(t);  // repair: the end tag forms a one-token chunk
          chunks.push_back({tag.type, t, t + 1});
        }
        break;
    }
  }
  if (open && strict && scheme == TagScheme::iobe) {
    throw Error::decode("chunk '" + open_type + "' still open at end of sequence");
  }
  close(tags.size());
  return chunks;
}

Report chunk_f1_report(const std::vector<std::vector<std::string>>& gold,
                       const std::vector<std::vector<std::string>>& pred, TagScheme scheme,
                       bool strict) {
  if (gold.size() != pred.size()) throw Error::shape("chunk_f1_report: sequence count mismatch");
  std::map<std::string, Counts> by_type;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw Error::shape("chunk_f1_report: sequence " + std::to_string(i) + " length mismatch");
    }
    const auto g = extract_chunks(gold[i], scheme, strict);
    const auto p = extract_chunks(pred[i], scheme, strict);
    std::set<std::pair<std::string, std::pair<size_t, size_t>>> gset;
    for (const auto& c : g) gset.insert({c.type, {c.begin, c.end}});
    for (const auto& c : p) {
      if (gset.count({c.type, {c.begin, c.end}})) ++by_type[c.type].tp;
      else ++by_type[c.type].fp;
    }
    std::set<std::pair<std::string, std::pair<size_t, size_t>>> pset;
    for (const auto& c : p) pset.insert({c.type, {c.begin, c.end}});
    for (const auto& c : g) {
      if (!pset.count({c.type, {c.begin, c.end}})) ++by_type[c.type].fn;
    }
  }
  std::vector<std::string> names;
  std::vector<Counts> counts;
  for (const auto& [name, c] : by_type) {
    names.push_back(name);
    counts.push_back(c);
  }
  return assemble(names, counts);
}

std::vector<std::string> remap_rare_tags(const std::vector<std::string>& tags,
                                         const std::map<std::string, std::string>& type_map) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& tag : tags) {
    const auto hyphen = tag.find('-');
    if (tag == "O" || hyphen == std::string::npos || hyphen + 1 == tag.size()) {
      out.push_back(tag);
      continue;
    }
    const std::string type = tag.substr(hyphen + 1);
    const auto it = type_map.find(type);
    if (it == type_map.end()) {
      out.push_back(tag);
    } else if (it->second == "O") {
      out.push_back("O");
    } else {
      out.push_back(tag.substr(0, hyphen + 1) + it->second);
    }
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void pad_to(std::string& line, size_t width, const std::string& cell) {
  line += std::string(width - std::min(width, cell.size()), ' ');
  line += cell;
}

}  // namespace

std::string render_report(const Report& report) {
  size_t tag_w = std::string("Weighted avg").size();
  for (const auto& [name, _] : report.per_class) tag_w = std::max(tag_w, name.size());

  const size_t col_p = 11, col_r = 8, col_f = 10, col_s = 9;
  std::string out;
  auto row = [&](const std::string& tag, const std::string& p, const std::string& r,
                 const std::string& f, const std::string& s) {
    std::string line;
    pad_to(line, tag_w, tag);
    pad_to(line, col_p, p);
    pad_to(line, col_r, r);
    pad_to(line, col_f, f);
    pad_to(line, col_s, s);
    out += line;
    out += '\n';
  };
  row("Tag", "Precision", "Recall", "F1-score", "Support");
  for (const auto& [name, m] : report.per_class) {
    row(name, fixed4(m.precision), fixed4(m.recall), fixed4(m.f1), std::to_string(m.support));
  }
  out += '\n';
  if (report.accuracy.has_value()) {
    row("Accuracy", "", "", fixed4(*report.accuracy), std::to_string(report.micro.support));
  }
  row("Micro avg", fixed4(report.micro.precision), fixed4(report.micro.recall),
      fixed4(report.micro.f1), std::to_string(report.micro.support));
  row("Macro avg", fixed4(report.macro.precision), fixed4(report.macro.recall),
      fixed4(report.macro.f1), std::to_string(report.macro.support));
  row("Weighted avg", fixed4(report.weighted.precision), fixed4(report.weighted.recall),
      fixed4(report.weighted.f1), std::to_string(report.weighted.support));
  return out;
}

json report_to_json(const Report& report) {
  json j;
  json classes = json::object();
  auto one = [](const ClassMetrics& m) {
    return json{{"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1},
                {"support", m.support},
                {"zero_division", m.zero_division}};
  };
  for (const auto& [name, m] : report.per_class) classes[name] = one(m);
  j["classes"] = classes;
  j["micro"] = one(report.micro);
  j["macro"] = one(report.macro);
  j["weighted"] = one(report.weighted);
  if (report.accuracy.has_value()) j["accuracy"] = *report.accuracy;
  return j;
}

}  // namespace tsq
