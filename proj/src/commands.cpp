#include "tsq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include "tsq/container.hpp"
#include "tsq/corpus.hpp"
#include "tsq/crf.hpp"
#include "tsq/error.hpp"
#include "tsq/eval.hpp"
#include "tsq/features.hpp"
#include "tsq/linear.hpp"
#include "tsq/rng.hpp"
#include "tsq/segment.hpp"
#include "tsq/subword.hpp"
#include "tsq/textproc.hpp"

namespace tsq::cmd {

using nlohmann::json;

namespace {

void check_keys(const json& config, std::initializer_list<const char*> allowed) {
  if (!config.is_object()) throw Error::config("config must be a JSON object");
  for (const auto& [key, _] : config.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error::config("unknown config key '" + key + "'");
    }
  }
}

template <typename T>
T req(const json& config, const char* key) {
  if (!config.contains(key)) throw Error::config(std::string("missing config key '") + key + "'");
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error::config(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error::config(std::string("config key '") + key + "' has the wrong type");
  }
}

std::optional<std::string> opt_str(const json& config, const char* key) {
  if (!config.contains(key)) return std::nullopt;
  return req<std::string>(config, key);
}

CleanConfig clean_config_from(const json& config, CleanMode default_mode) {
  CleanConfig cc;
  cc.mode = clean_mode_from_string(get_or<std::string>(config, "mode", to_string(default_mode)));
  cc.rep_run_threshold = get_or<int>(config, "rep_run_threshold", cc.rep_run_threshold);
  cc.rep_marker = get_or<std::string>(config, "rep_marker", cc.rep_marker);
  cc.wrep_marker = get_or<std::string>(config, "wrep_marker", cc.wrep_marker);
  cc.space_marker = get_or<std::string>(config, "space_marker", cc.space_marker);
  cc.validate();
  return cc;
}

json clean_config_json(const CleanConfig& cc) {
  return {{"mode", to_string(cc.mode)},
          {"rep_run_threshold", cc.rep_run_threshold},
          {"rep_marker", cc.rep_marker},
          {"wrep_marker", cc.wrep_marker},
          {"space_marker", cc.space_marker}};
}

CleanConfig clean_config_from_json(const json& j) {
  CleanConfig cc;
  cc.mode = clean_mode_from_string(j.at("mode").get<std::string>());
  cc.rep_run_threshold = j.at("rep_run_threshold").get<int>();
  cc.rep_marker = j.at("rep_marker").get<std::string>();
  cc.wrep_marker = j.at("wrep_marker").get<std::string>();
  cc.space_marker = j.at("space_marker").get<std::string>();
  return cc;
}

Lexicon lexicon_from(const json& config) {
  const auto path = req<std::string>(config, "lexicon");
  const auto kind = lexicon_kind_from_string(get_or<std::string>(config, "lexicon_kind", "word"));
  return Lexicon::from_file(path, kind);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Corpus read_labeled(const std::string& path, bool multi_label) {
  if (ends_with(path, ".jsonl")) return read_jsonl(path);
  return read_tsv(path, multi_label);
}

std::string path_stem(const std::string& path) {
  const size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const size_t dot = base.find('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

json preprocess(const json& config) {
  check_keys(config, {"input", "output", "lexicon", "lexicon_kind", "mode", "rep_run_threshold",
                      "rep_marker", "wrep_marker", "space_marker", "min_words", "max_words",
                      "seed"});
  const auto input = req<std::string>(config, "input");
  const auto output = req<std::string>(config, "output");
  const auto lex = lexicon_from(config);
  const auto cc = clean_config_from(config, CleanMode::lm);
  const auto min_words = get_or<size_t>(config, "min_words", 5);
  const auto max_words = get_or<size_t>(config, "max_words", 300);

  const Corpus raw = read_jsonl(input);
  Corpus cleaned;
  std::vector<std::vector<std::string>> token_streams;
  cleaned.reserve(raw.size());
  for (const auto& rec : raw) {
    Record out = rec;
    auto tokens = clean_text(rec.text, lex, cc);
    out.text.clear();
    for (const auto& tok : tokens) out.text += tok;
    cleaned.push_back(std::move(out));
    token_streams.push_back(std::move(tokens));
  }

  // Dedup on the cleaned text, then keep records whose word count (space
  // tokens and their markers excluded) fits the bounds. Counting happens on
  // the cleaned token stream: the markers it contains are not re-tokenizable.
  std::set<std::string> seen;
  Corpus kept;
  size_t deduped = 0;
  for (size_t i = 0; i < cleaned.size(); ++i) {
    if (!seen.insert(cleaned[i].text).second) continue;
    ++deduped;
    size_t words = 0;
    for (const auto& tok : token_streams[i]) {
      if (tok == cc.space_marker) continue;
      if (tok.find_first_not_of(' ') == std::string::npos) continue;
      ++words;
    }
    if (words >= min_words && words <= max_words) kept.push_back(cleaned[i]);
  }
  write_jsonl(output, kept);

  json summary;
  summary["input"] = raw.size();
  summary["cleaned"] = cleaned.size();
  summary["deduped"] = deduped;
  summary["filtered"] = kept.size();
  summary["output"] = output;
  return summary;
}

namespace {

std::vector<std::vector<std::string>> clean_docs(const Corpus& corpus, const Lexicon& lex,
                                                 const CleanConfig& cc) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& rec : corpus) docs.push_back(clean_text(rec.text, lex, cc));
  return docs;
}

std::vector<std::vector<std::string>> label_sets(const Corpus& corpus, bool multi_label,
                                                 const std::string& path) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& rec : corpus) {
    if (!multi_label && rec.labels.size() != 1) {
      throw Error::parse(path + ": record '" + rec.id + "' needs exactly one label");
    }
    out.push_back(rec.labels);
  }
  return out;
}

}  // namespace

json train_nbsvm(const json& config) {
  check_keys(config, {"train", "valid", "model_out", "grid_out", "lexicon", "lexicon_kind",
                      "mode", "rep_run_threshold", "rep_marker", "wrep_marker", "space_marker",
                      "multi_label", "penalties", "c_grid", "alpha", "max_iter", "tol", "min_df",
                      "max_df_ratio", "dataset", "seed", "created_at"});
  const auto train_path = req<std::string>(config, "train");
  const auto valid_path = req<std::string>(config, "valid");
  const auto model_out = req<std::string>(config, "model_out");
  const bool multi_label = get_or<bool>(config, "multi_label", false);
  const auto lex = lexicon_from(config);
  const auto cc = clean_config_from(config, CleanMode::classifier);

  const Corpus train = read_labeled(train_path, multi_label);
  const Corpus valid = read_labeled(valid_path, multi_label);
  if (train.empty()) throw Error::train(train_path + ": empty training set");
  if (valid.empty()) throw Error::train(valid_path + ": empty validation set");

  const auto train_docs = clean_docs(train, lex, cc);
  const auto valid_docs = clean_docs(valid, lex, cc);
  const auto y_train = label_sets(train, multi_label, train_path);
  const auto y_valid = label_sets(valid, multi_label, valid_path);

  VectorizerOptions vopts;
  vopts.min_df = get_or<size_t>(config, "min_df", vopts.min_df);
  vopts.max_df_ratio = get_or<double>(config, "max_df_ratio", vopts.max_df_ratio);
  const Vectorizer vec = Vectorizer::fit(train_docs, vopts);
  const SparseMatrix X_train = vec.transform(train_docs);
  const SparseMatrix X_valid = vec.transform(valid_docs);

  std::vector<PenaltyKind> penalties;
  for (const auto& p : get_or<std::vector<std::string>>(config, "penalties", {"l1", "l2"})) {
    penalties.push_back(penalty_from_string(p));
  }
  const auto Cs = get_or<std::vector<double>>(config, "c_grid", {1.0, 2.0, 3.0, 4.0});

  ClassifierConfig base;
  base.alpha = get_or<double>(config, "alpha", base.alpha);
  base.max_iter = get_or<int>(config, "max_iter", base.max_iter);
  base.tol = get_or<double>(config, "tol", base.tol);

  const GridResult grid =
      grid_search(X_train, y_train, X_valid, y_valid, multi_label, penalties, Cs, base);

  json payload;
  payload["clean"] = clean_config_json(cc);
  payload["lexicon"] = {{"kind", to_string(lex.kind())}, {"entries", lex.entries()}};
  payload["vectorizer"] = vec.to_json();
  payload["model"] = grid.best_model.to_json();

  json thresholds_json;
  if (multi_label) {
    const auto proba = predict_proba(grid.best_model, X_valid);
    const size_t n_classes = grid.best_model.classes.size();
    std::vector<std::vector<int>> gold(proba.size(), std::vector<int>(n_classes, 0));
    for (size_t i = 0; i < y_valid.size(); ++i) {
      for (const auto& l : y_valid[i]) {
        const auto it =
            std::find(grid.best_model.classes.begin(), grid.best_model.classes.end(), l);
        if (it != grid.best_model.classes.end()) {
          gold[i][static_cast<size_t>(it - grid.best_model.classes.begin())] = 1;
        }
      }
    }
    const ThresholdSet ts = search_thresholds(proba, gold);
    std::vector<int> defaulted;
    for (bool b : ts.defaulted) defaulted.push_back(b ? 1 : 0);
    thresholds_json = {{"values", ts.thresholds}, {"defaulted", defaulted}};
    payload["thresholds"] = thresholds_json;
  }

  ModelContainer container;
  container.kind = "nbsvm";
  container.created_at = resolve_created_at(opt_str(config, "created_at"));
  container.payload = std::move(payload);
  save_container(model_out, container);

  const std::string dataset = get_or<std::string>(config, "dataset", path_stem(train_path));
  if (const auto grid_out = opt_str(config, "grid_out"); grid_out.has_value()) {
    std::string tsv = "dataset\tpenalty\tC\tf1\n";
    for (const auto& cell : grid.cells) {
      tsv += dataset + "\t" + to_string(cell.penalty) + "\t" + fixed6(cell.C) + "\t" +
             (cell.failed ? "nan" : fixed6(cell.score)) + "\n";
    }
    atomic_write(*grid_out, tsv);
  }

  json cells = json::array();
  for (const auto& cell : grid.cells) {
    json c = {{"penalty", to_string(cell.penalty)}, {"C", cell.C}};
    if (cell.failed) c["error"] = cell.error;
    else c["f1"] = cell.score;
    cells.push_back(std::move(c));
  }
  json summary;
  summary["model"] = model_out;
  summary["classes"] = grid.best_model.classes;
  summary["best"] = cells.front();
  summary["cells"] = std::move(cells);
  if (multi_label) summary["thresholds"] = thresholds_json;
  return summary;
}

namespace {

// token: plain per-token tags; iob/iobe: chunked entity evaluation.
struct EvalMode {
  bool token = false;
  TagScheme scheme = TagScheme::iob;
  bool strict = false;
};

EvalMode resolve_scheme(const std::string& requested,
                        const std::vector<std::vector<std::string>>& tag_seqs, bool strict) {
  EvalMode mode;
  mode.strict = strict;
  if (requested == "token") {
    mode.token = true;
    return mode;
  }
  if (requested == "iob" || requested == "iobe") {
    mode.scheme = tag_scheme_from_string(requested);
    return mode;
  }
  if (requested != "auto") {
    throw Error::config("scheme must be auto, token, iob or iobe");
  }
  bool saw_prefixed = false, saw_plain = false, saw_e = false;
  for (const auto& seq : tag_seqs) {
    for (const auto& tag : seq) {
      if (tag == "O") continue;
      const auto hyphen = tag.find('-');
      const std::string prefix = hyphen == std::string::npos ? "" : tag.substr(0, hyphen);
      if (prefix == "B" || prefix == "I" || prefix == "E") {
        saw_prefixed = true;
        saw_e = saw_e || prefix == "E";
      } else {
        saw_plain = true;
      }
    }
  }
  if (saw_prefixed && saw_plain) {
    throw Error::config("cannot auto-detect tag scheme (mixed chunk and plain tags); pass scheme");
  }
  if (!saw_prefixed) {
    mode.token = true;
    return mode;
  }
  mode.scheme = saw_e ? TagScheme::iobe : TagScheme::iob;
  return mode;
}

std::string eval_mode_name(const EvalMode& m) { return m.token ? "token" : to_string(m.scheme); }

Report crf_report(const EvalMode& mode, const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& pred) {
  if (!mode.token) return chunk_f1_report(gold, pred, mode.scheme, mode.strict);
  std::vector<std::string> flat_gold, flat_pred;
  for (size_t i = 0; i < gold.size(); ++i) {
    flat_gold.insert(flat_gold.end(), gold[i].begin(), gold[i].end());
    flat_pred.insert(flat_pred.end(), pred[i].begin(), pred[i].end());
  }
  return classification_report(flat_gold, flat_pred);
}

std::map<std::string, std::string> tag_map_from(const json& config) {
  std::map<std::string, std::string> out;
  if (!config.contains("tag_map")) return out;
  const auto& m = config.at("tag_map");
  if (!m.is_object()) throw Error::config("tag_map must be an object of type -> replacement");
  for (const auto& [k, v] : m.items()) {
    if (!v.is_string()) throw Error::config("tag_map values must be strings");
    out[k] = v.get<std::string>();
  }
  return out;
}

}  // namespace

json train_crf(const json& config) {
  check_keys(config, {"train", "valid", "model_out", "grid_out", "c1_grid", "c2_grid", "max_iter",
                      "tol", "window", "pad_token", "feature_min_count", "scheme", "strict",
                      "sample", "seed", "created_at", "tag_map"});
  const auto train_path = req<std::string>(config, "train");
  const auto valid_path = req<std::string>(config, "valid");
  const auto model_out = req<std::string>(config, "model_out");

  auto train = read_conll(train_path);
  auto valid = read_conll(valid_path);
  for (const auto* split : {&train, &valid}) {
    for (const auto& seq : *split) {
      if (!seq.tokens.empty() && seq.tags.empty()) {
        throw Error::parse("training needs tagged sequences (sequence '" + seq.id + "' has no tags)");
      }
    }
  }

  const auto tag_map = tag_map_from(config);
  if (!tag_map.empty()) {
    for (auto* split : {&train, &valid}) {
      for (auto& seq : *split) seq.tags = remap_rare_tags(seq.tags, tag_map);
    }
  }

  const auto sample = get_or<size_t>(config, "sample", 0);
  if (sample > 0 && sample < train.size()) {
    Rng rng(get_or<uint64_t>(config, "seed", Rng::kDefaultSeed));
    std::vector<TaggedSeq> picked;
    picked.reserve(sample);
    for (size_t idx : rng.sample_indices(train.size(), sample)) {
      picked.push_back(std::move(train[idx]));
    }
    train = std::move(picked);
  }

  std::vector<std::vector<std::string>> train_tags, valid_tags;
  for (const auto& s : train) train_tags.push_back(s.tags);
  for (const auto& s : valid) valid_tags.push_back(s.tags);
  auto all_tags = train_tags;
  all_tags.insert(all_tags.end(), valid_tags.begin(), valid_tags.end());
  const EvalMode mode = resolve_scheme(get_or<std::string>(config, "scheme", "auto"), all_tags,
                                       get_or<bool>(config, "strict", false));

  CrfConfig base;
  base.max_iter = get_or<int>(config, "max_iter", base.max_iter);
  base.tol = get_or<double>(config, "tol", base.tol);
  base.window = get_or<int>(config, "window", base.window);
  base.pad_token = get_or<std::string>(config, "pad_token", base.pad_token);
  base.feature_min_count = get_or<int>(config, "feature_min_count", base.feature_min_count);

  const auto c1_grid = get_or<std::vector<double>>(config, "c1_grid", {0.0, 0.5, 1.0});
  const auto c2_grid = get_or<std::vector<double>>(config, "c2_grid", {0.0, 0.5, 1.0});
  if (c1_grid.empty() || c2_grid.empty()) throw Error::config("empty CRF grid");

  struct Cell {
    double c1 = 0.0, c2 = 0.0, micro = 0.0, macro = 0.0;
    bool failed = false;
    std::string error;
  };
  std::vector<Cell> cells;
  std::vector<CrfTrainResult> fits;
  for (const double c1 : c1_grid) {
    for (const double c2 : c2_grid) {
      Cell cell;
      cell.c1 = c1;
      cell.c2 = c2;
      CrfConfig cfg = base;
      cfg.c1 = c1;
      cfg.c2 = c2;
      try {
        auto fit = tsq::train_crf(train, cfg);
        std::vector<std::vector<std::string>> pred;
        pred.reserve(valid.size());
        for (const auto& seq : valid) pred.push_back(viterbi(fit.model, seq.tokens));
        const Report rep = crf_report(mode, valid_tags, pred);
        cell.micro = rep.micro.f1;
        cell.macro = rep.macro.f1;
        fits.push_back(std::move(fit));
      } catch (const Error& e) {
        cell.failed = true;
        cell.error = e.what();
        fits.emplace_back();
      }
      cells.push_back(std::move(cell));
    }
  }

  std::vector<size_t> order(cells.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (cells[a].failed != cells[b].failed) return !cells[a].failed;
    if (cells[a].micro != cells[b].micro) return cells[a].micro > cells[b].micro;
    if (cells[a].c1 != cells[b].c1) return cells[a].c1 < cells[b].c1;
    return cells[a].c2 < cells[b].c2;
  });
  if (cells[order[0]].failed) {
    throw Error::train("train_crf: every grid cell failed: " + cells[order[0]].error);
  }

  json payload = fits[order[0]].model.to_json();
  payload["eval_scheme"] = eval_mode_name(mode);
  payload["strict"] = mode.strict;

  ModelContainer container;
  container.kind = "crf";
  container.created_at = resolve_created_at(opt_str(config, "created_at"));
  container.payload = std::move(payload);
  save_container(model_out, container);

  if (const auto grid_out = opt_str(config, "grid_out"); grid_out.has_value()) {
    std::string tsv = "c1\tc2\tf1_micro\tf1_macro\n";
    for (size_t i : order) {
      const auto& c = cells[i];
      tsv += fixed6(c.c1) + "\t" + fixed6(c.c2) + "\t" +
             (c.failed ? "nan" : fixed6(c.micro)) + "\t" + (c.failed ? "nan" : fixed6(c.macro)) +
             "\n";
    }
    atomic_write(*grid_out, tsv);
  }

  json cell_list = json::array();
  for (size_t i : order) {
    const auto& c = cells[i];
    json jc = {{"c1", c.c1}, {"c2", c.c2}};
    if (c.failed) jc["error"] = c.error;
    else {
      jc["f1_micro"] = c.micro;
      jc["f1_macro"] = c.macro;
    }
    cell_list.push_back(std::move(jc));
  }
  json summary;
  summary["model"] = model_out;
  summary["scheme"] = eval_mode_name(mode);
  summary["labels"] = fits[order[0]].model.labels;
  summary["converged"] = fits[order[0]].converged;
  summary["train_sequences"] = train.size();
  summary["best"] = cell_list.front();
  summary["cells"] = std::move(cell_list);
  return summary;
}

namespace {

struct LoadedNbsvm {
  CleanConfig clean;
  Lexicon lexicon;
  Vectorizer vectorizer;
  LinearModel model;
  std::vector<double> thresholds;  // empty unless multi-label
};

LoadedNbsvm load_nbsvm(const ModelContainer& c) {
  LoadedNbsvm m;
  m.clean = clean_config_from_json(c.payload.at("clean"));
  const auto& lex = c.payload.at("lexicon");
  m.lexicon = Lexicon::from_entries(lex.at("entries").get<std::vector<std::string>>(),
                                    lexicon_kind_from_string(lex.at("kind").get<std::string>()));
  m.vectorizer = Vectorizer::from_json(c.payload.at("vectorizer"));
  m.model = LinearModel::from_json(c.payload.at("model"));
  if (c.payload.contains("thresholds")) {
    m.thresholds = c.payload.at("thresholds").at("values").get<std::vector<double>>();
  }
  return m;
}

json proba_json(const LinearModel& model, const std::vector<double>& row) {
  json out = json::object();
  for (size_t c = 0; c < model.classes.size(); ++c) out[model.classes[c]] = row[c];
  return out;
}

std::vector<std::string> predicted_labels(const LinearModel& model,
                                          const std::vector<double>& row,
                                          const std::vector<double>& thresholds) {
  std::vector<std::string> out;
  if (model.multi_label) {
    for (size_t c = 0; c < model.classes.size(); ++c) {
      const double t = c < thresholds.size() ? thresholds[c] : 0.5;
      if (row[c] >= t) out.push_back(model.classes[c]);
    }
  } else {
    out.push_back(model.classes[static_cast<size_t>(
        std::max_element(row.begin(), row.end()) - row.begin())]);
  }
  return out;
}

}  // namespace

json predict(const json& config) {
  check_keys(config, {"model", "input", "output", "seed"});
  const auto model_path = req<std::string>(config, "model");
  const auto input = req<std::string>(config, "input");
  const auto output = req<std::string>(config, "output");
  const ModelContainer container = load_container(model_path);

  json summary;
  summary["kind"] = container.kind;
  summary["output"] = output;

  if (container.kind == "nbsvm") {
    const LoadedNbsvm m = load_nbsvm(container);
    const Corpus data = ends_with(input, ".jsonl") ? read_jsonl(input)
                                                   : read_tsv(input, m.model.multi_label);
    std::vector<std::vector<std::string>> docs = clean_docs(data, m.lexicon, m.clean);
    const auto proba = predict_proba(m.model, m.vectorizer.transform(docs));
    std::string buf;
    for (size_t i = 0; i < data.size(); ++i) {
      json rec;
      rec["id"] = data[i].id;
      const auto labels = predicted_labels(m.model, proba[i], m.thresholds);
      if (m.model.multi_label) rec["labels"] = labels;
      else rec["label"] = labels[0];
      rec["proba"] = proba_json(m.model, proba[i]);
      buf += rec.dump();
      buf += '\n';
    }
    atomic_write(output, buf);
    summary["records"] = data.size();
  } else if (container.kind == "crf") {
    const CrfModel model = CrfModel::from_json(container.payload);
    auto seqs = read_conll(input);
    for (auto& seq : seqs) seq.tags = viterbi(model, seq.tokens);
    write_conll(output, seqs);
    summary["records"] = seqs.size();
  } else if (container.kind == "subword") {
    const SubwordModel model = SubwordModel::from_json(container.payload);
    const Corpus data = read_jsonl(input);
    std::string buf;
    for (const auto& rec : data) {
      json out;
      out["id"] = rec.id;
      json pieces = json::array();
      json unknown = json::array();
      for (const auto& p : encode_unigram(model, rec.text)) {
        pieces.push_back(p.surface);
        unknown.push_back(p.unknown);
      }
      out["pieces"] = std::move(pieces);
      out["unknown"] = std::move(unknown);
      buf += out.dump();
      buf += '\n';
    }
    atomic_write(output, buf);
    summary["records"] = data.size();
  } else {
    throw Error::config("cannot predict with a container of kind '" + container.kind + "'");
  }
  return summary;
}

json evaluate(const json& config) {
  check_keys(config, {"model", "input", "report_out", "json_out", "scheme", "strict", "seed"});
  const auto model_path = req<std::string>(config, "model");
  const auto input = req<std::string>(config, "input");
  const ModelContainer container = load_container(model_path);

  Report report;
  if (container.kind == "nbsvm") {
    const LoadedNbsvm m = load_nbsvm(container);
    const Corpus data = ends_with(input, ".jsonl") ? read_jsonl(input)
                                                   : read_tsv(input, m.model.multi_label);
    if (data.empty()) throw Error::parse(input + ": no records to evaluate");
    const auto docs = clean_docs(data, m.lexicon, m.clean);
    const auto proba = predict_proba(m.model, m.vectorizer.transform(docs));
    if (m.model.multi_label) {
      std::vector<std::vector<std::string>> gold, pred;
      for (size_t i = 0; i < data.size(); ++i) {
        gold.push_back(data[i].labels);
        pred.push_back(predicted_labels(m.model, proba[i], m.thresholds));
      }
      report = classification_report_multilabel(gold, pred, m.model.classes);
    } else {
      std::vector<std::string> gold, pred;
      for (size_t i = 0; i < data.size(); ++i) {
        if (data[i].labels.size() != 1) {
          throw Error::parse(input + ": record '" + data[i].id + "' needs exactly one label");
        }
        gold.push_back(data[i].labels[0]);
        pred.push_back(predicted_labels(m.model, proba[i], m.thresholds)[0]);
      }
      report = classification_report(gold, pred);
    }
  } else if (container.kind == "crf") {
    const CrfModel model = CrfModel::from_json(container.payload);
    const auto seqs = read_conll(input);
    std::vector<std::vector<std::string>> gold, pred;
    for (const auto& seq : seqs) {
      if (seq.tags.empty() && !seq.tokens.empty()) {
        throw Error::parse(input + ": evaluation needs gold tags");
      }
      gold.push_back(seq.tags);
      pred.push_back(viterbi(model, seq.tokens));
    }
    const std::string requested = get_or<std::string>(
        config, "scheme", container.payload.value("eval_scheme", "auto"));
    const bool strict =
        get_or<bool>(config, "strict", container.payload.value("strict", false));
    const EvalMode mode = resolve_scheme(requested, gold, strict);
    report = crf_report(mode, gold, pred);
  } else {
    throw Error::config("cannot evaluate a container of kind '" + container.kind + "'");
  }

  const std::string text = render_report(report);
  const json report_json = report_to_json(report);
  if (const auto out = opt_str(config, "report_out"); out.has_value()) {
    atomic_write(*out, text);
  }
  if (const auto out = opt_str(config, "json_out"); out.has_value()) {
    atomic_write(*out, report_json.dump(2) + "\n");
  }
  json summary;
  summary["report_text"] = text;
  summary["report"] = report_json;
  return summary;
}

json subword_train(const json& config) {
  check_keys(config, {"input", "model_out", "target_vocab", "max_piece_len", "seed_multiplier",
                      "prune_fraction", "em_iters_per_round", "seed", "created_at"});
  const auto input = req<std::string>(config, "input");
  const auto model_out = req<std::string>(config, "model_out");

  SubwordOptions opts;
  opts.target_vocab = req<size_t>(config, "target_vocab");
  opts.max_piece_len = get_or<size_t>(config, "max_piece_len", opts.max_piece_len);
  opts.seed_multiplier = get_or<size_t>(config, "seed_multiplier", opts.seed_multiplier);
  opts.prune_fraction = get_or<double>(config, "prune_fraction", opts.prune_fraction);
  opts.em_iters_per_round = get_or<int>(config, "em_iters_per_round", opts.em_iters_per_round);

  const Corpus corpus = read_jsonl(input);
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& rec : corpus) texts.push_back(rec.text);
  const SubwordModel model = train_unigram(texts, opts);

  ModelContainer container;
  container.kind = "subword";
  container.created_at = resolve_created_at(opt_str(config, "created_at"));
  container.payload = model.to_json();
  save_container(model_out, container);

  json summary;
  summary["model"] = model_out;
  summary["pieces"] = model.pieces.size();
  summary["sentences"] = texts.size();
  return summary;
}

json subword_encode(const json& config) {
  check_keys(config, {"model", "input", "output", "seed"});
  return predict(config);
}

}  // namespace tsq::cmd
