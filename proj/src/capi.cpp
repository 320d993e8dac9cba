#include "tsqkit.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsq/commands.hpp"
#include "tsq/container.hpp"
#include "tsq/crf.hpp"
#include "tsq/error.hpp"
#include "tsq/features.hpp"
#include "tsq/linear.hpp"
#include "tsq/segment.hpp"
#include "tsq/subword.hpp"
#include "tsq/textproc.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

tsqk_status status_of(const tsq::Error& e) {
  using K = tsq::Error::Kind;
  switch (e.kind()) {
    case K::invalid_argument: return TSQK_INVALID_ARGUMENT;
    case K::decode: return TSQK_DECODE_ERROR;
    case K::parse: return TSQK_PARSE_ERROR;
    case K::io: return TSQK_IO_ERROR;
    case K::config: return TSQK_CONFIG_ERROR;
    case K::shape: return TSQK_SHAPE_ERROR;
    case K::train: return TSQK_TRAIN_ERROR;
  }
  return TSQK_INTERNAL_ERROR;
}

tsqk_status fail(tsqk_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, mapping exceptions to statuses. fn must not leak on throw.
template <typename Fn>
tsqk_status guarded(Fn&& fn) {
  try {
    fn();
    return TSQK_OK;
  } catch (const tsq::Error& e) {
    return fail(status_of(e), e.what());
  } catch (const json::exception& e) {
    return fail(TSQK_PARSE_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TSQK_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(TSQK_INTERNAL_ERROR, e.what());
  }
}

char* copy_out(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw tsq::Error::invalid(std::string("null ") + what);
}

json parse_config(const char* config_json) {
  require(config_json != nullptr, "config");
  return json::parse(config_json);
}

tsqk_status run_command(json (*cmd)(const json&), const char* config_json, char** out) {
  return guarded([&] {
    const json summary = cmd(parse_config(config_json));
    if (out != nullptr) *out = copy_out(summary.dump());
  });
}

}  // namespace

struct tsqk_lexicon {
  tsq::Lexicon lex;
};

struct tsqk_model {
  tsq::ModelContainer container;
  std::string kind;

  // Lazily decoded views; only the one matching the kind is populated.
  struct Nbsvm {
    tsq::CleanConfig clean;
    tsq::Lexicon lexicon;
    tsq::Vectorizer vectorizer;
    tsq::LinearModel model;
    std::vector<double> thresholds;
  };
  std::unique_ptr<Nbsvm> nbsvm;
  std::unique_ptr<tsq::CrfModel> crf;
  std::unique_ptr<tsq::SubwordModel> subword;
};

extern "C" {

const char* tsqk_version(void) { return "0.1.0"; }

const char* tsqk_last_error(void) { return g_last_error.c_str(); }

void tsqk_free(char* ptr) { std::free(ptr); }

tsqk_status tsqk_lexicon_open(const char* path, const char* kind, tsqk_lexicon** out) {
  return guarded([&] {
    require(path != nullptr, "path");
    require(kind != nullptr, "kind");
    require(out != nullptr, "out");
    auto lex = tsq::Lexicon::from_file(path, tsq::lexicon_kind_from_string(kind));
    *out = new tsqk_lexicon{std::move(lex)};
  });
}

tsqk_status tsqk_lexicon_build(const char* const* entries, size_t n_entries, const char* kind,
                               tsqk_lexicon** out) {
  return guarded([&] {
    require(entries != nullptr || n_entries == 0, "entries");
    require(kind != nullptr, "kind");
    require(out != nullptr, "out");
    std::vector<std::string> list;
    list.reserve(n_entries);
    for (size_t i = 0; i < n_entries; ++i) {
      require(entries[i] != nullptr, "entry");
      list.emplace_back(entries[i]);
    }
    auto lex = tsq::Lexicon::from_entries(list, tsq::lexicon_kind_from_string(kind));
    *out = new tsqk_lexicon{std::move(lex)};
  });
}

size_t tsqk_lexicon_size(const tsqk_lexicon* lex) { return lex == nullptr ? 0 : lex->lex.size(); }

void tsqk_lexicon_close(tsqk_lexicon* lex) { delete lex; }

tsqk_status tsqk_segment(const tsqk_lexicon* lex, const char* text_utf8, char sep, char** out) {
  return guarded([&] {
    require(lex != nullptr, "lexicon");
    require(text_utf8 != nullptr, "text");
    require(out != nullptr, "out");
    const auto seg = tsq::segment_maximal_matching(lex->lex, text_utf8);
    for (const auto& tok : seg.tokens) {
      if (tok.find(sep) != std::string::npos) {
        throw tsq::Error::invalid("separator byte occurs inside a token");
      }
    }
    *out = copy_out(join(seg.tokens, sep));
  });
}

tsqk_status tsqk_clean(const tsqk_lexicon* lex, const char* text_utf8, const char* mode,
                       int rep_run_threshold, char sep, char** out) {
  return guarded([&] {
    require(lex != nullptr, "lexicon");
    require(text_utf8 != nullptr, "text");
    require(mode != nullptr, "mode");
    require(out != nullptr, "out");
    tsq::CleanConfig cfg;
    cfg.mode = tsq::clean_mode_from_string(mode);
    if (rep_run_threshold > 0) cfg.rep_run_threshold = rep_run_threshold;
    cfg.validate();
    const auto tokens = tsq::clean_text(text_utf8, lex->lex, cfg);
    for (const auto& tok : tokens) {
      if (tok.find(sep) != std::string::npos) {
        throw tsq::Error::invalid("separator byte occurs inside a token");
      }
    }
    *out = copy_out(join(tokens, sep));
  });
}

tsqk_status tsqk_model_open(const char* path, tsqk_model** out) {
  return guarded([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    auto model = std::make_unique<tsqk_model>();
    model->container = tsq::load_container(path);
    model->kind = model->container.kind;
    const json& payload = model->container.payload;
    if (model->kind == "nbsvm") {
      auto view = std::make_unique<tsqk_model::Nbsvm>();
      const json& cl = payload.at("clean");
      view->clean.mode = tsq::clean_mode_from_string(cl.at("mode").get<std::string>());
      view->clean.rep_run_threshold = cl.at("rep_run_threshold").get<int>();
      view->clean.rep_marker = cl.at("rep_marker").get<std::string>();
      view->clean.wrep_marker = cl.at("wrep_marker").get<std::string>();
      view->clean.space_marker = cl.at("space_marker").get<std::string>();
      const json& lx = payload.at("lexicon");
      view->lexicon = tsq::Lexicon::from_entries(
          lx.at("entries").get<std::vector<std::string>>(),
          tsq::lexicon_kind_from_string(lx.at("kind").get<std::string>()));
      view->vectorizer = tsq::Vectorizer::from_json(payload.at("vectorizer"));
      view->model = tsq::LinearModel::from_json(payload.at("model"));
      if (payload.contains("thresholds")) {
        view->thresholds = payload.at("thresholds").at("values").get<std::vector<double>>();
      }
      model->nbsvm = std::move(view);
    } else if (model->kind == "crf") {
      model->crf = std::make_unique<tsq::CrfModel>(tsq::CrfModel::from_json(payload));
    } else if (model->kind == "subword") {
      model->subword = std::make_unique<tsq::SubwordModel>(tsq::SubwordModel::from_json(payload));
    }
    *out = model.release();
  });
}

const char* tsqk_model_kind(const tsqk_model* model) {
  return model == nullptr ? "" : model->kind.c_str();
}

void tsqk_model_close(tsqk_model* model) { delete model; }

tsqk_status tsqk_nbsvm_predict(const tsqk_model* model, const char* text_utf8, char** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(text_utf8 != nullptr, "text");
    require(out != nullptr, "out");
    if (!model->nbsvm) throw tsq::Error::invalid("model kind is not nbsvm");
    const auto& m = *model->nbsvm;
    const auto tokens = tsq::clean_text(text_utf8, m.lexicon, m.clean);
    const auto X = m.vectorizer.transform({tokens});
    const auto proba = tsq::predict_proba(m.model, X);
    json result;
    json pj = json::object();
    for (size_t c = 0; c < m.model.classes.size(); ++c) pj[m.model.classes[c]] = proba[0][c];
    if (m.model.multi_label) {
      json labels = json::array();
      for (size_t c = 0; c < m.model.classes.size(); ++c) {
        const double t = c < m.thresholds.size() ? m.thresholds[c] : 0.5;
        if (proba[0][c] >= t) labels.push_back(m.model.classes[c]);
      }
      result["labels"] = std::move(labels);
    } else {
      const size_t best = static_cast<size_t>(
          std::max_element(proba[0].begin(), proba[0].end()) - proba[0].begin());
      result["label"] = m.model.classes[best];
    }
    result["proba"] = std::move(pj);
    *out = copy_out(result.dump());
  });
}

tsqk_status tsqk_crf_tag(const tsqk_model* model, const char* const* tokens, size_t n_tokens,
                         char sep, char** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(tokens != nullptr || n_tokens == 0, "tokens");
    require(out != nullptr, "out");
    if (!model->crf) throw tsq::Error::invalid("model kind is not crf");
    std::vector<std::string> seq;
    seq.reserve(n_tokens);
    for (size_t i = 0; i < n_tokens; ++i) {
      require(tokens[i] != nullptr, "token");
      seq.emplace_back(tokens[i]);
    }
    const auto tags = tsq::viterbi(*model->crf, seq);
    *out = copy_out(join(tags, sep));
  });
}

tsqk_status tsqk_subword_encode(const tsqk_model* model, const char* text_utf8, char sep,
                                char** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(text_utf8 != nullptr, "text");
    require(out != nullptr, "out");
    if (!model->subword) throw tsq::Error::invalid("model kind is not subword");
    std::vector<std::string> pieces;
    for (const auto& p : tsq::encode_unigram(*model->subword, text_utf8)) {
      if (p.surface.find(sep) != std::string::npos) {
        throw tsq::Error::invalid("separator byte occurs inside a piece");
      }
      pieces.push_back(p.surface);
    }
    *out = copy_out(join(pieces, sep));
  });
}

tsqk_status tsqk_cmd_preprocess(const char* config_json, char** out) {
  return run_command(&tsq::cmd::preprocess, config_json, out);
}

tsqk_status tsqk_cmd_train_nbsvm(const char* config_json, char** out) {
  return run_command(&tsq::cmd::train_nbsvm, config_json, out);
}

tsqk_status tsqk_cmd_train_crf(const char* config_json, char** out) {
  return run_command(&tsq::cmd::train_crf, config_json, out);
}

tsqk_status tsqk_cmd_predict(const char* config_json, char** out) {
  return run_command(&tsq::cmd::predict, config_json, out);
}

tsqk_status tsqk_cmd_evaluate(const char* config_json, char** out) {
  return run_command(&tsq::cmd::evaluate, config_json, out);
}

tsqk_status tsqk_cmd_subword_train(const char* config_json, char** out) {
  return run_command(&tsq::cmd::subword_train, config_json, out);
}

tsqk_status tsqk_cmd_subword_encode(const char* config_json, char** out) {
  return run_command(&tsq::cmd::subword_encode, config_json, out);
}

}  // extern "C"
