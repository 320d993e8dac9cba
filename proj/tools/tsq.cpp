// tsq: command-line front end over the tsqkit C API.
//
// Every subcommand builds a JSON config (a --config file merged with any
// flags given on the command line; flags win) and hands it to the matching
// tsqk_cmd_* call. The JSON summary goes to stdout, errors to stderr, and
// the process exit code is the tsqk_status.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "tsqkit.h"

using nlohmann::json;

namespace {

struct Ctx {
  std::string config_path;
  json config = json::object();
  bool quiet = false;
};

void merge_config_file(Ctx& ctx) {
  if (ctx.config_path.empty()) return;
  std::ifstream in(ctx.config_path);
  if (!in) {
    throw CLI::ValidationError("--config", "cannot open " + ctx.config_path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  json from_file = json::parse(buf.str());
  if (!from_file.is_object()) {
    throw CLI::ValidationError("--config", ctx.config_path + " must hold a JSON object");
  }
  // Flags already in ctx.config take precedence over the file.
  from_file.update(ctx.config);
  ctx.config = std::move(from_file);
}

int run(Ctx& ctx, tsqk_status (*cmd)(const char*, char**)) {
  merge_config_file(ctx);
  char* out = nullptr;
  const tsqk_status rc = cmd(ctx.config.dump().c_str(), &out);
  if (rc != TSQK_OK) {
    std::cerr << "error: " << tsqk_last_error() << "\n";
    return static_cast<int>(rc);
  }
  if (out != nullptr) {
    if (!ctx.quiet) std::cout << out << "\n";
    tsqk_free(out);
  }
  return 0;
}

// Registers a flag that lands in the config object under `key`.
void opt_str(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_option_function<std::string>(
      flag, [&ctx, key](const std::string& v) { ctx.config[key] = v; }, desc);
}

void opt_int(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_option_function<long long>(
      flag, [&ctx, key](long long v) { ctx.config[key] = v; }, desc);
}

void opt_double(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_option_function<double>(
      flag, [&ctx, key](double v) { ctx.config[key] = v; }, desc);
}

void opt_flag(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_flag_function(
      flag, [&ctx, key](int64_t n) { ctx.config[key] = n > 0; }, desc);
}

void opt_doubles(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_option_function<std::vector<double>>(
      flag, [&ctx, key](const std::vector<double>& v) { ctx.config[key] = v; }, desc);
}

void opt_strs(CLI::App* app, Ctx& ctx, const char* flag, const char* key, const char* desc) {
  app->add_option_function<std::vector<std::string>>(
      flag, [&ctx, key](const std::vector<std::string>& v) { ctx.config[key] = v; }, desc);
}

void common_opts(CLI::App* app, Ctx& ctx) {
  app->add_option("--config", ctx.config_path, "JSON config file; flags override its keys");
  app->add_flag("--quiet", ctx.quiet, "suppress the JSON summary on stdout");
  opt_int(app, ctx, "--seed", "seed", "RNG seed");
}

void clean_opts(CLI::App* app, Ctx& ctx) {
  opt_str(app, ctx, "--lexicon", "lexicon", "dictionary file, one entry per line");
  opt_str(app, ctx, "--lexicon-kind", "lexicon_kind", "word or syllable");
  opt_str(app, ctx, "--mode", "mode", "cleaning mode: lm or classifier");
  opt_int(app, ctx, "--rep-run-threshold", "rep_run_threshold",
          "character runs at least this long collapse");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thai text processing and sequence labeling toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tsqk_version());

  Ctx ctx;
  int rc = 0;

  auto* pre = app.add_subcommand("preprocess", "clean, dedup and length-filter a JSONL corpus");
  common_opts(pre, ctx);
  clean_opts(pre, ctx);
  opt_str(pre, ctx, "--input", "input", "input JSONL");
  opt_str(pre, ctx, "--output", "output", "output JSONL");
  opt_int(pre, ctx, "--min-words", "min_words", "minimum word count");
  opt_int(pre, ctx, "--max-words", "max_words", "maximum word count");
  pre->callback([&] { rc = run(ctx, &tsqk_cmd_preprocess); });

  auto* tn = app.add_subcommand("train-nbsvm", "train a classifier with a penalty/C grid search");
  common_opts(tn, ctx);
  clean_opts(tn, ctx);
  opt_str(tn, ctx, "--train", "train", "training set (.jsonl or .tsv)");
  opt_str(tn, ctx, "--valid", "valid", "validation set (.jsonl or .tsv)");
  opt_str(tn, ctx, "--model-out", "model_out", "where to save the model container");
  opt_str(tn, ctx, "--grid-out", "grid_out", "where to save the grid TSV");
  opt_flag(tn, ctx, "--multi-label", "multi_label", "treat the label column as a set");
  opt_strs(tn, ctx, "--penalties", "penalties", "penalties to try (l1, l2)");
  opt_doubles(tn, ctx, "--c-grid", "c_grid", "C values to try");
  opt_double(tn, ctx, "--alpha", "alpha", "ratio smoothing");
  opt_int(tn, ctx, "--max-iter", "max_iter", "optimizer iteration cap");
  opt_double(tn, ctx, "--tol", "tol", "optimizer gradient tolerance");
  opt_int(tn, ctx, "--min-df", "min_df", "drop terms seen in fewer documents");
  opt_double(tn, ctx, "--max-df-ratio", "max_df_ratio", "drop terms seen in more of the corpus");
  opt_str(tn, ctx, "--dataset", "dataset", "dataset name for the grid TSV");
  opt_str(tn, ctx, "--created-at", "created_at", "timestamp to stamp into the container");
  tn->callback([&] { rc = run(ctx, &tsqk_cmd_train_nbsvm); });

  auto* tc = app.add_subcommand("train-crf", "train a linear-chain tagger with a c1/c2 grid");
  common_opts(tc, ctx);
  opt_str(tc, ctx, "--train", "train", "training CoNLL file");
  opt_str(tc, ctx, "--valid", "valid", "validation CoNLL file");
  opt_str(tc, ctx, "--model-out", "model_out", "where to save the model container");
  opt_str(tc, ctx, "--grid-out", "grid_out", "where to save the grid TSV");
  opt_doubles(tc, ctx, "--c1-grid", "c1_grid", "l1 coefficients to try");
  opt_doubles(tc, ctx, "--c2-grid", "c2_grid", "l2 coefficients to try");
  opt_int(tc, ctx, "--max-iter", "max_iter", "optimizer iteration cap");
  opt_double(tc, ctx, "--tol", "tol", "optimizer gradient tolerance");
  opt_int(tc, ctx, "--window", "window", "feature window radius");
  opt_str(tc, ctx, "--pad-token", "pad_token", "token read outside the sequence");
  opt_int(tc, ctx, "--feature-min-count", "feature_min_count", "drop rarer features");
  opt_str(tc, ctx, "--scheme", "scheme", "evaluation scheme: auto, token, iob or iobe");
  opt_flag(tc, ctx, "--strict", "strict", "reject malformed chunk sequences");
  opt_int(tc, ctx, "--sample", "sample", "train on this many sequences, sampled by seed");
  opt_str(tc, ctx, "--created-at", "created_at", "timestamp to stamp into the container");
  tc->callback([&] { rc = run(ctx, &tsqk_cmd_train_crf); });

  auto* pr = app.add_subcommand("predict", "run a saved model over a file");
  common_opts(pr, ctx);
  opt_str(pr, ctx, "--model", "model", "model container");
  opt_str(pr, ctx, "--input", "input", "input file (format depends on the model kind)");
  opt_str(pr, ctx, "--output", "output", "output file");
  pr->callback([&] { rc = run(ctx, &tsqk_cmd_predict); });

  auto* ev = app.add_subcommand("evaluate", "score a saved model against gold labels");
  common_opts(ev, ctx);
  opt_str(ev, ctx, "--model", "model", "model container");
  opt_str(ev, ctx, "--input", "input", "gold-labeled input file");
  opt_str(ev, ctx, "--report-out", "report_out", "write the text report here");
  opt_str(ev, ctx, "--json-out", "json_out", "write the JSON report here");
  opt_str(ev, ctx, "--scheme", "scheme", "evaluation scheme: auto, token, iob or iobe");
  opt_flag(ev, ctx, "--strict", "strict", "reject malformed chunk sequences");
  ev->callback([&] { rc = run(ctx, &tsqk_cmd_evaluate); });

  auto* sw = app.add_subcommand("subword", "subword vocabulary commands");
  sw->require_subcommand(1);

  auto* st = sw->add_subcommand("train", "learn a subword vocabulary from a JSONL corpus");
  common_opts(st, ctx);
  opt_str(st, ctx, "--input", "input", "input JSONL");
  opt_str(st, ctx, "--model-out", "model_out", "where to save the model container");
  opt_int(st, ctx, "--target-vocab", "target_vocab", "final vocabulary size");
  opt_int(st, ctx, "--max-piece-len", "max_piece_len", "longest piece, in characters");
  opt_int(st, ctx, "--seed-multiplier", "seed_multiplier", "seed vocabulary size factor");
  opt_double(st, ctx, "--prune-fraction", "prune_fraction", "fraction pruned per round");
  opt_int(st, ctx, "--em-iters-per-round", "em_iters_per_round", "EM steps per round");
  opt_str(st, ctx, "--created-at", "created_at", "timestamp to stamp into the container");
  st->callback([&] { rc = run(ctx, &tsqk_cmd_subword_train); });

  auto* se = sw->add_subcommand("encode", "encode a JSONL corpus into pieces");
  common_opts(se, ctx);
  opt_str(se, ctx, "--model", "model", "model container");
  opt_str(se, ctx, "--input", "input", "input JSONL");
  opt_str(se, ctx, "--output", "output", "output JSONL");
  se->callback([&] { rc = run(ctx, &tsqk_cmd_subword_encode); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(TSQK_PARSE_ERROR);
  }
  return rc;
}
