#pragma once

#include <nlohmann/json.hpp>

namespace tsq::cmd {

/// File-level commands behind the CLI and the C API. Each takes a flat JSON
/// config (unknown keys are rejected) and returns a JSON summary. Commands
/// are deterministic given their config plus seed; see resolve_created_at for
/// how the container timestamp stays reproducible.

/// clean -> dedup -> length filter over a JSONL corpus.
nlohmann::json preprocess(const nlohmann::json& config);

/// Grid-search an NBSVM text classifier and persist the best model.
nlohmann::json train_nbsvm(const nlohmann::json& config);

/// Grid-search a linear-chain CRF tagger and persist the best model.
nlohmann::json train_crf(const nlohmann::json& config);

/// Run a saved model over new data.
nlohmann::json predict(const nlohmann::json& config);

/// Score a saved model against gold data; renders the per-class table.
nlohmann::json evaluate(const nlohmann::json& config);

/// Train a unigram subword model over a JSONL corpus.
nlohmann::json subword_train(const nlohmann::json& config);

/// Segment a JSONL corpus with a saved subword model.
nlohmann::json subword_encode(const nlohmann::json& config);

}  // namespace tsq::cmd
