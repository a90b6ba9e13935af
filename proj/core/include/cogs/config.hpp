// config.hpp - JSON experiment configs: typed parsers for the model,
// training, and synthetic-corpus sections, plus a canonical content hash so
// every output can carry provenance.
#pragma once

#include <string>

#include "cogs/corpus.hpp"
#include "cogs/model.hpp"
#include "cogs/trainer.hpp"

namespace cogs {

/// Reads a JSON file; io_error when unreadable, parse_error when malformed.
std::string read_config_text(const std::string& path);

/// Hash of the canonical (parsed and re-serialized) form, as 16 hex digits.
/// Whitespace and key order do not affect it.
std::string config_hash_hex(const std::string& json_text);

/// Model section: {"preset": "toy"|"full"} with optional overrides
/// "speakers" and "vocab_seed". Reads the top-level "model" object, or the
/// whole document when it has a "preset" key itself.
ModelConfig parse_model_config(const std::string& json_text);

/// Optional "skeleton": "chain"|"default9"|"default42"; the default matches
/// the configured joint count (9 -> default9, otherwise a chain).
SkeletonTopology parse_topology(const std::string& json_text, const ModelConfig& cfg);

/// Training section "training" (or the whole document); every field is
/// optional and defaults match TrainingConfig. Weights live under
/// "weights": {"huber", "style", "kld", "gan"}.
TrainingConfig parse_training_config(const std::string& json_text);

/// Corpus section "corpus" (or the whole document) with the
/// SyntheticCorpusSpec fields.
SyntheticCorpusSpec parse_corpus_spec(const std::string& json_text);

}  // namespace cogs
