#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roboaug/backends.hpp"
#include "roboaug/catalog.hpp"

namespace roboaug {

// ---- inputs ----

enum class EvalSetting { utterance_only, utterance_plus_description };

std::string to_string(EvalSetting s);
EvalSetting eval_setting_from_string(const std::string& s);
// Column headings used in rendered tables.
std::string setting_display_name(EvalSetting s);

struct EvalSample {
    std::string id;
    std::string utterance;
    std::optional<std::string> description;
    int gold_action_index = 0;
};

struct PredictionRecord {
    std::string sample_id;
    EvalSetting setting = EvalSetting::utterance_only;
    std::string response_text;
};

// JSONL loaders; schema violations carry line numbers. When `known_sample_ids`
// is given, a prediction referencing an id outside it fails with the id and
// its line number.
std::vector<EvalSample> load_samples_jsonl(const std::filesystem::path& path,
                                           const ActionCatalog& catalog);
std::vector<PredictionRecord> load_predictions_jsonl(
    const std::filesystem::path& path,
    const std::set<std::string>* known_sample_ids = nullptr);

// ---- report ----

struct LabelStats {
    int correct = 0;
    int total = 0;
    double accuracy = 0.0;  // 0 when the label never occurs
};

struct SignificanceResult {
    double p_value = 1.0;
    bool significant = false;
};

struct BucketSummary {
    std::vector<int> members;  // action indices
    double mean_accuracy = 0.0;
};

struct EvalReport {
    std::string label;  // run/model name shown as the table row
    EvalSetting setting = EvalSetting::utterance_only;
    std::string encoder_id;
    int n_samples = 0;
    double accuracy = 0.0;
    std::map<int, LabelStats> per_label;          // every catalog index present
    std::vector<bool> per_sample_correct;         // sample-file order
    std::vector<std::string> sample_ids;          // aligned with per_sample_correct
    std::optional<SignificanceResult> significance;
    std::optional<std::array<BucketSummary, 4>> buckets;
};

// ---- matching ----

// dot(u, v) / (|u| |v|). Throws on dimension mismatch or a zero vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Embeds the catalog once (optionally cached on disk keyed by encoder id +
/// catalog digest) and maps free-text responses to the action with the
/// highest cosine similarity. Ties go to the lowest action index.
class ActionMatcher {
public:
    ActionMatcher(const ActionCatalog& catalog, EmbedBackend& encoder,
                  const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

    int match(const std::string& response_text) const;
    int match_embedded(const EmbeddingVector& response) const;
    std::vector<int> match_batch(const std::vector<std::string>& responses,
                                 std::size_t batch_size = 64) const;

    const std::vector<EmbeddingVector>& catalog_embeddings() const { return catalog_embeddings_; }
    const ActionCatalog& catalog() const { return catalog_; }

private:
    const ActionCatalog& catalog_;
    EmbedBackend& encoder_;
    std::vector<EmbeddingVector> catalog_embeddings_;
};

// Convenience single-shot form of the matcher.
ActionLabel match_action(const std::string& response_text, const ActionCatalog& catalog,
                         EmbedBackend& encoder);

// ---- scoring ----

// Exact-match accuracy of matched actions against gold labels for one
// setting's predictions. Every sample needs exactly one prediction; unknown
// ids and duplicates are errors.
EvalReport evaluate(const std::vector<EvalSample>& samples,
                    const std::vector<PredictionRecord>& predictions,
                    const ActionMatcher& matcher, const std::string& run_label);

struct BootstrapConfig {
    int resamples = 10000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
};

// Two-sided paired bootstrap on the accuracy difference between two aligned
// per-sample outcome vectors.
SignificanceResult significance(const std::vector<bool>& baseline_correct,
                                const std::vector<bool>& variant_correct,
                                const BootstrapConfig& config = {});

// Sorts labels by accuracy (ties to the lower index) and splits them into
// four quartile buckets; for n = 4q + r the first bucket gets q labels and
// the remainder goes to the later buckets. Bucket 1 holds the worst labels.
std::array<BucketSummary, 4> bucketize(const std::map<int, double>& per_label_accuracy,
                                       std::size_t catalog_size);

// ---- rendering ----

// Plain-text summary: rows = run labels, column groups = setting x encoder,
// cells = one-decimal percentages with "†" for significant and "*" for the
// best value in a column.
std::string render_table(const std::vector<EvalReport>& reports);

std::string render_buckets(const EvalReport& report);

// Machine-readable form of all reports.
std::string reports_to_json(const std::vector<EvalReport>& reports);

}  // namespace roboaug
