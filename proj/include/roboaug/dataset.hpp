#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roboaug/backend_config.hpp"
#include "roboaug/catalog.hpp"
#include "roboaug/parser.hpp"
#include "roboaug/scenario.hpp"

namespace roboaug {

// The literal token the trainer replaces with image features.
inline constexpr const char* kImagePlaceholder = "<image>";

/// One training sample: an image plus a two-turn conversation whose human
/// turn embeds the image placeholder exactly once.
struct DatasetRecord {
    std::string id;
    std::string image;  // relative to the dataset root
    std::string human_turn;
    std::string model_turn;
    Route route = Route::place;
    PromptVariant variant = PromptVariant::indirect_no_question;

    bool operator==(const DatasetRecord&) const = default;
};

struct DatasetCounts {
    int place = 0;
    int action = 0;
    int total = 0;
    std::map<std::string, int> by_variant;
};

struct DatasetManifest {
    std::vector<DatasetRecord> records;  // sorted by id
    DatasetCounts counts;
    std::string created_at;
    std::uint64_t seed = 0;
    std::string backend_config_digest;
    std::string dataset_digest;  // digest of the train.json bytes
    std::vector<std::string> duplicates_dropped;
};

DatasetCounts recount(const std::vector<DatasetRecord>& records);

// ---- pipeline ----

struct RunSettings {
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    int n_per_location = 10;
    int n_per_action = 10;
    std::vector<PromptVariant> variants = {PromptVariant::indirect_no_question};
    bool strict = false;  // drop question-mark requests instead of keeping them
    bool refill = false;  // re-prompt when a batch comes up short
    int refill_cap = 2;
    bool ablate_subject_conditioning = false;
    std::optional<std::string> reference_image;  // action route
    RetryPolicy retry;
    double temperature = 1.0;
    int max_tokens = 1024;
    int image_width = 512;
    int image_height = 512;
};

struct FailureRecord {
    std::string unit;   // batch or scenario id
    std::string stage;  // chat | parse | image
    std::string message;
};

struct PipelineNote {
    std::string unit;
    std::string message;
};

/// Route output: scenario/image pairs in deterministic unit order, plus
/// everything that went wrong or looked odd along the way.
struct RoutePairs {
    std::vector<std::pair<Scenario, ImageAsset>> pairs;
    std::vector<FailureRecord> failures;
    std::vector<PipelineNote> notes;
};

// One chat call (plus optional refills) per location x variant, then one
// image per parsed scenario through the text-to-image backend. Raw chat
// output is archived under out/raw before parsing. Failed units are recorded
// and skipped, never fatal.
RoutePairs run_place_route(const LocationCatalog& locations, const PromptEngine& engine,
                           BackendSet& backends, const RunSettings& settings);

// One chat call per catalog action; images go through the subject-conditioned
// backend with subject "room" (or the text backend when ablated).
RoutePairs run_action_route(const ActionCatalog& actions, const PromptEngine& engine,
                            BackendSet& backends, const RunSettings& settings);

// ---- assembly ----

// Stages images under out_dir/images, builds sorted records and removes
// exact (request, action) duplicates. Does not write train.json.
DatasetManifest assemble_dataset(const std::vector<std::pair<Scenario, ImageAsset>>& pairs,
                                 const std::filesystem::path& out_dir, std::uint64_t seed,
                                 const std::string& backend_config_digest);

// Serializes train.json + manifest.json into out_dir and fills in the
// dataset digest. dedup.log is written when duplicates were dropped.
void write_dataset(DatasetManifest& manifest, const std::filesystem::path& out_dir);

// assemble + write in one step.
DatasetManifest build_dataset(const std::vector<std::pair<Scenario, ImageAsset>>& pairs,
                              const std::filesystem::path& out_dir, std::uint64_t seed,
                              const std::string& backend_config_digest);

// Concatenates manifests with disjoint record ids and recomputes counts.
DatasetManifest merge_datasets(const std::vector<DatasetManifest>& manifests);

std::string render_train_json(const std::vector<DatasetRecord>& records);
DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

// Consistency walk over a dataset directory: id uniqueness, image paths that
// resolve inside the root, counts that match a recount, and a train.json that
// agrees with the manifest. Returns human-readable violations; empty = clean.
std::vector<std::string> verify_dataset(const std::filesystem::path& dataset_dir);

void write_failures_jsonl(const std::vector<FailureRecord>& failures,
                          const std::filesystem::path& path);

}  // namespace roboaug
