// roboaug: synthesizes robot life-support scenario datasets (dialogues +
// environment images) through pluggable generative backends and scores
// action-prediction outputs with an embedding matcher.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "roboaug/backend_config.hpp"
#include "roboaug/catalog.hpp"
#include "roboaug/dataset.hpp"
#include "roboaug/eval.hpp"
#include "roboaug/parser.hpp"
#include "roboaug/prompts.hpp"
#include "roboaug/util.hpp"

namespace {

using namespace roboaug;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBackend = 2;
constexpr int kExitUsage = 3;

struct CommonOpts {
    std::string backends_path;
    bool use_mock = false;
    std::uint64_t seed = 0;
};

BackendConfig resolve_backend_config(const CommonOpts& opts) {
    if (opts.use_mock) return mock_backend_config();
    if (opts.backends_path.empty())
        throw ValidationError("pass --backends <file> or --mock");
    return load_backend_config(opts.backends_path);
}

std::vector<PromptVariant> parse_variants(const std::string& csv) {
    std::vector<PromptVariant> out;
    std::set<PromptVariant> seen;
    auto push = [&](PromptVariant v) {
        if (seen.insert(v).second) out.push_back(v);
    };
    std::istringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        if (token == "all") {
            push(PromptVariant::indirect_no_question);
            push(PromptVariant::no_question);
            push(PromptVariant::plain);
        } else {
            push(variant_from_string(token));
        }
    }
    if (out.empty()) throw ValidationError("--variants resolved to an empty set");
    return out;
}

struct AugmentOpts {
    CommonOpts common;
    std::string route = "both";
    std::string actions_path = "data/actions.txt";
    std::string locations_path = "data/locations.txt";
    std::string templates_dir = "data/templates";
    std::string out_dir;
    std::string variants_csv = "indirect";
    std::string reference_image = "data/reference_room.png";
    int n_per_location = 10;
    int n_per_action = 10;
    bool strict = false;
    bool refill = false;
    int refill_cap = 2;
    bool ablate = false;
    int max_concurrent = 4;
    int max_attempts = 3;
    int retry_base_ms = 250;
    double temperature = 1.0;
    int max_tokens = 1024;
    int image_width = 512;
    int image_height = 512;
    bool dry_run = false;
};

int run_augment(const AugmentOpts& opts) {
    const bool do_place = opts.route == "place" || opts.route == "both";
    const bool do_action = opts.route == "action" || opts.route == "both";
    const auto variants = parse_variants(opts.variants_csv);

    LocationCatalog locations;
    ActionCatalog actions;
    if (do_place) locations = load_location_catalog(opts.locations_path);
    if (do_action) actions = load_action_catalog(opts.actions_path);
    const PromptEngine engine = PromptEngine::load(opts.templates_dir);

    const std::size_t place_chat = do_place ? locations.locations.size() * variants.size() : 0;
    const std::size_t action_chat = do_action ? actions.size() : 0;
    const std::size_t place_images =
        place_chat * static_cast<std::size_t>(opts.n_per_location);
    const std::size_t action_images =
        action_chat * static_cast<std::size_t>(opts.n_per_action);

    if (opts.dry_run) {
        std::cout << "planned chat requests: " << (place_chat + action_chat) << "\n"
                  << "planned image requests: " << (place_images + action_images) << "\n"
                  << "planned embedding requests: 0\n";
        return kExitOk;
    }

    const BackendConfig config = resolve_backend_config(opts.common);
    auto audit = std::make_shared<AuditLog>(std::filesystem::path(opts.out_dir) / "audit.jsonl");
    BackendSet backends = build_backends(config, opts.common.seed, audit);

    RunSettings settings;
    settings.out_dir = opts.out_dir;
    settings.seed = opts.common.seed;
    settings.n_per_location = opts.n_per_location;
    settings.n_per_action = opts.n_per_action;
    settings.variants = variants;
    settings.strict = opts.strict;
    settings.refill = opts.refill;
    settings.refill_cap = opts.refill_cap;
    settings.ablate_subject_conditioning = opts.ablate;
    settings.reference_image = opts.reference_image;
    settings.retry.max_attempts = opts.max_attempts;
    settings.retry.base_delay = std::chrono::milliseconds(opts.retry_base_ms);
    settings.retry.max_concurrent = opts.max_concurrent;
    settings.temperature = opts.temperature;
    settings.max_tokens = opts.max_tokens;
    settings.image_width = opts.image_width;
    settings.image_height = opts.image_height;

    RoutePairs place_pairs, action_pairs;
    if (do_place) place_pairs = run_place_route(locations, engine, backends, settings);
    if (do_action) action_pairs = run_action_route(actions, engine, backends, settings);

    std::vector<FailureRecord> failures = place_pairs.failures;
    failures.insert(failures.end(), action_pairs.failures.begin(), action_pairs.failures.end());
    for (const auto& n : place_pairs.notes)
        std::cerr << "note [" << n.unit << "] " << n.message << "\n";
    for (const auto& n : action_pairs.notes)
        std::cerr << "note [" << n.unit << "] " << n.message << "\n";
    for (const auto& f : failures)
        std::cerr << "failure [" << f.unit << "/" << f.stage << "] " << f.message << "\n";
    write_failures_jsonl(failures, std::filesystem::path(opts.out_dir) / "failures.jsonl");

    std::vector<Scenario> all_scenarios;
    for (const auto& [s, a] : place_pairs.pairs) all_scenarios.push_back(s);
    for (const auto& [s, a] : action_pairs.pairs) all_scenarios.push_back(s);
    std::sort(all_scenarios.begin(), all_scenarios.end(),
              [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
    write_scenarios_jsonl(all_scenarios, std::filesystem::path(opts.out_dir) / "scenarios.jsonl");

    auto assemble_or_explain = [&](const std::vector<std::pair<Scenario, ImageAsset>>& pairs,
                                   const char* route_name) {
        if (pairs.empty())
            throw BackendError(BackendErrorKind::transport, false,
                               std::string("the ") + route_name +
                                   " route produced no usable pairs (see failures.jsonl)");
        return assemble_dataset(pairs, opts.out_dir, opts.common.seed, config.source_digest);
    };

    DatasetManifest manifest;
    if (do_place && do_action) {
        const DatasetManifest place = assemble_or_explain(place_pairs.pairs, "place");
        const DatasetManifest action = assemble_or_explain(action_pairs.pairs, "action");
        manifest = merge_datasets({place, action});
        manifest.seed = opts.common.seed;
    } else if (do_place) {
        manifest = assemble_or_explain(place_pairs.pairs, "place");
    } else {
        manifest = assemble_or_explain(action_pairs.pairs, "action");
    }
    write_dataset(manifest, opts.out_dir);

    std::cout << "dataset written to " << opts.out_dir << "\n"
              << "records: place=" << manifest.counts.place
              << " action=" << manifest.counts.action << " total=" << manifest.counts.total
              << "\n"
              << "dataset digest: " << manifest.dataset_digest << "\n";
    if (!failures.empty())
        std::cerr << failures.size() << " unit(s) failed; partial results kept\n";
    return kExitOk;
}

struct EvaluateOpts {
    CommonOpts common;
    std::string samples_path;
    std::string predictions_path;
    std::string actions_path = "data/actions.txt";
    std::string out_dir;
    std::string label;
    std::string baseline_path;
    std::string baseline_label = "baseline";
    std::string encoders_csv;
    std::string cache_dir;
    bool buckets = false;
    int bootstrap_resamples = 10000;
    std::uint64_t bootstrap_seed = 0;
    double alpha = 0.05;
    bool dry_run = false;
};

int run_evaluate(const EvaluateOpts& opts) {
    const ActionCatalog catalog = load_action_catalog(opts.actions_path);
    const auto samples = load_samples_jsonl(opts.samples_path, catalog);
    std::set<std::string> sample_ids;
    for (const auto& s : samples) sample_ids.insert(s.id);
    const auto predictions = load_predictions_jsonl(opts.predictions_path, &sample_ids);

    std::map<EvalSetting, std::vector<PredictionRecord>> by_setting;
    for (const auto& p : predictions) by_setting[p.setting].push_back(p);

    std::map<EvalSetting, std::vector<PredictionRecord>> baseline_by_setting;
    if (!opts.baseline_path.empty()) {
        for (const auto& p : load_predictions_jsonl(opts.baseline_path, &sample_ids))
            baseline_by_setting[p.setting].push_back(p);
    }

    const BackendConfig config = resolve_backend_config(opts.common);
    BackendSet backends = build_backends(config, opts.common.seed, nullptr);
    std::vector<std::string> encoder_ids = backends.embedder_order;
    if (!opts.encoders_csv.empty()) {
        encoder_ids.clear();
        std::istringstream ss(opts.encoders_csv);
        std::string token;
        while (std::getline(ss, token, ',')) {
            token = trim(token);
            if (token.empty()) continue;
            if (!backends.embedders.count(token)) {
                std::string known;
                for (const auto& e : backends.embedder_order)
                    known += (known.empty() ? "" : ", ") + e;
                throw ValidationError("unknown encoder \"" + token + "\" (configured: " + known +
                                      ")");
            }
            encoder_ids.push_back(token);
        }
    }
    if (encoder_ids.empty()) throw ValidationError("no embedding encoders configured");

    if (opts.dry_run) {
        std::size_t texts = catalog.size();
        for (const auto& [setting, preds] : by_setting) texts += preds.size();
        for (const auto& [setting, preds] : baseline_by_setting) texts += preds.size();
        std::cout << "planned chat requests: 0\n"
                  << "planned image requests: 0\n"
                  << "planned embedding texts: " << texts * encoder_ids.size() << " across "
                  << encoder_ids.size() << " encoder(s)\n";
        return kExitOk;
    }

    const std::filesystem::path out_dir = opts.out_dir;
    const std::filesystem::path cache_dir =
        opts.cache_dir.empty() ? out_dir / "cache" : std::filesystem::path(opts.cache_dir);
    std::filesystem::create_directories(cache_dir);

    const std::string run_label =
        opts.label.empty() ? std::filesystem::path(opts.predictions_path).stem().string()
                           : opts.label;
    BootstrapConfig bootstrap{opts.bootstrap_resamples, opts.bootstrap_seed, opts.alpha};

    std::vector<EvalReport> reports;
    for (const auto& encoder_id : encoder_ids) {
        ActionMatcher matcher(catalog, *backends.embedders.at(encoder_id), cache_dir);
        for (const auto& [setting, preds] : by_setting) {
            std::optional<EvalReport> baseline_report;
            if (baseline_by_setting.count(setting)) {
                baseline_report = evaluate(samples, baseline_by_setting.at(setting), matcher,
                                           opts.baseline_label);
            }
            EvalReport report = evaluate(samples, preds, matcher, run_label);
            if (baseline_report) {
                report.significance = significance(baseline_report->per_sample_correct,
                                                   report.per_sample_correct, bootstrap);
            }
            if (opts.buckets) {
                std::map<int, double> acc;
                for (const auto& [idx, stats] : report.per_label) acc[idx] = stats.accuracy;
                report.buckets = bucketize(acc, catalog.size());
                if (baseline_report) {
                    std::map<int, double> bacc;
                    for (const auto& [idx, stats] : baseline_report->per_label)
                        bacc[idx] = stats.accuracy;
                    baseline_report->buckets = bucketize(bacc, catalog.size());
                }
            }
            if (baseline_report) reports.push_back(std::move(*baseline_report));
            reports.push_back(std::move(report));
        }
    }

    std::cout << render_table(reports);
    if (opts.buckets) {
        std::cout << "\n";
        for (const auto& r : reports) std::cout << render_buckets(r);
    }
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "report.json", reports_to_json(reports));
    std::cerr << "report written to " << (out_dir / "report.json").string() << "\n";
    return kExitOk;
}

int run_verify(const std::string& dataset_dir, bool dry_run) {
    if (dry_run) {
        std::cout << "planned chat requests: 0\nplanned image requests: 0\n"
                  << "planned embedding requests: 0\n";
        return kExitOk;
    }
    const auto violations = verify_dataset(dataset_dir);
    if (violations.empty()) {
        const auto manifest = load_manifest(std::filesystem::path(dataset_dir) / "manifest.json");
        std::cout << "dataset OK (" << manifest.counts.total << " records)\n";
        return kExitOk;
    }
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    return kExitValidation;
}

int run_catalogs(const std::string& actions_path, const std::string& locations_path,
                 bool dry_run) {
    if (dry_run) {
        std::cout << "planned chat requests: 0\nplanned image requests: 0\n"
                  << "planned embedding requests: 0\n";
        return kExitOk;
    }
    const ActionCatalog actions = load_action_catalog(actions_path);
    const LocationCatalog locations = load_location_catalog(locations_path);
    std::cout << "actions (" << actions.size() << ", digest " << actions.digest() << "):\n";
    for (const auto& a : actions.actions())
        std::cout << "  [" << a.index << "] " << a.text << "\n";
    std::cout << "locations (" << locations.locations.size() << "):\n";
    for (const auto& l : locations.locations) std::cout << "  " << l << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario data synthesis and action-prediction evaluation for "
                 "life-support robots"};
    app.require_subcommand(1);

    AugmentOpts aug;
    auto* augment = app.add_subcommand(
        "augment", "Generate dialogues and environment images, then build the dataset");
    augment->add_option("route", aug.route, "place | action | both")
        ->check(CLI::IsMember({"place", "action", "both"}))
        ->required();
    augment->add_option("--backends", aug.common.backends_path, "Backend config file");
    augment->add_flag("--mock", aug.common.use_mock, "Use the built-in deterministic mocks");
    augment->add_option("--actions", aug.actions_path, "Action catalog file");
    augment->add_option("--locations", aug.locations_path, "Location catalog file");
    augment->add_option("--templates", aug.templates_dir, "Prompt template directory");
    augment->add_option("--out", aug.out_dir, "Output dataset directory")->required();
    augment->add_option("--seed", aug.common.seed, "Run seed (recorded in the manifest)");
    augment->add_option("--n-per-location", aug.n_per_location, "Dialogues per location");
    augment->add_option("--n-per-action", aug.n_per_action, "Dialogues per action");
    augment->add_option("--variants", aug.variants_csv,
                        "Place-prompt variants: indirect,no-question,plain or all");
    augment->add_option("--reference-image", aug.reference_image,
                        "Reference image for subject-conditioned generation");
    augment->add_flag("--ablate-subject-conditioning", aug.ablate,
                      "Send action-route images through the plain text-to-image backend");
    augment->add_flag("--strict", aug.strict, "Drop scenarios whose request asks a question");
    augment->add_flag("--refill", aug.refill, "Re-prompt when a batch parses short");
    augment->add_option("--refill-cap", aug.refill_cap, "Max refill rounds per batch");
    augment->add_option("--max-concurrent", aug.max_concurrent, "Backend concurrency cap");
    augment->add_option("--max-attempts", aug.max_attempts, "Retry attempts per call");
    augment->add_option("--retry-base-ms", aug.retry_base_ms, "Base retry delay (ms)");
    augment->add_option("--temperature", aug.temperature, "Chat sampling temperature");
    augment->add_option("--max-tokens", aug.max_tokens, "Chat completion token cap");
    augment->add_option("--image-width", aug.image_width, "Generated image width");
    augment->add_option("--image-height", aug.image_height, "Generated image height");
    augment->add_flag("--dry-run", aug.dry_run, "Print planned request counts and exit");

    EvaluateOpts ev;
    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "Score prediction files with the embedding matcher");
    evaluate_cmd->add_option("--samples", ev.samples_path, "Samples JSONL file")->required();
    evaluate_cmd->add_option("--predictions", ev.predictions_path, "Predictions JSONL file")
        ->required();
    evaluate_cmd->add_option("--actions", ev.actions_path, "Action catalog file");
    evaluate_cmd->add_option("--backends", ev.common.backends_path, "Backend config file");
    evaluate_cmd->add_flag("--mock", ev.common.use_mock, "Use the built-in deterministic mocks");
    evaluate_cmd->add_option("--out", ev.out_dir, "Directory for report.json")->required();
    evaluate_cmd->add_option("--seed", ev.common.seed, "Seed for mock encoders");
    evaluate_cmd->add_option("--label", ev.label, "Row label for this run");
    evaluate_cmd->add_option("--baseline", ev.baseline_path,
                             "Baseline predictions for significance");
    evaluate_cmd->add_option("--baseline-label", ev.baseline_label,
                             "Row label for the baseline");
    evaluate_cmd->add_option("--encoders", ev.encoders_csv,
                             "Comma-separated encoder ids (default: all configured)");
    evaluate_cmd->add_option("--cache-dir", ev.cache_dir, "Embedding cache directory");
    evaluate_cmd->add_flag("--buckets", ev.buckets, "Append per-bucket label analysis");
    evaluate_cmd->add_option("--bootstrap-resamples", ev.bootstrap_resamples,
                             "Bootstrap resample count");
    evaluate_cmd->add_option("--bootstrap-seed", ev.bootstrap_seed, "Bootstrap RNG seed");
    evaluate_cmd->add_option("--alpha", ev.alpha, "Significance level");
    evaluate_cmd->add_flag("--dry-run", ev.dry_run, "Print planned request counts and exit");

    std::string verify_dir;
    bool verify_dry = false;
    auto* verify_cmd = app.add_subcommand("verify", "Check a built dataset for consistency");
    verify_cmd->add_option("--dataset", verify_dir, "Dataset directory")->required();
    verify_cmd->add_flag("--dry-run", verify_dry, "Print planned request counts and exit");

    std::string cat_actions = "data/actions.txt";
    std::string cat_locations = "data/locations.txt";
    bool cat_dry = false;
    auto* catalogs_cmd = app.add_subcommand("catalogs", "Validate and print the catalogs");
    catalogs_cmd->add_option("--actions", cat_actions, "Action catalog file");
    catalogs_cmd->add_option("--locations", cat_locations, "Location catalog file");
    catalogs_cmd->add_flag("--dry-run", cat_dry, "Print planned request counts and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (augment->parsed()) return run_augment(aug);
        if (evaluate_cmd->parsed()) return run_evaluate(ev);
        if (verify_cmd->parsed()) return run_verify(verify_dir, verify_dry);
        if (catalogs_cmd->parsed()) return run_catalogs(cat_actions, cat_locations, cat_dry);
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
