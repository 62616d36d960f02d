#include "roboaug/dataset.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roboaug/util.hpp"

namespace roboaug {

namespace {

using nlohmann::json;

std::string pad3(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", n);
    return buf;
}

struct GenerationUnit {
    std::string batch_id;
    PromptText prompt;
    Route route;
    std::string seed_value;
    PromptVariant variant;
    int expected = 0;
};

struct UnitResult {
    std::vector<std::pair<Scenario, ImageAsset>> pairs;
    std::vector<FailureRecord> failures;
    std::vector<PipelineNote> notes;
};

// Shared per-unit flow: chat (with retry), archive, parse, optional refill,
// strict filtering, id assignment, then one image per scenario.
UnitResult run_unit(const GenerationUnit& unit, const PromptEngine& engine,
                    BackendSet& backends, ImageRouter& router, Throttle& throttle,
                    const RunSettings& settings) {
    UnitResult result;

    ChatRequest chat_req;
    chat_req.prompt = unit.prompt;
    chat_req.temperature = settings.temperature;
    chat_req.max_tokens = settings.max_tokens;

    RetryHooks hooks;
    hooks.throttle = &throttle;

    std::vector<Scenario> kept;
    std::set<std::string> seen_requests;

    auto ingest = [&](const std::string& raw, const std::string& archive_name) -> bool {
        // Archive before parsing so failures stay inspectable.
        write_file_atomic(settings.out_dir / "raw" / (archive_name + ".txt"), raw);
        ParseReport report;
        try {
            report = parse_scenarios(raw, unit.route, unit.seed_value, unit.expected);
        } catch (const ParseError& e) {
            result.failures.push_back({unit.batch_id, "parse", e.what()});
            return false;
        }
        for (const auto& w : report.warnings)
            result.notes.push_back({unit.batch_id, w.message});
        for (auto& s : report.scenarios) {
            if (settings.strict && s.request.find('?') != std::string::npos) {
                result.notes.push_back(
                    {unit.batch_id, "dropped scenario with question-mark request (strict mode)"});
                continue;
            }
            if (!seen_requests.insert(s.request).second) continue;
            kept.push_back(std::move(s));
        }
        return true;
    };

    try {
        const std::string raw = with_retry(
            [&] { return backends.chat->complete(chat_req); }, settings.retry, hooks);
        if (!ingest(raw, unit.batch_id)) return result;
    } catch (const BackendError& e) {
        result.failures.push_back({unit.batch_id, "chat", e.what()});
        return result;
    }

    if (settings.refill) {
        for (int round = 1;
             static_cast<int>(kept.size()) < unit.expected && round <= settings.refill_cap;
             ++round) {
            try {
                const std::string raw = with_retry(
                    [&] { return backends.chat->complete(chat_req); }, settings.retry, hooks);
                ingest(raw, unit.batch_id + "-refill" + std::to_string(round));
            } catch (const BackendError& e) {
                result.failures.push_back({unit.batch_id, "chat", e.what()});
                break;
            }
        }
        if (static_cast<int>(kept.size()) < unit.expected)
            result.notes.push_back({unit.batch_id,
                                    "refill exhausted at " + std::to_string(kept.size()) +
                                        " of " + std::to_string(unit.expected) + " scenarios"});
    }

    if (static_cast<int>(kept.size()) > unit.expected)
        kept.resize(static_cast<std::size_t>(unit.expected));

    for (std::size_t i = 0; i < kept.size(); ++i) {
        Scenario& s = kept[i];
        s.variant = unit.variant;
        s.id = unit.batch_id + "-" + pad3(static_cast<int>(i) + 1);

        try {
            const ImagePrompt prompt = engine.render_image_prompt(
                s.background, unit.route,
                unit.route == Route::action ? settings.reference_image : std::nullopt);
            ImageRequest req;
            req.prompt = prompt;
            req.width = settings.image_width;
            req.height = settings.image_height;
            req.seed = static_cast<std::int64_t>(fnv1a64(s.id, settings.seed));

            const auto out_path = settings.out_dir / "images" / (s.id + ".png");
            ImageAsset asset = with_retry(
                [&] { return router.generate(req, out_path); }, settings.retry, hooks);
            result.pairs.emplace_back(std::move(s), std::move(asset));
        } catch (const std::exception& e) {
            result.failures.push_back({s.id, "image", e.what()});
        }
    }
    return result;
}

RoutePairs run_units(const std::vector<GenerationUnit>& units, const PromptEngine& engine,
                     BackendSet& backends, const RunSettings& settings) {
    if (!backends.chat) throw ValidationError("no chat backend configured");
    if (!backends.image) throw ValidationError("no text-to-image backend configured");

    Throttle throttle(settings.retry.max_concurrent);
    ImageRouter router(*backends.image, backends.image_subject.get(),
                       settings.ablate_subject_conditioning);
    std::filesystem::create_directories(settings.out_dir / "raw");
    std::filesystem::create_directories(settings.out_dir / "images");

    const auto results = parallel_map<UnitResult>(
        units.size(), static_cast<std::size_t>(settings.retry.max_concurrent),
        [&](std::size_t i) {
            return run_unit(units[i], engine, backends, router, throttle, settings);
        });

    RoutePairs out;
    for (const auto& r : results) {
        out.pairs.insert(out.pairs.end(), r.pairs.begin(), r.pairs.end());
        out.failures.insert(out.failures.end(), r.failures.begin(), r.failures.end());
        out.notes.insert(out.notes.end(), r.notes.begin(), r.notes.end());
    }
    return out;
}

}  // namespace

RoutePairs run_place_route(const LocationCatalog& locations, const PromptEngine& engine,
                           BackendSet& backends, const RunSettings& settings) {
    if (settings.n_per_location < 1) throw ValidationError("n_per_location must be >= 1");
    if (settings.variants.empty()) throw ValidationError("at least one prompt variant required");

    std::vector<GenerationUnit> units;
    for (const auto& location : locations.locations) {
        for (const auto variant : settings.variants) {
            GenerationUnit u;
            u.route = Route::place;
            u.seed_value = location;
            u.variant = variant;
            u.expected = settings.n_per_location;
            u.prompt = engine.render_place_prompt(location, variant);
            const std::string tag = variant_id_tag(variant);
            u.batch_id = "place-" + slugify(location) + (tag.empty() ? "" : "-" + tag);
            units.push_back(std::move(u));
        }
    }
    return run_units(units, engine, backends, settings);
}

RoutePairs run_action_route(const ActionCatalog& actions, const PromptEngine& engine,
                            BackendSet& backends, const RunSettings& settings) {
    if (settings.n_per_action < 1) throw ValidationError("n_per_action must be >= 1");
    if (!settings.reference_image)
        throw ValidationError("the action route needs a reference image");
    if (!std::filesystem::exists(*settings.reference_image))
        throw ValidationError("reference image not found: " + *settings.reference_image);
    if (!backends.image_subject && !settings.ablate_subject_conditioning)
        throw ValidationError(
            "the action route needs a subject-conditioned image backend (or the "
            "ablation flag)");

    std::vector<GenerationUnit> units;
    for (const auto& action : actions.actions()) {
        GenerationUnit u;
        u.route = Route::action;
        u.seed_value = action.text;
        u.variant = PromptVariant::indirect_no_question;
        u.expected = settings.n_per_action;
        u.prompt = engine.render_action_prompt(action);
        u.batch_id = "action-" + slugify(action.text);
        units.push_back(std::move(u));
    }
    return run_units(units, engine, backends, settings);
}

DatasetCounts recount(const std::vector<DatasetRecord>& records) {
    DatasetCounts c;
    for (const auto& r : records) {
        (r.route == Route::place ? c.place : c.action) += 1;
        c.by_variant[to_string(r.variant)] += 1;
    }
    c.total = static_cast<int>(records.size());
    return c;
}

DatasetManifest assemble_dataset(const std::vector<std::pair<Scenario, ImageAsset>>& pairs,
                                 const std::filesystem::path& out_dir, std::uint64_t seed,
                                 const std::string& backend_config_digest) {
    if (pairs.empty()) throw ValidationError("cannot build a dataset from zero pairs");

    const auto images_dir = out_dir / "images";
    std::filesystem::create_directories(images_dir);

    std::vector<std::pair<DatasetRecord, std::string>> staged;  // record + dedup key
    staged.reserve(pairs.size());
    for (const auto& [scenario, asset] : pairs) {
        if (!std::filesystem::exists(asset.path))
            throw ValidationError("image missing for record " + scenario.id + ": " +
                                  asset.path.string());
        const auto target = images_dir / (scenario.id + ".png");
        if (std::filesystem::absolute(asset.path) != std::filesystem::absolute(target)) {
            std::filesystem::copy_file(asset.path, target,
                                       std::filesystem::copy_options::overwrite_existing);
            const auto sidecar = asset.sidecar_path();
            if (std::filesystem::exists(sidecar)) {
                auto starget = target;
                starget += ".meta.json";
                std::filesystem::copy_file(sidecar, starget,
                                           std::filesystem::copy_options::overwrite_existing);
            }
        }
        DatasetRecord rec;
        rec.id = scenario.id;
        rec.image = "images/" + scenario.id + ".png";
        rec.human_turn = std::string(kImagePlaceholder) + "\n" + scenario.request;
        rec.model_turn = scenario.action;
        rec.route = scenario.route;
        rec.variant = scenario.variant;
        staged.emplace_back(std::move(rec), scenario.request + "\x1f" + scenario.action);
    }

    std::sort(staged.begin(), staged.end(),
              [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
    for (std::size_t i = 1; i < staged.size(); ++i) {
        if (staged[i].first.id == staged[i - 1].first.id)
            throw ValidationError("record id collision: " + staged[i].first.id);
    }

    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.backend_config_digest = backend_config_digest;
    manifest.created_at = iso8601_utc_now();

    std::set<std::string> seen;
    for (auto& [rec, key] : staged) {
        if (!seen.insert(key).second) {
            manifest.duplicates_dropped.push_back(rec.id);
            continue;
        }
        manifest.records.push_back(std::move(rec));
    }
    manifest.counts = recount(manifest.records);
    return manifest;
}

std::string render_train_json(const std::vector<DatasetRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        arr.push_back(json{
            {"id", r.id},
            {"image", r.image},
            {"route", to_string(r.route)},
            {"variant", to_string(r.variant)},
            {"conversations",
             json::array({json{{"from", "human"}, {"value", r.human_turn}},
                          json{{"from", "gpt"}, {"value", r.model_turn}}})}});
    }
    return arr.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

namespace {

json manifest_to_json(const DatasetManifest& m) {
    json records = json::array();
    for (const auto& r : m.records) {
        records.push_back(json{{"id", r.id},
                               {"image", r.image},
                               {"route", to_string(r.route)},
                               {"variant", to_string(r.variant)},
                               {"human_turn", r.human_turn},
                               {"model_turn", r.model_turn}});
    }
    json by_variant = json::object();
    for (const auto& [k, v] : m.counts.by_variant) by_variant[k] = v;
    return json{{"created_at", m.created_at},
                {"seed", m.seed},
                {"backend_config_digest", m.backend_config_digest},
                {"dataset_digest", m.dataset_digest},
                {"counts",
                 json{{"place", m.counts.place},
                      {"action", m.counts.action},
                      {"total", m.counts.total},
                      {"by_variant", by_variant}}},
                {"duplicates_dropped", m.duplicates_dropped},
                {"records", records}};
}

}  // namespace

void write_dataset(DatasetManifest& manifest, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string train = render_train_json(manifest.records);
    manifest.dataset_digest = digest_hex(train);
    write_file_atomic(out_dir / "train.json", train);
    write_file_atomic(out_dir / "manifest.json",
                      manifest_to_json(manifest).dump(2, ' ', false,
                                                      json::error_handler_t::replace) +
                          "\n");
    if (!manifest.duplicates_dropped.empty()) {
        std::string log;
        for (const auto& id : manifest.duplicates_dropped)
            log += "dropped duplicate (request, action) record: " + id + "\n";
        write_file_atomic(out_dir / "dedup.log", log);
    }
}

DatasetManifest build_dataset(const std::vector<std::pair<Scenario, ImageAsset>>& pairs,
                              const std::filesystem::path& out_dir, std::uint64_t seed,
                              const std::string& backend_config_digest) {
    DatasetManifest manifest = assemble_dataset(pairs, out_dir, seed, backend_config_digest);
    write_dataset(manifest, out_dir);
    return manifest;
}

DatasetManifest merge_datasets(const std::vector<DatasetManifest>& manifests) {
    if (manifests.empty()) throw ValidationError("merge needs at least one manifest");

    DatasetManifest merged;
    merged.seed = manifests.front().seed;
    merged.created_at = iso8601_utc_now();
    std::set<std::string> digests;
    std::set<std::string> ids;
    for (const auto& m : manifests) {
        digests.insert(m.backend_config_digest);
        for (const auto& r : m.records) {
            if (!ids.insert(r.id).second)
                throw ValidationError("merge: record id collision: " + r.id);
            merged.records.push_back(r);
        }
        merged.duplicates_dropped.insert(merged.duplicates_dropped.end(),
                                         m.duplicates_dropped.begin(),
                                         m.duplicates_dropped.end());
    }
    std::sort(merged.records.begin(), merged.records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::string joined;
    for (const auto& d : digests) joined += (joined.empty() ? "" : "+") + d;
    merged.backend_config_digest = joined;
    merged.counts = recount(merged.records);
    return merged;
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw ValidationError("manifest " + manifest_path.string() + " is not valid JSON: " +
                              e.what());
    }
    DatasetManifest m;
    try {
        m.created_at = j.value("created_at", "");
        m.seed = j.value("seed", 0ull);
        m.backend_config_digest = j.value("backend_config_digest", "");
        m.dataset_digest = j.value("dataset_digest", "");
        m.duplicates_dropped = j.value("duplicates_dropped", std::vector<std::string>{});
        for (const auto& r : j.at("records")) {
            DatasetRecord rec;
            rec.id = r.at("id").get<std::string>();
            rec.image = r.at("image").get<std::string>();
            rec.route = route_from_string(r.at("route").get<std::string>());
            rec.variant = variant_from_string(r.at("variant").get<std::string>());
            rec.human_turn = r.at("human_turn").get<std::string>();
            rec.model_turn = r.at("model_turn").get<std::string>();
            m.records.push_back(std::move(rec));
        }
        const auto& c = j.at("counts");
        m.counts.place = c.at("place").get<int>();
        m.counts.action = c.at("action").get<int>();
        m.counts.total = c.at("total").get<int>();
        for (const auto& [k, v] : c.at("by_variant").items())
            m.counts.by_variant[k] = v.get<int>();
    } catch (const json::exception& e) {
        throw ValidationError("manifest " + manifest_path.string() + ": missing field (" +
                              e.what() + ")");
    }
    return m;
}

std::vector<std::string> verify_dataset(const std::filesystem::path& dataset_dir) {
    std::vector<std::string> violations;
    const auto manifest_path = dataset_dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        return {"manifest.json not found in " + dataset_dir.string()};

    DatasetManifest m;
    try {
        m = load_manifest(manifest_path);
    } catch (const ValidationError& e) {
        return {e.what()};
    }

    std::set<std::string> ids;
    for (const auto& r : m.records) {
        if (!ids.insert(r.id).second) violations.push_back("duplicate record id: " + r.id);
        if (r.image.empty() || std::filesystem::path(r.image).is_absolute() ||
            r.image.find("..") != std::string::npos) {
            violations.push_back("record " + r.id + ": image path escapes the dataset root: " +
                                 r.image);
            continue;
        }
        if (!std::filesystem::exists(dataset_dir / r.image))
            violations.push_back("record " + r.id + ": dangling image reference " + r.image);
        std::size_t token_count = 0;
        std::size_t pos = 0;
        while ((pos = r.human_turn.find(kImagePlaceholder, pos)) != std::string::npos) {
            ++token_count;
            pos += std::string(kImagePlaceholder).size();
        }
        if (token_count != 1)
            violations.push_back("record " + r.id + ": human turn has " +
                                 std::to_string(token_count) + " image placeholders");
        if (r.model_turn.empty())
            violations.push_back("record " + r.id + ": empty model turn");
    }

    const DatasetCounts fresh = recount(m.records);
    if (fresh.place != m.counts.place || fresh.action != m.counts.action ||
        fresh.total != m.counts.total)
        violations.push_back("manifest counts disagree with records: manifest says " +
                             std::to_string(m.counts.total) + ", recount finds " +
                             std::to_string(fresh.total));

    const auto train_path = dataset_dir / "train.json";
    if (!std::filesystem::exists(train_path)) {
        violations.push_back("train.json not found");
    } else {
        const std::string train = read_file(train_path);
        if (!m.dataset_digest.empty() && digest_hex(train) != m.dataset_digest)
            violations.push_back("train.json digest does not match the manifest");
        try {
            const json arr = json::parse(train);
            if (!arr.is_array() || arr.size() != m.records.size())
                violations.push_back("train.json record count (" +
                                     std::to_string(arr.is_array() ? arr.size() : 0) +
                                     ") differs from manifest (" +
                                     std::to_string(m.records.size()) + ")");
        } catch (const json::exception& e) {
            violations.push_back(std::string("train.json is not valid JSON: ") + e.what());
        }
    }
    return violations;
}

void write_failures_jsonl(const std::vector<FailureRecord>& failures,
                          const std::filesystem::path& path) {
    std::string out;
    for (const auto& f : failures) {
        json j{{"unit", f.unit}, {"stage", f.stage}, {"message", f.message}};
        out += j.dump(-1, ' ', false, json::error_handler_t::replace);
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

}  // namespace roboaug
