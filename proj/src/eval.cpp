#include "roboaug/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roboaug/util.hpp"

namespace roboaug {

namespace {
using nlohmann::json;
}

std::string to_string(EvalSetting s) {
    return s == EvalSetting::utterance_only ? "utterance_only" : "utterance_plus_description";
}

EvalSetting eval_setting_from_string(const std::string& s) {
    if (s == "utterance_only") return EvalSetting::utterance_only;
    if (s == "utterance_plus_description") return EvalSetting::utterance_plus_description;
    throw ValidationError("unknown evaluation setting: " + s);
}

std::string setting_display_name(EvalSetting s) {
    return s == EvalSetting::utterance_only ? "Utterance-Only" : "Description + Utterance";
}

std::vector<EvalSample> load_samples_jsonl(const std::filesystem::path& path,
                                           const ActionCatalog& catalog) {
    const std::string content = read_file(path);
    std::vector<EvalSample> samples;
    std::set<std::string> ids;
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("samples file line " + std::to_string(line_no) +
                                  ": invalid JSON (" + e.what() + ")");
        }
        EvalSample s;
        try {
            s.id = j.at("id").get<std::string>();
            s.utterance = j.at("utterance").get<std::string>();
            if (j.contains("description") && !j["description"].is_null())
                s.description = j["description"].get<std::string>();
            s.gold_action_index = j.at("gold_action_index").get<int>();
        } catch (const json::exception& e) {
            throw ValidationError("samples file line " + std::to_string(line_no) +
                                  ": bad record (" + e.what() + ")");
        }
        if (s.gold_action_index < 0 ||
            static_cast<std::size_t>(s.gold_action_index) >= catalog.size())
            throw ValidationError("samples file line " + std::to_string(line_no) +
                                  ": gold_action_index " + std::to_string(s.gold_action_index) +
                                  " outside the catalog of " + std::to_string(catalog.size()));
        if (!ids.insert(s.id).second)
            throw ValidationError("samples file line " + std::to_string(line_no) +
                                  ": duplicate sample id " + s.id);
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw ValidationError("samples file " + path.string() + " is empty");
    return samples;
}

std::vector<PredictionRecord> load_predictions_jsonl(
    const std::filesystem::path& path, const std::set<std::string>* known_sample_ids) {
    const std::string content = read_file(path);
    std::vector<PredictionRecord> out;
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("predictions file line " + std::to_string(line_no) +
                                  ": invalid JSON (" + e.what() + ")");
        }
        PredictionRecord p;
        try {
            p.sample_id = j.at("sample_id").get<std::string>();
            p.setting = eval_setting_from_string(j.at("setting").get<std::string>());
            p.response_text = j.at("response_text").get<std::string>();
        } catch (const json::exception& e) {
            throw ValidationError("predictions file line " + std::to_string(line_no) +
                                  ": bad record (" + e.what() + ")");
        }
        if (known_sample_ids != nullptr && !known_sample_ids->count(p.sample_id))
            throw ValidationError("predictions file line " + std::to_string(line_no) +
                                  ": unknown sample id \"" + p.sample_id + "\"");
        out.push_back(std::move(p));
    }
    if (out.empty()) throw ValidationError("predictions file " + path.string() + " is empty");
    return out;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dimension() != v.dimension())
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.dimension()) +
                              " vs " + std::to_string(v.dimension()) + ")");
    if (u.dimension() == 0) throw ValidationError("cosine: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

std::vector<std::string> catalog_texts(const ActionCatalog& catalog) {
    std::vector<std::string> texts;
    texts.reserve(catalog.size());
    for (const auto& a : catalog.actions()) texts.push_back(collapse_whitespace(a.text));
    return texts;
}

}  // namespace

ActionMatcher::ActionMatcher(const ActionCatalog& catalog, EmbedBackend& encoder,
                             const std::optional<std::filesystem::path>& cache_dir)
    : catalog_(catalog), encoder_(encoder) {
    if (catalog_.size() == 0) throw ValidationError("matcher needs a non-empty catalog");

    std::optional<std::filesystem::path> cache_file;
    if (cache_dir) {
        cache_file = *cache_dir /
                     ("embeddings-" + slugify(encoder_.id()) + "-" + catalog_.digest() + ".json");
        if (std::filesystem::exists(*cache_file)) {
            try {
                const json j = json::parse(read_file(*cache_file));
                for (const auto& row : j.at("vectors")) {
                    EmbeddingVector v;
                    v.backend_id = encoder_.id();
                    v.values = row.get<std::vector<double>>();
                    catalog_embeddings_.push_back(std::move(v));
                }
                if (catalog_embeddings_.size() == catalog_.size()) return;
            } catch (...) {
                // Unreadable cache: fall through and recompute.
            }
            catalog_embeddings_.clear();
        }
    }

    catalog_embeddings_ = encoder_.embed(catalog_texts(catalog_));
    if (catalog_embeddings_.size() != catalog_.size())
        throw ValidationError("encoder returned " + std::to_string(catalog_embeddings_.size()) +
                              " vectors for " + std::to_string(catalog_.size()) + " actions");

    if (cache_file) {
        json vectors = json::array();
        for (const auto& v : catalog_embeddings_) vectors.push_back(v.values);
        json j{{"encoder_id", encoder_.id()},
               {"catalog_digest", catalog_.digest()},
               {"vectors", vectors}};
        write_file_atomic(*cache_file, j.dump() + "\n");
    }
}

int ActionMatcher::match_embedded(const EmbeddingVector& response) const {
    int best = 0;
    double best_score = -2.0;
    for (std::size_t i = 0; i < catalog_embeddings_.size(); ++i) {
        const double score = cosine(response, catalog_embeddings_[i]);
        if (score > best_score) {  // strict: ties keep the lowest index
            best_score = score;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int ActionMatcher::match(const std::string& response_text) const {
    const auto vectors = encoder_.embed({collapse_whitespace(response_text)});
    return match_embedded(vectors.at(0));
}

std::vector<int> ActionMatcher::match_batch(const std::vector<std::string>& responses,
                                            std::size_t batch_size) const {
    std::vector<int> out;
    out.reserve(responses.size());
    std::size_t i = 0;
    while (i < responses.size()) {
        const std::size_t end = std::min(i + batch_size, responses.size());
        std::vector<std::string> batch;
        batch.reserve(end - i);
        for (std::size_t k = i; k < end; ++k)
            batch.push_back(collapse_whitespace(responses[k]));
        const auto vectors = encoder_.embed(batch);
        if (vectors.size() != batch.size())
            throw ValidationError("encoder returned a short batch");
        for (const auto& v : vectors) out.push_back(match_embedded(v));
        i = end;
    }
    return out;
}

ActionLabel match_action(const std::string& response_text, const ActionCatalog& catalog,
                         EmbedBackend& encoder) {
    ActionMatcher matcher(catalog, encoder);
    return catalog.at(matcher.match(response_text));
}

EvalReport evaluate(const std::vector<EvalSample>& samples,
                    const std::vector<PredictionRecord>& predictions,
                    const ActionMatcher& matcher, const std::string& run_label) {
    if (samples.empty()) throw ValidationError("evaluate: no samples");
    if (predictions.empty()) throw ValidationError("evaluate: no predictions");

    const EvalSetting setting = predictions.front().setting;
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : predictions) {
        if (p.setting != setting)
            throw ValidationError("evaluate: predictions mix settings; split them per setting");
        if (!by_id.emplace(p.sample_id, &p).second)
            throw ValidationError("evaluate: duplicate prediction for sample " + p.sample_id +
                                  " in setting " + to_string(setting));
    }
    std::set<std::string> sample_ids;
    for (const auto& s : samples) sample_ids.insert(s.id);
    for (const auto& p : predictions) {
        if (!sample_ids.count(p.sample_id))
            throw ValidationError("evaluate: prediction references unknown sample id " +
                                  p.sample_id);
    }
    std::vector<std::string> missing;
    for (const auto& s : samples)
        if (!by_id.count(s.id)) missing.push_back(s.id);
    if (!missing.empty())
        throw ValidationError("evaluate: " + std::to_string(missing.size()) +
                              " samples have no prediction (first: " + missing.front() + ")");

    std::vector<std::string> responses;
    responses.reserve(samples.size());
    for (const auto& s : samples) responses.push_back(by_id[s.id]->response_text);
    const std::vector<int> matched = matcher.match_batch(responses);

    EvalReport report;
    report.label = run_label;
    report.setting = setting;
    report.encoder_id = matcher.catalog_embeddings().empty()
                            ? ""
                            : matcher.catalog_embeddings().front().backend_id;
    report.n_samples = static_cast<int>(samples.size());

    for (std::size_t i = 0; i < matcher.catalog().size(); ++i)
        report.per_label[static_cast<int>(i)] = LabelStats{};

    int correct_total = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const bool correct = matched[i] == samples[i].gold_action_index;
        auto& stats = report.per_label[samples[i].gold_action_index];
        stats.total += 1;
        if (correct) {
            stats.correct += 1;
            ++correct_total;
        }
        report.per_sample_correct.push_back(correct);
        report.sample_ids.push_back(samples[i].id);
    }
    for (auto& [idx, stats] : report.per_label)
        stats.accuracy = stats.total > 0 ? static_cast<double>(stats.correct) / stats.total : 0.0;
    report.accuracy = static_cast<double>(correct_total) / static_cast<double>(samples.size());
    return report;
}

SignificanceResult significance(const std::vector<bool>& baseline_correct,
                                const std::vector<bool>& variant_correct,
                                const BootstrapConfig& config) {
    if (baseline_correct.size() != variant_correct.size())
        throw ValidationError("significance: outcome vectors have different lengths (" +
                              std::to_string(baseline_correct.size()) + " vs " +
                              std::to_string(variant_correct.size()) + ")");
    if (baseline_correct.empty()) throw ValidationError("significance: empty outcome vectors");
    if (config.resamples < 1) throw ValidationError("significance: resamples must be >= 1");

    const std::size_t n = baseline_correct.size();
    std::vector<int> diff(n);
    for (std::size_t i = 0; i < n; ++i)
        diff[i] = static_cast<int>(variant_correct[i]) - static_cast<int>(baseline_correct[i]);

    std::mt19937_64 eng(config.seed);
    long long at_most_zero = 0, at_least_zero = 0;
    for (int b = 0; b < config.resamples; ++b) {
        long long sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += diff[eng() % n];
        if (sum <= 0) ++at_most_zero;
        if (sum >= 0) ++at_least_zero;
    }
    const double denom = static_cast<double>(config.resamples) + 1.0;
    const double lower = (static_cast<double>(at_most_zero) + 1.0) / denom;
    const double upper = (static_cast<double>(at_least_zero) + 1.0) / denom;
    SignificanceResult result;
    result.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    result.significant = result.p_value < config.alpha;
    return result;
}

std::array<BucketSummary, 4> bucketize(const std::map<int, double>& per_label_accuracy,
                                       std::size_t catalog_size) {
    if (per_label_accuracy.size() != catalog_size)
        throw ValidationError("bucketize: got " + std::to_string(per_label_accuracy.size()) +
                              " accuracies for a catalog of " + std::to_string(catalog_size));
    for (std::size_t i = 0; i < catalog_size; ++i)
        if (!per_label_accuracy.count(static_cast<int>(i)))
            throw ValidationError("bucketize: missing accuracy for label " + std::to_string(i));

    std::vector<std::pair<int, double>> sorted(per_label_accuracy.begin(),
                                               per_label_accuracy.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });

    // n = 4q + r: bucket 1 gets q members, the remainder lands on the later
    // buckets, so the lowest-accuracy bucket is never padded.
    const std::size_t n = sorted.size();
    const std::size_t q = n / 4, r = n % 4;
    std::array<std::size_t, 4> sizes{q, q, q, q};
    for (std::size_t k = 0; k < r; ++k) sizes[3 - k] += 1;

    std::array<BucketSummary, 4> buckets;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < 4; ++b) {
        double sum = 0.0;
        for (std::size_t k = 0; k < sizes[b]; ++k, ++pos) {
            buckets[b].members.push_back(sorted[pos].first);
            sum += sorted[pos].second;
        }
        buckets[b].mean_accuracy = sizes[b] > 0 ? sum / static_cast<double>(sizes[b]) : 0.0;
    }
    return buckets;
}

namespace {

std::string pad_to(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return w >= width ? s : s + std::string(width - w, ' ');
}

std::string rstrip(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace

std::string render_table(const std::vector<EvalReport>& reports) {
    if (reports.empty()) return "(no reports)\n";

    std::vector<std::string> rows;  // run labels, first-appearance order
    std::vector<EvalSetting> settings;
    std::vector<std::string> encoders;
    for (const auto& r : reports) {
        if (std::find(rows.begin(), rows.end(), r.label) == rows.end()) rows.push_back(r.label);
        if (std::find(settings.begin(), settings.end(), r.setting) == settings.end())
            settings.push_back(r.setting);
        if (std::find(encoders.begin(), encoders.end(), r.encoder_id) == encoders.end())
            encoders.push_back(r.encoder_id);
    }
    std::sort(settings.begin(), settings.end());  // utterance_only first

    auto find_report = [&](const std::string& row, EvalSetting s,
                           const std::string& enc) -> const EvalReport* {
        for (const auto& r : reports)
            if (r.label == row && r.setting == s && r.encoder_id == enc) return &r;
        return nullptr;
    };

    // Cell text: percentage, then "†" when significant, then "*" when best in
    // its column.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::string>> cells;
    for (std::size_t si = 0; si < settings.size(); ++si) {
        for (std::size_t ei = 0; ei < encoders.size(); ++ei) {
            double best = -1.0;
            for (const auto& row : rows) {
                const auto* r = find_report(row, settings[si], encoders[ei]);
                if (r != nullptr) best = std::max(best, r->accuracy);
            }
            std::vector<std::string> column;
            for (const auto& row : rows) {
                const auto* r = find_report(row, settings[si], encoders[ei]);
                if (r == nullptr) {
                    column.push_back("-");
                    continue;
                }
                std::string cell = format_pct(r->accuracy);
                if (r->significance && r->significance->significant) cell += "\xe2\x80\xa0";
                if (r->accuracy == best) cell += "*";
                column.push_back(std::move(cell));
            }
            cells[{si, ei}] = std::move(column);
        }
    }

    const std::string corner = "Model";
    std::size_t label_width = display_width(corner);
    for (const auto& row : rows) label_width = std::max(label_width, display_width(row));

    std::vector<std::vector<std::size_t>> col_width(settings.size());
    std::vector<std::size_t> group_width(settings.size());
    for (std::size_t si = 0; si < settings.size(); ++si) {
        col_width[si].resize(encoders.size());
        std::size_t sum = 0;
        for (std::size_t ei = 0; ei < encoders.size(); ++ei) {
            std::size_t w = display_width(encoders[ei]);
            for (const auto& cell : cells[{si, ei}]) w = std::max(w, display_width(cell));
            col_width[si][ei] = w;
            sum += w;
        }
        sum += 2 * (encoders.size() - 1);
        group_width[si] = std::max(sum, display_width(setting_display_name(settings[si])));
    }

    std::ostringstream out;
    auto emit_row = [&](const std::string& head, const std::vector<std::string>& segments) {
        std::string line = pad_to(head, label_width);
        for (const auto& seg : segments) line += " | " + seg;
        out << rstrip(line) << "\n";
    };

    {
        std::vector<std::string> segs;
        for (std::size_t si = 0; si < settings.size(); ++si)
            segs.push_back(pad_to(setting_display_name(settings[si]), group_width[si]));
        emit_row(corner, segs);
    }
    {
        std::vector<std::string> segs;
        for (std::size_t si = 0; si < settings.size(); ++si) {
            std::string seg;
            for (std::size_t ei = 0; ei < encoders.size(); ++ei) {
                if (ei) seg += "  ";
                seg += pad_to(encoders[ei], col_width[si][ei]);
            }
            segs.push_back(pad_to(rstrip(seg), group_width[si]));
        }
        emit_row("", segs);
    }
    {
        std::string line(label_width, '-');
        for (std::size_t si = 0; si < settings.size(); ++si)
            line += "-+-" + std::string(group_width[si], '-');
        out << line << "\n";
    }
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        std::vector<std::string> segs;
        for (std::size_t si = 0; si < settings.size(); ++si) {
            std::string seg;
            for (std::size_t ei = 0; ei < encoders.size(); ++ei) {
                if (ei) seg += "  ";
                seg += pad_to(cells[{si, ei}][ri], col_width[si][ei]);
            }
            segs.push_back(pad_to(rstrip(seg), group_width[si]));
        }
        emit_row(rows[ri], segs);
    }
    return out.str();
}

std::string render_buckets(const EvalReport& report) {
    if (!report.buckets) return {};
    std::ostringstream out;
    out << "Buckets (" << report.label << ", " << to_string(report.setting) << ", "
        << report.encoder_id << "):\n";
    for (std::size_t b = 0; b < report.buckets->size(); ++b) {
        const auto& bucket = (*report.buckets)[b];
        out << "  bucket " << (b + 1) << ": mean " << format_pct(bucket.mean_accuracy)
            << "%, labels";
        for (const int m : bucket.members) out << " " << m;
        out << "\n";
    }
    return out.str();
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json per_label = json::object();
        for (const auto& [idx, stats] : r.per_label) {
            per_label[std::to_string(idx)] = json{{"correct", stats.correct},
                                                  {"total", stats.total},
                                                  {"accuracy", stats.accuracy}};
        }
        json entry{{"label", r.label},
                   {"setting", to_string(r.setting)},
                   {"encoder_id", r.encoder_id},
                   {"n_samples", r.n_samples},
                   {"accuracy", r.accuracy},
                   {"per_label", per_label},
                   {"metadata",
                    json{{"text_normalization", "collapsed_whitespace"},
                         {"tie_break", "lowest_action_index"}}}};
        if (r.significance)
            entry["significance"] = json{{"p_value", r.significance->p_value},
                                         {"significant", r.significance->significant}};
        if (r.buckets) {
            json buckets = json::array();
            for (const auto& b : *r.buckets)
                buckets.push_back(
                    json{{"members", b.members}, {"mean_accuracy", b.mean_accuracy}});
            entry["buckets"] = buckets;
        }
        arr.push_back(std::move(entry));
    }
    return json{{"reports", arr}}.dump(2) + "\n";
}

}  // namespace roboaug
