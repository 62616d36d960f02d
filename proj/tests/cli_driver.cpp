// End-to-end checks of the CLI surface: exit codes, report files, verify
// behavior. Invoked by ctest with the binary path.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roboaug/catalog.hpp"
#include "roboaug/dataset.hpp"
#include "roboaug/util.hpp"

#ifndef ROBOAUG_SOURCE_DIR
#error "ROBOAUG_SOURCE_DIR must be defined by the build"
#endif

using namespace roboaug;
using nlohmann::json;

namespace {

std::filesystem::path g_cli;
std::filesystem::path g_work;
const std::filesystem::path g_source = ROBOAUG_SOURCE_DIR;
int g_failures = 0;

void check(bool cond, const std::string& what) {
    if (cond) {
        std::cout << "ok: " << what << "\n";
    } else {
        ++g_failures;
        std::cout << "FAILED: " << what << "\n";
    }
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args, const std::string& tag) {
    const auto out = g_work / (tag + ".out");
    const auto err = g_work / (tag + ".err");
    const std::string cmd =
        g_cli.string() + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = std::filesystem::exists(out) ? read_file(out) : "";
    r.err = std::filesystem::exists(err) ? read_file(err) : "";
    return r;
}

std::string data_args() {
    const auto d = g_source / "data";
    return " --actions " + (d / "actions.txt").string() + " --locations " +
           (d / "locations.txt").string() + " --templates " + (d / "templates").string() +
           " --reference-image " + (d / "reference_room.png").string();
}

void write_eval_fixtures() {
    const auto catalog = load_action_catalog(g_source / "data" / "actions.txt");
    std::string samples, predictions, baseline;
    for (int i = 0; i < 40; ++i) {
        const int gold = i % static_cast<int>(catalog.size());
        json s{{"id", "s" + std::to_string(i)},
               {"utterance", "request " + std::to_string(i)},
               {"gold_action_index", gold}};
        if (i % 2 == 0) s["description"] = "scene " + std::to_string(i);
        samples += s.dump() + "\n";
        for (const char* setting : {"utterance_only", "utterance_plus_description"}) {
            // variant answers 30/40 correctly, baseline 10/40
            predictions += json{{"sample_id", "s" + std::to_string(i)},
                                {"setting", setting},
                                {"response_text",
                                 catalog.at(i % 4 == 3 ? (gold + 1) % 43 : gold).text}}
                               .dump() +
                           "\n";
            baseline += json{{"sample_id", "s" + std::to_string(i)},
                             {"setting", setting},
                             {"response_text",
                              catalog.at(i % 4 == 0 ? gold : (gold + 2) % 43).text}}
                            .dump() +
                        "\n";
        }
    }
    write_file(g_work / "samples.jsonl", samples);
    write_file(g_work / "predictions.jsonl", predictions);
    write_file(g_work / "baseline.jsonl", baseline);
}

void test_evaluate() {
    write_eval_fixtures();
    const std::string common =
        " --samples " + (g_work / "samples.jsonl").string() + " --predictions " +
        (g_work / "predictions.jsonl").string() + " --actions " +
        (g_source / "data" / "actions.txt").string() + " --mock --seed 3";

    const auto r =
        run("evaluate" + common + " --out " + (g_work / "eval1").string() + " --label tuned",
            "eval1");
    check(r.exit_code == 0, "evaluate exits 0");
    check(r.out.find("Utterance-Only") != std::string::npos &&
              r.out.find("Description + Utterance") != std::string::npos,
          "table shows both setting groups");
    const json report1 = json::parse(read_file(g_work / "eval1" / "report.json"));
    check(report1["reports"].size() == 4, "2 settings x 2 encoders -> 4 reports");

    const auto r2 = run("evaluate" + common + " --out " + (g_work / "eval2").string() +
                            " --label tuned --baseline " + (g_work / "baseline.jsonl").string() +
                            " --baseline-label base --buckets",
                        "eval2");
    check(r2.exit_code == 0, "evaluate with baseline and buckets exits 0");
    const json report2 = json::parse(read_file(g_work / "eval2" / "report.json"));
    check(report2["reports"].size() == 8, "baseline rows double the report count");
    int significant = 0, with_buckets = 0;
    for (const auto& rep : report2["reports"]) {
        if (rep.contains("significance") && rep["significance"]["significant"] == true)
            ++significant;
        if (rep.contains("buckets") && rep["buckets"].size() == 4) ++with_buckets;
    }
    check(significant == 4, "every variant cell is significantly better than the baseline");
    check(with_buckets == 8, "bucket summaries attach to every report");
    check(r2.out.find("\xe2\x80\xa0") != std::string::npos, "dagger appears in the table");
    check(r2.out.find("bucket 1") != std::string::npos, "bucket lines print after the table");

    // byte-reproducible report for a fixed seed
    const auto r3 = run("evaluate" + common + " --out " + (g_work / "eval3").string() +
                            " --label tuned",
                        "eval3");
    check(r3.exit_code == 0, "evaluate rerun exits 0");
    check(read_file(g_work / "eval1" / "report.json") ==
              read_file(g_work / "eval3" / "report.json"),
          "report.json is byte-identical across identical runs");

    // unknown sample id -> named with its line
    std::string bad = read_file(g_work / "predictions.jsonl");
    bad += json{{"sample_id", "ghost"},
                {"setting", "utterance_only"},
                {"response_text", "x"}}
               .dump() +
           "\n";
    write_file(g_work / "bad-preds.jsonl", bad);
    const auto r4 = run("evaluate --samples " + (g_work / "samples.jsonl").string() +
                            " --predictions " + (g_work / "bad-preds.jsonl").string() +
                            " --actions " + (g_source / "data" / "actions.txt").string() +
                            " --mock --out " + (g_work / "eval4").string(),
                        "eval4");
    check(r4.exit_code == 1, "unknown sample id exits 1");
    check(r4.err.find("ghost") != std::string::npos &&
              r4.err.find("line 81") != std::string::npos,
          "error names the id and line");
}

void test_augment_and_verify() {
    // small catalogs keep this quick
    write_file(g_work / "three-actions.txt",
               "I will water the plants\nI will sweep the floor\nI will feed the cat\n");
    write_file(g_work / "two-locations.txt", "kitchen\nbedroom\n");

    const std::string small_args =
        " --actions " + (g_work / "three-actions.txt").string() + " --locations " +
        (g_work / "two-locations.txt").string() + " --templates " +
        (g_source / "data" / "templates").string() + " --reference-image " +
        (g_source / "data" / "reference_room.png").string() + " --image-width 24" +
        " --image-height 24";

    const auto out = g_work / "ds";
    const auto r = run("augment both --mock --seed 11 --out " + out.string() + small_args,
                       "augment-small");
    check(r.exit_code == 0, "augment both exits 0");
    const auto manifest = load_manifest(out / "manifest.json");
    check(manifest.counts.place == 20 && manifest.counts.action == 30 &&
              manifest.counts.total == 50,
          "small-run counts are 20 place + 30 action = 50");
    check(std::filesystem::exists(out / "scenarios.jsonl") &&
              std::filesystem::exists(out / "failures.jsonl") &&
              std::filesystem::exists(out / "raw"),
          "output tree has scenarios.jsonl, failures.jsonl and raw/");
    check(trim(read_file(out / "failures.jsonl")).empty(), "no failures under mocks");

    check(run("verify --dataset " + out.string(), "verify-ok").exit_code == 0,
          "verify passes the fresh dataset");

    std::filesystem::remove(out / manifest.records.front().image);
    const auto rv = run("verify --dataset " + out.string(), "verify-dangling");
    check(rv.exit_code == 1, "verify exits 1 after an image is deleted");
    check(rv.err.find(manifest.records.front().id) != std::string::npos,
          "verify names the dangling record");

    // dry-run plans without touching the filesystem
    const auto rd = run("augment both --mock --out " + (g_work / "never").string() +
                            small_args + " --dry-run",
                        "augment-dry");
    check(rd.exit_code == 0, "dry-run exits 0");
    check(rd.out.find("planned chat requests: 5") != std::string::npos,
          "dry-run plans 2 place + 3 action chat calls");
    check(rd.out.find("planned image requests: 50") != std::string::npos,
          "dry-run plans 50 image calls");
    check(!std::filesystem::exists(g_work / "never"), "dry-run writes nothing");

    // ablation flag through the binary: every sidecar carries the marker
    const auto aout = g_work / "ds-ablate";
    const auto ra = run("augment action --mock --seed 11 --ablate-subject-conditioning --out " +
                            aout.string() + small_args,
                        "augment-ablate");
    check(ra.exit_code == 0, "augment action --ablate-subject-conditioning exits 0");
    int sidecars = 0, marked = 0;
    for (const auto& entry : std::filesystem::directory_iterator(aout / "images")) {
        if (entry.path().string().ends_with(".meta.json")) {
            ++sidecars;
            const json meta = json::parse(read_file(entry.path()));
            if (meta.contains("ablation") && meta["ablation"] == "no_subject_conditioning")
                ++marked;
        }
    }
    check(sidecars == 30 && marked == sidecars, "all 30 sidecars record the ablation");

    const auto rc = run("catalogs --actions " + (g_work / "three-actions.txt").string() +
                            " --locations " + (g_work / "two-locations.txt").string(),
                        "catalogs");
    check(rc.exit_code == 0, "catalogs exits 0");
    check(rc.out.find("actions (3") != std::string::npos &&
              rc.out.find("locations (2") != std::string::npos,
          "catalogs prints both counts");
}

void test_exit_codes() {
    check(run("augment sideways --mock --out " + (g_work / "x").string(), "usage").exit_code == 3,
          "bad route is a usage error (3)");
    check(run("nonsense", "usage2").exit_code == 3, "unknown subcommand is a usage error (3)");
    check(run("catalogs --actions /definitely/missing.txt", "missing").exit_code == 1,
          "missing catalog file is a validation error (1)");
    check(run("augment place --out " + (g_work / "x").string() + data_args(),
              "no-backends")
                  .exit_code == 1,
          "neither --backends nor --mock is a validation error (1)");
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") g_cli = argv[i + 1];
        if (flag == "--workdir") g_work = argv[i + 1];
    }
    if (g_cli.empty() || g_work.empty()) {
        std::cerr << "usage: roboaug_cli_driver --cli <binary> --workdir <dir>\n";
        return 2;
    }
    std::filesystem::remove_all(g_work);
    std::filesystem::create_directories(g_work);

    test_evaluate();
    test_augment_and_verify();
    test_exit_codes();

    if (g_failures != 0) {
        std::cout << g_failures << " CLI check(s) failed\n";
        return 1;
    }
    std::cout << "all CLI checks passed\n";
    return 0;
}
