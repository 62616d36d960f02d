#include <doctest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "roboaug/parser.hpp"
#include "roboaug/util.hpp"
#include "test_helpers.hpp"

using namespace roboaug;
using nlohmann::json;

TEST_CASE("two well-formed inline items parse cleanly") {
    const std::string raw =
        "1. A: The plants look thirsty. B: I will water the plants. Background: a wilting "
        "fern sits on the windowsill.\n"
        "2. A: It's getting dark in here. B: I will turn on the lamp. Background: a floor "
        "lamp stands beside the sofa.";
    const auto report = parse_scenarios(raw, Route::place, "kitchen", 2);
    REQUIRE(report.scenarios.size() == 2);
    CHECK(report.warnings.empty());
    CHECK(report.scenarios[0].id == "place-kitchen-001");
    CHECK(report.scenarios[0].request == "The plants look thirsty.");
    CHECK(report.scenarios[0].action == "I will water the plants.");
    CHECK(report.scenarios[0].background == "a wilting fern sits on the windowsill.");
    CHECK(report.scenarios[1].id == "place-kitchen-002");
    CHECK(report.scenarios[1].action == "I will turn on the lamp.");
}

TEST_CASE("Person A/Person B tags parse the same as short tags") {
    const auto long_form = read_file(testutil::fixtures_dir() / "parser" / "05_person_tags.txt");
    const auto short_form =
        read_file(testutil::fixtures_dir() / "parser" / "06_short_tags_equiv.txt");
    const auto a = parse_scenarios(long_form, Route::place, "bathroom", 5);
    const auto b = parse_scenarios(short_form, Route::place, "bathroom", 5);
    REQUIRE(a.scenarios.size() == b.scenarios.size());
    for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
        CHECK(a.scenarios[i].request == b.scenarios[i].request);
        CHECK(a.scenarios[i].action == b.scenarios[i].action);
        CHECK(a.scenarios[i].background == b.scenarios[i].background);
    }
}

TEST_CASE("item 7 without a background is dropped with a warning naming it") {
    const auto raw =
        read_file(testutil::fixtures_dir() / "parser" / "07_missing_background_item7.txt");
    const auto report = parse_scenarios(raw, Route::place, "living room", 10);
    CHECK(report.scenarios.size() == 9);
    int named = 0;
    for (const auto& w : report.warnings)
        if (w.message.find("item 7") != std::string::npos) ++named;
    CHECK(named == 1);
    // ids stay dense after the drop
    CHECK(report.scenarios.back().id == "place-living-room-009");
}

TEST_CASE("fixtures corpus parses with the expected scenario and warning counts") {
    const auto dir = testutil::fixtures_dir() / "parser";
    const json expected = json::parse(read_file(dir / "expected.json"));
    REQUIRE(expected.size() >= 20);
    for (const auto& [file, exp] : expected.items()) {
        CAPTURE(file);
        const std::string raw = read_file(dir / file);
        const Route route = route_from_string(exp.at("route").get<std::string>());
        const std::string seed = exp.at("seed_value").get<std::string>();
        const int expected_count = exp.at("expected_count").get<int>();
        if (exp.at("error").get<bool>()) {
            CHECK_THROWS_AS(parse_scenarios(raw, route, seed, expected_count), ParseError);
            continue;
        }
        const auto report = parse_scenarios(raw, route, seed, expected_count);
        CHECK(report.scenarios.size() == exp.at("scenarios").get<std::size_t>());
        CHECK(report.warnings.size() == exp.at("warnings").get<std::size_t>());
        for (const auto& s : report.scenarios) {
            CHECK_FALSE(s.request.empty());
            CHECK_FALSE(s.action.empty());
            CHECK_FALSE(s.background.empty());
            // normalize is idempotent across the whole corpus
            CHECK(normalize_scenario(s) == s);
        }
    }
}

TEST_CASE("question-mark requests are kept and warned") {
    const auto raw = read_file(testutil::fixtures_dir() / "parser" / "08_question_requests.txt");
    const auto report = parse_scenarios(raw, Route::place, "hallway", 10);
    CHECK(report.scenarios.size() == 10);
    int q = 0;
    for (const auto& w : report.warnings)
        if (w.message.find("question mark") != std::string::npos) ++q;
    CHECK(q == 3);
}

TEST_CASE("action route pins the reflected action to the seed text") {
    const auto raw = read_file(testutil::fixtures_dir() / "parser" / "23_action_route_drift.txt");
    const auto report = parse_scenarios(raw, Route::action, "I will water the plants", 3);
    REQUIRE(report.scenarios.size() == 3);
    for (const auto& s : report.scenarios) {
        CHECK(s.action == "I will water the plants");
        CHECK(s.seed_value == "I will water the plants");
    }
    REQUIRE(report.warnings.size() == 1);
    CHECK(report.warnings[0].message.find("differs") != std::string::npos);
}

TEST_CASE("quoted utterances lose their surrounding quotes") {
    const auto raw = read_file(testutil::fixtures_dir() / "parser" / "15_quoted_utterances.txt");
    const auto report = parse_scenarios(raw, Route::place, "home office", 5);
    REQUIRE(report.scenarios.size() == 5);
    CHECK(report.scenarios[0].request == "The plants look thirsty.");
    CHECK(report.scenarios[0].action == "I will water the plants.");
    CHECK(report.scenarios[1].request == "The driveway is icy.");
}

TEST_CASE("normalize collapses whitespace and strips quotes") {
    Scenario s;
    s.request = "  \"The plants look thirsty.\"  ";
    s.action = "I will  water\tthe plants.";
    s.background = "a  fern   sits\n on the sill";
    const auto n = normalize_scenario(s);
    CHECK(n.request == "The plants look thirsty.");
    CHECK(n.action == "I will water the plants.");
    CHECK(n.background == "a fern sits on the sill");
}

TEST_CASE("normalize is idempotent, even for nested quoting") {
    Scenario s;
    s.request = "\"\"doubly quoted\"\"";
    s.action = "'single'";
    s.background = "**bold wrapper**";
    const auto once = normalize_scenario(s);
    const auto twice = normalize_scenario(once);
    CHECK(once == twice);
    CHECK(once.request == "doubly quoted");
    CHECK(once.background == "bold wrapper");
}

TEST_CASE("normalize leaves id and route untouched") {
    Scenario s;
    s.id = "place-kitchen-001";
    s.route = Route::place;
    s.seed_value = "kitchen";
    s.request = " x ";
    s.action = " y ";
    s.background = " z ";
    const auto n = normalize_scenario(s);
    CHECK(n.id == s.id);
    CHECK(n.route == s.route);
    CHECK(n.seed_value == s.seed_value);
}

TEST_CASE("zero parseable scenarios is a hard error") {
    CHECK_THROWS_AS(parse_scenarios("complete nonsense with no structure", Route::place,
                                    "kitchen", 10),
                    ParseError);
    CHECK_THROWS_AS(parse_scenarios("   \n\n  ", Route::place, "kitchen", 10), ParseError);
}

TEST_CASE("expected_count below one is rejected") {
    CHECK_THROWS_AS(parse_scenarios("1. A: x. B: y. Background: z.", Route::place, "kitchen", 0),
                    ValidationError);
}

TEST_CASE("parsing is deterministic") {
    const auto raw = read_file(testutil::fixtures_dir() / "parser" / "01_numbered_dot_inline.txt");
    const auto a = parse_scenarios(raw, Route::place, "kitchen", 10);
    const auto b = parse_scenarios(raw, Route::place, "kitchen", 10);
    CHECK(a.scenarios == b.scenarios);
}

TEST_CASE("arbitrary bytes never crash the parser") {
    std::mt19937_64 eng(42);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t len = eng() % 600;
        std::string raw;
        raw.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            // mix raw bytes, ASCII structure characters and multi-byte UTF-8
            switch (eng() % 4) {
                case 0: raw.push_back(static_cast<char>(eng() % 256)); break;
                case 1: raw.push_back("0123456789.:)AB\n \t-*"[eng() % 20]); break;
                case 2: raw += "\xe2\x80\xa2"; break;
                default: raw += "\xf0\x9f\x99\x82"; break;
            }
        }
        try {
            const auto report = parse_scenarios(raw, Route::place, "kitchen", 10);
            CHECK(!report.scenarios.empty());
        } catch (const ParseError&) {
            // fine: garbage in, explicit error out
        }
    }
}

TEST_CASE("scenario JSONL round-trips") {
    testutil::TempDir tmp("scenario-jsonl");
    const auto raw = read_file(testutil::fixtures_dir() / "parser" / "01_numbered_dot_inline.txt");
    auto report = parse_scenarios(raw, Route::place, "kitchen", 10);
    const auto path = tmp.path() / "scenarios.jsonl";
    write_scenarios_jsonl(report.scenarios, path);
    const auto reloaded = load_scenarios_jsonl(path);
    CHECK(reloaded == report.scenarios);
}

TEST_CASE("scenario JSONL loader reports the offending line") {
    testutil::TempDir tmp("scenario-jsonl-bad");
    const auto path = tmp.path() / "bad.jsonl";
    write_file(path, "{\"id\": \"x\"}\n");
    try {
        load_scenarios_jsonl(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}
