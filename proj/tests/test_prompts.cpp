#include <doctest.h>

#include "roboaug/prompts.hpp"
#include "roboaug/util.hpp"
#include "test_helpers.hpp"

using namespace roboaug;

namespace {
PromptEngine engine() { return PromptEngine::load(testutil::templates_dir()); }
}

TEST_CASE("place prompt substitutes the location into the shipped template") {
    const auto p = engine().render_place_prompt("kitchen", PromptVariant::indirect_no_question);
    CHECK(p.route == Route::place);
    CHECK(p.text.rfind("Give me ten conversation examples between two people in a kitchen", 0) ==
          0);
    CHECK(p.text.find("Person A made an ambiguous request indirectly without asking a question "
                      "to Person B") != std::string::npos);
    CHECK(p.text.find("And Person B responded with a reflected action to A") != std::string::npos);
    CHECK(p.text.find("Each conversation should be one utterance") != std::string::npos);
    CHECK(p.text.find("describe some related object in the background") != std::string::npos);
}

TEST_CASE("prompt variants rewrite only the ambiguity line") {
    const auto eng = engine();
    const auto base = eng.render_place_prompt("bedroom", PromptVariant::indirect_no_question);
    const auto noq = eng.render_place_prompt("bedroom", PromptVariant::no_question);
    const auto plain = eng.render_place_prompt("bedroom", PromptVariant::plain);

    CHECK(noq.text.find("Person A made an ambiguous request without asking a question to "
                        "Person B") != std::string::npos);
    CHECK(plain.text.find("Person A made an ambiguous request to Person B") != std::string::npos);
    CHECK(plain.text.find("without asking") == std::string::npos);

    // every other line matches the default rendering
    const auto base_lines = split_lines(base.text);
    for (const auto* variant : {&noq, &plain}) {
        const auto lines = split_lines(variant->text);
        REQUIRE(lines.size() == base_lines.size());
        int differing = 0;
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (lines[i] != base_lines[i]) ++differing;
        CHECK(differing == 1);
    }
}

TEST_CASE("empty location is rejected") {
    CHECK_THROWS_AS(engine().render_place_prompt("", PromptVariant::plain), ValidationError);
    CHECK_THROWS_AS(engine().render_place_prompt("   ", PromptVariant::indirect_no_question),
                    ValidationError);
}

TEST_CASE("action prompt pins the reflected action on the B line") {
    const auto p = engine().render_action_prompt({0, "I will clean up the table"});
    CHECK(p.route == Route::action);
    bool found_b_line = false;
    for (const auto& line : split_lines(p.text))
        if (line == "B: I will clean up the table") found_b_line = true;
    CHECK(found_b_line);
    // substituted exactly once
    std::size_t count = 0, pos = 0;
    while ((pos = p.text.find("I will clean up the table", pos)) != std::string::npos) {
        ++count;
        pos += 1;
    }
    CHECK(count == 1);
}

TEST_CASE("action text is trimmed before substitution") {
    const auto p = engine().render_action_prompt({3, "  I will fetch a banana  "});
    CHECK(p.text.find("B: I will fetch a banana\n") != std::string::npos);
    CHECK(p.text.find("banana  ") == std::string::npos);
}

TEST_CASE("rendered prompts never contain placeholder tokens") {
    const auto eng = engine();
    const char* locations[] = {"kitchen", "dining room", "attic nook", "x"};
    for (const auto* loc : locations) {
        for (const auto v : {PromptVariant::indirect_no_question, PromptVariant::no_question,
                             PromptVariant::plain}) {
            const auto p = eng.render_place_prompt(loc, v);
            CHECK(p.text.find("{location}") == std::string::npos);
            CHECK(p.text.find("[location]") == std::string::npos);
            CHECK(p.text.find("{reflected_action}") == std::string::npos);
        }
    }
    const auto ap = eng.render_action_prompt({0, "I will dust the shelves"});
    CHECK(ap.text.find("{reflected_action}") == std::string::npos);
    CHECK(ap.text.find("[reflected_action]") == std::string::npos);

    // a value that smuggles a placeholder in cannot satisfy the invariant
    CHECK_THROWS_AS(eng.render_place_prompt("a [location] literal", PromptVariant::plain),
                    ValidationError);
}

TEST_CASE("rendering is pure: identical inputs give identical prompts") {
    const auto eng = engine();
    const auto a = eng.render_place_prompt("garage", PromptVariant::no_question);
    const auto b = eng.render_place_prompt("garage", PromptVariant::no_question);
    CHECK(a.text == b.text);
}

TEST_CASE("place image prompt gets the first-person prefix") {
    const auto p = engine().render_image_prompt("a tidy kitchen with dishes by the sink",
                                                Route::place, std::nullopt);
    CHECK(p.text ==
          "first-person view from a robot's camera of a tidy kitchen with dishes by the sink");
    CHECK_FALSE(p.subject_conditioned);
    CHECK_FALSE(p.reference_image.has_value());
}

TEST_CASE("action image prompt is subject-conditioned on \"room\"") {
    const auto p = engine().render_image_prompt("a desk with scattered papers", Route::action,
                                                std::string("ref.png"));
    CHECK(p.subject_conditioned);
    REQUIRE(p.subject_word.has_value());
    CHECK(*p.subject_word == "room");
    REQUIRE(p.reference_image.has_value());
    CHECK(*p.reference_image == "ref.png");
    CHECK(p.text == "a desk with scattered papers");
}

TEST_CASE("action image prompt without a reference image is an error") {
    CHECK_THROWS_AS(engine().render_image_prompt("anything", Route::action, std::nullopt),
                    ValidationError);
}

TEST_CASE("empty background is rejected") {
    CHECK_THROWS_AS(engine().render_image_prompt("", Route::place, std::nullopt),
                    ValidationError);
}
