#include <doctest.h>

#include "roboaug/catalog.hpp"
#include "roboaug/util.hpp"
#include "test_helpers.hpp"

using namespace roboaug;

TEST_CASE("bundled action catalog has 43 entries with positional indices") {
    const auto catalog = load_action_catalog(testutil::data_dir() / "actions.txt");
    CHECK(catalog.size() == 43);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        CHECK(catalog.actions()[i].index == static_cast<int>(i));
        CHECK_FALSE(catalog.actions()[i].text.empty());
    }
    // every label round-trips through its own index
    for (const auto& a : catalog.actions()) CHECK(catalog.at(a.index).text == a.text);
}

TEST_CASE("bundled location catalog has 10 entries") {
    const auto catalog = load_location_catalog(testutil::data_dir() / "locations.txt");
    CHECK(catalog.locations.size() == 10);
}

TEST_CASE("single-action catalog is rejected") {
    testutil::TempDir tmp("catalog-single");
    write_file(tmp.path() / "one.txt", "I will clean up the table\n");
    CHECK_THROWS_AS(load_action_catalog(tmp.path() / "one.txt"), ValidationError);
}

TEST_CASE("duplicate actions are reported with both line numbers") {
    testutil::TempDir tmp("catalog-dup");
    write_file(tmp.path() / "dup.txt",
               "I will sweep the floor\nI will water the plants\nI will mop the floor\n"
               "I will water the plants\n");
    try {
        load_action_catalog(tmp.path() / "dup.txt");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("I will water the plants") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
        CHECK(msg.find("4") != std::string::npos);
    }
}

TEST_CASE("comments and blank lines are ignored, order is preserved") {
    testutil::TempDir tmp("catalog-comments");
    write_file(tmp.path() / "locs.txt", "# rooms\nbedroom\n\nbathroom\ndining room\n");
    const auto catalog = load_location_catalog(tmp.path() / "locs.txt");
    REQUIRE(catalog.locations.size() == 3);
    CHECK(catalog.locations[0] == "bedroom");
    CHECK(catalog.locations[1] == "bathroom");
    CHECK(catalog.locations[2] == "dining room");
}

TEST_CASE("missing and empty catalog files are errors") {
    testutil::TempDir tmp("catalog-missing");
    CHECK_THROWS_AS(load_action_catalog(tmp.path() / "nope.txt"), ValidationError);
    write_file(tmp.path() / "empty.txt", "# nothing here\n\n");
    CHECK_THROWS_AS(load_action_catalog(tmp.path() / "empty.txt"), ValidationError);
    CHECK_THROWS_AS(load_location_catalog(tmp.path() / "empty.txt"), ValidationError);
}

TEST_CASE("duplicate locations are rejected") {
    testutil::TempDir tmp("catalog-duploc");
    write_file(tmp.path() / "locs.txt", "kitchen\nkitchen\n");
    CHECK_THROWS_AS(load_location_catalog(tmp.path() / "locs.txt"), ValidationError);
}

TEST_CASE("catalogs round-trip through save and reload") {
    testutil::TempDir tmp("catalog-roundtrip");
    const auto actions = load_action_catalog(testutil::data_dir() / "actions.txt");
    save_action_catalog(actions, tmp.path() / "actions.txt");
    const auto reloaded = load_action_catalog(tmp.path() / "actions.txt");
    CHECK(reloaded.actions() == actions.actions());
    CHECK(reloaded.digest() == actions.digest());

    const auto locations = load_location_catalog(testutil::data_dir() / "locations.txt");
    save_location_catalog(locations, tmp.path() / "locations.txt");
    CHECK(load_location_catalog(tmp.path() / "locations.txt").locations == locations.locations);
}

TEST_CASE("entries are trimmed before comparison") {
    testutil::TempDir tmp("catalog-trim");
    write_file(tmp.path() / "locs.txt", "  kitchen  \nbedroom\n");
    const auto catalog = load_location_catalog(tmp.path() / "locs.txt");
    CHECK(catalog.locations[0] == "kitchen");
}
