#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roboaug/prompts.hpp"

namespace roboaug {

/// One generated training scenario: an ambiguous request, the reflected
/// action that answers it, and a description of the surrounding environment.
struct Scenario {
    std::string id;          // route-prefixed, e.g. "place-kitchen-003"
    Route route = Route::place;
    std::string seed_value;  // location name or action text the prompt was built from
    std::string request;     // Person A's ambiguous utterance
    std::string action;      // Person B's reflected action
    std::string background;  // environment description
    PromptVariant variant = PromptVariant::indirect_no_question;

    bool operator==(const Scenario&) const = default;
};

// Whitespace-collapses and strips surrounding quotes from the three text
// fields. Idempotent; id, route, seed and variant are untouched.
Scenario normalize_scenario(Scenario s);

// Line-delimited JSON, one scenario per line with keys
// id, route, seed_value, request, action, background, variant.
void write_scenarios_jsonl(const std::vector<Scenario>& scenarios,
                           const std::filesystem::path& path);
std::vector<Scenario> load_scenarios_jsonl(const std::filesystem::path& path);

std::string scenario_to_json_line(const Scenario& s);
Scenario scenario_from_json_line(const std::string& line, int line_no);

}  // namespace roboaug
