#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "roboaug/scenario.hpp"

namespace roboaug {

/// Nothing usable could be extracted from the raw backend output.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseWarning {
    int line = 0;  // 1-based line in the raw text; 0 when not line-specific
    std::string message;
};

/// Result of parsing one raw chat completion. Scenarios are normalized and
/// carry sequential ids; shortfalls and oddities are surfaced as warnings,
/// never silently padded.
struct ParseReport {
    std::vector<Scenario> scenarios;
    int expected_count = 0;
    std::vector<ParseWarning> warnings;
};

// Extracts scenarios from free-form chat output. Accepted shapes:
//   - items introduced by "N." / "N)" / "-" / "*" heads, or separated by
//     blank lines when no heads are present;
//   - speaker tags "A:", "Person A:", "B:", "Person B:" (case-insensitive),
//     inline or at line starts;
//   - background via "Background:", "(Background: ...)", or the first
//     untagged line after B's.
// Items missing a field are dropped with a warning naming the item; requests
// containing a question mark are kept but warned. For the action route the
// reflected action is pinned to seed_value (drift is warned). Throws
// ParseError when nothing parses; never crashes on arbitrary input.
ParseReport parse_scenarios(const std::string& raw, Route route, const std::string& seed_value,
                            int expected_count);

}  // namespace roboaug
