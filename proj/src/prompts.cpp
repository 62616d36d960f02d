#include "roboaug/prompts.hpp"

#include <array>

#include "roboaug/util.hpp"

namespace roboaug {

namespace {

constexpr std::string_view kAmbiguityDefault =
    "made an ambiguous request indirectly without asking a question";
constexpr std::string_view kAmbiguityNoQuestion =
    "made an ambiguous request without asking a question";
constexpr std::string_view kAmbiguityPlain = "made an ambiguous request";

const std::array<std::string_view, 4> kPlaceholders = {
    "{location}", "[location]", "{reflected_action}", "[reflected_action]"};

void check_resolved(const std::string& text, const char* what) {
    for (auto ph : kPlaceholders) {
        if (text.find(ph) != std::string::npos)
            throw ValidationError(std::string(what) + " still contains placeholder " +
                                  std::string(ph));
    }
}

// Both brace and bracket spellings are accepted in template files.
std::string substitute(std::string text, std::string_view key, const std::string& value) {
    text = replace_all(std::move(text), "{" + std::string(key) + "}", value);
    text = replace_all(std::move(text), "[" + std::string(key) + "]", value);
    return text;
}

}  // namespace

std::string to_string(Route r) { return r == Route::place ? "place" : "action"; }

std::string to_string(PromptVariant v) {
    switch (v) {
        case PromptVariant::indirect_no_question: return "indirect_no_question";
        case PromptVariant::no_question: return "no_question";
        case PromptVariant::plain: return "plain";
    }
    return "indirect_no_question";
}

Route route_from_string(const std::string& s) {
    if (s == "place") return Route::place;
    if (s == "action") return Route::action;
    throw ValidationError("unknown route: " + s);
}

PromptVariant variant_from_string(const std::string& s) {
    if (s == "indirect_no_question" || s == "indirect") return PromptVariant::indirect_no_question;
    if (s == "no_question" || s == "no-question") return PromptVariant::no_question;
    if (s == "plain") return PromptVariant::plain;
    throw ValidationError("unknown prompt variant: " + s);
}

std::string variant_id_tag(PromptVariant v) {
    switch (v) {
        case PromptVariant::indirect_no_question: return "";
        case PromptVariant::no_question: return "noq";
        case PromptVariant::plain: return "plain";
    }
    return "";
}

PromptEngine::PromptEngine(std::string place_template, std::string action_template,
                           std::string image_prefix)
    : place_template_(std::move(place_template)),
      action_template_(std::move(action_template)),
      image_prefix_(trim(image_prefix)) {
    if (place_template_.empty()) throw ValidationError("place prompt template is empty");
    if (action_template_.empty()) throw ValidationError("action prompt template is empty");
    if (image_prefix_.empty()) throw ValidationError("image prefix template is empty");
}

PromptEngine PromptEngine::load(const std::filesystem::path& dir) {
    return PromptEngine(read_file(dir / "place_prompt.tmpl"),
                        read_file(dir / "action_prompt.tmpl"),
                        read_file(dir / "image_prefix.tmpl"));
}

PromptText PromptEngine::render_place_prompt(const std::string& location,
                                             PromptVariant variant) const {
    const std::string loc = trim(location);
    if (loc.empty()) throw ValidationError("location must be non-empty");

    std::string text = substitute(place_template_, "location", loc);
    if (variant != PromptVariant::indirect_no_question) {
        if (text.find(kAmbiguityDefault) == std::string::npos)
            throw ValidationError(
                "place template does not contain the ambiguity phrase needed for variant " +
                to_string(variant));
        text = replace_all(std::move(text), kAmbiguityDefault,
                           variant == PromptVariant::no_question ? kAmbiguityNoQuestion
                                                                 : kAmbiguityPlain);
    }
    check_resolved(text, "place prompt");
    return PromptText{trim(text), Route::place, variant};
}

PromptText PromptEngine::render_action_prompt(const ActionLabel& action) const {
    const std::string act = trim(action.text);
    if (act.empty()) throw ValidationError("action text must be non-empty");
    std::string text = substitute(action_template_, "reflected_action", act);
    check_resolved(text, "action prompt");
    return PromptText{trim(text), Route::action, PromptVariant::indirect_no_question};
}

ImagePrompt PromptEngine::render_image_prompt(
    const std::string& background, Route route,
    const std::optional<std::string>& reference_image) const {
    const std::string bg = trim(background);
    if (bg.empty()) throw ValidationError("background description must be non-empty");

    if (route == Route::place) {
        ImagePrompt p;
        p.text = image_prefix_ + " " + bg;
        p.subject_conditioned = false;
        return p;
    }
    if (!reference_image || reference_image->empty())
        throw ValidationError("action-route image prompts need a reference image");
    ImagePrompt p;
    p.text = bg;
    p.subject_conditioned = true;
    p.reference_image = *reference_image;
    p.subject_word = "room";
    return p;
}

}  // namespace roboaug
