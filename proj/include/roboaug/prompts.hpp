#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "roboaug/catalog.hpp"

namespace roboaug {

enum class Route { place, action };

// Ambiguity phrasings for the place-route dialogue prompt. The first is the
// default wording; the other two are the reduced variants used for the
// diverse-prompt comparison.
enum class PromptVariant { indirect_no_question, no_question, plain };

std::string to_string(Route r);
std::string to_string(PromptVariant v);
Route route_from_string(const std::string& s);
PromptVariant variant_from_string(const std::string& s);

// Short id-safe tag; empty for the default variant so ids keep their plain form.
std::string variant_id_tag(PromptVariant v);

/// Fully rendered dialogue-generation prompt. Guaranteed free of placeholder
/// tokens.
struct PromptText {
    std::string text;
    Route route = Route::place;
    PromptVariant variant = PromptVariant::indirect_no_question;  // place route only
};

/// Text-to-image prompt. When subject_conditioned is set, reference_image and
/// subject_word are both present.
struct ImagePrompt {
    std::string text;
    bool subject_conditioned = false;
    std::optional<std::string> reference_image;
    std::optional<std::string> subject_word;
};

/// Renders generation prompts from the template files shipped under
/// data/templates. Templates use {location} / {reflected_action}
/// placeholders; editing the files changes prompts without a rebuild.
class PromptEngine {
public:
    PromptEngine(std::string place_template, std::string action_template,
                 std::string image_prefix);

    // Reads place_prompt.tmpl, action_prompt.tmpl and image_prefix.tmpl.
    static PromptEngine load(const std::filesystem::path& template_dir);

    // Substitutes the location and, for the reduced variants, rewrites the
    // ambiguity line. Pure function of its arguments.
    PromptText render_place_prompt(const std::string& location, PromptVariant variant) const;

    // Substitutes the trimmed action text into the reflected-action template.
    PromptText render_action_prompt(const ActionLabel& action) const;

    // place: first-person prefix + background, plain text-to-image.
    // action: raw background with subject word "room" and the reference image.
    ImagePrompt render_image_prompt(const std::string& background, Route route,
                                    const std::optional<std::string>& reference_image) const;

    const std::string& place_template() const { return place_template_; }
    const std::string& action_template() const { return action_template_; }
    const std::string& image_prefix() const { return image_prefix_; }

private:
    std::string place_template_;
    std::string action_template_;
    std::string image_prefix_;
};

}  // namespace roboaug
