#include "roboaug/mock_backends.hpp"

#include <array>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roboaug/png.hpp"
#include "roboaug/util.hpp"

namespace roboaug {

namespace {

using nlohmann::json;

// Word pools for the dialogue generator. Requests embed the location (place
// route) and a per-item adjective, which keeps (request, action) pairs unique
// across a whole augmentation run.
const std::array<std::string_view, 30> kAdjectives = {
    "dusty",    "cluttered", "crooked",  "overflowing", "smudged",  "tangled",
    "faded",    "sticky",    "wobbly",   "creaky",      "spotted",  "frayed",
    "drafty",   "dim",       "musty",    "scuffed",     "lopsided", "grimy",
    "squeaky",  "chipped",   "stained",  "bent",        "torn",     "cracked",
    "flickering", "rusty",   "matted",   "warped",      "peeling",  "jammed"};

const std::array<std::string_view, 20> kObjects = {
    "shelf",   "counter", "basket",  "cabinet", "rug",     "lamp",  "tray",
    "curtain", "drawer",  "bench",   "mirror",  "stool",   "rack",  "planter",
    "cushion", "blanket", "vase",    "bin",     "ledge",   "hook"};

const std::array<std::string_view, 10> kPlaceFrames = {
    "The {adj} {obj} in the {loc} has been bothering me all day.",
    "I keep noticing that {adj} {obj} every time I walk through the {loc}.",
    "Someone left the {adj} {obj} sitting out in the {loc} again.",
    "That {adj} {obj} really makes the {loc} feel neglected.",
    "It is hard to relax in the {loc} with the {obj} looking so {adj}.",
    "The {loc} would feel much nicer without that {adj} {obj}.",
    "I can barely use the {loc} while the {obj} stays this {adj}.",
    "Guests are coming and the {adj} {obj} in the {loc} is the first thing they will see.",
    "Every morning the {adj} {obj} in the {loc} catches my eye.",
    "The {obj} in the {loc} has gotten awfully {adj} lately."};

const std::array<std::string_view, 10> kActionFrames = {
    "The {adj} {obj} over there keeps distracting me.",
    "I have been putting up with that {adj} {obj} for too long.",
    "Something about the {adj} {obj} makes this whole corner feel off.",
    "It is getting hard to ignore the {adj} {obj} by the wall.",
    "That {adj} {obj} has needed attention since last week.",
    "I wish the spot near the {adj} {obj} felt more inviting.",
    "My eyes keep drifting to the {adj} {obj} whenever I sit down.",
    "The area around the {adj} {obj} is not really usable right now.",
    "Having the {obj} look this {adj} makes the chore obvious.",
    "The {adj} {obj} sums up the state of this place."};

const std::array<std::string_view, 12> kVerbs = {
    "tidy up",   "wipe down", "straighten", "organize", "clear off", "dust",
    "rearrange", "polish",    "fix",        "adjust",   "sort out",  "put away"};

const std::array<std::string_view, 8> kBackgroundFrames = {
    "A {adj2} {obj2} stands near the doorway, and the {obj} is in plain view.",
    "Soft light falls on a {adj2} {obj2} while the {obj} sits off to one side.",
    "Beside a {adj2} {obj2}, the {obj} clearly needs care.",
    "The {obj} rests against the wall next to a {adj2} {obj2}.",
    "A {adj2} {obj2} and the {obj} share the corner of the scene.",
    "In the foreground the {obj} waits, with a {adj2} {obj2} further back.",
    "The {obj} dominates the view; a {adj2} {obj2} fills the background.",
    "Near the window a {adj2} {obj2} leans, and the {obj} is within reach."};

std::string fill(std::string_view frame, const std::string& adj, const std::string& obj,
                 const std::string& loc) {
    std::string s(frame);
    s = replace_all(std::move(s), "{adj}", adj);
    s = replace_all(std::move(s), "{obj}", obj);
    s = replace_all(std::move(s), "{loc}", loc);
    return s;
}

// Extracts the location from "... between two people in a <location>".
std::string extract_location(const std::string& prompt) {
    const auto lines = split_lines(prompt);
    for (const auto& line : lines) {
        const std::size_t pos = line.find(" in a ");
        if (pos != std::string::npos) {
            const std::string loc = trim(line.substr(pos + 6));
            if (!loc.empty()) return loc;
        }
    }
    return "room";
}

// Extracts the pinned action from a "B: <action>" line, if any.
std::string extract_seed_action(const std::string& prompt) {
    for (const auto& line : split_lines(prompt)) {
        const std::string t = trim(line);
        if (starts_with_ci(t, "B:")) return trim(t.substr(2));
    }
    return {};
}

int detect_variant_block(const std::string& prompt) {
    if (prompt.find("indirectly without asking") != std::string::npos) return 0;
    if (prompt.find("without asking") != std::string::npos) return 1;
    return 2;
}

std::size_t pick(std::mt19937_64& eng, std::size_t n) { return eng() % n; }

}  // namespace

MockChatBackend::MockChatBackend(std::string id, std::uint64_t seed)
    : id_(std::move(id)), seed_(seed) {}

void MockChatBackend::set_fixture(std::string text) {
    std::lock_guard lock(mu_);
    fixture_ = std::move(text);
}

void MockChatBackend::push_scripted(std::string text) {
    std::lock_guard lock(mu_);
    scripted_.push_back(std::move(text));
}

std::string MockChatBackend::complete(const ChatRequest& request) {
    calls_.fetch_add(1);
    {
        std::lock_guard lock(mu_);
        if (!scripted_.empty()) {
            std::string next = std::move(scripted_.front());
            scripted_.pop_front();
            return next;
        }
        if (!fixture_.empty()) return fixture_;
    }
    return generate(request);
}

std::string MockChatBackend::generate(const ChatRequest& request) const {
    const std::string& prompt = request.prompt.text;
    std::mt19937_64 eng(fnv1a64(prompt, seed_ ^ 0x9e3779b97f4a7c15ull));

    const std::string seed_action = extract_seed_action(prompt);
    const bool action_route = !seed_action.empty();
    const std::string loc = action_route ? std::string("room") : extract_location(prompt);
    const int variant_block = action_route ? 0 : detect_variant_block(prompt);

    std::ostringstream out;
    out << "Here are ten conversation examples:\n\n";
    for (int i = 0; i < 10; ++i) {
        // The adjective index is unique per (variant, item) so requests never
        // collide within one generation batch.
        const std::string adj(kAdjectives[static_cast<std::size_t>(variant_block * 10 + i)]);
        const std::string obj(kObjects[(pick(eng, 1000) + static_cast<std::size_t>(i)) %
                                       kObjects.size()]);
        const std::string adj2(kAdjectives[pick(eng, kAdjectives.size())]);
        const std::string obj2(kObjects[pick(eng, kObjects.size())]);

        const auto& frames = action_route ? kActionFrames : kPlaceFrames;
        const std::string request_text =
            fill(frames[pick(eng, frames.size())], adj, obj, loc);
        const std::string action_text =
            action_route ? seed_action
                         : "I will " + std::string(kVerbs[pick(eng, kVerbs.size())]) + " the " +
                               obj + ".";
        std::string background =
            fill(kBackgroundFrames[pick(eng, kBackgroundFrames.size())], adj, obj, loc);
        background = replace_all(std::move(background), "{adj2}", adj2);
        background = replace_all(std::move(background), "{obj2}", obj2);

        out << (i + 1) << ". A: " << request_text << "\n";
        out << "B: " << action_text << "\n";
        out << "Background: " << background << "\n\n";
    }
    return out.str();
}

MockImageBackend::MockImageBackend(std::string id, std::uint64_t seed, bool subject_capable)
    : id_(std::move(id)), seed_(seed), subject_capable_(subject_capable) {}

ImageAsset MockImageBackend::generate(const ImageRequest& request,
                                      const std::filesystem::path& out_path) {
    calls_.fetch_add(1);
    if (request.prompt.subject_conditioned && !subject_capable_)
        throw BackendError(BackendErrorKind::capability, false,
                           "backend \"" + id_ + "\" cannot honor a subject-conditioned request");
    if (request.width <= 0 || request.height <= 0)
        throw BackendError(BackendErrorKind::protocol, false, "image size must be positive");

    std::uint64_t h = fnv1a64(request.prompt.text, seed_);
    if (request.prompt.subject_word) h = fnv1a64(*request.prompt.subject_word, h);
    if (request.seed) h ^= static_cast<std::uint64_t>(*request.seed) * 0x2545f4914f6cdd1dull;
    std::mt19937_64 eng(h);

    RgbImage img;
    img.width = request.width;
    img.height = request.height;
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
    const std::uint8_t base_r = static_cast<std::uint8_t>(eng() % 200 + 30);
    const std::uint8_t base_g = static_cast<std::uint8_t>(eng() % 200 + 30);
    const std::uint8_t base_b = static_cast<std::uint8_t>(eng() % 200 + 30);
    const int bands = static_cast<int>(eng() % 5) + 3;
    for (int y = 0; y < img.height; ++y) {
        const int shade = (y * bands / img.height) * 17;
        for (int x = 0; x < img.width; ++x) {
            auto* px = img.at(x, y);
            px[0] = static_cast<std::uint8_t>((base_r + shade + x * 31 / img.width) & 0xff);
            px[1] = static_cast<std::uint8_t>((base_g + shade) & 0xff);
            px[2] = static_cast<std::uint8_t>((base_b + shade * 2) & 0xff);
        }
    }
    return write_image_asset(request, id_, out_path, encode_png(img));
}

ImageAsset write_image_asset(const ImageRequest& request, const std::string& backend_id,
                             const std::filesystem::path& out_path,
                             const std::string& png_bytes) {
    write_file_atomic(out_path, png_bytes);

    ImageAsset asset;
    asset.path = out_path;
    asset.prompt_text = request.prompt.text;
    asset.backend_id = backend_id;
    asset.seed = request.seed;
    asset.created_at = iso8601_utc_now();

    json meta{{"prompt", request.prompt.text},
              {"backend_id", backend_id},
              {"model_id", request.model_id},
              {"width", request.width},
              {"height", request.height},
              {"subject_conditioned", request.prompt.subject_conditioned},
              {"created_at", asset.created_at}};
    if (request.seed) meta["seed"] = *request.seed;
    if (request.prompt.subject_word) meta["subject_word"] = *request.prompt.subject_word;
    if (request.prompt.reference_image) meta["reference_image"] = *request.prompt.reference_image;
    write_file_atomic(asset.sidecar_path(),
                      meta.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    return asset;
}

MockEmbedBackend::MockEmbedBackend(std::string id, std::size_t dimension, std::uint64_t seed)
    : id_(std::move(id)), dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::vector<EmbeddingVector> MockEmbedBackend::embed(const std::vector<std::string>& texts) {
    calls_.fetch_add(1);
    if (texts.empty())
        throw BackendError(BackendErrorKind::protocol, false, "embed called with no texts");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::mt19937_64 eng(fnv1a64(text, seed_ ^ 0xc2b2ae3d27d4eb4full));
        EmbeddingVector v;
        v.backend_id = id_;
        v.values.resize(dimension_);
        for (auto& x : v.values)
            x = static_cast<double>(eng() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace roboaug
