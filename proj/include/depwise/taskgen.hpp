#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depwise/graph.hpp"

namespace depwise {

enum class NoiseKind { None, Disconnected, Irrelevant, Supporting };

std::string_view to_string(NoiseKind kind);
std::optional<NoiseKind> noise_from_string(std::string_view s);
const std::vector<NoiseKind>& all_noise_kinds();

// One synthetic story: a k-hop relation chain between the question endpoints,
// optionally salted with distractor triples that never change the answer.
struct StoryInstance {
    std::vector<Triple> triples;
    std::vector<std::string> sentences;  // one per triple, same order
    std::pair<std::string, std::string> question;
    RelationLabel gold = RelationLabel::Overlap;
    int k = 1;
    NoiseKind noise = NoiseKind::None;
    std::uint64_t seed = 0;  // per-instance stream; also picks templates
};

// Sum the per-hop offsets and map the component signs back to a label.
RelationLabel oracle_compose(const std::vector<RelationLabel>& chain);

// Deterministic for (seed, k, noise, n); gold labels are striped across the
// nine classes so any n >= 9 is balanced to within one instance per class.
std::vector<StoryInstance> generate(std::uint64_t seed, int k, NoiseKind noise, int n);

int template_count();
std::string render_triple(const Triple& t, int template_index);
std::string question_sentence(const std::string& src, const std::string& dst);

// Full text: one sentence per triple, then the question sentence.
std::string render(const StoryInstance& instance);

struct ParsedStory {
    std::vector<Triple> triples;
    std::pair<std::string, std::string> question;
};

// Inverse of render over the template grammar; unmatched or missing
// sentences raise ParseError carrying the 1-based offending sentence number.
ParsedStory parse(const std::string& text);

}  // namespace depwise
