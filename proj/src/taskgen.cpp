#include "depwise/taskgen.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <regex>
#include <sstream>

#include "depwise/errors.hpp"
#include "depwise/rng.hpp"

namespace depwise {

namespace {

constexpr int kTemplates = 3;

// {S} = subject, {T} = object; subject always appears first so the parser can
// capture entities positionally.
const std::array<std::array<const char*, kTemplates>, kNumRelationLabels>& templates() {
    static const std::array<std::array<const char*, kTemplates>, kNumRelationLabels> t = {{
        // above
        {{"{S} is above {T} and is on the same vertical plane.",
          "{S} is directly above {T}.",
          "{S} is placed on top of {T}."}},
        // below
        {{"{S} is below {T} and is on the same vertical plane.",
          "{S} is directly below {T}.",
          "{S} is placed under {T}."}},
        // left
        {{"{S} is to the left of {T} and is on the same horizontal plane.",
          "{S} is on the left side of {T}.",
          "{S} lies to the west of {T}."}},
        // right
        {{"{S} is to the right of {T} and is on the same horizontal plane.",
          "{S} is on the right side of {T}.",
          "{S} lies to the east of {T}."}},
        // upper-left
        {{"{S} is to the upper-left of {T}.",
          "{S} is at the top left of {T}.",
          "{S} lies to the northwest of {T}."}},
        // upper-right
        {{"{S} is to the upper-right of {T}.",
          "{S} is at the top right of {T}.",
          "{S} lies to the northeast of {T}."}},
        // lower-left
        {{"{S} is to the lower-left of {T}.",
          "{S} is at the bottom left of {T}.",
          "{S} lies to the southwest of {T}."}},
        // lower-right
        {{"{S} is to the lower-right of {T}.",
          "{S} is at the bottom right of {T}.",
          "{S} lies to the southeast of {T}."}},
        // overlap
        {{"{S} and {T} are at the same location.",
          "{S} is at the same location as {T}.",
          "{S} and {T} are overlapped."}},
    }};
    return t;
}

std::string fill_template(const std::string& tpl, const std::string& s, const std::string& t) {
    std::string out = tpl;
    out.replace(out.find("{S}"), 3, s);
    out.replace(out.find("{T}"), 3, t);
    return out;
}

std::string escape_regex(const std::string& s) {
    static const std::string special = R"(\.^$|()[]{}*+?)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::regex template_regex(const std::string& tpl) {
    std::string pat = escape_regex(tpl);
    auto sub = [&](const std::string& marker) {
        auto pos = pat.find(escape_regex(marker));
        pat.replace(pos, escape_regex(marker).size(), "([A-Z])");
    };
    sub("{S}");
    sub("{T}");
    return std::regex("^" + pat + "$");
}

struct CompiledTemplates {
    // (label, regex) per template; subject is capture 1, object capture 2
    std::vector<std::pair<RelationLabel, std::regex>> sentence;
    std::regex question;
};

const CompiledTemplates& compiled() {
    static const CompiledTemplates c = [] {
        CompiledTemplates out;
        for (int l = 0; l < kNumRelationLabels; ++l) {
            for (int t = 0; t < kTemplates; ++t) {
                out.sentence.emplace_back(static_cast<RelationLabel>(l),
                                          template_regex(templates()[l][t]));
            }
        }
        out.question = template_regex(
            "What is the relation of the agent {S} to the agent {T}?");
        return out;
    }();
    return c;
}

RelationLabel random_label(std::mt19937_64& rng) {
    return static_cast<RelationLabel>(
        std::uniform_int_distribution<int>(0, kNumRelationLabels - 1)(rng));
}

bool valid_offset(Offset o) {
    return o.dx >= -1 && o.dx <= 1 && o.dy >= -1 && o.dy <= 1;
}

// All (first, second) label pairs whose offsets sum to the target offset.
std::vector<std::pair<RelationLabel, RelationLabel>> two_hop_decompositions(Offset target) {
    std::vector<std::pair<RelationLabel, RelationLabel>> out;
    for (RelationLabel a : all_labels()) {
        Offset rest = {target.dx - offset_of(a).dx, target.dy - offset_of(a).dy};
        if (valid_offset(rest)) out.emplace_back(a, label_from_offset(rest));
    }
    return out;
}

StoryInstance generate_one(std::uint64_t instance_seed, int k, NoiseKind noise,
                           RelationLabel gold) {
    auto rng = seeded_rng(instance_seed);

    std::vector<char> letters(26);
    std::iota(letters.begin(), letters.end(), 'A');
    std::shuffle(letters.begin(), letters.end(), rng);
    int next_letter = 0;
    auto fresh = [&] { return std::string(1, letters[next_letter++]); };

    std::vector<std::string> chain(k + 1);
    for (auto& e : chain) e = fresh();

    std::vector<RelationLabel> relations(k);
    if (k == 1) {
        relations[0] = gold;
    } else {
        while (true) {
            for (auto& r : relations) r = random_label(rng);
            if (oracle_compose(relations) == gold) break;
        }
    }

    StoryInstance inst;
    inst.seed = instance_seed;
    inst.k = k;
    inst.noise = noise;
    inst.gold = gold;
    inst.question = {chain.front(), chain.back()};
    for (int i = 0; i < k; ++i) {
        inst.triples.push_back({chain[i], relations[i], chain[i + 1]});
    }

    switch (noise) {
        case NoiseKind::None:
            break;
        case NoiseKind::Disconnected: {
            std::string a = fresh();
            std::string b = fresh();
            inst.triples.push_back({a, random_label(rng), b});
            break;
        }
        case NoiseKind::Irrelevant: {
            std::string branch = fresh();
            const std::string& anchor =
                chain[std::uniform_int_distribution<int>(0, k)(rng)];
            RelationLabel r = random_label(rng);
            if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
                inst.triples.push_back({branch, r, anchor});
            } else {
                inst.triples.push_back({anchor, r, branch});
            }
            break;
        }
        case NoiseKind::Supporting: {
            int hop = std::uniform_int_distribution<int>(0, k - 1)(rng);
            std::string bridge = fresh();
            auto options = two_hop_decompositions(offset_of(relations[hop]));
            auto [first, second] =
                options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
            inst.triples.push_back({chain[hop], first, bridge});
            inst.triples.push_back({bridge, second, chain[hop + 1]});
            break;
        }
    }

    if (noise != NoiseKind::None) {
        std::shuffle(inst.triples.begin(), inst.triples.end(), rng);
    }

    inst.sentences.reserve(inst.triples.size());
    for (std::size_t i = 0; i < inst.triples.size(); ++i) {
        int tpl = static_cast<int>((instance_seed + i) % kTemplates);
        inst.sentences.push_back(render_triple(inst.triples[i], tpl));
    }
    return inst;
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::None: return "none";
        case NoiseKind::Disconnected: return "disconnected";
        case NoiseKind::Irrelevant: return "irrelevant";
        case NoiseKind::Supporting: return "supporting";
    }
    throw ArgumentError("unknown noise kind");
}

std::optional<NoiseKind> noise_from_string(std::string_view s) {
    for (NoiseKind k : all_noise_kinds()) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

const std::vector<NoiseKind>& all_noise_kinds() {
    static const std::vector<NoiseKind> kinds = {
        NoiseKind::None, NoiseKind::Disconnected, NoiseKind::Irrelevant,
        NoiseKind::Supporting};
    return kinds;
}

RelationLabel oracle_compose(const std::vector<RelationLabel>& chain) {
    if (chain.empty()) throw ArgumentError("cannot compose an empty relation chain");
    Offset total;
    for (RelationLabel r : chain) total = total + offset_of(r);
    return label_from_offset(total);
}

std::vector<StoryInstance> generate(std::uint64_t seed, int k, NoiseKind noise, int n) {
    if (k < 1 || k > 10) throw ArgumentError("hop count must lie in [1, 10]");
    if (n < 0) throw ArgumentError("instance count must be non-negative");
    std::vector<StoryInstance> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto gold = static_cast<RelationLabel>(i % kNumRelationLabels);
        out.push_back(generate_one(derive_seed(seed, static_cast<std::uint64_t>(i)), k,
                                   noise, gold));
    }
    return out;
}

int template_count() { return kTemplates; }

std::string render_triple(const Triple& t, int template_index) {
    if (template_index < 0 || template_index >= kTemplates) {
        throw ArgumentError("template index out of range");
    }
    return fill_template(templates()[static_cast<int>(t.label)][template_index], t.src, t.dst);
}

std::string question_sentence(const std::string& src, const std::string& dst) {
    return fill_template("What is the relation of the agent {S} to the agent {T}?", src, dst);
}

std::string render(const StoryInstance& instance) {
    std::ostringstream out;
    for (const auto& s : instance.sentences) out << s << '\n';
    out << question_sentence(instance.question.first, instance.question.second) << '\n';
    return out.str();
}

ParsedStory parse(const std::string& text) {
    ParsedStory story;
    bool saw_question = false;

    std::istringstream stream(text);
    std::string line;
    int index = 0;
    while (std::getline(stream, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) {
            ++index;
            continue;
        }
        line = line.substr(start);

        std::smatch m;
        if (std::regex_match(line, m, compiled().question)) {
            if (saw_question) throw ParseError("second question sentence", index + 1);
            story.question = {m[1].str(), m[2].str()};
            saw_question = true;
            ++index;
            continue;
        }
        bool matched = false;
        for (const auto& [label, re] : compiled().sentence) {
            if (std::regex_match(line, m, re)) {
                story.triples.push_back({m[1].str(), label, m[2].str()});
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError("sentence matches no known template", index + 1);
        ++index;
    }
    if (!saw_question) throw ParseError("no question sentence found", index + 1);
    return story;
}

}  // namespace depwise
