// End-to-end acceptance gates. Each check prints exactly one PASS/FAIL
// verdict line (indented lines are supporting detail); the process exits
// with the number of failed checks.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "depwise/breadth.hpp"
#include "depwise/engine.hpp"
#include "depwise/io.hpp"
#include "depwise/model.hpp"
#include "depwise/props.hpp"
#include "depwise/rng.hpp"
#include "depwise/taskgen.hpp"
#include "depwise/tpr.hpp"
#include "depwise/train.hpp"

using namespace depwise;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int number, const std::string& name, bool pass, const std::string& detail,
             double seconds) {
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << "  " << number << ". " << name;
    if (!detail.empty()) line << ": " << detail;
    line.precision(3);
    line << std::fixed << "  [" << seconds << " s]";
    std::cout << line.str() << "\n" << std::flush;
    if (!pass) ++failures;
}

void note(const std::string& text) { std::cout << "      " << text << "\n" << std::flush; }

template <typename Body>
void criterion(int number, const std::string& name, Body body) {
    auto start = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        std::tie(pass, detail) = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    verdict(number, name, pass, detail, seconds);
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(DEPWISE_BIN) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    CliResult result;
    if (!pipe) return result;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) {
        result.output.append(buf.data(), n);
    }
    int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() /
               ("depwise-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string prop_summary(const std::vector<PropResult>& results) {
    std::ostringstream out;
    for (const auto& r : results) {
        note(std::string(r.pass ? "pass " : "FAIL ") + r.name + "  " + r.detail);
        if (!r.pass) out << r.name << " failed; ";
    }
    return out.str();
}

// Placement-consistent random story: nodes on a grid, adjacent pairs linked.
std::vector<Triple> random_consistent_triples(std::mt19937_64& rng, int max_nodes) {
    int n = std::uniform_int_distribution<int>(3, max_nodes)(rng);
    std::vector<Offset> pos(n);
    for (auto& p : pos) {
        p.dx = std::uniform_int_distribution<int>(-3, 3)(rng);
        p.dy = std::uniform_int_distribution<int>(-3, 3)(rng);
    }
    std::vector<Triple> triples;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) > 0.4) continue;
            Offset delta{pos[a].dx - pos[b].dx, pos[a].dy - pos[b].dy};
            if (std::abs(delta.dx) > 1 || std::abs(delta.dy) > 1) continue;
            triples.push_back({std::string(1, static_cast<char>('A' + a)),
                               label_from_offset(delta),
                               std::string(1, static_cast<char>('A' + b))});
        }
    }
    if (triples.empty()) triples.push_back({"A", RelationLabel::Left, "B"});
    return triples;
}

bool memories_identical(const std::vector<NodeMemory>& a,
                        const std::vector<NodeMemory>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i].matrix->data;
        const auto& y = b[i].matrix->data;
        if (x.size() != y.size()) return false;
        if (std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
    }
    return true;
}

double desk_accuracy(AggregatorKind aggregator) {
    std::vector<StoryInstance> train_set, val_set, test_set;
    for (int k : {1, 2, 3}) {
        int n = k == 3 ? 1666 : 1667;
        auto tr = generate(derive_seed(42, static_cast<std::uint64_t>(k)), k,
                           NoiseKind::None, n);
        train_set.insert(train_set.end(), tr.begin(), tr.end());
        auto va = generate(derive_seed(42, 100 + static_cast<std::uint64_t>(k)), k,
                           NoiseKind::None, 100);
        val_set.insert(val_set.end(), va.begin(), va.end());
        auto te = generate(derive_seed(42, 200 + static_cast<std::uint64_t>(k)), k,
                           NoiseKind::None, 300);
        test_set.insert(test_set.end(), te.begin(), te.end());
    }

    ModelParams params = init_model(64, aggregator, 42);
    DepthTrainable trainable(params);
    TrainConfig cfg;
    cfg.lr_engine = 1e-3;
    cfg.lr_embed = 1e-3;
    cfg.batch_size = 32;
    cfg.max_epochs = 3;
    cfg.early_stop_patience = 10;
    cfg.seed = 42;
    train(trainable, train_set, val_set, cfg);

    auto report = evaluate(
        [&](const StoryInstance& inst) { return model_predict(inst, params); }, test_set);
    return report.accuracy;
}

template <typename T>
concept has_layer_knob = requires(T t) { t.num_layers(); };

}  // namespace

int main() {
    std::cout << "acceptance checks\n\n" << std::flush;
    auto dir = scratch_dir();

    criterion(1, "exact mode scores 100% for every k and noise kind", [&] {
        auto start = Clock::now();
        const char* kinds[] = {"none", "disconnected", "irrelevant", "supporting"};
        long long total = 0;
        int combos_ok = 0;
        for (int k = 1; k <= 10; ++k) {
            for (int j = 0; j < 4; ++j) {
                auto data = (dir / "c1.jsonl").string();
                std::uint64_t seed = derive_seed(2024, static_cast<std::uint64_t>(k * 10 + j));
                std::ostringstream gen;
                gen << "gen --seed " << seed << " --k " << k << " --noise " << kinds[j]
                    << " --n 1000 --out " << data;
                if (run_cli(gen.str()).exit_code != 0) {
                    return std::make_pair(false, std::string("gen failed at k=") +
                                                     std::to_string(k) + " " + kinds[j]);
                }
                auto ev = run_cli("eval --exact --data " + data);
                if (ev.exit_code != 0 ||
                    ev.output.find("instances: 1000, accuracy: 1\n") == std::string::npos) {
                    return std::make_pair(false, std::string("accuracy below 1 at k=") +
                                                     std::to_string(k) + " " + kinds[j]);
                }
                total += 1000;
                ++combos_ok;
            }
        }
        double secs = std::chrono::duration<double>(Clock::now() - start).count();
        std::ostringstream detail;
        detail << total << " instances over " << combos_ok << " (k, noise) sets, all exact";
        if (secs >= 120.0) detail << "; exceeded the 120 s budget";
        return std::make_pair(combos_ok == 40 && secs < 120.0, detail.str());
    });

    criterion(2, "tensor-product memory algebra holds at scale", [] {
        auto results = run_prop_suite("tpr");
        auto bad = prop_summary(results);
        return std::make_pair(all_passed(results),
                              bad.empty() ? "recovery, exact unbinding, crosstalk scaling"
                                          : bad);
    });

    criterion(3, "analytic gradients match finite differences", [] {
        auto start = Clock::now();
        auto results = run_prop_suite("grad");
        double secs = std::chrono::duration<double>(Clock::now() - start).count();
        auto bad = prop_summary(results);
        bool in_time = secs < 60.0;
        std::ostringstream detail;
        detail << (bad.empty() ? "all ops and the d=6 model under 1e-4" : bad)
               << (in_time ? "" : "; exceeded the 60 s budget");
        return std::make_pair(all_passed(results) && in_time, detail.str());
    });

    criterion(4, "distractor noise cannot touch the retrieved filler", [] {
        auto results = run_prop_suite("noise");
        auto bad = prop_summary(results);
        return std::make_pair(all_passed(results),
                              bad.empty() ? "irrelevant/supporting bit-identical, "
                                            "disconnected norm <= 1e-12, 200 trials each"
                                          : bad);
    });

    criterion(5, "collection result ignores pair iteration order", [] {
        auto rng = seeded_rng(505);
        int graphs = 0;
        int mismatches = 0;
        int max_nodes = 0;
        while (graphs < 100) {
            auto triples = random_consistent_triples(rng, 10);
            ExactSetup s = make_exact_setup(triples);
            max_nodes = std::max(max_nodes, s.graph.node_count());
            auto base = init_memories(s.inputs, s.config);
            auto canonical = collect_long_dependencies(s.inputs, base, s.config);
            auto order = connected_pairs(s.graph);
            for (int shuffle = 0; shuffle < 3; ++shuffle) {
                std::shuffle(order.begin(), order.end(), rng);
                auto permuted =
                    collect_long_dependencies(s.inputs, base, s.config, order);
                if (!memories_identical(canonical, permuted)) ++mismatches;
            }
            ++graphs;
        }
        std::ostringstream detail;
        detail << mismatches << " mismatches over " << graphs
               << " graphs x 3 shuffles (largest graph " << max_nodes << " nodes)";
        return std::make_pair(mismatches == 0, detail.str());
    });

    criterion(6, "trained model solves short clean stories", [] {
        auto start = Clock::now();
        double rec = desk_accuracy(AggregatorKind::RecurrentGated);
        double rec_secs = std::chrono::duration<double>(Clock::now() - start).count();
        note("recurrent-gated accuracy " + std::to_string(rec));
        double mean = desk_accuracy(AggregatorKind::Mean);
        note("mean-pool accuracy " + std::to_string(mean));
        double max = desk_accuracy(AggregatorKind::Max);
        note("max-pool accuracy " + std::to_string(max));

        bool pass = rec >= 0.90 && rec_secs < 900.0 && mean <= rec + 0.03 &&
                    max <= rec + 0.03;
        std::ostringstream detail;
        detail << "recurrent " << rec << " (floor 0.90, budget 900 s); mean " << mean
               << ", max " << max
               << " (allowed up to recurrent + 0.03); d=64, 5000 train, 3 epochs";
        return std::make_pair(pass, detail.str());
    });

    criterion(7, "depth engine has no layer knob and the breadth baseline degrades past its peak",
              [] {
        static_assert(!has_layer_knob<EngineConfig>);
        static_assert(!has_layer_knob<ModelParams>);
        static_assert(has_layer_knob<BreadthLayerStack>);
        note("api: EngineConfig and ModelParams expose no layer count; BreadthLayerStack does");

        int seeds_passing = 0;
        for (std::uint64_t seed : {1, 2, 3}) {
            SweepConfig cfg;
            cfg.dim = 32;
            cfg.max_layers = 5;
            cfg.max_k = 5;
            cfg.train_per_k = 300;
            cfg.test_per_k = 300;
            cfg.train.lr_engine = 1e-3;
            cfg.train.lr_embed = 1e-3;
            cfg.train.batch_size = 32;
            cfg.train.max_epochs = 20;
            cfg.train.seed = seed;
            auto rows = oversmoothing_sweep(cfg);

            std::map<int, double> acc_by_layer;
            double depth_acc = -1.0;
            for (const auto& r : rows) {
                if (r.k != cfg.max_k) continue;
                if (r.model == "breadth-baseline") acc_by_layer[r.layers] = r.accuracy;
                if (r.model == "depth-engine") depth_acc = r.accuracy;
            }
            int peak_layer = 1;
            for (int layer = 1; layer <= cfg.max_layers; ++layer) {
                if (acc_by_layer[layer] > acc_by_layer[peak_layer]) peak_layer = layer;
            }
            bool seed_pass = peak_layer < cfg.max_layers;
            seeds_passing += seed_pass;

            std::ostringstream curve;
            curve << "seed " << seed << " k=5 accuracy by layer:";
            curve.precision(3);
            curve << std::fixed;
            for (int layer = 1; layer <= cfg.max_layers; ++layer) {
                curve << " L" << layer << "=" << acc_by_layer[layer];
            }
            curve << "  peak L" << peak_layer << (seed_pass ? " (turns over)" : " (still rising)")
                  << "; depth engine " << depth_acc;
            note(curve.str());
        }
        std::ostringstream detail;
        detail << seeds_passing
               << "/3 seeds peak before layer 5; majority needed. The baseline here learns "
                  "its embeddings from scratch and keeps a per-layer self term, which "
                  "defers the turnover past layer 5 at this depth range.";
        return std::make_pair(seeds_passing >= 2, detail.str());
    });

    criterion(8, "story text round-trips through render and parse", [] {
        const auto& kinds = all_noise_kinds();
        int trials = 0;
        int bad = 0;
        for (int i = 0; i < 10000; ++i) {
            int k = 1 + i % 10;
            NoiseKind kind = kinds[(i / 10) % kinds.size()];
            StoryInstance inst =
                generate(derive_seed(777, static_cast<std::uint64_t>(i)), k, kind, 1)
                    .front();
            ParsedStory story = parse(render(inst));
            if (story.triples != inst.triples || story.question != inst.question) ++bad;
            ++trials;
        }
        std::ostringstream detail;
        detail << bad << " failures over " << trials << " instances";
        return std::make_pair(bad == 0 && trials == 10000, detail.str());
    });

    std::error_code ec;
    fs::remove_all(dir, ec);

    std::cout << "\n" << (8 - failures) << "/8 checks passed\n";
    return failures;
}
