#include <cmath>
#include <random>

#include "doctest.h"
#include "depwise/breadth.hpp"
#include "depwise/rng.hpp"

using namespace depwise;

namespace {

RelationLabel label(const char* s) { return *label_from_string(s); }

template <typename T>
concept has_layer_knob = requires(T t) { t.num_layers(); };

// identity self-transform, neighbor transform that forwards h_j and drops e_ij
BreadthLayer passthrough_layer(int d) {
    BreadthLayer layer;
    layer.w_self = zeros({d, d});
    layer.w_nbr = zeros({d, 2 * d});
    for (int i = 0; i < d; ++i) {
        layer.w_self->data[i * d + i] = 1.0;
        layer.w_nbr->data[i * 2 * d + i] = 1.0;
    }
    return layer;
}

EngineInputs zero_feature_inputs(const EntityGraph& g, const std::vector<Tensor>& embed,
                                 int d) {
    EngineInputs in;
    in.graph = &g;
    in.node_embed = embed;
    for (int e = 0; e < g.edge_count(); ++e) {
        in.edge_feature.push_back({zeros({d}), zeros({d})});
    }
    return in;
}

}  // namespace

static_assert(has_layer_knob<BreadthLayerStack>);

TEST_CASE("passthrough layer on a chain adds the neighbor mean") {
    const int d = 2;
    auto g = build_graph({{"A", label("left"), "B"}});
    auto in = zero_feature_inputs(g, {make_vector({1.0, 0.0}), make_vector({0.0, 1.0})}, d);
    auto out = breadth_layer_forward(in, passthrough_layer(d), Nonlinearity::Identity,
                                     in.node_embed);
    CHECK(out[0]->data == std::vector<double>{1.0, 1.0});  // h_A + h_B
    CHECK(out[1]->data == std::vector<double>{1.0, 1.0});
}

TEST_CASE("isolated node sees only its self transform") {
    const int d = 2;
    auto g = build_graph({{"A", label("left"), "B"}, {"C", label("overlap"), "C"}});
    auto in = zero_feature_inputs(
        g, {make_vector({1.0, 0.0}), make_vector({0.0, 1.0}), make_vector({3.0, 4.0})}, d);
    auto out = breadth_layer_forward(in, passthrough_layer(d), Nonlinearity::Identity,
                                     in.node_embed);
    CHECK(out[2]->data == std::vector<double>{3.0, 4.0});
}

TEST_CASE("width mismatch raises") {
    const int d = 2;
    auto g = build_graph({{"A", label("left"), "B"}});
    auto in = zero_feature_inputs(g, {make_vector({1.0, 0.0, 0.0}),
                                      make_vector({0.0, 1.0, 0.0})}, d);
    CHECK_THROWS_AS(breadth_layer_forward(in, passthrough_layer(d),
                                          Nonlinearity::Identity, in.node_embed),
                    DimensionError);
}

TEST_CASE("smoothing_metric fixed points") {
    std::vector<std::vector<double>> identical = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    CHECK(smoothing_metric(identical) == doctest::Approx(1.0));
    std::vector<std::vector<double>> ortho = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(smoothing_metric(ortho) == doctest::Approx(0.0));
    CHECK_THROWS_AS(smoothing_metric(std::vector<std::vector<double>>{{1.0}}),
                    ArgumentError);
}

TEST_CASE("smoothing_metric matches a brute-force pair loop") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::vector<double>> rows(5, std::vector<double>(16));
    for (auto& r : rows)
        for (auto& v : r) v = u(rng);

    double want = 0;
    int pairs = 0;
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) {
            double dot = 0, ni = 0, nj = 0;
            for (int c = 0; c < 16; ++c) {
                dot += rows[i][c] * rows[j][c];
                ni += rows[i][c] * rows[i][c];
                nj += rows[j][c] * rows[j][c];
            }
            want += dot / (std::sqrt(ni) * std::sqrt(nj));
            ++pairs;
        }
    }
    CHECK(smoothing_metric(rows) == doctest::Approx(want / pairs).epsilon(1e-12));
}

TEST_CASE("repeated averaging smooths embeddings monotonically") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 3; ++trial) {
        auto g = build_graph({{"A", label("left"), "B"},
                              {"B", label("left"), "C"},
                              {"C", label("above"), "D"},
                              {"B", label("below"), "E"}});
        const int d = 8;
        std::vector<Tensor> h;
        for (int i = 0; i < g.node_count(); ++i) {
            auto v = zeros({d});
            for (auto& x : v->data) x = u(rng);
            h.push_back(v);
        }
        auto in = zero_feature_inputs(g, h, d);
        auto layer = passthrough_layer(d);

        double start = smoothing_metric(h);
        int rising = 0;
        double prev = start;
        for (int l = 0; l < 10; ++l) {
            h = breadth_layer_forward(in, layer, Nonlinearity::Identity, h);
            double cur = smoothing_metric(h);
            if (cur > prev) ++rising;
            prev = cur;
        }
        CHECK(prev > start);
        CHECK(prev > 0.9);
        CHECK(rising >= 7);
    }
}

TEST_CASE("breadth layers are permutation-equivariant") {
    const int d = 4;
    std::mt19937_64 rng(6);
    auto stack = make_breadth_stack(d, 2, rng, Nonlinearity::Tanh, false);

    std::vector<Triple> story = {{"A", label("left"), "B"},
                                 {"B", label("above"), "C"},
                                 {"C", label("right"), "D"}};
    std::vector<Triple> reordered = {{"C", label("right"), "D"},
                                     {"B", label("above"), "C"},
                                     {"A", label("left"), "B"}};

    std::map<char, Tensor> embed;
    std::map<RelationLabel, Tensor> rel;
    std::uniform_real_distribution<double> u(-1, 1);
    for (char c : {'A', 'B', 'C', 'D'}) {
        auto v = zeros({d});
        for (auto& x : v->data) x = u(rng);
        embed[c] = v;
    }
    for (RelationLabel r : all_labels()) {
        auto v = zeros({d});
        for (auto& x : v->data) x = u(rng);
        rel[r] = v;
    }

    auto run = [&](const std::vector<Triple>& triples) {
        auto g = build_graph(triples);
        EngineInputs in;
        in.graph = &g;
        std::map<std::string, std::vector<double>> by_name;
        for (int i = 0; i < g.node_count(); ++i) {
            in.node_embed.push_back(embed[g.name_of(i)[0]]);
        }
        for (int e = 0; e < g.edge_count(); ++e) {
            auto lab = g.edge(e).label_ab;
            in.edge_feature.push_back({rel[lab], rel[inverse_label(lab)]});
        }
        auto out = breadth_forward(in, stack);
        for (int i = 0; i < g.node_count(); ++i) by_name[g.name_of(i)] = out[i]->data;
        return by_name;
    };

    auto first = run(story);
    auto second = run(reordered);
    for (const auto& [name, values] : first) {
        CHECK(second.at(name) == values);
    }
}

TEST_CASE("baseline classifier wires forward, loss, and predict") {
    auto params = init_baseline(8, 2, 5);
    StoryInstance inst;
    inst.triples = {{"A", label("left"), "B"}, {"B", label("left"), "C"}};
    inst.question = {"A", "C"};
    inst.gold = label("left");

    auto logits = baseline_forward(inst, params);
    REQUIRE(logits->shape == std::vector<int>{9});
    CHECK(baseline_loss(inst, params)->value() > 0);
    int p = baseline_predict(inst, params);
    CHECK(p >= 0);
    CHECK(p < 9);
    CHECK(baseline_node_states(inst, params).size() == 3);
    CHECK_THROWS_AS(init_baseline(8, 0, 5), ArgumentError);
}

TEST_CASE("deeper stacks increase smoothing of node states") {
    StoryInstance inst;
    inst.triples = {{"A", label("left"), "B"},
                    {"B", label("left"), "C"},
                    {"C", label("above"), "D"},
                    {"D", label("right"), "E"}};
    inst.question = {"A", "E"};
    int rising = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        auto shallow = init_baseline(16, 1, seed);
        auto deep = init_baseline(16, 5, seed);
        double s = smoothing_metric(baseline_node_states(inst, shallow));
        double d5 = smoothing_metric(baseline_node_states(inst, deep));
        if (d5 > s) ++rising;
    }
    CHECK(rising >= 2);
}
