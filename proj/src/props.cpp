#include "depwise/props.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include "depwise/errors.hpp"
#include "depwise/model.hpp"
#include "depwise/rng.hpp"
#include "depwise/tpr.hpp"

namespace depwise {

namespace {

using Clock = std::chrono::steady_clock;

PropResult timed(const std::string& name,
                 const std::function<std::pair<bool, std::string>()>& body) {
    PropResult r;
    r.name = name;
    auto start = Clock::now();
    auto [pass, detail] = body();
    r.pass = pass;
    r.detail = std::move(detail);
    r.millis = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return r;
}

Tensor random_unit(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto v = zeros({d});
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v->data) {
            x = gauss(rng);
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v->data) x /= norm;
    return v;
}

PropResult orthonormal_recovery() {
    return timed("tpr/orthonormal-recovery", [] {
        double worst = 0.0;
        for (int d : {8, 32}) {
            auto rng = seeded_rng(41 + d);
            std::normal_distribution<double> gauss(0.0, 1.0);
            NodeMemory mem = zero_memory(d);
            std::vector<Tensor> fillers;
            std::vector<Tensor> roles;
            for (int i = 0; i < d; ++i) {
                auto f = zeros({d});
                for (auto& x : f->data) x = gauss(rng);
                auto r = zeros({d});
                r->data[i] = 1.0;
                mem = store(mem, f, r);
                fillers.push_back(f);
                roles.push_back(r);
            }
            for (int i = 0; i < d; ++i) {
                Tensor got = retrieve(mem, roles[i]);
                for (int c = 0; c < d; ++c) {
                    worst = std::max(worst, std::abs(got->data[c] - fillers[i]->data[c]));
                }
            }
        }
        std::ostringstream detail;
        detail << "max recovery error " << worst << " (bound 1e-12, d stores per memory)";
        return std::make_pair(worst <= 1e-12, detail.str());
    });
}

// Two fillers bound under orthogonal roles; unbinding with the second role
// returns exactly |r|^2 times its filler and nothing of the other.
PropResult orthogonal_unbinding() {
    return timed("tpr/orthogonal-unbinding", [] {
        auto rng = seeded_rng(7);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const int d = 16;
        auto f_above = zeros({d});
        auto f_below = zeros({d});
        for (auto& x : f_above->data) x = gauss(rng);
        for (auto& x : f_below->data) x = gauss(rng);

        Tensor r_x = random_unit(d, rng);
        auto r_k = zeros({d});
        for (auto& x : r_k->data) x = gauss(rng);
        double proj = 0.0;
        for (int c = 0; c < d; ++c) proj += r_k->data[c] * r_x->data[c];
        for (int c = 0; c < d; ++c) r_k->data[c] -= proj * r_x->data[c];

        double alpha = 0.0;
        for (double x : r_k->data) alpha += x * x;

        NodeMemory mem = zero_memory(d);
        mem = store(mem, f_above, r_x);
        mem = store(mem, f_below, r_k);
        Tensor got = retrieve(mem, r_k);

        double worst = 0.0;
        for (int c = 0; c < d; ++c) {
            worst = std::max(worst, std::abs(got->data[c] - alpha * f_below->data[c]));
        }
        std::ostringstream detail;
        detail << "|T·r - |r|^2·f| max " << worst << ", scale " << alpha;
        return std::make_pair(worst <= 1e-9, detail.str());
    });
}

PropResult crosstalk_scale() {
    return timed("tpr/crosstalk-scale", [] {
        bool pass = true;
        std::ostringstream detail;
        for (int d : {64, 256}) {
            auto rng = seeded_rng(100 + d);
            const int samples = 10000;
            double sq_sum = 0.0;
            double abs_sum = 0.0;
            for (int s = 0; s < samples; ++s) {
                Tensor a = random_unit(d, rng);
                Tensor b = random_unit(d, rng);
                double dot = 0.0;
                for (int c = 0; c < d; ++c) dot += a->data[c] * b->data[c];
                sq_sum += dot * dot;
                abs_sum += std::abs(dot);
            }
            double rms = std::sqrt(sq_sum / samples);
            double target = 1.0 / std::sqrt(static_cast<double>(d));
            double rel = std::abs(rms - target) / target;
            pass = pass && rel <= 0.2;
            detail << "d=" << d << ": rms crosstalk " << rms << " vs 1/sqrt(d) " << target
                   << " (rel dev " << rel << ", mean|dot| " << abs_sum / samples << "); ";
        }
        return std::make_pair(pass, detail.str());
    });
}

double op_suite_max_err();
double model_grad_max_err(std::uint64_t seed);

PropResult op_gradients() {
    return timed("grad/op-suite", [] {
        double worst = op_suite_max_err();
        std::ostringstream detail;
        detail << "max rel err " << worst << " over all ops, 5 seeds, d in {2,4,8,16}";
        return std::make_pair(worst < 1e-4, detail.str());
    });
}

PropResult model_gradients() {
    return timed("grad/full-model", [] {
        double worst = 0.0;
        for (std::uint64_t seed : {11ULL, 22ULL, 33ULL}) {
            worst = std::max(worst, model_grad_max_err(seed));
        }
        std::ostringstream detail;
        detail << "max rel err " << worst << " (d=6 model, 3 seeds)";
        return std::make_pair(worst < 1e-4, detail.str());
    });
}

Tensor question_filler(const StoryInstance& inst) {
    ExactSetup s = make_exact_setup(inst.triples);
    EngineResult r = run_engine(s.inputs, s.inputs.node_embed[s.graph.index_of(inst.question.second)],
                                s.config);
    return r.filler[s.graph.index_of(inst.question.first)];
}

bool bit_identical(const Tensor& a, const Tensor& b) {
    return a->data.size() == b->data.size() &&
           std::memcmp(a->data.data(), b->data.data(),
                       a->data.size() * sizeof(double)) == 0;
}

PropResult noise_invariance(const std::string& name, NoiseKind kind) {
    return timed(name, [kind] {
        int failures = 0;
        const int trials = 200;
        for (int t = 0; t < trials; ++t) {
            int k = 2 + t % 9;
            std::uint64_t seed = 5000 + t;
            StoryInstance clean = generate(seed, k, NoiseKind::None, t % 9 + 1).back();
            StoryInstance noisy = generate(seed, k, kind, t % 9 + 1).back();
            if (!bit_identical(question_filler(clean), question_filler(noisy))) ++failures;
        }
        std::ostringstream detail;
        detail << failures << "/" << trials << " trials changed the retrieved filler";
        return std::make_pair(failures == 0, detail.str());
    });
}

PropResult disconnected_nullity() {
    return timed("noise/disconnected-nullity", [] {
        int failures = 0;
        const int trials = 200;
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            int k = 1 + t % 10;
            StoryInstance inst = generate(9000 + t, k, NoiseKind::Disconnected, 1).front();
            ExactSetup s = make_exact_setup(inst.triples);
            int src = s.graph.index_of(inst.question.first);
            auto dist = bfs_distances(s.graph, src);
            std::vector<NodeMemory> mems = init_memories(s.inputs, s.config);
            mems = collect_long_dependencies(s.inputs, mems, s.config);
            bool found = false;
            for (int node = 0; node < s.graph.node_count(); ++node) {
                if (dist[node] >= 0) continue;
                found = true;
                Tensor f = retrieve(mems[src], s.inputs.node_embed[node]);
                double norm = 0.0;
                for (double v : f->data) norm += v * v;
                norm = std::sqrt(norm);
                worst = std::max(worst, norm);
                if (norm > 1e-12) ++failures;
            }
            if (!found) ++failures;
        }
        std::ostringstream detail;
        detail << failures << "/" << trials << " failures, worst norm " << worst;
        return std::make_pair(failures == 0, detail.str());
    });
}

// Exhaustive simple-path enumeration; returns the lexicographically smallest
// minimum-hop name sequence, or empty when disconnected.
std::vector<std::string> brute_force_path(const EntityGraph& g, int src, int dst) {
    std::vector<std::string> best;
    std::vector<int> current{src};
    std::vector<bool> used(g.node_count(), false);
    used[src] = true;
    std::function<void()> dfs = [&] {
        int cur = current.back();
        if (cur == dst) {
            std::vector<std::string> names;
            for (int n : current) names.push_back(g.name_of(n));
            if (best.empty() || names.size() < best.size() ||
                (names.size() == best.size() && names < best)) {
                best = names;
            }
            return;
        }
        for (const auto& arc : g.neighbors(cur)) {
            if (used[arc.neighbor]) continue;
            used[arc.neighbor] = true;
            current.push_back(arc.neighbor);
            dfs();
            current.pop_back();
            used[arc.neighbor] = false;
        }
    };
    dfs();
    return best;
}

EntityGraph random_graph(std::mt19937_64& rng, int max_nodes) {
    int n = std::uniform_int_distribution<int>(2, max_nodes)(rng);
    std::vector<Triple> triples;
    // Random positions keep all pairwise relations mutually consistent.
    std::vector<Offset> pos(n);
    for (auto& p : pos) {
        p.dx = std::uniform_int_distribution<int>(-3, 3)(rng);
        p.dy = std::uniform_int_distribution<int>(-3, 3)(rng);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) > 0.35) continue;
            Offset delta{pos[a].dx - pos[b].dx, pos[a].dy - pos[b].dy};
            if (delta.dx < -1 || delta.dx > 1 || delta.dy < -1 || delta.dy > 1) continue;
            triples.push_back({std::string(1, static_cast<char>('A' + a)),
                               label_from_offset(delta),
                               std::string(1, static_cast<char>('A' + b))});
        }
    }
    if (triples.empty()) {
        triples.push_back({"A", RelationLabel::Left, "B"});
    }
    return build_graph(triples);
}

PropResult bfs_oracle() {
    return timed("bfs/brute-force-oracle", [] {
        auto rng = seeded_rng(77);
        int failures = 0;
        const int trials = 200;
        for (int t = 0; t < trials; ++t) {
            EntityGraph g = random_graph(rng, 8);
            for (int src = 0; src < g.node_count(); ++src) {
                for (int dst = 0; dst < g.node_count(); ++dst) {
                    if (src == dst) continue;
                    auto expected = brute_force_path(g, src, dst);
                    auto got = bfs_shortest_path(g, src, dst);
                    if (expected.empty()) {
                        if (got) ++failures;
                        continue;
                    }
                    if (!got) {
                        ++failures;
                        continue;
                    }
                    std::vector<std::string> names;
                    for (int n : got->nodes) names.push_back(g.name_of(n));
                    if (names != expected) ++failures;
                }
            }
        }
        std::ostringstream detail;
        detail << failures << " mismatches over " << trials << " random graphs";
        return std::make_pair(failures == 0, detail.str());
    });
}

}  // namespace

std::vector<PropResult> run_prop_suite(const std::string& suite) {
    std::vector<PropResult> out;
    bool all = suite == "all";
    bool known = all;
    if (all || suite == "tpr") {
        known = true;
        out.push_back(orthonormal_recovery());
        out.push_back(orthogonal_unbinding());
        out.push_back(crosstalk_scale());
    }
    if (all || suite == "grad") {
        known = true;
        out.push_back(op_gradients());
        out.push_back(model_gradients());
    }
    if (all || suite == "noise") {
        known = true;
        out.push_back(noise_invariance("noise/irrelevant-invariance", NoiseKind::Irrelevant));
        out.push_back(noise_invariance("noise/supporting-invariance", NoiseKind::Supporting));
        out.push_back(disconnected_nullity());
    }
    if (all || suite == "bfs") {
        known = true;
        out.push_back(bfs_oracle());
    }
    if (!known) throw ArgumentError("unknown property suite: " + suite);
    return out;
}

bool all_passed(const std::vector<PropResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const PropResult& r) { return r.pass; });
}

namespace {

double check_against(const std::function<Tensor(const Tensor&)>& f, const Tensor& x) {
    GradCheckReport report = grad_check(f, x);
    return report.max_rel_err;
}

double op_suite_max_err() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (int d : {2, 4, 8, 16}) {
            auto rng = seeded_rng(seed * 1000 + d);
            std::normal_distribution<double> gauss(0.0, 1.0);
            auto rand_vec = [&](int n) {
                auto t = zeros({n});
                for (auto& v : t->data) v = gauss(rng);
                return t;
            };
            auto rand_mat = [&](int r, int c) {
                auto t = zeros({r, c});
                for (auto& v : t->data) v = gauss(rng);
                return t;
            };

            Tensor probe = rand_vec(d);
            Tensor mat_probe = rand_mat(d, d);
            Tensor other = rand_vec(d);
            Tensor b2 = rand_vec(d);
            for (int c = 0; c < d; ++c) {
                if (std::abs(b2->data[c] - other->data[c]) < 1e-2) b2->data[c] += 0.05;
            }

            auto as_scalar_v = [&](const Tensor& t) { return dot(t, probe); };
            auto as_scalar_m = [&](const Tensor& t) { return sum(mul(t, mat_probe)); };

            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(add(x, other)); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(scale(x, 1.7)); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(mul(x, other)); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(matvec(mat_probe, x)); },
                rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(matvec(x, other)); },
                rand_mat(d, d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_m(outer(x, other)); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) {
                    return dot(concat({x, other}), concat({probe, probe}));
                },
                rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(tanh_op(x)); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(sigmoid_op(x)); }, rand_vec(d)));
            {
                Tensor x0 = rand_vec(d);
                for (auto& v : x0->data) {
                    if (std::abs(v) < 1e-2) v += 0.05;
                }
                worst = std::max(worst, check_against(
                    [&](const Tensor& x) { return as_scalar_v(relu_op(x)); }, x0));
            }
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return as_scalar_v(vmax(x, b2)); }, other));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return dot(x, other); }, rand_vec(d)));
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return sum(x); }, rand_vec(d)));
            {
                Tensor gamma = rand_vec(d);
                Tensor beta = rand_vec(d);
                worst = std::max(worst, check_against(
                    [&](const Tensor& x) { return as_scalar_v(layernorm(x, gamma, beta)); },
                    rand_vec(d)));
                Tensor x0 = rand_vec(d);
                worst = std::max(worst, check_against(
                    [&](const Tensor& gm) { return as_scalar_v(layernorm(x0, gm, beta)); },
                    rand_vec(d)));
                worst = std::max(worst, check_against(
                    [&](const Tensor& bt) { return as_scalar_v(layernorm(x0, gamma, bt)); },
                    rand_vec(d)));
            }
            worst = std::max(worst, check_against(
                [&](const Tensor& x) { return softmax_xent(x, d / 2); }, rand_vec(d)));
        }
    }
    return worst;
}

double model_grad_max_err(std::uint64_t seed) {
    ModelParams params = init_model(6, AggregatorKind::RecurrentGated, seed);
    StoryInstance inst = generate(seed, 2, NoiseKind::None, 1).front();
    double worst = 0.0;
    for (const Tensor& p : params.parameters()) {
        GradCheckReport report =
            grad_check([&](const Tensor&) { return model_loss(inst, params); }, p);
        worst = std::max(worst, report.max_rel_err);
    }
    return worst;
}

}  // namespace

}  // namespace depwise
