#include "depwise/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

#include "depwise/breadth.hpp"
#include "depwise/errors.hpp"
#include "depwise/model.hpp"
#include "depwise/rng.hpp"

namespace depwise {

void TrainConfig::validate() const {
    if (lr_engine < 0.0 || lr_embed < 0.0) throw ArgumentError("learning rates must be non-negative");
    if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
    if (plateau_factor <= 0.0 || plateau_factor >= 1.0) {
        throw ArgumentError("plateau factor must lie in (0, 1)");
    }
    if (plateau_patience < 1 || early_stop_patience < 1) {
        throw ArgumentError("patience must be at least 1");
    }
    if (min_delta < 0.0) throw ArgumentError("min_delta must be non-negative");
    if (max_epochs < 1) throw ArgumentError("max_epochs must be at least 1");
    if (start_epoch < 0) throw ArgumentError("start_epoch must be non-negative");
}

Adam::Adam(std::vector<Group> groups) : groups_(std::move(groups)) {
    m_.resize(groups_.size());
    v_.resize(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        m_[g].reserve(groups_[g].params.size());
        v_[g].reserve(groups_[g].params.size());
        for (const auto& p : groups_[g].params) {
            if (!p) throw ArgumentError("null parameter tensor");
            m_[g].emplace_back(p->data.size(), 0.0);
            v_[g].emplace_back(p->data.size(), 0.0);
        }
    }
}

void Adam::zero_grad() {
    for (auto& group : groups_) {
        for (auto& p : group.params) {
            p->grad.assign(p->data.size(), 0.0);
        }
    }
}

void Adam::step(double grad_scale) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        auto& group = groups_[g];
        for (std::size_t i = 0; i < group.params.size(); ++i) {
            auto& p = group.params[i];
            auto& m = m_[g][i];
            auto& v = v_[g][i];
            for (std::size_t c = 0; c < p->data.size(); ++c) {
                double grad = (c < p->grad.size() ? p->grad[c] : 0.0) * grad_scale;
                m[c] = beta1 * m[c] + (1.0 - beta1) * grad;
                v[c] = beta2 * v[c] + (1.0 - beta2) * grad * grad;
                double mhat = m[c] / bc1;
                double vhat = v[c] / bc2;
                p->data[c] -= group.lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
}

void Adam::set_lr(std::size_t group, double lr) {
    if (group >= groups_.size()) throw IndexError("optimizer group out of range");
    groups_[group].lr = lr;
}

void Adam::scale_lr(double factor) {
    for (auto& group : groups_) group.lr *= factor;
}

PlateauDetector::PlateauDetector(int patience, double min_delta)
    : patience_(patience), min_delta_(min_delta),
      best_(std::numeric_limits<double>::infinity()) {
    if (patience < 1) throw ArgumentError("patience must be at least 1");
}

bool PlateauDetector::step(double value) {
    if (best_ - value > min_delta_) {
        best_ = value;
        stale_ = 0;
        return false;
    }
    if (++stale_ >= patience_) {
        stale_ = 0;
        return true;
    }
    return false;
}

TrainResult train(TrainableModel& model, const std::vector<StoryInstance>& train_set,
                  const std::vector<StoryInstance>& val_set, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_best) {
    cfg.validate();
    if (train_set.empty()) throw ArgumentError("training set is empty");
    if (val_set.empty()) throw ArgumentError("validation set is empty");

    Adam opt({{model.embedding_parameters(), cfg.lr_embed},
              {model.engine_parameters(), cfg.lr_engine}});

    PlateauDetector plateau(cfg.plateau_patience, cfg.min_delta);
    PlateauDetector stopper(cfg.early_stop_patience, cfg.min_delta);

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = cfg.start_epoch; epoch < cfg.start_epoch + cfg.max_epochs; ++epoch) {
        auto rng = seeded_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        double train_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(begin + cfg.batch_size, order.size());
            opt.zero_grad();
            for (std::size_t i = begin; i < end; ++i) {
                Tensor loss = model.loss_graph(train_set[order[i]]);
                double value = loss->data[0];
                if (!std::isfinite(value)) {
                    throw NumericError("training loss is not finite at epoch " +
                                       std::to_string(epoch));
                }
                train_sum += value;
                backward(loss);
            }
            opt.step(1.0 / static_cast<double>(end - begin));
            model.after_step();
        }
        double train_loss = train_sum / static_cast<double>(train_set.size());

        double val_sum = 0.0;
        for (const auto& inst : val_set) {
            double value = model.loss_graph(inst)->data[0];
            if (!std::isfinite(value)) {
                throw NumericError("validation loss is not finite at epoch " +
                                   std::to_string(epoch));
            }
            val_sum += value;
        }
        double val_loss = val_sum / static_cast<double>(val_set.size());

        result.history.push_back({epoch, train_loss, val_loss, opt.lr(1)});

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            if (on_best) on_best(epoch, val_loss);
        }
        if (plateau.step(val_loss)) opt.scale_lr(cfg.plateau_factor);
        if (stopper.step(val_loss)) {
            result.early_stopped = true;
            break;
        }
    }
    result.final_lr_embed = opt.lr(0);
    result.final_lr_engine = opt.lr(1);
    return result;
}

int thread_budget() {
    if (const char* env = std::getenv("DEPWISE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

EvalReport evaluate(const std::function<int(const StoryInstance&)>& predict,
                    const std::vector<StoryInstance>& data) {
    auto start = std::chrono::steady_clock::now();
    EvalReport report;

    std::vector<int> predictions(data.size(), -1);
    const int threads = std::min<int>(thread_budget(), static_cast<int>(data.size()));
    if (threads > 1) {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < data.size(); i += threads) {
                    predictions[i] = predict(data[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < data.size(); ++i) predictions[i] = predict(data[i]);
    }

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& inst = data[i];
        auto key = std::make_pair(inst.k, std::string(to_string(inst.noise)));
        auto& bucket = report.buckets[key];
        bucket.second += 1;
        if (predictions[i] == static_cast<int>(inst.gold)) {
            bucket.first += 1;
            report.correct += 1;
        }
        report.total += 1;
    }

    std::map<int, std::pair<int, int>> per_k;
    std::map<std::string, std::pair<int, int>> per_noise;
    for (const auto& [key, counts] : report.buckets) {
        per_k[key.first].first += counts.first;
        per_k[key.first].second += counts.second;
        per_noise[key.second].first += counts.first;
        per_noise[key.second].second += counts.second;
    }
    for (const auto& [k, counts] : per_k) {
        report.per_k_accuracy[k] =
            static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    for (const auto& [noise, counts] : per_noise) {
        report.per_noise_accuracy[noise] =
            static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }

    double low_sum = 0.0, high_sum = 0.0;
    int low_n = 0, high_n = 0;
    for (const auto& [k, acc] : report.per_k_accuracy) {
        if (k >= 1 && k <= 5) {
            low_sum += acc;
            ++low_n;
        } else if (k >= 6 && k <= 10) {
            high_sum += acc;
            ++high_n;
        }
    }
    report.has_low = low_n > 0;
    report.has_high = high_n > 0;
    if (low_n > 0) report.mean_low = low_sum / low_n;
    if (high_n > 0) report.mean_high = high_sum / high_n;
    if (report.total > 0) {
        report.accuracy = static_cast<double>(report.correct) / report.total;
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<Tensor> DepthTrainable::embedding_parameters() {
    return params.embedding_parameters();
}
std::vector<Tensor> DepthTrainable::engine_parameters() { return params.engine_parameters(); }
Tensor DepthTrainable::loss_graph(const StoryInstance& inst) { return model_loss(inst, params); }
int DepthTrainable::predict_label(const StoryInstance& inst) {
    return model_predict(inst, params);
}
void DepthTrainable::after_step() { normalize_entity_embeddings(params); }

std::vector<Tensor> BaselineTrainable::embedding_parameters() {
    return params.embedding_parameters();
}
std::vector<Tensor> BaselineTrainable::engine_parameters() {
    return params.engine_parameters();
}
Tensor BaselineTrainable::loss_graph(const StoryInstance& inst) {
    return baseline_loss(inst, params);
}
int BaselineTrainable::predict_label(const StoryInstance& inst) {
    return baseline_predict(inst, params);
}

namespace {

struct SweepData {
    std::vector<StoryInstance> train;
    std::vector<StoryInstance> val;
    std::vector<StoryInstance> test;
};

// Train and test stories both carry the full distractor mix, stratified
// evenly over noise kinds within every k.
SweepData sweep_data(const SweepConfig& cfg) {
    const auto& kinds = all_noise_kinds();
    SweepData data;
    for (int k = 1; k <= cfg.max_k; ++k) {
        for (std::size_t j = 0; j < kinds.size(); ++j) {
            int per_kind = std::max(1, cfg.train_per_k / static_cast<int>(kinds.size()));
            auto train_k = generate(derive_seed(cfg.train.seed, 1000 + k * 10 + j),
                                    k, kinds[j], per_kind);
            int val_n = std::max(1, per_kind / 10);
            data.val.insert(data.val.end(), train_k.begin(), train_k.begin() + val_n);
            data.train.insert(data.train.end(), train_k.begin() + val_n, train_k.end());
            int test_per_kind = std::max(1, cfg.test_per_k / static_cast<int>(kinds.size()));
            auto test_k = generate(derive_seed(cfg.train.seed, 2000 + k * 10 + j),
                                   k, kinds[j], test_per_kind);
            data.test.insert(data.test.end(), test_k.begin(), test_k.end());
        }
    }
    return data;
}

}  // namespace

std::vector<SweepRow> oversmoothing_sweep(const SweepConfig& cfg) {
    SweepData data = sweep_data(cfg);
    std::vector<SweepRow> rows;

    // Every contestant gets the same fixed epoch budget; early stopping would
    // hand depth-dependent budgets out.
    SweepConfig run = cfg;
    run.train.early_stop_patience = cfg.train.max_epochs + 1;

    for (int layers = 1; layers <= cfg.max_layers; ++layers) {
        BaselineParams params = init_baseline(cfg.dim, layers, cfg.train.seed);
        BaselineTrainable trainable(params);
        train(trainable, data.train, data.val, run.train);
        EvalReport report = evaluate(
            [&](const StoryInstance& inst) { return baseline_predict(inst, params); },
            data.test);
        for (const auto& [k, acc] : report.per_k_accuracy) {
            rows.push_back({"breadth-baseline", layers, k, acc});
        }
    }

    ModelParams depth = init_model(cfg.dim, AggregatorKind::RecurrentGated, cfg.train.seed);
    DepthTrainable trainable(depth);
    train(trainable, data.train, data.val, run.train);
    EvalReport report = evaluate(
        [&](const StoryInstance& inst) { return model_predict(inst, depth); }, data.test);
    for (const auto& [k, acc] : report.per_k_accuracy) {
        rows.push_back({"depth-engine", 0, k, acc});
    }
    return rows;
}

}  // namespace depwise
