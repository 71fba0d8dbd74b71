#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "depwise/taskgen.hpp"
#include "depwise/tensor.hpp"

namespace depwise {

struct TrainConfig {
    double lr_engine = 1e-4;
    double lr_embed = 1e-4;
    int batch_size = 32;
    double plateau_factor = 0.1;
    int plateau_patience = 2;
    int early_stop_patience = 3;
    double min_delta = 1e-3;  // on validation cross-entropy
    int max_epochs = 20;
    int start_epoch = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Adam over parameter groups with independent learning rates
// (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
public:
    struct Group {
        std::vector<Tensor> params;
        double lr = 1e-4;
    };

    explicit Adam(std::vector<Group> groups);

    void zero_grad();
    // Applies one update using accumulated grads scaled by grad_scale
    // (1/batch for mean-of-instances gradients).
    void step(double grad_scale = 1.0);
    double lr(std::size_t group) const { return groups_[group].lr; }
    void set_lr(std::size_t group, double lr);
    void scale_lr(double factor);
    std::size_t group_count() const { return groups_.size(); }

private:
    std::vector<Group> groups_;
    std::vector<std::vector<std::vector<double>>> m_, v_;
    long long t_ = 0;
};

// Signals when the watched value has not improved by more than min_delta
// for `patience` consecutive steps.
class PlateauDetector {
public:
    PlateauDetector(int patience, double min_delta);
    bool step(double value);  // true -> plateau hit (counter resets)

private:
    int patience_;
    double min_delta_;
    double best_;
    int stale_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;  // engine-group rate in effect during this epoch
};

// Anything the trainer can optimize: depth model or breadth baseline.
struct TrainableModel {
    virtual ~TrainableModel() = default;
    virtual std::vector<Tensor> embedding_parameters() = 0;
    virtual std::vector<Tensor> engine_parameters() = 0;
    virtual Tensor loss_graph(const StoryInstance& instance) = 0;
    virtual int predict_label(const StoryInstance& instance) = 0;
    virtual void after_step() {}
};

struct ModelParams;
struct BaselineParams;

// Adapters binding the two model families to the trainer; the depth adapter
// re-normalizes entity rows after every optimizer step.
struct DepthTrainable : TrainableModel {
    ModelParams& params;

    explicit DepthTrainable(ModelParams& p) : params(p) {}
    std::vector<Tensor> embedding_parameters() override;
    std::vector<Tensor> engine_parameters() override;
    Tensor loss_graph(const StoryInstance& instance) override;
    int predict_label(const StoryInstance& instance) override;
    void after_step() override;
};

struct BaselineTrainable : TrainableModel {
    BaselineParams& params;

    explicit BaselineTrainable(BaselineParams& p) : params(p) {}
    std::vector<Tensor> embedding_parameters() override;
    std::vector<Tensor> engine_parameters() override;
    Tensor loss_graph(const StoryInstance& instance) override;
    int predict_label(const StoryInstance& instance) override;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double best_val_loss = 0.0;
    int best_epoch = -1;
    bool early_stopped = false;
    double final_lr_engine = 0.0;
    double final_lr_embed = 0.0;
};

// on_best fires whenever validation reaches a new minimum; the caller
// snapshots the checkpoint there.
TrainResult train(TrainableModel& model, const std::vector<StoryInstance>& train_set,
                  const std::vector<StoryInstance>& val_set, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_best = {});

struct EvalReport {
    // (k, noise) -> {correct, total}
    std::map<std::pair<int, std::string>, std::pair<int, int>> buckets;
    std::map<int, double> per_k_accuracy;
    std::map<std::string, double> per_noise_accuracy;
    double mean_low = 0.0;   // mean of per-k accuracies, k in [1,5]
    double mean_high = 0.0;  // k in [6,10]
    bool has_low = false;
    bool has_high = false;
    int total = 0;
    int correct = 0;
    double accuracy = 0.0;
    double runtime_seconds = 0.0;
};

EvalReport evaluate(const std::function<int(const StoryInstance&)>& predict,
                    const std::vector<StoryInstance>& data);

// Reads DEPWISE_THREADS; falls back to hardware concurrency.
int thread_budget();

struct SweepRow {
    std::string model;
    int layers = 0;  // 0 for the depth engine (no layer axis)
    int k = 0;
    double accuracy = 0.0;
};

struct SweepConfig {
    int dim = 32;
    int max_layers = 5;
    int max_k = 5;
    int train_per_k = 300;
    int test_per_k = 100;
    TrainConfig train;
};

std::vector<SweepRow> oversmoothing_sweep(const SweepConfig& cfg);

}  // namespace depwise
