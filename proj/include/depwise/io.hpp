#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depwise/model.hpp"
#include "depwise/train.hpp"

namespace depwise {

inline constexpr const char* kCheckpointVersion = "depwise-checkpoint-v1";

// All writers go through write-temp-then-rename so partial files never land
// under the final name.
void atomic_write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string instance_to_json_line(const StoryInstance& instance);
StoryInstance instance_from_json_line(const std::string& line);

void write_jsonl(const std::string& path, const std::vector<StoryInstance>& instances);
// IoError carries the 1-based line number on malformed input.
std::vector<StoryInstance> read_jsonl(const std::string& path);

struct TrainerState {
    int next_epoch = 0;
    double lr_engine = 0.0;
    double lr_embed = 0.0;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::optional<TrainerState>& trainer = std::nullopt);

struct Checkpoint {
    ModelParams params;
    std::optional<TrainerState> trainer;
};

Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);
void write_eval_csv(const std::string& path, const EvalReport& report);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace depwise
