#pragma once

#include <stdexcept>

namespace depwise {

// Shape/width disagreement between operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Out-of-range class index, node id, or table row.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Invalid argument value (empty sequence, hop count out of range, ...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Contradictory relation triples for the same entity pair.
struct ConflictError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sentence that matches no known template; carries the 1-based sentence number.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, int sentence_index_ = -1)
        : std::runtime_error(std::move(msg)), sentence_index(sentence_index_) {}
    int sentence_index;
};

// Story/question inconsistency (question entity absent, no path, ...).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Engine driven with missing weights or features.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint/dataset file problems.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss or divergence during optimization.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace depwise
