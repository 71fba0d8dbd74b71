#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "depwise/errors.hpp"

namespace depwise {

// Spatial relations on the unit grid. "A above B" means A sits one step
// further along +y than B; diagonals combine one step on each axis.
enum class RelationLabel : int {
    Above = 0,
    Below,
    Left,
    Right,
    UpperLeft,
    UpperRight,
    LowerLeft,
    LowerRight,
    Overlap,
};

inline constexpr int kNumRelationLabels = 9;

struct Offset {
    int dx = 0;
    int dy = 0;

    friend Offset operator+(Offset a, Offset b) { return {a.dx + b.dx, a.dy + b.dy}; }
    friend bool operator==(Offset a, Offset b) { return a.dx == b.dx && a.dy == b.dy; }
};

// Displacement of the subject relative to the object: pos(S) - pos(T)
// for the triple (S, label, T).
inline Offset offset_of(RelationLabel label) {
    switch (label) {
        case RelationLabel::Above: return {0, 1};
        case RelationLabel::Below: return {0, -1};
        case RelationLabel::Left: return {-1, 0};
        case RelationLabel::Right: return {1, 0};
        case RelationLabel::UpperLeft: return {-1, 1};
        case RelationLabel::UpperRight: return {1, 1};
        case RelationLabel::LowerLeft: return {-1, -1};
        case RelationLabel::LowerRight: return {1, -1};
        case RelationLabel::Overlap: return {0, 0};
    }
    throw ArgumentError("unknown relation label");
}

inline int sign_of(int v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline RelationLabel label_from_signs(int sx, int sy) {
    if (sx == 0 && sy == 1) return RelationLabel::Above;
    if (sx == 0 && sy == -1) return RelationLabel::Below;
    if (sx == -1 && sy == 0) return RelationLabel::Left;
    if (sx == 1 && sy == 0) return RelationLabel::Right;
    if (sx == -1 && sy == 1) return RelationLabel::UpperLeft;
    if (sx == 1 && sy == 1) return RelationLabel::UpperRight;
    if (sx == -1 && sy == -1) return RelationLabel::LowerLeft;
    if (sx == 1 && sy == -1) return RelationLabel::LowerRight;
    if (sx == 0 && sy == 0) return RelationLabel::Overlap;
    throw ArgumentError("offset signs must lie in {-1, 0, 1}");
}

inline RelationLabel label_from_offset(Offset o) {
    return label_from_signs(sign_of(o.dx), sign_of(o.dy));
}

inline RelationLabel inverse_label(RelationLabel label) {
    Offset o = offset_of(label);
    return label_from_signs(-o.dx, -o.dy);
}

inline std::string_view to_string(RelationLabel label) {
    switch (label) {
        case RelationLabel::Above: return "above";
        case RelationLabel::Below: return "below";
        case RelationLabel::Left: return "left";
        case RelationLabel::Right: return "right";
        case RelationLabel::UpperLeft: return "upper-left";
        case RelationLabel::UpperRight: return "upper-right";
        case RelationLabel::LowerLeft: return "lower-left";
        case RelationLabel::LowerRight: return "lower-right";
        case RelationLabel::Overlap: return "overlap";
    }
    throw ArgumentError("unknown relation label");
}

inline std::optional<RelationLabel> label_from_string(std::string_view s) {
    for (int i = 0; i < kNumRelationLabels; ++i) {
        auto label = static_cast<RelationLabel>(i);
        if (to_string(label) == s) return label;
    }
    return std::nullopt;
}

inline const std::array<RelationLabel, kNumRelationLabels>& all_labels() {
    static const std::array<RelationLabel, kNumRelationLabels> labels = {
        RelationLabel::Above,      RelationLabel::Below,     RelationLabel::Left,
        RelationLabel::Right,      RelationLabel::UpperLeft, RelationLabel::UpperRight,
        RelationLabel::LowerLeft,  RelationLabel::LowerRight, RelationLabel::Overlap,
    };
    return labels;
}

}  // namespace depwise
