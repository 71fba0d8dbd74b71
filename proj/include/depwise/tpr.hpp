#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "depwise/tensor.hpp"

namespace depwise {

// Square matrix memory holding a superposition of filler (x) role outer
// products. All updates are value-semantic: store() returns a new memory and
// leaves its input untouched.
struct NodeMemory {
    Tensor matrix;  // {d, d}

    int dim() const { return matrix ? matrix->shape[0] : 0; }
};

NodeMemory zero_memory(int d);
NodeMemory store(const NodeMemory& mem, const Tensor& filler, const Tensor& role);
Tensor retrieve(const NodeMemory& mem, const Tensor& key);
double memory_norm(const NodeMemory& mem);

enum class RoleBasisMode { OrthonormalOnehot, RandomUnit };

// Per-entity role vectors. Orthonormal mode assigns distinct standard basis
// vectors (name-sorted entities get ascending coordinates) and requires
// d >= entity count; random mode draws unit-normalised gaussians.
struct RoleBasis {
    RoleBasisMode mode = RoleBasisMode::OrthonormalOnehot;
    int dim = 0;
    std::map<std::string, Tensor> vectors;

    const Tensor& role(const std::string& entity) const;
};

RoleBasis make_role_basis(RoleBasisMode mode, const std::vector<std::string>& entities,
                          int d, std::uint64_t seed = 0);

}  // namespace depwise
