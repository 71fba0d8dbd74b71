#include "depwise/tpr.hpp"

#include <algorithm>
#include <cmath>

#include "depwise/errors.hpp"
#include "depwise/rng.hpp"

namespace depwise {

NodeMemory zero_memory(int d) {
    if (d <= 0) throw ArgumentError("memory dimension must be positive");
    return {zeros({d, d})};
}

NodeMemory store(const NodeMemory& mem, const Tensor& filler, const Tensor& role) {
    if (!mem.matrix) throw ArgumentError("store on uninitialised memory");
    if (filler->shape.size() != 1 || role->shape.size() != 1 ||
        filler->shape[0] != mem.dim() || role->shape[0] != mem.dim()) {
        throw DimensionError("filler/role width must match memory dimension");
    }
    return {add(mem.matrix, outer(filler, role))};
}

Tensor retrieve(const NodeMemory& mem, const Tensor& key) {
    if (!mem.matrix) throw ArgumentError("retrieve on uninitialised memory");
    return matvec(mem.matrix, key);
}

double memory_norm(const NodeMemory& mem) {
    if (!mem.matrix) throw ArgumentError("norm of uninitialised memory");
    double s = 0.0;
    for (double v : mem.matrix->data) s += v * v;
    return std::sqrt(s);
}

const Tensor& RoleBasis::role(const std::string& entity) const {
    auto it = vectors.find(entity);
    if (it == vectors.end()) throw IndexError("no role vector for entity: " + entity);
    return it->second;
}

RoleBasis make_role_basis(RoleBasisMode mode, const std::vector<std::string>& entities,
                          int d, std::uint64_t seed) {
    if (d <= 0) throw ArgumentError("role dimension must be positive");
    RoleBasis basis;
    basis.mode = mode;
    basis.dim = d;

    std::vector<std::string> sorted(entities.begin(), entities.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    if (mode == RoleBasisMode::OrthonormalOnehot) {
        if (static_cast<int>(sorted.size()) > d) {
            throw ArgumentError("orthonormal role basis needs d >= entity count");
        }
        int coord = 0;
        for (const auto& name : sorted) {
            auto v = zeros({d});
            v->data[coord++] = 1.0;
            basis.vectors.emplace(name, v);
        }
    } else {
        auto rng = seeded_rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (const auto& name : sorted) {
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
            basis.vectors.emplace(name, v);
        }
    }
    return basis;
}

}  // namespace depwise
