#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace umrahguard {

struct SparseEntry {
    std::uint32_t index = 0;
    double value = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

/// Sparse row with strictly increasing indices below `dim`.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<SparseEntry> entries;

    bool operator==(const SparseVector&) const = default;

    double dot(const SparseVector& other) const noexcept {
        double sum = 0.0;
        auto a = entries.begin();
        auto b = other.entries.begin();
        while (a != entries.end() && b != other.entries.end()) {
            if (a->index < b->index) {
                ++a;
            } else if (b->index < a->index) {
                ++b;
            } else {
                sum += a->value * b->value;
                ++a;
                ++b;
            }
        }
        return sum;
    }

    double squared_norm() const noexcept {
        double sum = 0.0;
        for (const auto& e : entries) sum += e.value * e.value;
        return sum;
    }

    std::vector<double> to_dense() const {
        std::vector<double> out(dim, 0.0);
        for (const auto& e : entries) out[e.index] = e.value;
        return out;
    }

    static SparseVector from_dense(std::span<const double> values) {
        SparseVector v;
        v.dim = values.size();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(i), values[i]});
        }
        return v;
    }
};

}  // namespace umrahguard
