#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "povmkit/linalg.hpp"
#include "povmkit/matrix.hpp"

namespace povm {

/// Deduplicating store of matrices with tolerance-aware lookup.
///
/// Entries are bucketed by quantizing every real/imaginary part to the
/// nearest multiple of a cell width, then candidates are confirmed by
/// Frobenius distance <= tol.eq. Each matrix is also bucketed on a lattice
/// shifted by half a cell, so a pair of equal-within-tolerance matrices
/// straddling one lattice's cell boundary is still found through the other.
class EffectIndex {
public:
    explicit EffectIndex(Tolerance tol = {}, double cell = 1e-6) : tol_(tol), cell_(cell) {}

    std::size_t size() const { return reps_.size(); }
    const Matrix& representative(std::size_t id) const { return reps_[id]; }
    const std::vector<Matrix>& representatives() const { return reps_; }

    /// Id of the stored matrix equal to m within tolerance, if any.
    std::optional<std::size_t> find(const Matrix& m) const {
        for (int lattice = 0; lattice < 2; ++lattice) {
            auto it = buckets_.find(key_of(m, lattice == 1));
            if (it == buckets_.end()) continue;
            for (std::size_t id : it->second)
                if (frob_dist(reps_[id], m) <= tol_.eq) return id;
        }
        return std::nullopt;
    }

    /// Insert m unless an equal representative exists. Returns (id, inserted).
    std::pair<std::size_t, bool> insert(const Matrix& m) {
        if (auto id = find(m)) return {*id, false};
        const std::size_t id = reps_.size();
        reps_.push_back(m);
        buckets_[key_of(m, false)].push_back(id);
        buckets_[key_of(m, true)].push_back(id);
        return {id, true};
    }

private:
    std::uint64_t key_of(const Matrix& m, bool shifted) const {
        // FNV-1a over quantized entries plus the shape.
        std::uint64_t h = 14695981039346656037ull;
        auto mix = [&h](std::uint64_t v) {
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (v >> (8 * byte)) & 0xffu;
                h *= 1099511628211ull;
            }
        };
        mix(m.rows());
        mix(m.cols());
        const double offset = shifted ? 0.5 : 0.0;
        for (const Complex& v : m.data()) {
            mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(
                std::llround(v.real() / cell_ + offset))));
            mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(
                std::llround(v.imag() / cell_ + offset))));
        }
        // Distinguish the two lattices so ids inserted under both never alias.
        mix(shifted ? 0x9e3779b97f4a7c15ull : 0ull);
        return h;
    }

    Tolerance tol_;
    double cell_;
    std::vector<Matrix> reps_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

} // namespace povm
