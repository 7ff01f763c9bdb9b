#pragma once

#include <cstddef>

namespace anisocg {

/// Sums an array through a fixed binary combination tree: halve, recurse,
/// add. The tree shape depends only on the length, so reductions whose
/// partials were computed per column stay bit-identical for any worker
/// count. Short runs are summed left to right.
template <typename T>
T pairwise_sum(const T* v, std::size_t n) {
    if (n <= 8) {
        T s = T(0);
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace anisocg
