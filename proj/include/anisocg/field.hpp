#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisocg/parallel.hpp"

namespace anisocg {

/// Linear orderings of a 3D field on an m x m x n_z grid.
///
/// VerticalContiguous keeps each vertical column contiguous (cache friendly
/// for the per-column sweeps of the solver); HorizontalContiguous lets the
/// first horizontal index run fastest, the unit-stride-across-columns order
/// used to study coalesced access patterns.
enum class Layout { VerticalContiguous, HorizontalContiguous };

inline std::size_t linear_index(Layout layout, int i, int j, int k, int m, int n_z) {
    assert(i >= 0 && i < m && j >= 0 && j < m && k >= 0 && k < n_z);
    if (layout == Layout::VerticalContiguous)
        return static_cast<std::size_t>(n_z) * (static_cast<std::size_t>(m) * i + j) + k;
    return static_cast<std::size_t>(m) * (static_cast<std::size_t>(n_z) * j + k) + i;
}

/// Address strides of a layout: the linear index of (i,j,k) is
/// column_base(i,j) + k*k_stride, and the four horizontal neighbors at the
/// same level sit at fixed offsets east/west/north/south. Kernels loop over
/// columns with these strides so that a single code path serves both layouts.
struct LayoutStrides {
    std::ptrdiff_t k_stride, east, north;

    LayoutStrides(Layout layout, int m, int n_z) {
        if (layout == Layout::VerticalContiguous) {
            k_stride = 1;
            east = static_cast<std::ptrdiff_t>(n_z) * m;
            north = n_z;
        } else {
            k_stride = m;
            east = 1;
            north = static_cast<std::ptrdiff_t>(m) * n_z;
        }
    }

    std::size_t column_base(Layout layout, int i, int j, int m, int n_z) const {
        return linear_index(layout, i, j, 0, m, n_z);
    }
};

/// A scalar field on the m x m x n_z grid with a runtime-selected linear
/// ordering. T is float or double; the precision of a solve is fixed by the
/// field type of its vectors.
template <typename T>
class Field3D {
public:
    Field3D() = default;
    Field3D(int m, int n_z, Layout layout, T fill = T(0))
        : m_(m), n_z_(n_z), layout_(layout),
          data_(static_cast<std::size_t>(m) * m * n_z, fill) {
        if (m < 1 || n_z < 1) throw std::invalid_argument("Field3D: m and n_z must be >= 1");
    }

    int m() const { return m_; }
    int n_z() const { return n_z_; }
    Layout layout() const { return layout_; }
    std::size_t size() const { return data_.size(); }
    std::size_t columns() const { return static_cast<std::size_t>(m_) * m_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator()(int i, int j, int k) { return data_[linear_index(layout_, i, j, k, m_, n_z_)]; }
    const T& operator()(int i, int j, int k) const {
        return data_[linear_index(layout_, i, j, k, m_, n_z_)];
    }

    T& operator[](std::size_t l) { return data_[l]; }
    const T& operator[](std::size_t l) const { return data_[l]; }

    bool conforms(const Field3D& other) const {
        return m_ == other.m_ && n_z_ == other.n_z_ && layout_ == other.layout_;
    }

private:
    int m_ = 0;
    int n_z_ = 0;
    Layout layout_ = Layout::VerticalContiguous;
    std::vector<T> data_;
};

template <typename T>
inline void require_conformant(const Field3D<T>& a, const Field3D<T>& b, const char* what) {
    if (!a.conforms(b)) throw std::invalid_argument(std::string(what) + ": shape/layout mismatch");
}

/// Value-preserving permutation into the target layout (copy if it already
/// matches).
template <typename T>
Field3D<T> relayout(const Field3D<T>& x, Layout target) {
    Field3D<T> out(x.m(), x.n_z(), target);
    for (int i = 0; i < x.m(); ++i)
        for (int j = 0; j < x.m(); ++j)
            for (int k = 0; k < x.n_z(); ++k) out(i, j, k) = x(i, j, k);
    return out;
}

// Level-1 vector operations. All of them partition the column set across
// `workers` threads; dot and nrm2 reduce per-column partial sums (sequential
// in ascending k) through the fixed pairwise tree of parallel.hpp, so their
// results do not depend on the worker count.

template <typename T>
void axpy(T alpha, const Field3D<T>& x, Field3D<T>& y, int workers = 1) {
    require_conformant(x, y, "axpy");
    const T* xs = x.data();
    T* ys = y.data();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t l = 0; l < n; ++l) ys[l] = alpha * xs[l] + ys[l];
}

template <typename T>
void scal(T alpha, Field3D<T>& x, int workers = 1) {
    T* xs = x.data();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t l = 0; l < n; ++l) xs[l] = alpha * xs[l];
}

template <typename T>
T dot(const Field3D<T>& x, const Field3D<T>& y, int workers = 1) {
    require_conformant(x, y, "dot");
    const int m = x.m(), n_z = x.n_z();
    const LayoutStrides s(x.layout(), m, n_z);
    const T* xs = x.data();
    const T* ys = y.data();
    std::vector<T> partials(x.columns());
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(x.columns());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t col = 0; col < ncols; ++col) {
        const int i = static_cast<int>(col) / m;
        const int j = static_cast<int>(col) % m;
        std::size_t l = s.column_base(x.layout(), i, j, m, n_z);
        T sum = T(0);
        for (int k = 0; k < n_z; ++k, l += s.k_stride) sum += xs[l] * ys[l];
        partials[col] = sum;
    }
    return pairwise_sum(partials.data(), partials.size());
}

template <typename T>
T nrm2(const Field3D<T>& x, int workers = 1) {
    using std::sqrt;
    const int m = x.m(), n_z = x.n_z();
    const LayoutStrides s(x.layout(), m, n_z);
    const T* xs = x.data();
    std::vector<T> partials(x.columns());
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(x.columns());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t col = 0; col < ncols; ++col) {
        const int i = static_cast<int>(col) / m;
        const int j = static_cast<int>(col) % m;
        std::size_t l = s.column_base(x.layout(), i, j, m, n_z);
        T sum = T(0);
        for (int k = 0; k < n_z; ++k, l += s.k_stride) sum += xs[l] * xs[l];
        partials[col] = sum;
    }
    return sqrt(pairwise_sum(partials.data(), partials.size()));
}

/// Deterministic pseudorandom fill, uniform in [-1, 1). The draw sequence
/// follows the canonical column order (i, j, k ascending), so the produced
/// field is the same under either layout and any worker count. Used for the
/// benchmark right-hand sides; the generator is splitmix64, fixed here so
/// results are reproducible across platforms and standard libraries.
template <typename T>
void fill_random(Field3D<T>& x, std::uint64_t seed) {
    std::uint64_t state = seed;
    auto next = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    for (int i = 0; i < x.m(); ++i)
        for (int j = 0; j < x.m(); ++j)
            for (int k = 0; k < x.n_z(); ++k) {
                const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;  // [0,1)
                x(i, j, k) = static_cast<T>(2.0 * u - 1.0);
            }
}

}  // namespace anisocg
