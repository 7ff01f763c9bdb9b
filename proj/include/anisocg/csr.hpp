#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "anisocg/field.hpp"
#include "anisocg/operator.hpp"

namespace anisocg {

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; the pattern is structurally symmetric (7-point stencil
/// minus boundary deficits).
template <typename T>
struct CsrMatrix {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;  // n+1 offsets
    std::vector<std::int32_t> col_idx;
    std::vector<T> vals;

    std::int64_t nnz() const { return static_cast<std::int64_t>(vals.size()); }
};

/// The block-diagonal preconditioner stored as three vectors of length n in
/// the canonical column order l = (i*m + j)*n_z + k, independent of any field
/// layout. dl and du are zero at the column seams.
template <typename T>
struct TridiagonalSet {
    std::int64_t n = 0;
    int n_z = 0;
    std::vector<T> dl, dd, du;
};

namespace detail {

template <typename T>
struct Entry {
    std::int64_t col;
    T val;
};

/// Stencil row of cell (i,j,k) under the given layout, sorted by column
/// index. Returns the number of entries written (2..7).
template <typename T>
int stencil_row(const OperatorContext<T>& ctx, Layout layout, int i, int j, int k,
                std::array<Entry<T>, 7>& out) {
    const int m = ctx.m(), n_z = ctx.n_z();
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    const T area = ctx.area(i, j);

    int cnt = 0;
    const auto idx = [&](int ii, int jj, int kk) {
        return static_cast<std::int64_t>(linear_index(layout, ii, jj, kk, m, n_z));
    };
    out[cnt++] = {idx(i, j, k), ((ap[k] - bp[k] - cp[k]) * area - ctx.alpha_diag(i, j)) * d[k]};
    if (k + 1 < n_z) out[cnt++] = {idx(i, j, k + 1), area * bp[k] * d[k]};
    if (k > 0) out[cnt++] = {idx(i, j, k - 1), area * cp[k] * d[k]};
    if (i + 1 < m) out[cnt++] = {idx(i + 1, j, k), ctx.alpha_east(i, j) * d[k]};
    if (i > 0) out[cnt++] = {idx(i - 1, j, k), ctx.alpha_east(i - 1, j) * d[k]};
    if (j + 1 < m) out[cnt++] = {idx(i, j + 1, k), ctx.alpha_north(i, j) * d[k]};
    if (j > 0) out[cnt++] = {idx(i, j - 1, k), ctx.alpha_north(i, j - 1) * d[k]};
    std::sort(out.begin(), out.begin() + cnt,
              [](const Entry<T>& a, const Entry<T>& b) { return a.col < b.col; });
    return cnt;
}

inline void inverse_index(Layout layout, std::int64_t l, int m, int n_z, int& i, int& j, int& k) {
    if (layout == Layout::VerticalContiguous) {
        k = static_cast<int>(l % n_z);
        const std::int64_t col = l / n_z;
        i = static_cast<int>(col / m);
        j = static_cast<int>(col % m);
    } else {
        i = static_cast<int>(l % m);
        const std::int64_t rest = l / m;
        k = static_cast<int>(rest % n_z);
        j = static_cast<int>(rest / n_z);
    }
}

}  // namespace detail

/// Materializes the stencil as a CSR matrix whose row order follows the
/// given layout's linear index, so backend comparisons need no permutation.
template <typename T>
CsrMatrix<T> assemble_csr(const OperatorContext<T>& ctx, Layout layout, int workers = 1) {
    const int m = ctx.m(), n_z = ctx.n_z();
    const std::int64_t n = static_cast<std::int64_t>(ctx.n());

    CsrMatrix<T> A;
    A.n = n;
    A.row_ptr.resize(n + 1);
    A.row_ptr[0] = 0;
    for (std::int64_t l = 0; l < n; ++l) {
        int i, j, k;
        detail::inverse_index(layout, l, m, n_z, i, j, k);
        const int nnz_row = 1 + (k + 1 < n_z) + (k > 0) + (i + 1 < m) + (i > 0) + (j + 1 < m) +
                            (j > 0);
        A.row_ptr[l + 1] = A.row_ptr[l] + nnz_row;
    }
    A.col_idx.resize(A.row_ptr[n]);
    A.vals.resize(A.row_ptr[n]);

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t l = 0; l < n; ++l) {
        int i, j, k;
        detail::inverse_index(layout, l, m, n_z, i, j, k);
        std::array<detail::Entry<T>, 7> row;
        const int cnt = detail::stencil_row(ctx, layout, i, j, k, row);
        std::int64_t at = A.row_ptr[l];
        for (int e = 0; e < cnt; ++e, ++at) {
            A.col_idx[at] = static_cast<std::int32_t>(row[e].col);
            A.vals[at] = row[e].val;
        }
    }
    return A;
}

/// y <- A x, row-parallel.
template <typename T>
void spmv_csr(const CsrMatrix<T>& A, const Field3D<T>& x, Field3D<T>& y, int workers = 1) {
    require_conformant(x, y, "spmv_csr");
    if (static_cast<std::int64_t>(x.size()) != A.n)
        throw std::invalid_argument("spmv_csr: dimension mismatch");
    const T* xs = x.data();
    T* ys = y.data();
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t row = 0; row < A.n; ++row) {
        T sum = T(0);
        for (std::int64_t e = A.row_ptr[row]; e < A.row_ptr[row + 1]; ++e)
            sum += A.vals[e] * xs[A.col_idx[e]];
        ys[row] = sum;
    }
}

/// Extracts the per-column tridiagonal blocks of the preconditioner.
template <typename T>
TridiagonalSet<T> assemble_preconditioner(const OperatorContext<T>& ctx) {
    const int m = ctx.m(), n_z = ctx.n_z();
    TridiagonalSet<T> M;
    M.n = static_cast<std::int64_t>(ctx.n());
    M.n_z = n_z;
    M.dl.assign(M.n, T(0));
    M.dd.resize(M.n);
    M.du.assign(M.n, T(0));
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const T area = ctx.area(i, j);
            const T alpha_d = ctx.alpha_diag(i, j);
            const std::int64_t base = (static_cast<std::int64_t>(i) * m + j) * n_z;
            for (int k = 0; k < n_z; ++k) {
                M.dd[base + k] = ((ap[k] - bp[k] - cp[k]) * area - alpha_d) * d[k];
                if (k + 1 < n_z) M.du[base + k] = area * bp[k] * d[k];
                if (k > 0) M.dl[base + k] = area * cp[k] * d[k];
            }
        }
    }
    return M;
}

/// x <- M^{-1} y by the Thomas algorithm on the stored coefficients, one
/// independent solve per column. Fields may use either layout; the
/// tridiagonal coefficients always live in canonical column order.
template <typename T>
void solve_tridiag_set(const TridiagonalSet<T>& M, const Field3D<T>& y, Field3D<T>& x,
                       int workers = 1) {
    require_conformant(y, x, "solve_tridiag_set");
    if (static_cast<std::int64_t>(y.size()) != M.n)
        throw std::invalid_argument("solve_tridiag_set: dimension mismatch");
    const int m = y.m(), n_z = y.n_z();
    const LayoutStrides s(y.layout(), m, n_z);
    const T* ys = y.data();
    T* xs = x.data();
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(y.columns());
    std::atomic<bool> breakdown{false};

#pragma omp parallel num_threads(workers)
    {
        std::vector<T> phi(n_z);
#pragma omp for schedule(static)
        for (std::ptrdiff_t col = 0; col < ncols; ++col) {
            const int i = static_cast<int>(col) / m;
            const int j = static_cast<int>(col) % m;
            const std::int64_t cbase = col * n_z;
            const std::size_t base = s.column_base(y.layout(), i, j, m, n_z);

            T diag = M.dd[cbase];
            if (diag == T(0)) { breakdown.store(true); continue; }
            phi[0] = M.du[cbase] / diag;
            xs[base] = ys[base] / diag;
            std::size_t l = base;
            bool bad = false;
            for (int k = 1; k < n_z; ++k) {
                l += s.k_stride;
                const T dl_k = M.dl[cbase + k];
                diag = M.dd[cbase + k] - dl_k * phi[k - 1];
                if (diag == T(0)) { bad = true; break; }
                phi[k] = M.du[cbase + k] / diag;
                xs[l] = (ys[l] - dl_k * xs[l - s.k_stride]) / diag;
            }
            if (bad) { breakdown.store(true); continue; }
            for (int k = n_z - 2; k >= 0; --k) {
                l -= s.k_stride;
                xs[l] = xs[l] - phi[k] * xs[l + s.k_stride];
            }
        }
    }
    if (breakdown.load())
        throw NumericalBreakdown("solve_tridiag_set: zero pivot in tridiagonal elimination");
}

/// Dense materialization of the assembled matrix, row-major n x n. Refused
/// above n = 4096; this exists for small-grid verification only.
template <typename T>
std::vector<T> assemble_dense(const OperatorContext<T>& ctx, Layout layout) {
    const std::int64_t n = static_cast<std::int64_t>(ctx.n());
    if (n > 4096)
        throw std::invalid_argument("assemble_dense: refused for n > 4096 (verification oracle)");
    const CsrMatrix<T> A = assemble_csr(ctx, layout);
    std::vector<T> dense(static_cast<std::size_t>(n) * n, T(0));
    for (std::int64_t row = 0; row < n; ++row)
        for (std::int64_t e = A.row_ptr[row]; e < A.row_ptr[row + 1]; ++e)
            dense[static_cast<std::size_t>(row) * n + A.col_idx[e]] = A.vals[e];
    return dense;
}

}  // namespace anisocg
