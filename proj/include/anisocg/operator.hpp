#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "anisocg/field.hpp"
#include "anisocg/grid.hpp"
#include "anisocg/parallel.hpp"
#include "anisocg/profile.hpp"

namespace anisocg {

/// Thrown when a tridiagonal elimination hits a zero pivot or a CG scalar
/// loses positivity. Cannot happen for coefficients built by
/// build_vertical_profile, but user-supplied data goes through the same
/// kernels.
class NumericalBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything the stencil kernels need, converted to the working precision:
/// the four per-level coefficient vectors and the per-column geometry.
/// Immutable after construction and shared read-only by all workers.
template <typename T>
class OperatorContext {
public:
    OperatorContext(const VerticalProfile& profile, const PanelGeometry& geometry)
        : m_(geometry.m), n_z_(profile.n_z) {
        if (m_ < 1 || n_z_ < 1)
            throw std::invalid_argument("OperatorContext: empty profile or geometry");
        a_prime_.assign(profile.a_prime.begin(), profile.a_prime.end());
        b_prime_.assign(profile.b_prime.begin(), profile.b_prime.end());
        c_prime_.assign(profile.c_prime.begin(), profile.c_prime.end());
        d_.assign(profile.d.begin(), profile.d.end());
        cell_area_.assign(geometry.cell_area.begin(), geometry.cell_area.end());
        alpha_east_.assign(geometry.alpha_east.begin(), geometry.alpha_east.end());
        alpha_north_.assign(geometry.alpha_north.begin(), geometry.alpha_north.end());
        alpha_diag_.assign(geometry.alpha_diag.begin(), geometry.alpha_diag.end());
    }

    int m() const { return m_; }
    int n_z() const { return n_z_; }
    std::size_t n() const { return static_cast<std::size_t>(m_) * m_ * n_z_; }

    const T* a_prime() const { return a_prime_.data(); }
    const T* b_prime() const { return b_prime_.data(); }
    const T* c_prime() const { return c_prime_.data(); }
    const T* d() const { return d_.data(); }

    T area(int i, int j) const { return cell_area_[static_cast<std::size_t>(i) * m_ + j]; }
    T alpha_diag(int i, int j) const { return alpha_diag_[static_cast<std::size_t>(i) * m_ + j]; }
    T alpha_east(int i, int j) const { return alpha_east_[static_cast<std::size_t>(i) * m_ + j]; }
    T alpha_north(int i, int j) const {
        return alpha_north_[static_cast<std::size_t>(i) * (m_ - 1) + j];
    }

private:
    int m_;
    int n_z_;
    std::vector<T> a_prime_, b_prime_, c_prime_, d_;
    std::vector<T> cell_area_, alpha_east_, alpha_north_, alpha_diag_;
};

namespace detail {

/// Per-column stencil data: cell area, the diagonal coupling sum, and the
/// four edge coefficients with their address offsets. Missing edges get a
/// zero coefficient and a zero offset, so boundary columns run the same
/// inner loop as interior ones (the clamped read is multiplied by zero).
template <typename T>
struct ColumnStencil {
    T area, alpha_diag;
    T a_e, a_w, a_n, a_s;
    std::ptrdiff_t o_e, o_w, o_n, o_s;

    ColumnStencil(const OperatorContext<T>& ctx, const LayoutStrides& s, int i, int j) {
        const int m = ctx.m();
        area = ctx.area(i, j);
        alpha_diag = ctx.alpha_diag(i, j);
        a_e = (i + 1 < m) ? ctx.alpha_east(i, j) : T(0);
        a_w = (i > 0) ? ctx.alpha_east(i - 1, j) : T(0);
        a_n = (j + 1 < m) ? ctx.alpha_north(i, j) : T(0);
        a_s = (j > 0) ? ctx.alpha_north(i, j - 1) : T(0);
        o_e = (i + 1 < m) ? s.east : 0;
        o_w = (i > 0) ? -s.east : 0;
        o_n = (j + 1 < m) ? s.north : 0;
        o_s = (j > 0) ? -s.north : 0;
    }
};

}  // namespace detail

/// y <- A x. The stencil is recomputed per cell from the context; geometry is
/// loaded once per column. Neumann closure: absent horizontal terms carry a
/// zero coefficient and the vertical closure is built into b', c'.
template <typename T>
void apply(const OperatorContext<T>& ctx, const Field3D<T>& x, Field3D<T>& y, int workers = 1) {
    require_conformant(x, y, "apply");
    if (x.m() != ctx.m() || x.n_z() != ctx.n_z())
        throw std::invalid_argument("apply: field does not match operator context");
    if (x.data() == y.data()) throw std::invalid_argument("apply: x and y must not alias");

    const int m = ctx.m(), n_z = ctx.n_z();
    const LayoutStrides s(x.layout(), m, n_z);
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    const T* xs = x.data();
    T* ys = y.data();
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(x.columns());

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t col = 0; col < ncols; ++col) {
        const int i = static_cast<int>(col) / m;
        const int j = static_cast<int>(col) % m;
        const detail::ColumnStencil<T> cs(ctx, s, i, j);
        std::size_t l = s.column_base(x.layout(), i, j, m, n_z);
        for (int k = 0; k < n_z; ++k, l += s.k_stride) {
            const std::ptrdiff_t up = (k + 1 < n_z) ? s.k_stride : 0;
            const std::ptrdiff_t dn = (k > 0) ? -s.k_stride : 0;
            const T t = ((ap[k] - bp[k] - cp[k]) * cs.area - cs.alpha_diag) * xs[l]
                        + cs.area * bp[k] * xs[l + up]
                        + cs.area * cp[k] * xs[l + dn]
                        + cs.a_e * xs[l + cs.o_e] + cs.a_w * xs[l + cs.o_w]
                        + cs.a_n * xs[l + cs.o_n] + cs.a_s * xs[l + cs.o_s];
            ys[l] = t * d[k];
        }
    }
}

/// x <- M^{-1} y where M drops the horizontal couplings: one tridiagonal
/// Thomas solve per vertical column, columns independent. The system solved
/// per column is
///   |T| d_k [ c'_k x_{k-1} + ((a'_k-b'_k-c'_k) - alpha/|T|) x_k + b'_k x_{k+1} ] = y_k.
template <typename T>
void precondition(const OperatorContext<T>& ctx, const Field3D<T>& y, Field3D<T>& x,
                  int workers = 1) {
    require_conformant(y, x, "precondition");
    if (y.m() != ctx.m() || y.n_z() != ctx.n_z())
        throw std::invalid_argument("precondition: field does not match operator context");
    if (y.data() == x.data()) throw std::invalid_argument("precondition: y and x must not alias");

    const int m = ctx.m(), n_z = ctx.n_z();
    const LayoutStrides s(y.layout(), m, n_z);
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    const T* ys = y.data();
    T* xs = x.data();
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(y.columns());
    std::atomic<bool> breakdown{false};

#pragma omp parallel num_threads(workers)
    {
        std::vector<T> phi(n_z);  // per-worker scratch, never shared
#pragma omp for schedule(static)
        for (std::ptrdiff_t col = 0; col < ncols; ++col) {
            const int i = static_cast<int>(col) / m;
            const int j = static_cast<int>(col) % m;
            const T area = ctx.area(i, j);
            const T alpha_t = ctx.alpha_diag(i, j) / area;
            const std::size_t base = s.column_base(y.layout(), i, j, m, n_z);

            T diag = (ap[0] - bp[0] - cp[0]) - alpha_t;
            if (diag == T(0)) { breakdown.store(true); continue; }
            phi[0] = bp[0] / diag;
            xs[base] = ys[base] / (area * d[0]) / diag;
            std::size_t l = base;
            for (int k = 1; k < n_z; ++k) {
                l += s.k_stride;
                diag = ((ap[k] - bp[k] - cp[k]) - alpha_t) - phi[k - 1] * cp[k];
                if (diag == T(0)) { breakdown.store(true); break; }
                phi[k] = bp[k] / diag;
                xs[l] = (ys[l] / (area * d[k]) - cp[k] * xs[l - s.k_stride]) / diag;
            }
            for (int k = n_z - 2; k >= 0; --k) {
                l -= s.k_stride;
                xs[l] = xs[l] - phi[k] * xs[l + s.k_stride];
            }
        }
    }
    if (breakdown.load())
        throw NumericalBreakdown("precondition: zero pivot in tridiagonal elimination");
}

/// The five CG vectors and the scalar state threaded through the fused
/// kernels of the interleaved loop.
template <typename T>
struct FusedState {
    Field3D<T> u, r, z, p, q;
    T alpha = T(0);
    T beta = T(0);
    T kappa = T(0);
    T kappa_old = T(0);
    T sigma = T(0);
    T r_norm = T(0);

    FusedState(int m, int n_z, Layout layout)
        : u(m, n_z, layout), r(m, n_z, layout), z(m, n_z, layout), p(m, n_z, layout),
          q(m, n_z, layout) {}
};

/// Fused sweep computing u <- u + alpha p, p <- z + beta p, q <- A z + beta q
/// and sigma = <p,q> in a single pass over the grid. z is only read; neighbor
/// loads therefore always see pre-sweep values. Returns sigma (also stored in
/// the state).
template <typename T>
T interleaved_spmv_kernel(const OperatorContext<T>& ctx, FusedState<T>& state, int workers = 1) {
    const int m = ctx.m(), n_z = ctx.n_z();
    require_conformant(state.u, state.z, "interleaved_spmv_kernel");
    if (state.u.m() != m || state.u.n_z() != n_z)
        throw std::invalid_argument("interleaved_spmv_kernel: state does not match context");

    const Layout layout = state.u.layout();
    const LayoutStrides s(layout, m, n_z);
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    const T alpha = state.alpha;
    const T beta = state.beta;
    T* us = state.u.data();
    T* ps = state.p.data();
    T* qs = state.q.data();
    const T* zs = state.z.data();
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(state.u.columns());
    std::vector<T> partials(ncols);

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t col = 0; col < ncols; ++col) {
        const int i = static_cast<int>(col) / m;
        const int j = static_cast<int>(col) % m;
        const detail::ColumnStencil<T> cs(ctx, s, i, j);
        std::size_t l = s.column_base(layout, i, j, m, n_z);
        T sigma = T(0);
        for (int k = 0; k < n_z; ++k, l += s.k_stride) {
            const std::ptrdiff_t up = (k + 1 < n_z) ? s.k_stride : 0;
            const std::ptrdiff_t dn = (k > 0) ? -s.k_stride : 0;
            T pstar = ps[l];
            T qstar = qs[l];
            const T zstar = zs[l];
            us[l] = us[l] + alpha * pstar;
            pstar = beta * pstar + zstar;
            qstar = beta * qstar;
            ps[l] = pstar;
            const T dq = ((ap[k] - bp[k] - cp[k]) * cs.area - cs.alpha_diag) * zstar
                         + cs.area * bp[k] * zs[l + up]
                         + cs.area * cp[k] * zs[l + dn]
                         + cs.a_e * zs[l + cs.o_e] + cs.a_w * zs[l + cs.o_w]
                         + cs.a_n * zs[l + cs.o_n] + cs.a_s * zs[l + cs.o_s];
            qstar = qstar + d[k] * dq;
            sigma = sigma + pstar * qstar;
            qs[l] = qstar;
        }
        partials[col] = sigma;
    }
    state.sigma = pairwise_sum(partials.data(), partials.size());
    return state.sigma;
}

/// Fused sweep computing r <- r - alpha q, z = M^{-1} r, R = ||r|| and
/// kappa = <r,z> in a single pass: the residual update and the norm ride the
/// forward Thomas recurrence, kappa is accumulated while the backward sweep
/// finalizes z. Returns (R, kappa), also stored in the state.
template <typename T>
std::pair<T, T> interleaved_prec_kernel(const OperatorContext<T>& ctx, FusedState<T>& state,
                                        int workers = 1) {
    using std::sqrt;
    const int m = ctx.m(), n_z = ctx.n_z();
    require_conformant(state.r, state.z, "interleaved_prec_kernel");
    if (state.r.m() != m || state.r.n_z() != n_z)
        throw std::invalid_argument("interleaved_prec_kernel: state does not match context");

    const Layout layout = state.r.layout();
    const LayoutStrides s(layout, m, n_z);
    const T* ap = ctx.a_prime();
    const T* bp = ctx.b_prime();
    const T* cp = ctx.c_prime();
    const T* d = ctx.d();
    const T alpha = state.alpha;
    T* rs = state.r.data();
    T* zs = state.z.data();
    const T* qs = state.q.data();
    const std::ptrdiff_t ncols = static_cast<std::ptrdiff_t>(state.r.columns());
    std::vector<T> r2_partials(ncols), kappa_partials(ncols);
    std::atomic<bool> breakdown{false};

#pragma omp parallel num_threads(workers)
    {
        std::vector<T> phi(n_z);
#pragma omp for schedule(static)
        for (std::ptrdiff_t col = 0; col < ncols; ++col) {
            const int i = static_cast<int>(col) / m;
            const int j = static_cast<int>(col) % m;
            const T area = ctx.area(i, j);
            const T alpha_t = ctx.alpha_diag(i, j) / area;
            const std::size_t base = s.column_base(layout, i, j, m, n_z);
            T r2 = T(0);

            T diag = (ap[0] - bp[0] - cp[0]) - alpha_t;
            if (diag == T(0)) { breakdown.store(true); continue; }
            phi[0] = bp[0] / diag;
            T rstar = rs[base] - alpha * qs[base];
            r2 = r2 + rstar * rstar;
            zs[base] = rstar / (diag * area * d[0]);
            rs[base] = rstar;

            std::size_t l = base;
            bool bad = false;
            for (int k = 1; k < n_z; ++k) {
                l += s.k_stride;
                diag = ((ap[k] - bp[k] - cp[k]) - alpha_t) - phi[k - 1] * cp[k];
                if (diag == T(0)) { bad = true; break; }
                phi[k] = bp[k] / diag;
                rstar = rs[l] - alpha * qs[l];
                r2 = r2 + rstar * rstar;
                zs[l] = (rstar / (area * d[k]) - cp[k] * zs[l - s.k_stride]) / diag;
                rs[l] = rstar;
            }
            if (bad) { breakdown.store(true); continue; }

            T kappa = zs[l] * rs[l];
            for (int k = n_z - 2; k >= 0; --k) {
                l -= s.k_stride;
                const T zstar = zs[l] - phi[k] * zs[l + s.k_stride];
                kappa = kappa + zstar * rs[l];
                zs[l] = zstar;
            }
            r2_partials[col] = r2;
            kappa_partials[col] = kappa;
        }
    }
    if (breakdown.load())
        throw NumericalBreakdown("interleaved_prec_kernel: zero pivot in tridiagonal elimination");

    state.r_norm = sqrt(pairwise_sum(r2_partials.data(), r2_partials.size()));
    state.kappa = pairwise_sum(kappa_partials.data(), kappa_partials.size());
    return {state.r_norm, state.kappa};
}

}  // namespace anisocg
