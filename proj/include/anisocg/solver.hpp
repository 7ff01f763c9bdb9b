#pragma once

#include <chrono>
#include <cmath>
#include <cstring>
#include <memory>
#include <utility>
#include <vector>

#include "anisocg/csr.hpp"
#include "anisocg/field.hpp"
#include "anisocg/operator.hpp"

namespace anisocg {

enum class Variant { standard, interleaved };
enum class BackendKind { matrix_free, csr };

struct SolverConfig {
    double epsilon = 1e-5;  ///< relative residual tolerance
    double tau = 1e-20;     ///< absolute residual tolerance
    int maxiter = 500;
    Variant variant = Variant::standard;
    BackendKind backend = BackendKind::matrix_free;
    int workers = 1;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be > 0");
        if (!(tau > 0.0)) throw std::invalid_argument("SolverConfig: tau must be > 0");
        if (maxiter < 1) throw std::invalid_argument("SolverConfig: maxiter must be >= 1");
        if (workers < 1) throw std::invalid_argument("SolverConfig: workers must be >= 1");
        if (variant == Variant::interleaved && backend == BackendKind::csr)
            throw std::invalid_argument(
                "SolverConfig: the interleaved variant exists for the matrix-free backend only");
    }
};

/// Wall-clock seconds accumulated per kernel family over one solve.
struct KernelTimings {
    double spmv = 0.0;
    double prec = 0.0;
    double blas = 0.0;
    double fused_spmv = 0.0;
    double fused_prec = 0.0;
    double setup = 0.0;
    double total = 0.0;
};

struct SolveResult {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  ///< ||r_j||, j = 0..iterations
    std::vector<double> kappa_history;     ///< <r_j, z_j> diagnostics
    std::vector<double> alpha_history;     ///< step lengths, diagnostics
    std::vector<double> beta_history;      ///< direction updates, diagnostics
    double true_residual = 0.0;            ///< ||f - A u|| recomputed at exit
    KernelTimings timings;
};

/// ||f - A u|| computed fresh (never from the recurrence).
template <typename T>
T true_residual(const OperatorContext<T>& ctx, const Field3D<T>& u, const Field3D<T>& f,
                int workers = 1) {
    Field3D<T> t(u.m(), u.n_z(), u.layout());
    apply(ctx, u, t, workers);
    scal(T(-1), t, workers);
    axpy(T(1), f, t, workers);
    return nrm2(t, workers);
}

template <typename T>
T true_residual(const CsrMatrix<T>& A, const Field3D<T>& u, const Field3D<T>& f, int workers = 1) {
    Field3D<T> t(u.m(), u.n_z(), u.layout());
    spmv_csr(A, u, t, workers);
    scal(T(-1), t, workers);
    axpy(T(1), f, t, workers);
    return nrm2(t, workers);
}

namespace detail {

class Stopwatch {
public:
    using clock = std::chrono::steady_clock;
    explicit Stopwatch(double& acc) : acc_(acc), t0_(clock::now()) {}
    ~Stopwatch() { acc_ += since(t0_); }

    static double since(clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    }

private:
    double& acc_;
    clock::time_point t0_;
};

/// Operator/preconditioner pair behind the standard PCG loop; lets the same
/// driver run matrix-free or from stored CSR + tridiagonal data.
template <typename T>
class SolveBackend {
public:
    virtual ~SolveBackend() = default;
    virtual void apply_op(const Field3D<T>& x, Field3D<T>& y, int workers) = 0;
    virtual void apply_prec(const Field3D<T>& y, Field3D<T>& x, int workers) = 0;
    virtual T residual_norm(const Field3D<T>& u, const Field3D<T>& f, int workers) = 0;
};

template <typename T>
class MatrixFreeBackend final : public SolveBackend<T> {
public:
    explicit MatrixFreeBackend(const OperatorContext<T>& ctx) : ctx_(ctx) {}
    void apply_op(const Field3D<T>& x, Field3D<T>& y, int workers) override {
        apply(ctx_, x, y, workers);
    }
    void apply_prec(const Field3D<T>& y, Field3D<T>& x, int workers) override {
        precondition(ctx_, y, x, workers);
    }
    T residual_norm(const Field3D<T>& u, const Field3D<T>& f, int workers) override {
        return true_residual(ctx_, u, f, workers);
    }

private:
    const OperatorContext<T>& ctx_;
};

template <typename T>
class CsrBackend final : public SolveBackend<T> {
public:
    CsrBackend(const OperatorContext<T>& ctx, Layout layout, int workers)
        : A_(assemble_csr(ctx, layout, workers)), M_(assemble_preconditioner(ctx)) {}
    void apply_op(const Field3D<T>& x, Field3D<T>& y, int workers) override {
        spmv_csr(A_, x, y, workers);
    }
    void apply_prec(const Field3D<T>& y, Field3D<T>& x, int workers) override {
        solve_tridiag_set(M_, y, x, workers);
    }
    T residual_norm(const Field3D<T>& u, const Field3D<T>& f, int workers) override {
        return true_residual(A_, u, f, workers);
    }
    const CsrMatrix<T>& matrix() const { return A_; }

private:
    CsrMatrix<T> A_;
    TridiagonalSet<T> M_;
};

template <typename T>
std::unique_ptr<SolveBackend<T>> make_backend(const OperatorContext<T>& ctx, BackendKind kind,
                                              Layout layout, int workers, double& setup_acc) {
    Stopwatch sw(setup_acc);
    if (kind == BackendKind::csr)
        return std::make_unique<CsrBackend<T>>(ctx, layout, workers);
    return std::make_unique<MatrixFreeBackend<T>>(ctx);
}

}  // namespace detail

/// Standard left-preconditioned CG. The loop maintains the residual by the
/// recurrence r <- r - alpha q and exits when ||r||/||r_0|| < epsilon or
/// ||r|| < tau; the returned result carries ||f - A u|| recomputed for
/// verification.
template <typename T>
std::pair<Field3D<T>, SolveResult> pcg_standard(const OperatorContext<T>& ctx,
                                                const Field3D<T>& f, const Field3D<T>& u0,
                                                const SolverConfig& cfg) {
    cfg.validate();
    require_conformant(f, u0, "pcg_standard");
    if (f.m() != ctx.m() || f.n_z() != ctx.n_z())
        throw std::invalid_argument("pcg_standard: fields do not match operator context");

    const int w = cfg.workers;
    SolveResult res;
    const auto t_start = detail::Stopwatch::clock::now();

    auto backend = detail::make_backend(ctx, cfg.backend, f.layout(), w, res.timings.setup);

    Field3D<T> u = u0;
    Field3D<T> r = f;
    Field3D<T> z(f.m(), f.n_z(), f.layout());
    Field3D<T> q(f.m(), f.n_z(), f.layout());

    {
        detail::Stopwatch sw(res.timings.spmv);
        backend->apply_op(u, q, w);
    }
    {
        detail::Stopwatch sw(res.timings.blas);
        axpy(T(-1), q, r, w);  // r = f - A u0
    }
    T r_norm;
    {
        detail::Stopwatch sw(res.timings.blas);
        r_norm = nrm2(r, w);
    }
    const T r0_norm = r_norm;
    res.residual_history.push_back(static_cast<double>(r0_norm));
    if (static_cast<double>(r0_norm) <= cfg.tau) {
        res.converged = true;
        res.timings.total = detail::Stopwatch::since(t_start);
        res.true_residual = static_cast<double>(backend->residual_norm(u, f, w));
        return {std::move(u), std::move(res)};
    }

    {
        detail::Stopwatch sw(res.timings.prec);
        backend->apply_prec(r, z, w);
    }
    T kappa_old;
    {
        detail::Stopwatch sw(res.timings.blas);
        kappa_old = dot(r, z, w);
    }
    res.kappa_history.push_back(static_cast<double>(kappa_old));
    if (!(static_cast<double>(kappa_old) > 0.0))
        throw NumericalBreakdown("pcg_standard: <r,z> not positive (preconditioner not SPD?)");
    Field3D<T> p = z;

    for (int iter = 1; iter <= cfg.maxiter; ++iter) {
        {
            detail::Stopwatch sw(res.timings.spmv);
            backend->apply_op(p, q, w);
        }
        T sigma;
        {
            detail::Stopwatch sw(res.timings.blas);
            sigma = dot(p, q, w);
        }
        if (!(static_cast<double>(sigma) > 0.0))
            throw NumericalBreakdown("pcg_standard: <p,Ap> not positive (operator not SPD?)");
        const T alpha = kappa_old / sigma;
        res.alpha_history.push_back(static_cast<double>(alpha));
        {
            detail::Stopwatch sw(res.timings.blas);
            axpy(alpha, p, u, w);
            axpy(-alpha, q, r, w);
            r_norm = nrm2(r, w);
        }
        res.residual_history.push_back(static_cast<double>(r_norm));
        res.iterations = iter;
        if (static_cast<double>(r_norm) / static_cast<double>(r0_norm) < cfg.epsilon ||
            static_cast<double>(r_norm) < cfg.tau) {
            res.converged = true;
            break;
        }
        {
            detail::Stopwatch sw(res.timings.prec);
            backend->apply_prec(r, z, w);
        }
        T kappa;
        {
            detail::Stopwatch sw(res.timings.blas);
            kappa = dot(r, z, w);
        }
        res.kappa_history.push_back(static_cast<double>(kappa));
        const T beta = kappa / kappa_old;
        res.beta_history.push_back(static_cast<double>(beta));
        kappa_old = kappa;
        {
            detail::Stopwatch sw(res.timings.blas);
            scal(beta, p, w);
            axpy(T(1), z, p, w);
        }
    }

    res.timings.total = detail::Stopwatch::since(t_start);
    res.true_residual = static_cast<double>(backend->residual_norm(u, f, w));
    return {std::move(u), std::move(res)};
}

/// Interleaved PCG: the loop body is two grid sweeps (the fused
/// preconditioner kernel and the fused stencil kernel) plus scalar updates.
/// Iterates are mathematically identical to pcg_standard; on exit the lagged
/// u <- u + alpha p update is applied so the returned solution corresponds to
/// the last accepted residual.
template <typename T>
std::pair<Field3D<T>, SolveResult> pcg_interleaved(const OperatorContext<T>& ctx,
                                                   const Field3D<T>& f, const Field3D<T>& u0,
                                                   const SolverConfig& cfg) {
    cfg.validate();
    require_conformant(f, u0, "pcg_interleaved");
    if (f.m() != ctx.m() || f.n_z() != ctx.n_z())
        throw std::invalid_argument("pcg_interleaved: fields do not match operator context");

    const int w = cfg.workers;
    SolveResult res;
    const auto t_start = detail::Stopwatch::clock::now();

    FusedState<T> st(f.m(), f.n_z(), f.layout());
    st.u = u0;
    st.r = f;

    // Initialization chosen so that the first fused iteration coincides with
    // textbook PCG: r = f - A u0, z = M^{-1} r, p = z, q = A p,
    // kappa_old = <r,z>, sigma = <p,q>, alpha = kappa_old/sigma.
    {
        detail::Stopwatch sw(res.timings.spmv);
        apply(ctx, st.u, st.q, w);
    }
    T r_norm;
    {
        detail::Stopwatch sw(res.timings.blas);
        axpy(T(-1), st.q, st.r, w);
        r_norm = nrm2(st.r, w);
    }
    const T r0_norm = r_norm;
    res.residual_history.push_back(static_cast<double>(r0_norm));
    if (static_cast<double>(r0_norm) <= cfg.tau) {
        res.converged = true;
        res.timings.total = detail::Stopwatch::since(t_start);
        res.true_residual = static_cast<double>(true_residual(ctx, st.u, f, w));
        return {std::move(st.u), std::move(res)};
    }
    {
        detail::Stopwatch sw(res.timings.prec);
        precondition(ctx, st.r, st.z, w);
    }
    {
        detail::Stopwatch sw(res.timings.blas);
        st.kappa_old = dot(st.r, st.z, w);
    }
    res.kappa_history.push_back(static_cast<double>(st.kappa_old));
    if (!(static_cast<double>(st.kappa_old) > 0.0))
        throw NumericalBreakdown("pcg_interleaved: <r,z> not positive (preconditioner not SPD?)");
    st.p = st.z;
    {
        detail::Stopwatch sw(res.timings.spmv);
        apply(ctx, st.p, st.q, w);
    }
    {
        detail::Stopwatch sw(res.timings.blas);
        st.sigma = dot(st.p, st.q, w);
    }
    if (!(static_cast<double>(st.sigma) > 0.0))
        throw NumericalBreakdown("pcg_interleaved: <p,Ap> not positive (operator not SPD?)");
    st.alpha = st.kappa_old / st.sigma;
    res.alpha_history.push_back(static_cast<double>(st.alpha));

    for (int iter = 1; iter <= cfg.maxiter; ++iter) {
        {
            detail::Stopwatch sw(res.timings.fused_prec);
            interleaved_prec_kernel(ctx, st, w);
        }
        res.residual_history.push_back(static_cast<double>(st.r_norm));
        res.iterations = iter;
        if (static_cast<double>(st.r_norm) / static_cast<double>(r0_norm) < cfg.epsilon ||
            static_cast<double>(st.r_norm) < cfg.tau) {
            // u lags one stencil sweep behind r; catch it up.
            detail::Stopwatch sw(res.timings.blas);
            axpy(st.alpha, st.p, st.u, w);
            res.converged = true;
            break;
        }
        res.kappa_history.push_back(static_cast<double>(st.kappa));
        st.beta = st.kappa / st.kappa_old;
        res.beta_history.push_back(static_cast<double>(st.beta));
        st.kappa_old = st.kappa;
        {
            detail::Stopwatch sw(res.timings.fused_spmv);
            interleaved_spmv_kernel(ctx, st, w);
        }
        if (!(static_cast<double>(st.sigma) > 0.0))
            throw NumericalBreakdown("pcg_interleaved: <p,Ap> not positive (operator not SPD?)");
        st.alpha = st.kappa_old / st.sigma;
        res.alpha_history.push_back(static_cast<double>(st.alpha));
    }

    res.timings.total = detail::Stopwatch::since(t_start);
    res.true_residual = static_cast<double>(true_residual(ctx, st.u, f, w));
    return {std::move(st.u), std::move(res)};
}

/// Variant dispatch.
template <typename T>
std::pair<Field3D<T>, SolveResult> solve(const OperatorContext<T>& ctx, const Field3D<T>& f,
                                         const Field3D<T>& u0, const SolverConfig& cfg) {
    if (cfg.variant == Variant::interleaved) return pcg_interleaved(ctx, f, u0, cfg);
    return pcg_standard(ctx, f, u0, cfg);
}

}  // namespace anisocg
