#include "anisocg/verify.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "anisocg/csr.hpp"
#include "anisocg/field.hpp"
#include "anisocg/grid.hpp"
#include "anisocg/operator.hpp"
#include "anisocg/profile.hpp"
#include "anisocg/solver.hpp"

namespace anisocg {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix as_matrix(const std::vector<double>& A, int n) {
    return Eigen::Map<const RowMatrix>(A.data(), n, n);
}

double rel_diff(double a, double b, double scale) {
    return std::abs(a - b) / (scale > 0.0 ? scale : 1.0);
}

/// Max elementwise |a-b| over the infinity norm of a.
double field_rel_diff(const Field3D<double>& a, const Field3D<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        num = std::max(num, std::abs(a[l] - b[l]));
        den = std::max(den, std::abs(a[l]));
    }
    return num / (den > 0.0 ? den : 1.0);
}

Field3D<double> dense_product(const std::vector<double>& A, const Field3D<double>& x) {
    const std::size_t n = x.size();
    Field3D<double> y(x.m(), x.n_z(), x.layout());
    for (std::size_t row = 0; row < n; ++row) {
        double sum = 0.0;
        for (std::size_t col = 0; col < n; ++col) sum += A[row * n + col] * x[col];
        y[row] = sum;
    }
    return y;
}

/// y <- M x for the stored tridiagonal blocks (canonical column order).
Field3D<double> tridiag_product(const TridiagonalSet<double>& M, const Field3D<double>& x) {
    Field3D<double> y(x.m(), x.n_z(), x.layout());
    const int m = x.m(), n_z = x.n_z();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::int64_t base = (static_cast<std::int64_t>(i) * m + j) * n_z;
            for (int k = 0; k < n_z; ++k) {
                double sum = M.dd[base + k] * x(i, j, k);
                if (k > 0) sum += M.dl[base + k] * x(i, j, k - 1);
                if (k + 1 < n_z) sum += M.du[base + k] * x(i, j, k + 1);
                y(i, j, k) = sum;
            }
        }
    return y;
}

struct Setup {
    PanelGeometry geometry;
    VerticalProfile profile;
    OperatorContext<double> ctx;

    Setup(bool sphere, int m, int n_z, const VerifyOptions& o)
        : geometry(sphere ? build_cubed_sphere_panel(m) : build_planar_panel(m, 2.0)),
          profile(build_vertical_profile(build_graded_vertical_grid(n_z, o.h_atmos), o.omega2,
                                         o.lambda2)),
          ctx(profile, geometry) {}
};

std::string format_rel(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

}  // namespace

double dense_smallest_eigenvalue(const std::vector<double>& A, int n) {
    Eigen::SelfAdjointEigenSolver<RowMatrix> es(as_matrix(A, n), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::pair<double, double> preconditioned_eigen_range(const std::vector<double>& A,
                                                     const std::vector<double>& M, int n) {
    Eigen::GeneralizedSelfAdjointEigenSolver<RowMatrix> es(as_matrix(A, n), as_matrix(M, n),
                                                           Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

std::vector<VerifyCheck> run_verification(const VerifyOptions& o) {
    std::vector<VerifyCheck> checks;
    const auto add = [&checks](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({name, ok, detail});
    };

    // Panel area partitions.
    {
        const auto sphere = build_cubed_sphere_panel(16);
        const double target = 4.0 * std::numbers::pi / 6.0;
        const double sum = pairwise_sum(sphere.cell_area.data(), sphere.cell_area.size());
        const double err_s = rel_diff(sum, target, target);
        const auto planar = build_planar_panel(7, 3.0);
        const double psum = pairwise_sum(planar.cell_area.data(), planar.cell_area.size());
        const double err_p = rel_diff(psum, 9.0, 9.0);
        add("area-partition", err_s <= 1e-12 && err_p <= 1e-12,
            "sphere " + format_rel(err_s) + ", planar " + format_rel(err_p));
    }

    // alpha_diag recomputation (edge sum identity).
    {
        bool ok = true;
        for (bool sphere : {true, false}) {
            const auto g = sphere ? build_cubed_sphere_panel(5) : build_planar_panel(5, 2.0);
            for (int i = 0; i < g.m && ok; ++i)
                for (int j = 0; j < g.m && ok; ++j) {
                    double sum = 0.0;
                    if (i > 0) sum += g.east(i - 1, j);
                    if (i < g.m - 1) sum += g.east(i, j);
                    if (j > 0) sum += g.north(i, j - 1);
                    if (j < g.m - 1) sum += g.north(i, j);
                    ok = (sum == g.diag(i, j));
                }
        }
        add("alpha-diag", ok, "edge-sum identity, exact");
    }

    // Triple operator equivalence on small grids, both geometries.
    {
        double worst = 0.0;
        for (bool sphere : {true, false}) {
            for (auto [m, n_z] : {std::pair{2, 2}, std::pair{4, 8}}) {
                Setup su(sphere, m, n_z, o);
                const auto A = assemble_csr(su.ctx, Layout::VerticalContiguous);
                const auto D = assemble_dense(su.ctx, Layout::VerticalContiguous);
                for (int v = 0; v < 5; ++v) {
                    Field3D<double> x(m, n_z, Layout::VerticalContiguous);
                    fill_random(x, o.seed + 100 * v + m + (sphere ? 7 : 0));
                    Field3D<double> y_mf(m, n_z, Layout::VerticalContiguous);
                    Field3D<double> y_csr(m, n_z, Layout::VerticalContiguous);
                    apply(su.ctx, x, y_mf);
                    spmv_csr(A, x, y_csr);
                    const auto y_dense = dense_product(D, x);
                    worst = std::max(worst, field_rel_diff(y_mf, y_csr));
                    worst = std::max(worst, field_rel_diff(y_mf, y_dense));
                    worst = std::max(worst, field_rel_diff(y_csr, y_dense));
                }
            }
        }
        add("operator-equivalence", worst <= 1e-13, "max pairwise rel " + format_rel(worst));
    }

    // Dense symmetry and SPD on the configured grid.
    {
        Setup su(true, o.m, o.n_z, o);
        auto D = assemble_dense(su.ctx, Layout::VerticalContiguous);
        const int n = static_cast<int>(su.ctx.n());
        if (o.inject == "sign-error") {
            // Hidden negative control: flip one off-diagonal entry.
            D[1] = -D[1];
        }
        double max_abs = 0.0, max_asym = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                max_abs = std::max(max_abs, std::abs(D[static_cast<std::size_t>(r) * n + c]));
                max_asym = std::max(max_asym, std::abs(D[static_cast<std::size_t>(r) * n + c] -
                                                       D[static_cast<std::size_t>(c) * n + r]));
            }
        add("symmetry", max_asym <= 1e-15 * max_abs,
            "max |A-A^T| = " + format_rel(max_asym) + " vs max |A| = " + format_rel(max_abs));
        const double lmin = dense_smallest_eigenvalue(D, n);
        add("spd", lmin > 0.0, "smallest eigenvalue " + format_rel(lmin));
    }

    // Preconditioner exactness, both backends.
    {
        Setup su(true, 8, 16, o);
        const auto M = assemble_preconditioner(su.ctx);
        double worst = 0.0;
        for (int v = 0; v < 3; ++v) {
            Field3D<double> y(8, 16, Layout::VerticalContiguous);
            fill_random(y, o.seed + v);
            Field3D<double> x_mf(8, 16, Layout::VerticalContiguous);
            Field3D<double> x_st(8, 16, Layout::VerticalContiguous);
            precondition(su.ctx, y, x_mf);
            solve_tridiag_set(M, y, x_st);
            const double ynorm = nrm2(y);
            for (const auto* x : {&x_mf, &x_st}) {
                auto mx = tridiag_product(M, *x);
                scal(-1.0, mx);
                axpy(1.0, y, mx);
                worst = std::max(worst, static_cast<double>(nrm2(mx)) / ynorm);
            }
        }
        add("preconditioner-exactness", worst <= 1e-12, "max residual rel " + format_rel(worst));
    }

    // Fused kernels against their unfused sequences.
    {
        Setup su(true, 8, 16, o);
        FusedState<double> st(8, 16, Layout::VerticalContiguous);
        fill_random(st.u, o.seed + 11);
        fill_random(st.r, o.seed + 12);
        fill_random(st.z, o.seed + 13);
        fill_random(st.p, o.seed + 14);
        fill_random(st.q, o.seed + 15);
        st.alpha = 0.37;
        st.beta = 0.21;

        // Unfused reference for the stencil kernel.
        Field3D<double> u_ref = st.u, p_ref = st.p, q_ref = st.q;
        axpy(st.alpha, p_ref, u_ref);
        Field3D<double> t(8, 16, Layout::VerticalContiguous);
        scal(st.beta, p_ref);
        axpy(1.0, st.z, p_ref);
        apply(su.ctx, st.z, t);
        scal(st.beta, q_ref);
        axpy(1.0, t, q_ref);
        const double sigma_ref = dot(p_ref, q_ref);
        const double sigma = interleaved_spmv_kernel(su.ctx, st);
        double worst = std::max({field_rel_diff(st.u, u_ref), field_rel_diff(st.p, p_ref),
                                 field_rel_diff(st.q, q_ref),
                                 rel_diff(sigma, sigma_ref, std::abs(sigma_ref))});
        add("fusion-spmv", worst <= 1e-13, "max rel " + format_rel(worst));

        Field3D<double> r_ref = st.r, z_ref(8, 16, Layout::VerticalContiguous);
        axpy(-st.alpha, st.q, r_ref);
        precondition(su.ctx, r_ref, z_ref);
        const double rn_ref = nrm2(r_ref);
        const double kappa_ref = dot(r_ref, z_ref);
        const auto [rn, kappa] = interleaved_prec_kernel(su.ctx, st);
        worst = std::max({field_rel_diff(st.r, r_ref), field_rel_diff(st.z, z_ref),
                          rel_diff(rn, rn_ref, rn_ref),
                          rel_diff(kappa, kappa_ref, std::abs(kappa_ref))});
        add("fusion-prec", worst <= 1e-13, "max rel " + format_rel(worst));
    }

    // Variant and backend equivalence over a fixed iteration window. The
    // coupling parameter is rescaled to this grid size at a fixed Courant
    // number so the run is representative (with the reference omega^2 an
    // 8x8 panel is so well conditioned that the residual collapses by two
    // orders per iteration). Histories are compared normalized by ||r_0||:
    // each small residual is formed by cancellation of O(||r_0||)-sized
    // updates, so that is the scale rounding noise lives on.
    {
        VerifyOptions scaled = o;
        scaled.omega2 = o.omega2 * (256.0 / 16) * (256.0 / 16);
        Setup su(true, 16, 32, scaled);
        Field3D<double> f(16, 32, Layout::VerticalContiguous);
        fill_random(f, o.seed);
        Field3D<double> u0(16, 32, Layout::VerticalContiguous);
        SolverConfig cfg;
        cfg.epsilon = 1e-300;
        cfg.tau = 1e-300;
        cfg.maxiter = 50;
        auto [u_std, r_std] = pcg_standard(su.ctx, f, u0, cfg);
        cfg.variant = Variant::interleaved;
        auto [u_il, r_il] = pcg_interleaved(su.ctx, f, u0, cfg);
        const double r0 = r_std.residual_history.front();
        double worst = 0.0;
        for (std::size_t j = 0; j < r_std.residual_history.size(); ++j)
            worst = std::max(worst, std::abs(r_std.residual_history[j] -
                                             r_il.residual_history[j]) /
                                        r0);
        add("variant-equivalence", worst <= 1e-13,
            "max |drift|/||r0|| " + format_rel(worst) + " over 50 iterations");

        SolverConfig ccfg = cfg;
        ccfg.variant = Variant::standard;
        ccfg.backend = BackendKind::csr;
        auto [u_csr, r_csr] = pcg_standard(su.ctx, f, u0, ccfg);
        worst = 0.0;
        for (std::size_t j = 0; j < r_std.residual_history.size(); ++j)
            worst = std::max(worst, std::abs(r_std.residual_history[j] -
                                             r_csr.residual_history[j]) /
                                        r0);
        add("backend-equivalence", worst <= 1e-13,
            "max |drift|/||r0|| " + format_rel(worst) + " over 50 iterations");
    }

    // Preconditioned spectrum on a strongly anisotropic planar grid.
    {
        Setup su(false, 4, 8, o);
        const int n = static_cast<int>(su.ctx.n());
        const auto A = assemble_dense(su.ctx, Layout::VerticalContiguous);
        const auto Mt = assemble_preconditioner(su.ctx);
        std::vector<double> M(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> J(static_cast<std::size_t>(n) * n, 0.0);
        for (int r = 0; r < n; ++r) {
            M[static_cast<std::size_t>(r) * n + r] = Mt.dd[r];
            if (r % su.ctx.n_z() != 0) M[static_cast<std::size_t>(r) * n + r - 1] = Mt.dl[r];
            if (r % su.ctx.n_z() != su.ctx.n_z() - 1)
                M[static_cast<std::size_t>(r) * n + r + 1] = Mt.du[r];
            J[static_cast<std::size_t>(r) * n + r] = A[static_cast<std::size_t>(r) * n + r];
        }
        const auto [lo_m, hi_m] = preconditioned_eigen_range(A, M, n);
        const auto [lo_j, hi_j] = preconditioned_eigen_range(A, J, n);
        const double cond_m = hi_m / lo_m;
        const double cond_j = hi_j / lo_j;
        add("spectrum", lo_m > 0.0 && cond_m < cond_j,
            "cond(M^-1 A) = " + format_rel(cond_m) + " vs cond(diag^-1 A) = " + format_rel(cond_j));
    }

    // Worker-count determinism of a full solve.
    {
        Setup su(true, 8, 16, o);
        Field3D<double> f(8, 16, Layout::VerticalContiguous);
        fill_random(f, o.seed);
        Field3D<double> u0(8, 16, Layout::VerticalContiguous);
        SolverConfig cfg;
        cfg.epsilon = 1e-8;
        cfg.maxiter = 200;
        cfg.variant = Variant::interleaved;
        auto [u1, r1] = pcg_interleaved(su.ctx, f, u0, cfg);
        cfg.workers = std::max(2, o.workers);
        auto [uN, rN] = pcg_interleaved(su.ctx, f, u0, cfg);
        bool ok = r1.residual_history == rN.residual_history && u1.size() == uN.size();
        if (ok)
            for (std::size_t l = 0; l < u1.size(); ++l)
                if (u1[l] != uN[l]) { ok = false; break; }
        add("determinism", ok, ok ? "bit-identical for 1 vs N workers" : "results differ");
    }

    return checks;
}

}  // namespace anisocg
