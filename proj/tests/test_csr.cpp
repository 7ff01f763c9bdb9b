#include <doctest.h>

#include <cmath>
#include <map>

#include "anisocg/csr.hpp"
#include "anisocg/verify.hpp"
#include "oracles.hpp"

using namespace anisocg;

namespace {

struct Fixture {
    PanelGeometry geometry;
    VerticalGrid vgrid;
    VerticalProfile profile;
    OperatorContext<double> ctx;

    Fixture(bool sphere, int m, int n_z)
        : geometry(sphere ? build_cubed_sphere_panel(m) : build_planar_panel(m, 2.0)),
          vgrid(build_graded_vertical_grid(n_z, 1e-2)),
          profile(build_vertical_profile(vgrid, 6.71e-4, 3.32e-2)),
          ctx(profile, geometry) {}
};

}  // namespace

TEST_CASE("CSR structure: 2x2x2 planar has 8 rows of 4 entries") {
    Fixture fx(false, 2, 2);
    const auto A = assemble_csr(fx.ctx, Layout::VerticalContiguous);
    CHECK(A.n == 8);
    CHECK(A.nnz() == 32);  // diag + 1 vertical + 2 horizontal everywhere
    for (std::int64_t r = 0; r < A.n; ++r) CHECK(A.row_ptr[r + 1] - A.row_ptr[r] == 4);
}

TEST_CASE("CSR invariants: sorted columns, 2..7 entries, structural symmetry") {
    for (Layout layout : {Layout::VerticalContiguous, Layout::HorizontalContiguous}) {
        Fixture fx(true, 4, 8);
        const auto A = assemble_csr(fx.ctx, layout);
        CHECK(A.row_ptr.front() == 0);
        CHECK(A.row_ptr.back() == A.nnz());
        std::map<std::pair<std::int64_t, std::int64_t>, double> entries;
        for (std::int64_t r = 0; r < A.n; ++r) {
            const std::int64_t len = A.row_ptr[r + 1] - A.row_ptr[r];
            CHECK(len >= 2);
            CHECK(len <= 7);
            for (std::int64_t e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e) {
                if (e > A.row_ptr[r]) CHECK(A.col_idx[e] > A.col_idx[e - 1]);
                entries[{r, A.col_idx[e]}] = A.vals[e];
            }
        }
        double max_abs = 0.0, max_asym = 0.0;
        for (const auto& [pos, val] : entries) {
            auto it = entries.find({pos.second, pos.first});
            REQUIRE(it != entries.end());  // structural symmetry
            max_abs = std::max(max_abs, std::abs(val));
            max_asym = std::max(max_asym, std::abs(val - it->second));
        }
        CHECK(max_asym <= 1e-15 * max_abs);
    }
}

TEST_CASE("CSR rows are diagonally dominant with positive diagonal") {
    Fixture fx(true, 4, 8);
    const auto A = assemble_csr(fx.ctx, Layout::VerticalContiguous);
    for (std::int64_t r = 0; r < A.n; ++r) {
        double diag = 0.0, off = 0.0;
        for (std::int64_t e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e) {
            if (A.col_idx[e] == r) diag = A.vals[e];
            else off += std::abs(A.vals[e]);
        }
        CHECK(diag > 0.0);
        CHECK(diag >= off);
    }
}

TEST_CASE("spmv_csr agrees with the matrix-free apply and the dense oracle") {
    for (Layout layout : {Layout::VerticalContiguous, Layout::HorizontalContiguous}) {
        Fixture fx(true, 4, 8);
        const auto A = assemble_csr(fx.ctx, layout);
        const auto D = oracle::dense_operator(fx.geometry, fx.vgrid, fx.profile.omega2,
                                              fx.profile.lambda2, layout);
        for (int v = 0; v < 5; ++v) {
            Field3D<double> x(4, 8, layout);
            fill_random(x, 50 + v);
            Field3D<double> y_csr(4, 8, layout), y_mf(4, 8, layout);
            spmv_csr(A, x, y_csr);
            apply(fx.ctx, x, y_mf);
            const auto y_dense = oracle::dense_matvec(D, oracle::to_vector(x));
            for (std::size_t l = 0; l < x.size(); ++l) {
                CHECK(y_csr[l] == doctest::Approx(y_dense[l]).epsilon(1e-13));
                CHECK(y_csr[l] == doctest::Approx(y_mf[l]).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("spmv_csr basics: zero vector, diagonal matrix, dimension checks") {
    Fixture fx(false, 2, 2);
    const auto A = assemble_csr(fx.ctx, Layout::VerticalContiguous);
    Field3D<double> zero(2, 2, Layout::VerticalContiguous);
    Field3D<double> y(2, 2, Layout::VerticalContiguous, 5.0);
    spmv_csr(A, zero, y);
    for (std::size_t l = 0; l < y.size(); ++l) CHECK(y[l] == 0.0);

    CsrMatrix<double> diag;
    diag.n = 8;
    diag.row_ptr.resize(9);
    for (int r = 0; r <= 8; ++r) diag.row_ptr[r] = r;
    for (int r = 0; r < 8; ++r) {
        diag.col_idx.push_back(r);
        diag.vals.push_back(r + 1.0);
    }
    Field3D<double> x(2, 2, Layout::VerticalContiguous);
    fill_random(x, 3);
    spmv_csr(diag, x, y);
    for (std::size_t l = 0; l < x.size(); ++l) CHECK(y[l] == (l + 1.0) * x[l]);

    Field3D<double> wrong(3, 3, Layout::VerticalContiguous);
    Field3D<double> wrong_out(3, 3, Layout::VerticalContiguous);
    CHECK_THROWS_AS(spmv_csr(A, wrong, wrong_out), std::invalid_argument);
}

TEST_CASE("single column: CSR equals the tridiagonal set exactly") {
    Fixture fx(true, 1, 4);
    const auto A = assemble_csr(fx.ctx, Layout::VerticalContiguous);
    const auto M = assemble_preconditioner(fx.ctx);
    REQUIRE(A.n == 4);
    for (std::int64_t r = 0; r < 4; ++r) {
        for (std::int64_t e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e) {
            const std::int64_t c = A.col_idx[e];
            if (c == r) CHECK(A.vals[e] == M.dd[r]);
            else if (c == r + 1) CHECK(A.vals[e] == M.du[r]);
            else if (c == r - 1) CHECK(A.vals[e] == M.dl[r]);
            else FAIL("unexpected entry outside the tridiagonal band");
        }
    }
}

TEST_CASE("tridiagonal set seams and nonzero diagonal") {
    Fixture fx(true, 4, 8);
    const auto M = assemble_preconditioner(fx.ctx);
    for (std::int64_t l = 0; l < M.n; ++l) {
        CHECK(M.dd[l] != 0.0);
        if (l % 8 == 0) CHECK(M.dl[l] == 0.0);
        if (l % 8 == 7) CHECK(M.du[l] == 0.0);
    }
}

TEST_CASE("solve_tridiag_set matches matrix-free precondition and the dense oracle") {
    Fixture fx(true, 4, 8);
    const auto M = assemble_preconditioner(fx.ctx);
    const auto Md = oracle::dense_preconditioner(fx.geometry, fx.vgrid, fx.profile.omega2,
                                                 fx.profile.lambda2, Layout::VerticalContiguous);
    Field3D<double> zero(4, 8, Layout::VerticalContiguous);
    Field3D<double> x(4, 8, Layout::VerticalContiguous, 1.0);
    solve_tridiag_set(M, zero, x);
    for (std::size_t l = 0; l < x.size(); ++l) CHECK(x[l] == 0.0);

    Field3D<double> y(4, 8, Layout::VerticalContiguous);
    fill_random(y, 21);
    Field3D<double> x_stored(4, 8, Layout::VerticalContiguous);
    Field3D<double> x_mf(4, 8, Layout::VerticalContiguous);
    solve_tridiag_set(M, y, x_stored);
    precondition(fx.ctx, y, x_mf);
    const auto ref = oracle::dense_solve(Md, oracle::to_vector(y));
    for (std::size_t l = 0; l < y.size(); ++l) {
        CHECK(x_stored[l] == doctest::Approx(ref[l]).epsilon(1e-12));
        CHECK(x_stored[l] == doctest::Approx(x_mf[l]).epsilon(1e-13));
    }
}

TEST_CASE("solve_tridiag_set reports zero pivots as breakdown") {
    TridiagonalSet<double> M;
    M.n = 2;
    M.n_z = 2;
    M.dl = {0.0, 1.0};
    M.dd = {0.0, 1.0};  // zero pivot in the first row
    M.du = {1.0, 0.0};
    Field3D<double> y(1, 2, Layout::VerticalContiguous, 1.0);
    Field3D<double> x(1, 2, Layout::VerticalContiguous);
    CHECK_THROWS_AS(solve_tridiag_set(M, y, x), NumericalBreakdown);
}

TEST_CASE("assemble_dense: size guard, symmetry, single-column band") {
    Fixture fx(true, 1, 4);
    const auto D = assemble_dense(fx.ctx, Layout::VerticalContiguous);
    const auto M = assemble_preconditioner(fx.ctx);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const double v = D[static_cast<std::size_t>(r) * 4 + c];
            if (c == r) CHECK(v == M.dd[r]);
            else if (c == r + 1) CHECK(v == M.du[r]);
            else if (c == r - 1) CHECK(v == M.dl[r]);
            else CHECK(v == 0.0);
        }

    Fixture big(true, 8, 16);  // n = 1024 still allowed
    CHECK_NOTHROW(assemble_dense(big.ctx, Layout::VerticalContiguous));
    Fixture too_big(true, 8, 65);  // n = 4160 > 4096
    CHECK_THROWS_AS(assemble_dense(too_big.ctx, Layout::VerticalContiguous),
                    std::invalid_argument);
}

TEST_CASE("dense oracle: SPD at the reference parameters on 4x4x8") {
    Fixture fx(true, 4, 8);
    const auto D = assemble_dense(fx.ctx, Layout::VerticalContiguous);
    const int n = static_cast<int>(fx.ctx.n());
    double max_abs = 0.0, max_asym = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            max_abs = std::max(max_abs, std::abs(D[static_cast<std::size_t>(r) * n + c]));
            max_asym = std::max(max_asym, std::abs(D[static_cast<std::size_t>(r) * n + c] -
                                                   D[static_cast<std::size_t>(c) * n + r]));
        }
    CHECK(max_asym <= 1e-15 * max_abs);
    CHECK(dense_smallest_eigenvalue(D, n) > 0.0);
}

TEST_CASE("vertical-line preconditioning beats Jacobi on an anisotropic grid") {
    // planar 4x4x8 with gamma^2 >= 100 at every level
    Fixture fx(false, 4, 8);
    const auto g2 = anisotropy(fx.geometry, fx.vgrid, fx.profile.lambda2);
    for (double g : g2) CHECK(g >= 100.0);

    const int n = static_cast<int>(fx.ctx.n());
    const auto A = assemble_dense(fx.ctx, Layout::VerticalContiguous);
    const auto Mt = assemble_preconditioner(fx.ctx);
    std::vector<double> M(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> J(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r) {
        M[static_cast<std::size_t>(r) * n + r] = Mt.dd[r];
        if (r % fx.ctx.n_z() != 0) M[static_cast<std::size_t>(r) * n + r - 1] = Mt.dl[r];
        if (r % fx.ctx.n_z() != fx.ctx.n_z() - 1)
            M[static_cast<std::size_t>(r) * n + r + 1] = Mt.du[r];
        J[static_cast<std::size_t>(r) * n + r] = A[static_cast<std::size_t>(r) * n + r];
    }
    const auto [lo_m, hi_m] = preconditioned_eigen_range(A, M, n);
    const auto [lo_j, hi_j] = preconditioned_eigen_range(A, J, n);
    CHECK(lo_m > 0.0);
    CHECK(lo_j > 0.0);
    CHECK(hi_m / lo_m < hi_j / lo_j);
}
