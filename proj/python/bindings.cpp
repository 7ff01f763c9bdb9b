// Python bindings for the double-precision solver API. Fields cross the
// boundary as C-contiguous (m, m, n_z) numpy arrays, which is exactly the
// vertically contiguous layout.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

#include "anisocg/cost_model.hpp"
#include "anisocg/csr.hpp"
#include "anisocg/field.hpp"
#include "anisocg/grid.hpp"
#include "anisocg/operator.hpp"
#include "anisocg/profile.hpp"
#include "anisocg/solver.hpp"

namespace py = pybind11;
using namespace anisocg;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> vector_to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

py::array_t<double> matrix_to_array(const std::vector<double>& v, py::ssize_t rows,
                                    py::ssize_t cols) {
    py::array_t<double> out({rows, cols});
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

Field3D<double> array_to_field(const DArray& arr, int m, int n_z) {
    if (arr.ndim() != 3 || arr.shape(0) != m || arr.shape(1) != m || arr.shape(2) != n_z)
        throw std::invalid_argument("expected a (m, m, n_z) array matching the operator context");
    Field3D<double> f(m, n_z, Layout::VerticalContiguous);
    std::memcpy(f.data(), arr.data(), f.size() * sizeof(double));
    return f;
}

py::array_t<double> field_to_array(const Field3D<double>& f) {
    py::array_t<double> out({static_cast<py::ssize_t>(f.m()), static_cast<py::ssize_t>(f.m()),
                             static_cast<py::ssize_t>(f.n_z())});
    const Field3D<double>* src = &f;
    Field3D<double> converted(1, 1, Layout::VerticalContiguous);
    if (f.layout() != Layout::VerticalContiguous) {
        converted = relayout(f, Layout::VerticalContiguous);
        src = &converted;
    }
    std::memcpy(out.mutable_data(), src->data(), src->size() * sizeof(double));
    return out;
}

Kernel parse_kernel(const std::string& name) {
    for (Kernel k : {Kernel::spmv, Kernel::prec, Kernel::blas, Kernel::interleaved_spmv,
                     Kernel::interleaved_prec, Kernel::pcg_total, Kernel::interleaved_total})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown kernel: " + name);
}

CacheAssumption parse_cache(const std::string& name) {
    for (CacheAssumption c : {CacheAssumption::none, CacheAssumption::matrix_cached,
                              CacheAssumption::columns_cached})
        if (name == to_string(c)) return c;
    throw std::invalid_argument("unknown cache assumption: " + name);
}

}  // namespace

PYBIND11_MODULE(_anisocg, mod) {
    mod.doc() = "Matrix-free PCG solver for strongly anisotropic elliptic equations";

    py::class_<VerticalGrid>(mod, "VerticalGrid")
        .def_readonly("n_z", &VerticalGrid::n_z)
        .def_readonly("h_atmos", &VerticalGrid::h_atmos)
        .def_property_readonly("r", [](const VerticalGrid& g) { return vector_to_array(g.r); });

    py::class_<PanelGeometry>(mod, "PanelGeometry")
        .def_readonly("m", &PanelGeometry::m)
        .def_property_readonly("cell_area",
                               [](const PanelGeometry& g) {
                                   return matrix_to_array(g.cell_area, g.m, g.m);
                               })
        .def_property_readonly("alpha_east",
                               [](const PanelGeometry& g) {
                                   return matrix_to_array(g.alpha_east, g.m - 1, g.m);
                               })
        .def_property_readonly("alpha_north",
                               [](const PanelGeometry& g) {
                                   return matrix_to_array(g.alpha_north, g.m, g.m - 1);
                               })
        .def_property_readonly("alpha_diag", [](const PanelGeometry& g) {
            return matrix_to_array(g.alpha_diag, g.m, g.m);
        });

    py::class_<VerticalProfile>(mod, "VerticalProfile")
        .def_readonly("n_z", &VerticalProfile::n_z)
        .def_readonly("omega2", &VerticalProfile::omega2)
        .def_readonly("lambda2", &VerticalProfile::lambda2)
        .def_property_readonly("a_prime",
                               [](const VerticalProfile& p) { return vector_to_array(p.a_prime); })
        .def_property_readonly("b_prime",
                               [](const VerticalProfile& p) { return vector_to_array(p.b_prime); })
        .def_property_readonly("c_prime",
                               [](const VerticalProfile& p) { return vector_to_array(p.c_prime); })
        .def_property_readonly("d", [](const VerticalProfile& p) { return vector_to_array(p.d); });

    py::class_<OperatorContext<double>>(mod, "OperatorContext")
        .def(py::init<const VerticalProfile&, const PanelGeometry&>(), py::arg("profile"),
             py::arg("geometry"))
        .def_property_readonly("m", &OperatorContext<double>::m)
        .def_property_readonly("n_z", &OperatorContext<double>::n_z);

    py::class_<KernelTimings>(mod, "KernelTimings")
        .def_readonly("spmv_s", &KernelTimings::spmv)
        .def_readonly("prec_s", &KernelTimings::prec)
        .def_readonly("blas_s", &KernelTimings::blas)
        .def_readonly("fused_spmv_s", &KernelTimings::fused_spmv)
        .def_readonly("fused_prec_s", &KernelTimings::fused_prec)
        .def_readonly("setup_s", &KernelTimings::setup)
        .def_readonly("total_s", &KernelTimings::total);

    py::class_<SolveResult>(mod, "SolveResult")
        .def_readonly("iterations", &SolveResult::iterations)
        .def_readonly("converged", &SolveResult::converged)
        .def_readonly("true_residual", &SolveResult::true_residual)
        .def_readonly("timings", &SolveResult::timings)
        .def_property_readonly("residual_history", [](const SolveResult& r) {
            return vector_to_array(r.residual_history);
        });

    mod.def("vertical_grid", &build_graded_vertical_grid, py::arg("n_z"), py::arg("h_atmos"),
            "Quadratically graded vertical grid on [1, 1 + h_atmos]");
    mod.def("cubed_sphere_panel", &build_cubed_sphere_panel, py::arg("m"),
            "Gnomonic cubed-sphere panel geometry");
    mod.def("planar_panel", &build_planar_panel, py::arg("m"), py::arg("extent"),
            "Uniform planar panel geometry");
    mod.def("vertical_profile", &build_vertical_profile, py::arg("grid"), py::arg("omega2"),
            py::arg("lambda2"), "Scaled vertical coefficients a', b', c', d");
    mod.def(
        "anisotropy",
        [](const PanelGeometry& g, const VerticalGrid& vg, double lambda2) {
            const auto gamma2 = anisotropy(g, vg, lambda2);
            py::array_t<double> out({static_cast<py::ssize_t>(g.m), static_cast<py::ssize_t>(g.m),
                                     static_cast<py::ssize_t>(vg.n_z)});
            std::memcpy(out.mutable_data(), gamma2.data(), gamma2.size() * sizeof(double));
            return out;
        },
        py::arg("geometry"), py::arg("grid"), py::arg("lambda2"),
        "Per-cell-per-level anisotropy gamma^2 = lambda^2 * area / dz^2");

    mod.def(
        "apply",
        [](const OperatorContext<double>& ctx, const DArray& x, int workers) {
            const auto xf = array_to_field(x, ctx.m(), ctx.n_z());
            Field3D<double> y(ctx.m(), ctx.n_z(), Layout::VerticalContiguous);
            apply(ctx, xf, y, workers);
            return field_to_array(y);
        },
        py::arg("ctx"), py::arg("x"), py::arg("workers") = 1, "y = A x (matrix-free stencil)");
    mod.def(
        "precondition",
        [](const OperatorContext<double>& ctx, const DArray& y, int workers) {
            const auto yf = array_to_field(y, ctx.m(), ctx.n_z());
            Field3D<double> x(ctx.m(), ctx.n_z(), Layout::VerticalContiguous);
            precondition(ctx, yf, x, workers);
            return field_to_array(x);
        },
        py::arg("ctx"), py::arg("y"), py::arg("workers") = 1,
        "x = M^-1 y (per-column Thomas solves)");

    mod.def(
        "assemble_csr",
        [](const OperatorContext<double>& ctx) {
            const auto A = assemble_csr(ctx, Layout::VerticalContiguous);
            py::array_t<std::int64_t> row_ptr(static_cast<py::ssize_t>(A.row_ptr.size()));
            std::memcpy(row_ptr.mutable_data(), A.row_ptr.data(),
                        A.row_ptr.size() * sizeof(std::int64_t));
            py::array_t<std::int32_t> col_idx(static_cast<py::ssize_t>(A.col_idx.size()));
            std::memcpy(col_idx.mutable_data(), A.col_idx.data(),
                        A.col_idx.size() * sizeof(std::int32_t));
            return py::make_tuple(row_ptr, col_idx, vector_to_array(A.vals));
        },
        py::arg("ctx"),
        "CSR arrays (row_ptr, col_idx, vals) in vertically contiguous row order");

    mod.def(
        "solve",
        [](const OperatorContext<double>& ctx, const DArray& f, py::object u0, double epsilon,
           double tau, int maxiter, const std::string& variant, const std::string& backend,
           int workers) {
            const auto ff = array_to_field(f, ctx.m(), ctx.n_z());
            Field3D<double> u0f(ctx.m(), ctx.n_z(), Layout::VerticalContiguous);
            if (!u0.is_none()) u0f = array_to_field(u0.cast<DArray>(), ctx.m(), ctx.n_z());
            SolverConfig cfg;
            cfg.epsilon = epsilon;
            cfg.tau = tau;
            cfg.maxiter = maxiter;
            cfg.workers = workers;
            if (variant == "standard") cfg.variant = Variant::standard;
            else if (variant == "interleaved") cfg.variant = Variant::interleaved;
            else throw std::invalid_argument("variant must be 'standard' or 'interleaved'");
            if (backend == "matrix-free") cfg.backend = BackendKind::matrix_free;
            else if (backend == "csr") cfg.backend = BackendKind::csr;
            else throw std::invalid_argument("backend must be 'matrix-free' or 'csr'");
            auto [u, result] = solve(ctx, ff, u0f, cfg);
            return py::make_tuple(field_to_array(u), result);
        },
        py::arg("ctx"), py::arg("f"), py::arg("u0") = py::none(), py::arg("epsilon") = 1e-5,
        py::arg("tau") = 1e-20, py::arg("maxiter") = 500, py::arg("variant") = "interleaved",
        py::arg("backend") = "matrix-free", py::arg("workers") = 1,
        "Preconditioned CG solve; returns (u, SolveResult)");

    mod.def(
        "true_residual",
        [](const OperatorContext<double>& ctx, const DArray& u, const DArray& f, int workers) {
            return true_residual(ctx, array_to_field(u, ctx.m(), ctx.n_z()),
                                 array_to_field(f, ctx.m(), ctx.n_z()), workers);
        },
        py::arg("ctx"), py::arg("u"), py::arg("f"), py::arg("workers") = 1,
        "||f - A u|| recomputed from scratch");

    mod.def(
        "cost_model",
        [](const std::string& kernel, const std::string& cache) {
            const CostReport c = cost_model(parse_kernel(kernel), parse_cache(cache));
            return py::make_tuple(c.flops, c.mem_refs);
        },
        py::arg("kernel"), py::arg("cache") = "none",
        "(flops, mem_refs) per grid point for a kernel under a cache assumption");
    mod.def(
        "random_field",
        [](int m, int n_z, std::uint64_t seed) {
            Field3D<double> f(m, n_z, Layout::VerticalContiguous);
            fill_random(f, seed);
            return field_to_array(f);
        },
        py::arg("m"), py::arg("n_z"), py::arg("seed") = 42,
        "The deterministic benchmark right-hand side");
}
