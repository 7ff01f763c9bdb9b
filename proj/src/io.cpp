#include "anisocg/io.hpp"

#include <array>
#include <cstdint>
#include <ostream>

#include "anisocg/cost_model.hpp"

namespace anisocg::io {

void write_residual_csv(std::ostream& os, const SolveResult& result) {
    os << "iteration,abs_residual,rel_residual\n";
    const double r0 = result.residual_history.empty() ? 1.0 : result.residual_history.front();
    os.precision(17);
    for (std::size_t j = 0; j < result.residual_history.size(); ++j) {
        const double r = result.residual_history[j];
        os << j << ',' << r << ',' << (r0 > 0.0 ? r / r0 : 0.0) << '\n';
    }
}

void write_cost_model_csv(std::ostream& os) {
    os << "operation,cache,flops,mem_refs\n";
    for (BlasOp op : {BlasOp::scal, BlasOp::axpy, BlasOp::dot, BlasOp::nrm2}) {
        const CostReport c = blas_op_cost(op);
        os << to_string(op) << ",na," << c.flops << ',' << c.mem_refs << '\n';
    }
    for (Kernel k : {Kernel::spmv, Kernel::prec, Kernel::blas, Kernel::interleaved_spmv,
                     Kernel::interleaved_prec, Kernel::pcg_total, Kernel::interleaved_total}) {
        for (CacheAssumption cache : {CacheAssumption::none, CacheAssumption::matrix_cached,
                                      CacheAssumption::columns_cached}) {
            const CostReport c = cost_model(k, cache);
            os << to_string(k) << ',' << to_string(cache) << ',' << c.flops << ',' << c.mem_refs
               << '\n';
        }
    }
}

void write_geometry_csv(std::ostream& os, const PanelGeometry& g) {
    os << "i,j,cell_area,alpha_west,alpha_east,alpha_south,alpha_north,alpha_diag\n";
    os.precision(17);
    const int m = g.m;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            os << i << ',' << j << ',' << g.area(i, j) << ',';
            if (i > 0) os << g.east(i - 1, j);
            os << ',';
            if (i < m - 1) os << g.east(i, j);
            os << ',';
            if (j > 0) os << g.north(i, j - 1);
            os << ',';
            if (j < m - 1) os << g.north(i, j);
            os << ',' << g.diag(i, j) << '\n';
        }
    }
}

template <typename T>
void dump_field(std::ostream& os, const Field3D<T>& field) {
    os << "anisocg-field m=" << field.m() << " nz=" << field.n_z()
       << " layout=" << layout_name(field.layout())
       << " precision=" << (sizeof(T) == 4 ? "single" : "double") << '\n';
    // Little-endian raw scalars in the field's own order; this code targets
    // little-endian hosts only.
    os.write(reinterpret_cast<const char*>(field.data()),
             static_cast<std::streamsize>(field.size() * sizeof(T)));
}

template void dump_field<float>(std::ostream&, const Field3D<float>&);
template void dump_field<double>(std::ostream&, const Field3D<double>&);

template <typename T>
void write_matrix_market(std::ostream& os, const CsrMatrix<T>& A) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.n << ' ' << A.n << ' ' << A.nnz() << '\n';
    os.precision(17);
    for (std::int64_t row = 0; row < A.n; ++row)
        for (std::int64_t e = A.row_ptr[row]; e < A.row_ptr[row + 1]; ++e)
            os << row + 1 << ' ' << A.col_idx[e] + 1 << ' ' << A.vals[e] << '\n';
}

template void write_matrix_market<float>(std::ostream&, const CsrMatrix<float>&);
template void write_matrix_market<double>(std::ostream&, const CsrMatrix<double>&);

std::string layout_name(Layout layout) {
    return layout == Layout::VerticalContiguous ? "vertical" : "horizontal";
}

std::string variant_name(Variant variant) {
    return variant == Variant::standard ? "standard" : "interleaved";
}

std::string backend_name(BackendKind backend) {
    return backend == BackendKind::matrix_free ? "matrix-free" : "csr";
}

}  // namespace anisocg::io
