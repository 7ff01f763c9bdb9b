#pragma once

#include <iosfwd>
#include <string>

#include "anisocg/csr.hpp"
#include "anisocg/field.hpp"
#include "anisocg/grid.hpp"
#include "anisocg/solver.hpp"

namespace anisocg::io {

/// Residual history as CSV: iteration, absolute residual, relative residual.
/// Comma separated, header row, '.' decimal, LF line endings.
void write_residual_csv(std::ostream& os, const SolveResult& result);

/// Both cost tables as one CSV (operation, cache, flops, mem_refs). The four
/// single-op BLAS rows carry cache "na"; every kernel row appears once per
/// cache assumption.
void write_cost_model_csv(std::ostream& os);

/// Panel geometry dump: one row per cell with area, the four edge
/// coefficients (empty at the boundary) and their sum.
void write_geometry_csv(std::ostream& os, const PanelGeometry& geometry);

/// Raw little-endian field dump behind a one-line text header
/// "anisocg-field m=<m> nz=<n_z> layout=<vertical|horizontal>
/// precision=<single|double>". Data follows in the field's own linear order.
template <typename T>
void dump_field(std::ostream& os, const Field3D<T>& field);

/// Matrix Market export (coordinate, real, general, 1-based).
template <typename T>
void write_matrix_market(std::ostream& os, const CsrMatrix<T>& A);

std::string layout_name(Layout layout);
std::string variant_name(Variant variant);
std::string backend_name(BackendKind backend);

}  // namespace anisocg::io
