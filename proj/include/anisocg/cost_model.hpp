#pragma once

#include <cstdint>
#include <string_view>

namespace anisocg {

/// Kernels of the PCG loop whose per-grid-point cost is tabulated.
enum class Kernel {
    spmv,              ///< matrix-free stencil product
    prec,              ///< vertical-line (Thomas) preconditioner solve
    blas,              ///< all level-1 BLAS of one standard PCG iteration
    interleaved_spmv,  ///< fused u/p/q update + stencil + <p,q>
    interleaved_prec,  ///< fused residual update + Thomas + norm + <r,z>
    pcg_total,
    interleaved_total,
};

/// Cache assumption under which memory references are counted: nothing
/// cached, the four per-level coefficient vectors cached, or additionally all
/// data in the active vertical column cached.
enum class CacheAssumption { none, matrix_cached, columns_cached };

/// Level-1 BLAS operations of the PCG loop.
enum class BlasOp { scal, axpy, dot, nrm2 };

/// Floating point operations and memory references per grid point.
struct CostReport {
    int flops = 0;
    int mem_refs = 0;
};

/// Per-grid-point cost of one kernel invocation per iteration. The cache
/// assumption is ignored for the pure BLAS row (always 16 references).
CostReport cost_model(Kernel kernel, CacheAssumption cache);

/// Per-grid-point cost of a single level-1 BLAS call.
CostReport blas_op_cost(BlasOp op);

struct ThroughputEstimate {
    double flop_rate = 0.0;  ///< FLOP/s
    double bandwidth = 0.0;  ///< bytes/s, upper-bound traffic model
};

/// Converts a measured kernel time into throughput figures using the cost
/// model counts; an analytic estimate, not a hardware-counter measurement.
ThroughputEstimate throughput_estimate(const CostReport& report, std::int64_t grid_points,
                                       double seconds, int scalar_bytes = 8);

std::string_view to_string(Kernel kernel);
std::string_view to_string(CacheAssumption cache);
std::string_view to_string(BlasOp op);

}  // namespace anisocg
