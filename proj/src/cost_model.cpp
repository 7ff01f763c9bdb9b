#include "anisocg/cost_model.hpp"

#include <stdexcept>

namespace anisocg {

namespace {

// FLOP counts and memory references per grid point for each kernel, the
// latter under the three cache assumptions (none / coefficient vectors
// cached / vertical column cached as well).
struct Row {
    int flops;
    int mem[3];
};

constexpr Row kKernelTable[] = {
    /* spmv             */ {20, {12, 8, 6}},
    /* prec             */ {13, {12, 8, 5}},
    /* blas             */ {13, {16, 16, 16}},
    /* interleaved_spmv */ {28, {17, 13, 11}},
    /* interleaved_prec */ {19, {16, 12, 9}},
    /* pcg_total        */ {46, {40, 32, 27}},
    /* interleaved_total*/ {47, {33, 25, 20}},
};

constexpr CostReport kBlasTable[] = {
    /* scal */ {1, 2},
    /* axpy */ {2, 3},
    /* dot  */ {2, 2},
    /* nrm2 */ {2, 1},
};

}  // namespace

CostReport cost_model(Kernel kernel, CacheAssumption cache) {
    const auto ik = static_cast<int>(kernel);
    const auto ic = static_cast<int>(cache);
    if (ik < 0 || ik >= static_cast<int>(std::size(kKernelTable)))
        throw std::invalid_argument("cost_model: unknown kernel");
    if (ic < 0 || ic >= 3) throw std::invalid_argument("cost_model: unknown cache assumption");
    const Row& row = kKernelTable[ik];
    return {row.flops, row.mem[ic]};
}

CostReport blas_op_cost(BlasOp op) {
    const auto io = static_cast<int>(op);
    if (io < 0 || io >= static_cast<int>(std::size(kBlasTable)))
        throw std::invalid_argument("blas_op_cost: unknown op");
    return kBlasTable[io];
}

ThroughputEstimate throughput_estimate(const CostReport& report, std::int64_t grid_points,
                                       double seconds, int scalar_bytes) {
    if (!(seconds > 0.0))
        throw std::invalid_argument("throughput_estimate: seconds must be > 0");
    ThroughputEstimate t;
    t.flop_rate = static_cast<double>(report.flops) * static_cast<double>(grid_points) / seconds;
    t.bandwidth = static_cast<double>(report.mem_refs) * static_cast<double>(grid_points) *
                  static_cast<double>(scalar_bytes) / seconds;
    return t;
}

std::string_view to_string(Kernel kernel) {
    switch (kernel) {
        case Kernel::spmv: return "spmv";
        case Kernel::prec: return "prec";
        case Kernel::blas: return "blas";
        case Kernel::interleaved_spmv: return "interleaved_spmv";
        case Kernel::interleaved_prec: return "interleaved_prec";
        case Kernel::pcg_total: return "pcg_total";
        case Kernel::interleaved_total: return "interleaved_total";
    }
    return "?";
}

std::string_view to_string(CacheAssumption cache) {
    switch (cache) {
        case CacheAssumption::none: return "none";
        case CacheAssumption::matrix_cached: return "matrix_cached";
        case CacheAssumption::columns_cached: return "columns_cached";
    }
    return "?";
}

std::string_view to_string(BlasOp op) {
    switch (op) {
        case BlasOp::scal: return "scal";
        case BlasOp::axpy: return "axpy";
        case BlasOp::dot: return "dot";
        case BlasOp::nrm2: return "nrm2";
    }
    return "?";
}

}  // namespace anisocg
