// anisocg command line: solve / verify / bench / cost-model.
//
// Exit codes: 0 success (solve: converged), 2 solve hit the iteration cap
// without converging, 3 verify found a failing check, 64 usage error,
// 1 any other error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "anisocg/cost_model.hpp"
#include "anisocg/csr.hpp"
#include "anisocg/field.hpp"
#include "anisocg/grid.hpp"
#include "anisocg/io.hpp"
#include "anisocg/operator.hpp"
#include "anisocg/profile.hpp"
#include "anisocg/solver.hpp"
#include "anisocg/verify.hpp"

namespace {

using nlohmann::json;

struct RunSpec {
    std::string geometry = "cubed-sphere";
    int m = 64;
    int nz = 64;
    double h_atmos = 1e-2;
    double extent = 2.0;
    double omega2 = 6.71e-4;
    double lambda2 = 3.32e-2;
    std::string backend = "matrix-free";
    std::string variant = "interleaved";
    std::string layout = "vertical";
    std::string precision = "double";
    double epsilon = 1e-5;
    double tau = 1e-20;
    int maxiter = 500;
    int workers = 1;
    std::uint64_t seed = 42;
    std::string out_json;
    std::string out_csv;
    std::string dump_matrix;
    std::string dump_solution;
    std::string dump_geometry;
};

void add_grid_flags(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--geometry", spec.geometry, "Horizontal geometry")
        ->check(CLI::IsMember({"cubed-sphere", "planar"}));
    cmd->add_option("--m", spec.m, "Horizontal cells per panel side")->check(CLI::PositiveNumber);
    cmd->add_option("--nz", spec.nz, "Vertical cells")->check(CLI::PositiveNumber);
    cmd->add_option("--h-atmos", spec.h_atmos, "Shell thickness / planet radius")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--extent", spec.extent, "Planar panel side length")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--omega2", spec.omega2, "Zero-order coupling parameter omega^2")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lambda2", spec.lambda2, "Vertical coupling parameter lambda^2")
        ->check(CLI::NonNegativeNumber);
}

void add_solver_flags(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--backend", spec.backend, "Operator backend")
        ->check(CLI::IsMember({"matrix-free", "csr"}));
    cmd->add_option("--variant", spec.variant, "PCG loop variant")
        ->check(CLI::IsMember({"standard", "interleaved"}));
    cmd->add_option("--layout", spec.layout, "Field memory layout")
        ->check(CLI::IsMember({"vertical", "horizontal"}));
    cmd->add_option("--precision", spec.precision, "Scalar precision")
        ->check(CLI::IsMember({"single", "double"}));
    cmd->add_option("--epsilon", spec.epsilon, "Relative residual tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", spec.tau, "Absolute residual tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--maxiter", spec.maxiter, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", spec.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", spec.seed, "Right-hand-side seed");
}

anisocg::PanelGeometry make_geometry(const RunSpec& spec) {
    if (spec.geometry == "planar") return anisocg::build_planar_panel(spec.m, spec.extent);
    return anisocg::build_cubed_sphere_panel(spec.m);
}

anisocg::Layout parse_layout(const std::string& name) {
    return name == "horizontal" ? anisocg::Layout::HorizontalContiguous
                                : anisocg::Layout::VerticalContiguous;
}

anisocg::SolverConfig make_config(const RunSpec& spec, int maxiter, double epsilon, double tau) {
    anisocg::SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.tau = tau;
    cfg.maxiter = maxiter;
    cfg.variant = spec.variant == "standard" ? anisocg::Variant::standard
                                             : anisocg::Variant::interleaved;
    cfg.backend = spec.backend == "csr" ? anisocg::BackendKind::csr
                                        : anisocg::BackendKind::matrix_free;
    cfg.workers = spec.workers;
    return cfg;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}

json timings_json(const anisocg::KernelTimings& t) {
    return json{{"spmv_s", t.spmv},           {"prec_s", t.prec},
                {"blas_s", t.blas},           {"fused_spmv_s", t.fused_spmv},
                {"fused_prec_s", t.fused_prec}, {"setup_s", t.setup},
                {"total_s", t.total}};
}

template <typename T>
int run_solve(const RunSpec& spec) {
    const anisocg::Layout layout = parse_layout(spec.layout);
    const auto geometry = make_geometry(spec);
    const auto vgrid = anisocg::build_graded_vertical_grid(spec.nz, spec.h_atmos);
    const auto profile = anisocg::build_vertical_profile(vgrid, spec.omega2, spec.lambda2);
    const anisocg::OperatorContext<T> ctx(profile, geometry);

    anisocg::Field3D<T> f(spec.m, spec.nz, layout);
    anisocg::fill_random(f, spec.seed);
    anisocg::Field3D<T> u0(spec.m, spec.nz, layout);

    const auto cfg = make_config(spec, spec.maxiter, spec.epsilon, spec.tau);
    auto [u, result] = anisocg::solve(ctx, f, u0, cfg);

    const double r0 = result.residual_history.front();
    const double rlast = result.residual_history.back();
    json out{{"geometry", spec.geometry},
             {"m", spec.m},
             {"nz", spec.nz},
             {"h_atmos", spec.h_atmos},
             {"omega2", spec.omega2},
             {"lambda2", spec.lambda2},
             {"backend", spec.backend},
             {"variant", spec.variant},
             {"layout", spec.layout},
             {"precision", spec.precision},
             {"epsilon", spec.epsilon},
             {"tau", spec.tau},
             {"maxiter", spec.maxiter},
             {"workers", spec.workers},
             {"seed", spec.seed},
             {"rhs", "splitmix64-uniform"},
             {"iterations", result.iterations},
             {"converged", result.converged},
             {"residual0", r0},
             {"residual", rlast},
             {"rel_residual", r0 > 0.0 ? rlast / r0 : 0.0},
             {"true_residual", result.true_residual},
             {"timings", timings_json(result.timings)}};
    if (spec.geometry == "planar") out["extent"] = spec.extent;

    if (!spec.out_json.empty()) {
        auto os = open_output(spec.out_json);
        os << out.dump(2) << '\n';
    } else {
        std::cout << out.dump(2) << '\n';
    }
    if (!spec.out_csv.empty()) {
        auto os = open_output(spec.out_csv);
        anisocg::io::write_residual_csv(os, result);
    }
    if (!spec.dump_solution.empty()) {
        auto os = open_output(spec.dump_solution);
        anisocg::io::dump_field(os, u);
    }
    if (!spec.dump_matrix.empty()) {
        auto os = open_output(spec.dump_matrix);
        anisocg::io::write_matrix_market(os, anisocg::assemble_csr(ctx, layout, spec.workers));
    }
    if (!spec.dump_geometry.empty()) {
        auto os = open_output(spec.dump_geometry);
        anisocg::io::write_geometry_csv(os, geometry);
    }
    return result.converged ? 0 : 2;
}

struct BenchRow {
    std::string backend, variant, layout, precision;
    int workers = 1;
    double setup_ms = 0, per_iter_ms = 0;
    double spmv_ms = 0, prec_ms = 0, blas_ms = 0, fused_spmv_ms = 0, fused_prec_ms = 0;
    double gflops = 0, gbs = 0;
};

template <typename T>
BenchRow bench_one(const RunSpec& spec, int iters, int reps) {
    const anisocg::Layout layout = parse_layout(spec.layout);
    const auto geometry = make_geometry(spec);
    const auto vgrid = anisocg::build_graded_vertical_grid(spec.nz, spec.h_atmos);
    const auto profile = anisocg::build_vertical_profile(vgrid, spec.omega2, spec.lambda2);
    const anisocg::OperatorContext<T> ctx(profile, geometry);

    anisocg::Field3D<T> f(spec.m, spec.nz, layout);
    anisocg::fill_random(f, spec.seed);
    anisocg::Field3D<T> u0(spec.m, spec.nz, layout);

    // Fixed-iteration protocol: tolerances small enough that the solve never
    // exits early; one warm-up iteration excluded from the measurement.
    const auto warm_cfg = make_config(spec, 1, 1e-300, 1e-300);
    anisocg::solve(ctx, f, u0, warm_cfg);

    std::vector<anisocg::SolveResult> runs;
    const auto cfg = make_config(spec, iters, 1e-300, 1e-300);
    for (int rep = 0; rep < reps; ++rep) runs.push_back(anisocg::solve(ctx, f, u0, cfg).second);

    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
        return (a.timings.total - a.timings.setup) < (b.timings.total - b.timings.setup);
    });
    const auto& med = runs[runs.size() / 2];

    BenchRow row;
    row.backend = spec.backend;
    row.variant = spec.variant;
    row.layout = spec.layout;
    row.precision = spec.precision;
    row.workers = spec.workers;
    row.setup_ms = med.timings.setup * 1e3;
    row.per_iter_ms = (med.timings.total - med.timings.setup) / iters * 1e3;
    row.spmv_ms = med.timings.spmv / iters * 1e3;
    row.prec_ms = med.timings.prec / iters * 1e3;
    row.blas_ms = med.timings.blas / iters * 1e3;
    row.fused_spmv_ms = med.timings.fused_spmv / iters * 1e3;
    row.fused_prec_ms = med.timings.fused_prec / iters * 1e3;

    const bool interleaved = spec.variant == "interleaved";
    const auto report = anisocg::cost_model(
        interleaved ? anisocg::Kernel::interleaved_total : anisocg::Kernel::pcg_total,
        anisocg::CacheAssumption::none);
    const std::int64_t n = static_cast<std::int64_t>(spec.m) * spec.m * spec.nz;
    const auto est = anisocg::throughput_estimate(report, n, row.per_iter_ms * 1e-3, sizeof(T));
    row.gflops = est.flop_rate * 1e-9;
    row.gbs = est.bandwidth * 1e-9;
    return row;
}

int run_bench(RunSpec spec, int iters, int reps, const std::vector<std::string>& sweep) {
    std::vector<RunSpec> configs{spec};
    const auto expand = [&configs](auto field, const std::vector<std::string>& values) {
        std::vector<RunSpec> next;
        for (const auto& base : configs)
            for (const auto& v : values) {
                RunSpec s = base;
                s.*field = v;
                next.push_back(s);
            }
        configs = std::move(next);
    };
    for (const auto& dim : sweep) {
        if (dim == "backend") expand(&RunSpec::backend, {"matrix-free", "csr"});
        else if (dim == "variant") expand(&RunSpec::variant, {"standard", "interleaved"});
        else if (dim == "layout") expand(&RunSpec::layout, {"vertical", "horizontal"});
        else if (dim == "precision") expand(&RunSpec::precision, {"single", "double"});
        else throw std::runtime_error("unknown sweep dimension: " + dim);
    }

    std::ostringstream csv;
    csv << "backend,variant,layout,precision,workers,m,nz,iters,setup_ms,time_per_iter_ms,"
           "spmv_ms,prec_ms,blas_ms,fused_spmv_ms,fused_prec_ms,gflops_est,gbs_est\n";
    csv.precision(6);
    for (const auto& c : configs) {
        if (c.backend == "csr" && c.variant == "interleaved") continue;
        const BenchRow row = c.precision == "single" ? bench_one<float>(c, iters, reps)
                                                     : bench_one<double>(c, iters, reps);
        csv << row.backend << ',' << row.variant << ',' << row.layout << ',' << row.precision
            << ',' << row.workers << ',' << c.m << ',' << c.nz << ',' << iters << ','
            << row.setup_ms << ',' << row.per_iter_ms << ',' << row.spmv_ms << ',' << row.prec_ms
            << ',' << row.blas_ms << ',' << row.fused_spmv_ms << ',' << row.fused_prec_ms << ','
            << row.gflops << ',' << row.gbs << '\n';
    }
    if (!spec.out_csv.empty()) {
        auto os = open_output(spec.out_csv);
        os << csv.str();
    } else {
        std::cout << csv.str();
    }
    return 0;
}

int run_verify(const RunSpec& spec, const std::string& grid, const std::string& inject) {
    anisocg::VerifyOptions options;
    options.h_atmos = spec.h_atmos;
    options.omega2 = spec.omega2;
    options.lambda2 = spec.lambda2;
    options.seed = spec.seed;
    options.workers = std::max(spec.workers, 2);
    options.inject = inject;
    if (!grid.empty()) {
        int mi = 0, mj = 0, nz = 0;
        char x1 = 0, x2 = 0;
        std::istringstream ss(grid);
        if (!(ss >> mi >> x1 >> mj >> x2 >> nz) || x1 != 'x' || x2 != 'x' || mi != mj || mi < 1 ||
            nz < 1)
            throw std::runtime_error("--grid expects MxMxN with equal horizontal sides");
        if (static_cast<long long>(mi) * mj * nz > 4096)
            throw std::runtime_error("--grid too large for the dense verification oracle");
        options.m = mi;
        options.n_z = nz;
    }

    const auto checks = anisocg::run_verification(options);
    bool all_ok = true;
    std::string first_fail;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
        for (std::size_t pad = c.name.size(); pad < 26; ++pad) std::cout << ' ';
        std::cout << c.detail << '\n';
        if (!c.passed && all_ok) {
            all_ok = false;
            first_fail = c.name;
        }
    }
    if (!all_ok) {
        std::cout << "verification failed: " << first_fail << '\n';
        return 3;
    }
    std::cout << "all checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix-free PCG solver for strongly anisotropic elliptic equations"};
    app.require_subcommand(1);

    RunSpec spec;

    auto* solve_cmd = app.add_subcommand("solve", "Run one preconditioned CG solve");
    add_grid_flags(solve_cmd, spec);
    add_solver_flags(solve_cmd, spec);
    solve_cmd->add_option("--out-json", spec.out_json, "Write the solve report to this file");
    solve_cmd->add_option("--out-csv", spec.out_csv, "Write the residual history CSV");
    solve_cmd->add_option("--dump-matrix", spec.dump_matrix, "Export the matrix (Matrix Market)");
    solve_cmd->add_option("--dump-solution", spec.dump_solution, "Dump the solution field");
    solve_cmd->add_option("--dump-geometry", spec.dump_geometry, "Dump panel geometry as CSV");

    auto* verify_cmd = app.add_subcommand("verify", "Run the small-grid verification battery");
    add_grid_flags(verify_cmd, spec);
    verify_cmd->add_option("--workers", spec.workers, "Worker threads");
    verify_cmd->add_option("--seed", spec.seed, "Oracle vector seed");
    std::string verify_grid;
    verify_cmd->add_option("--grid", verify_grid, "Dense-oracle grid, e.g. 4x4x8");
    std::string inject;
    verify_cmd->add_option("--inject", inject, "")->group("");  // hidden fault-injection hook

    auto* bench_cmd = app.add_subcommand("bench", "Measure time per iteration");
    add_grid_flags(bench_cmd, spec);
    add_solver_flags(bench_cmd, spec);
    int iters = 100, reps = 3;
    bench_cmd->add_option("--iters", iters, "Fixed iteration count per run")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", reps, "Repetitions (median reported)")
        ->check(CLI::PositiveNumber);
    std::vector<std::string> sweep;
    bench_cmd->add_option("--sweep", sweep,
                          "Dimensions to sweep: backend, variant, layout, precision")
        ->delimiter(',');
    bench_cmd->add_option("--out-csv", spec.out_csv, "Write the benchmark CSV to this file");

    auto* cost_cmd = app.add_subcommand("cost-model", "Print the FLOP/memory cost tables");
    std::string cost_out;
    cost_cmd->add_option("--out-csv", cost_out, "Write the tables to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        if (solve_cmd->parsed())
            return spec.precision == "single" ? run_solve<float>(spec) : run_solve<double>(spec);
        if (verify_cmd->parsed()) return run_verify(spec, verify_grid, inject);
        if (bench_cmd->parsed()) return run_bench(spec, iters, reps, sweep);
        if (cost_cmd->parsed()) {
            if (!cost_out.empty()) {
                auto os = open_output(cost_out);
                anisocg::io::write_cost_model_csv(os);
            } else {
                anisocg::io::write_cost_model_csv(std::cout);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
