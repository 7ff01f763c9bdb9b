#pragma once

#include <string>
#include <vector>

namespace anisocg {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    int m = 4;
    int n_z = 8;
    double h_atmos = 1e-2;
    double omega2 = 6.71e-4;
    double lambda2 = 3.32e-2;
    std::uint64_t seed = 42;
    int workers = 4;
    /// Hidden fault-injection hook ("sign-error" flips one off-diagonal
    /// matrix entry before the symmetry check); negative-control testing.
    std::string inject;
};

/// Runs the small-grid oracle battery: geometry identities, operator
/// equivalences, symmetry/SPD, preconditioner exactness, kernel fusion,
/// variant/backend agreement, preconditioned spectrum, and worker-count
/// determinism. Every check reports pass/fail with a short detail line.
std::vector<VerifyCheck> run_verification(const VerifyOptions& options);

/// Smallest eigenvalue of a dense symmetric matrix (row-major n x n).
double dense_smallest_eigenvalue(const std::vector<double>& A, int n);

/// Extreme eigenvalues {min, max} of M^{-1} A for dense symmetric A and SPD
/// M, via the generalized symmetric eigenproblem A x = lambda M x.
std::pair<double, double> preconditioned_eigen_range(const std::vector<double>& A,
                                                     const std::vector<double>& M, int n);

}  // namespace anisocg
