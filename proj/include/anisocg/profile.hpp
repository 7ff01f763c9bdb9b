#pragma once

#include <vector>

#include "anisocg/grid.hpp"

namespace anisocg {

/// The four per-level vectors that, together with the panel geometry,
/// parameterize the whole 3D operator. Stored in the scaled form used by the
/// stencil kernels: a' = a/d, b' = b/d, c' = c/d, and d itself, where
///   a_k = v_k                                  (radial volume of level k)
///   d_k = -omega2 * v_k                        (horizontal coupling scale)
///   b_k = -omega2*lambda2 * r_{k+1}^2 / delta  (flux across the upper face)
///   c_k = b_{k-1}                              (flux across the lower face)
/// with v_k = (r_{k+1}^3 - r_k^3)/3 and delta the distance between the cell
/// centers of levels k and k+1. Neumann closure: c'_0 = b'_{n_z-1} = 0.
struct VerticalProfile {
    int n_z = 0;
    double omega2 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> a_prime;
    std::vector<double> b_prime;
    std::vector<double> c_prime;
    std::vector<double> d;
};

/// Builds the scaled vertical coefficients from a graded grid.
/// omega2 must be positive (d_k would vanish otherwise and the tridiagonal
/// solves divide by it); lambda2 == 0 is allowed and decouples the levels
/// horizontally only.
VerticalProfile build_vertical_profile(const VerticalGrid& vgrid, double omega2, double lambda2);

}  // namespace anisocg
