#pragma once

#include <vector>

namespace anisocg {

/// Graded radial grid for the thin spherical (or planar) shell.
/// Radii are measured in units of the planet radius, so r.front() == 1 and
/// r.back() == 1 + h_atmos.
struct VerticalGrid {
    int n_z = 0;            ///< number of vertical cells
    double h_atmos = 0.0;   ///< shell thickness relative to the planet radius
    std::vector<double> r;  ///< n_z+1 strictly increasing interface radii
};

/// Quadratically graded grid: r_k = 1 + (k/n_z)^2 * h_atmos.
/// Spacing shrinks towards the bottom of the shell where resolution matters.
/// Throws std::invalid_argument for n_z < 1 or h_atmos <= 0.
VerticalGrid build_graded_vertical_grid(int n_z, double h_atmos);

/// Horizontal panel geometry: per-cell areas and per-edge coupling
/// coefficients on a regular m x m logically rectangular panel.
///
/// Each interior edge stores one coefficient alpha = (edge length) /
/// (distance between the midpoints of the two adjacent cells); the value is
/// shared by both cells, which keeps the assembled operator symmetric.
/// alpha_diag(i,j) is the sum of the alphas over the edges that exist
/// (boundary cells have fewer), accumulated in the fixed order
/// west, east, south, north.
class PanelGeometry {
public:
    int m = 0;
    std::vector<double> cell_area;    // m*m, index i*m + j
    std::vector<double> alpha_east;   // (m-1)*m edges (i,j)-(i+1,j), index i*m + j
    std::vector<double> alpha_north;  // m*(m-1) edges (i,j)-(i,j+1), index i*(m-1) + j
    std::vector<double> alpha_diag;   // m*m, index i*m + j

    double area(int i, int j) const { return cell_area[static_cast<std::size_t>(i) * m + j]; }
    /// alpha on the edge between (i,j) and (i+1,j); requires 0 <= i < m-1.
    double east(int i, int j) const { return alpha_east[static_cast<std::size_t>(i) * m + j]; }
    /// alpha on the edge between (i,j) and (i,j+1); requires 0 <= j < m-1.
    double north(int i, int j) const { return alpha_north[static_cast<std::size_t>(i) * (m - 1) + j]; }
    double diag(int i, int j) const { return alpha_diag[static_cast<std::size_t>(i) * m + j]; }
};

/// One panel of a cubed sphere: the regular m x m grid on [-1,1]^2 mapped to
/// the unit sphere with the central gnomonic projection
/// (X,Y) -> (X,Y,1)/sqrt(1+X^2+Y^2). The panel covers one-sixth of the
/// sphere. Cell areas are spherical excesses of the projected geodesic
/// quadrilaterals; edge lengths and midpoint distances are great-circle arcs.
PanelGeometry build_cubed_sphere_panel(int m);

/// Uniform planar panel with square cells of side extent/m. Every interior
/// edge has alpha == 1 and cell areas are (extent/m)^2; useful as a
/// verification geometry with trivially known coefficients.
PanelGeometry build_planar_panel(int m, double extent);

/// Grid anisotropy gamma^2 = (lambda * dx / dz)^2 per cell and level, with
/// dx = sqrt(cell_area) and dz = r_{k+1} - r_k. Diagnostic only; the solver
/// never reads it. Returned in column order: index (i*m + j)*n_z + k.
std::vector<double> anisotropy(const PanelGeometry& geometry, const VerticalGrid& vgrid,
                               double lambda2);

}  // namespace anisocg
