#include "anisocg/grid.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anisocg {

VerticalGrid build_graded_vertical_grid(int n_z, double h_atmos) {
    if (n_z < 1) throw std::invalid_argument("build_graded_vertical_grid: n_z must be >= 1");
    if (!(h_atmos > 0.0))
        throw std::invalid_argument("build_graded_vertical_grid: h_atmos must be > 0");

    VerticalGrid grid;
    grid.n_z = n_z;
    grid.h_atmos = h_atmos;
    grid.r.resize(static_cast<std::size_t>(n_z) + 1);
    for (int k = 0; k <= n_z; ++k) {
        const double t = static_cast<double>(k) / n_z;  // t == 1 exactly at k == n_z
        grid.r[k] = 1.0 + t * t * h_atmos;
    }
    return grid;
}

namespace {

struct Vec3 {
    double x, y, z;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Central gnomonic projection of a panel coordinate onto the unit sphere.
Vec3 gnomonic(double X, double Y) {
    const double s = std::sqrt(1.0 + X * X + Y * Y);
    return {X / s, Y / s, 1.0 / s};
}

/// Great-circle angle between two unit vectors.
double gc_angle(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

/// Solid angle of the geodesic triangle (a,b,c), positive for
/// counterclockwise orientation seen from outside the sphere.
double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double num = dot(a, cross(b, c));
    const double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    return 2.0 * std::atan2(num, den);
}

/// Spherical excess of the projected cell [x0,x1] x [y0,y1]. The gnomonic
/// image of a straight segment is a great-circle arc, so the cell is a
/// geodesic quadrilateral and its excess equals the sum of the two triangle
/// solid angles across the (x0,y0)-(x1,y1) diagonal. The triangle form stays
/// accurate for the very small cells of fine panels, where accumulating four
/// interior angles against 2*pi loses most significant digits.
double cell_solid_angle(double x0, double x1, double y0, double y1) {
    const Vec3 v00 = gnomonic(x0, y0);
    const Vec3 v10 = gnomonic(x1, y0);
    const Vec3 v11 = gnomonic(x1, y1);
    const Vec3 v01 = gnomonic(x0, y1);
    return triangle_solid_angle(v00, v10, v11) + triangle_solid_angle(v00, v11, v01);
}

void accumulate_alpha_diag(PanelGeometry& g) {
    const int m = g.m;
    g.alpha_diag.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double sum = 0.0;  // fixed order: west, east, south, north
            if (i > 0) sum += g.east(i - 1, j);
            if (i < m - 1) sum += g.east(i, j);
            if (j > 0) sum += g.north(i, j - 1);
            if (j < m - 1) sum += g.north(i, j);
            g.alpha_diag[static_cast<std::size_t>(i) * m + j] = sum;
        }
    }
}

}  // namespace

PanelGeometry build_cubed_sphere_panel(int m) {
    if (m < 1) throw std::invalid_argument("build_cubed_sphere_panel: m must be >= 1");

    PanelGeometry g;
    g.m = m;
    g.cell_area.resize(static_cast<std::size_t>(m) * m);
    g.alpha_east.resize(static_cast<std::size_t>(m - 1) * m);
    g.alpha_north.resize(static_cast<std::size_t>(m) * (m - 1));

    // Panel coordinates of the grid lines and of the cell midpoints in the
    // [-1,1]^2 reference square; midpoints are projected afterwards.
    std::vector<double> X(m + 1), Xc(m);
    for (int i = 0; i <= m; ++i) X[i] = -1.0 + 2.0 * static_cast<double>(i) / m;
    for (int i = 0; i < m; ++i) Xc[i] = 0.5 * (X[i] + X[i + 1]);

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            g.cell_area[static_cast<std::size_t>(i) * m + j] =
                cell_solid_angle(X[i], X[i + 1], X[j], X[j + 1]);

    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double s = gc_angle(gnomonic(X[i + 1], X[j]), gnomonic(X[i + 1], X[j + 1]));
            const double d = gc_angle(gnomonic(Xc[i], Xc[j]), gnomonic(Xc[i + 1], Xc[j]));
            g.alpha_east[static_cast<std::size_t>(i) * m + j] = s / d;
        }
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j + 1 < m; ++j) {
            const double s = gc_angle(gnomonic(X[i], X[j + 1]), gnomonic(X[i + 1], X[j + 1]));
            const double d = gc_angle(gnomonic(Xc[i], Xc[j]), gnomonic(Xc[i], Xc[j + 1]));
            g.alpha_north[static_cast<std::size_t>(i) * (m - 1) + j] = s / d;
        }
    }

    accumulate_alpha_diag(g);
    return g;
}

PanelGeometry build_planar_panel(int m, double extent) {
    if (m < 1) throw std::invalid_argument("build_planar_panel: m must be >= 1");
    if (!(extent > 0.0)) throw std::invalid_argument("build_planar_panel: extent must be > 0");

    PanelGeometry g;
    g.m = m;
    const double h = extent / m;
    g.cell_area.assign(static_cast<std::size_t>(m) * m, h * h);
    g.alpha_east.assign(static_cast<std::size_t>(m - 1) * m, 1.0);
    g.alpha_north.assign(static_cast<std::size_t>(m) * (m - 1), 1.0);
    accumulate_alpha_diag(g);
    return g;
}

std::vector<double> anisotropy(const PanelGeometry& geometry, const VerticalGrid& vgrid,
                               double lambda2) {
    const int m = geometry.m;
    const int n_z = vgrid.n_z;
    std::vector<double> gamma2(static_cast<std::size_t>(m) * m * n_z);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double dx2 = geometry.area(i, j);  // dx = sqrt(|T|), used squared
            for (int k = 0; k < n_z; ++k) {
                const double dz = vgrid.r[k + 1] - vgrid.r[k];
                gamma2[(static_cast<std::size_t>(i) * m + j) * n_z + k] = lambda2 * dx2 / (dz * dz);
            }
        }
    }
    return gamma2;
}

}  // namespace anisocg
