#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "anisocg/grid.hpp"
#include "anisocg/parallel.hpp"

using namespace anisocg;

namespace {
constexpr double kPanelArea = 4.0 * std::numbers::pi / 6.0;
}

TEST_CASE("graded vertical grid follows the quadratic grading") {
    const auto g = build_graded_vertical_grid(4, 0.1);
    REQUIRE(g.r.size() == 5);
    CHECK(g.r[0] == 1.0);
    CHECK(g.r[1] == doctest::Approx(1.00625).epsilon(1e-15));
    CHECK(g.r[2] == doctest::Approx(1.025).epsilon(1e-15));
    CHECK(g.r[3] == doctest::Approx(1.05625).epsilon(1e-15));
    CHECK(g.r[4] == 1.1);  // endpoint exact, t = 1

    const auto e = build_graded_vertical_grid(1, 0.01);
    CHECK(e.r[0] == 1.0);
    CHECK(e.r[1] == 1.01);
}

TEST_CASE("graded grid spacings at n_z=128") {
    const auto g = build_graded_vertical_grid(128, 0.01);
    double min_dz = 1e300, max_dz = 0.0;
    for (int k = 0; k < 128; ++k) {
        const double dz = g.r[k + 1] - g.r[k];
        CHECK(dz > 0.0);
        min_dz = std::min(min_dz, dz);
        max_dz = std::max(max_dz, dz);
    }
    // min = H/n^2 (first cell), max = H*(2n-1)/n^2 (last cell); reference
    // values from the grading-formula evaluation script.
    CHECK(min_dz == doctest::Approx(6.103515625e-07).epsilon(1e-9));
    CHECK(max_dz == doctest::Approx(1.5563964843750002e-04).epsilon(1e-9));
}

TEST_CASE("graded grid rejects bad arguments") {
    CHECK_THROWS_AS(build_graded_vertical_grid(0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_graded_vertical_grid(4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_graded_vertical_grid(4, -1.0), std::invalid_argument);
}

TEST_CASE("planar panel has unit alphas and neighbor-count diagonals") {
    const auto g2 = build_planar_panel(2, 2.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(g2.area(i, j) == 1.0);
            CHECK(g2.diag(i, j) == 2.0);
        }
    CHECK(g2.east(0, 0) == 1.0);
    CHECK(g2.north(1, 0) == 1.0);

    const auto g3 = build_planar_panel(3, 3.0);
    const double expected[3][3] = {{2, 3, 2}, {3, 4, 3}, {2, 3, 2}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(g3.diag(i, j) == expected[i][j]);

    const auto g1 = build_planar_panel(1, 5.0);
    CHECK(g1.diag(0, 0) == 0.0);
    CHECK(g1.area(0, 0) == 25.0);
}

TEST_CASE("cubed-sphere panel: single cell covers one sixth of the sphere") {
    const auto g = build_cubed_sphere_panel(1);
    CHECK(g.area(0, 0) == doctest::Approx(kPanelArea).epsilon(1e-12));
    CHECK(g.diag(0, 0) == 0.0);
}

TEST_CASE("cubed-sphere panel areas partition the sixth-sphere") {
    for (int m : {2, 5, 16, 64}) {
        const auto g = build_cubed_sphere_panel(m);
        const double sum = pairwise_sum(g.cell_area.data(), g.cell_area.size());
        CHECK(std::abs(sum - kPanelArea) / kPanelArea <= 1e-12);
        for (double a : g.cell_area) CHECK(a > 0.0);
        for (double a : g.alpha_east) CHECK(a > 0.0);
        for (double a : g.alpha_north) CHECK(a > 0.0);
    }
}

TEST_CASE("cubed-sphere m=4 cell areas and alphas match the quadrature oracle") {
    const auto g = build_cubed_sphere_panel(4);
    // Frozen from the closed-form solid angle F(x,y) = atan(xy/sqrt(1+x^2+y^2))
    // cross-checked with adaptive quadrature of (1+X^2+Y^2)^{-3/2}.
    CHECK(g.area(0, 0) == doctest::Approx(0.081455587595345325).epsilon(1e-13));
    CHECK(g.area(1, 1) == doctest::Approx(0.2013579207903308).epsilon(1e-13));
    CHECK(g.area(2, 1) == doctest::Approx(0.2013579207903308).epsilon(1e-13));
    CHECK(g.area(1, 1) > g.area(0, 0));  // gnomonic distortion
    CHECK(g.east(1, 1) == doctest::Approx(0.97429061355337199).epsilon(1e-13));
    CHECK(g.north(0, 0) == doctest::Approx(0.90137534005291164).epsilon(1e-13));

    const auto g2 = build_cubed_sphere_panel(2);
    // arc pi/4 over center distance acos(2/3)
    CHECK(g2.east(0, 0) == doctest::Approx(0.93380979565807565).epsilon(1e-13));
}

TEST_CASE("alpha_diag equals the sum over existing edges, exactly") {
    for (bool sphere : {true, false}) {
        const auto g = sphere ? build_cubed_sphere_panel(6) : build_planar_panel(6, 2.0);
        for (int i = 0; i < g.m; ++i)
            for (int j = 0; j < g.m; ++j) {
                double sum = 0.0;
                if (i > 0) sum += g.east(i - 1, j);
                if (i < g.m - 1) sum += g.east(i, j);
                if (j > 0) sum += g.north(i, j - 1);
                if (j < g.m - 1) sum += g.north(i, j);
                CHECK(g.diag(i, j) == sum);
            }
    }
}

TEST_CASE("panel builders reject bad arguments") {
    CHECK_THROWS_AS(build_cubed_sphere_panel(0), std::invalid_argument);
    CHECK_THROWS_AS(build_planar_panel(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_planar_panel(4, 0.0), std::invalid_argument);
}

TEST_CASE("anisotropy formula") {
    // dx = 1, dz = 0.1, lambda = 1 -> gamma^2 = 100
    const auto panel = build_planar_panel(1, 1.0);
    const auto vg = build_graded_vertical_grid(1, 0.1);
    const auto g2 = anisotropy(panel, vg, 1.0);
    REQUIRE(g2.size() == 1);
    CHECK(g2[0] == doctest::Approx(100.0).epsilon(1e-13));

    // dx = dz -> gamma^2 = 1
    const auto panel_iso = build_planar_panel(1, 0.05);
    const auto vg_iso = build_graded_vertical_grid(1, 0.05);
    CHECK(anisotropy(panel_iso, vg_iso, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("anisotropy is strong at every level for the reference flat setup") {
    const auto panel = build_planar_panel(256, 2.0);
    const auto vg = build_graded_vertical_grid(128, 0.01);
    const auto g2 = anisotropy(panel, vg, 3.32e-2);
    double min_g = 1e300, max_g = 0.0;
    for (int k = 0; k < 128; ++k) {
        min_g = std::min(min_g, g2[k]);
        max_g = std::max(max_g, g2[k]);
    }
    // script reference: max 5439488.0017414093 (bottom), min 83.652 (top)
    CHECK(max_g == doctest::Approx(5439488.0017414093).epsilon(1e-12));
    CHECK(min_g > 80.0);
    CHECK(min_g > 1.0);  // gamma^2 >> 1 everywhere
}
