#include "anisocg/profile.hpp"

#include <stdexcept>

namespace anisocg {

VerticalProfile build_vertical_profile(const VerticalGrid& vgrid, double omega2, double lambda2) {
    if (!(omega2 > 0.0))
        throw std::invalid_argument("build_vertical_profile: omega2 must be > 0");
    if (lambda2 < 0.0)
        throw std::invalid_argument("build_vertical_profile: lambda2 must be >= 0");

    const int n_z = vgrid.n_z;
    const auto& r = vgrid.r;

    std::vector<double> a(n_z), b(n_z), c(n_z), d(n_z);
    for (int k = 0; k < n_z; ++k) {
        const double v_k = (r[k + 1] * r[k + 1] * r[k + 1] - r[k] * r[k] * r[k]) / 3.0;
        a[k] = v_k;
        d[k] = -omega2 * v_k;
    }
    for (int k = 0; k + 1 < n_z; ++k) {
        const double delta = 0.5 * (r[k + 2] + r[k + 1]) - 0.5 * (r[k + 1] + r[k]);
        b[k] = -omega2 * lambda2 * r[k + 1] * r[k + 1] / delta;
    }
    b[n_z - 1] = 0.0;
    c[0] = 0.0;
    for (int k = 1; k < n_z; ++k) c[k] = b[k - 1];

    VerticalProfile p;
    p.n_z = n_z;
    p.omega2 = omega2;
    p.lambda2 = lambda2;
    p.a_prime.resize(n_z);
    p.b_prime.resize(n_z);
    p.c_prime.resize(n_z);
    p.d = std::move(d);
    for (int k = 0; k < n_z; ++k) {
        p.a_prime[k] = a[k] / p.d[k];
        p.b_prime[k] = b[k] / p.d[k];
        p.c_prime[k] = c[k] / p.d[k];
    }
    // -0.0 from dividing the zero closure entries would survive comparisons
    // but is ugly in dumps; normalize.
    p.b_prime[n_z - 1] = 0.0;
    p.c_prime[0] = 0.0;
    return p;
}

}  // namespace anisocg
