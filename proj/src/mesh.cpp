#include "kfrac/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace kfrac {

Mesh Mesh::make(double a, double b, double rho, int n, double q, Grading grading) {
    if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("Mesh: requires 0 < a < b");
    if (!(rho > 0.0)) throw std::invalid_argument("Mesh: requires rho > 0");
    if (n < 2) throw std::invalid_argument("Mesh: requires n >= 2");
    if (!(q >= 1.0)) throw std::invalid_argument("Mesh: requires grading exponent q >= 1");

    Mesh mesh;
    mesh.a = a;
    mesh.b = b;
    mesh.rho = rho;
    mesh.q = q;
    mesh.grading = grading;

    const double Z = (std::pow(b, rho) - std::pow(a, rho)) / rho;
    const double a_rho = std::pow(a, rho);
    mesh.zeta.resize(n + 1);
    mesh.zeta_c.resize(n + 1);
    mesh.t.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        double u = static_cast<double>(j) / n;
        // zeta_j/Z and its complement, each from its own formula
        double frac = 0.0, frac_c = 0.0;
        switch (grading) {
            case Grading::toward_a:
                frac = std::pow(u, q);
                frac_c = 1.0 - frac;
                break;
            case Grading::toward_b:
                frac_c = std::pow(1.0 - u, q);
                frac = 1.0 - frac_c;
                break;
            case Grading::both: {
                double pu = std::pow(u, q), pv = std::pow(1.0 - u, q);
                frac = pu / (pu + pv);
                frac_c = pv / (pu + pv);
                break;
            }
        }
        mesh.zeta[j] = Z * frac;
        mesh.zeta_c[j] = Z * frac_c;
        mesh.t[j] = std::pow(a_rho + rho * mesh.zeta[j], 1.0 / rho);
    }
    // Endpoints exact regardless of rounding in the warp.
    mesh.zeta[0] = 0.0;
    mesh.zeta_c[0] = Z;
    mesh.zeta[n] = Z;
    mesh.zeta_c[n] = 0.0;
    mesh.t[0] = a;
    mesh.t[n] = b;

    // The coordinate that resolves the grading must be strictly monotone;
    // the opposite coordinate may legitimately collapse in double precision
    // under strong grading.
    for (int j = 0; j < n; ++j) {
        bool ok = (grading == Grading::toward_b) ? mesh.zeta_c[j] > mesh.zeta_c[j + 1]
                                                 : mesh.zeta[j] < mesh.zeta[j + 1];
        if (grading == Grading::both)
            ok = mesh.zeta[j] < mesh.zeta[j + 1] && mesh.zeta_c[j] > mesh.zeta_c[j + 1];
        if (!ok) throw std::invalid_argument("Mesh: grading too strong for n (nodes collapse)");
    }
    return mesh;
}

}  // namespace kfrac
