#pragma once

#include <vector>

namespace kfrac {

enum class Grading {
    toward_a,  // nodes clustered at the left endpoint
    toward_b,  // clustered at the right endpoint
    both,      // clustered at both ends (rational warp)
};

// Graded mesh on [a,b] in the transformed coordinate zeta = (t^rho - a^rho)/rho.
//
// All quadrature runs in zeta, where every Katugampola kernel is a
// Riemann-Liouville kernel; t-nodes are kept only for reporting. Grading is a
// power law with exponent q >= 1 (q = 1 is uniform in zeta):
//
//   toward_a : zeta_j = Z*(j/n)^q
//   toward_b : zeta_j = Z*(1 - (1-j/n)^q)
//   both     : zeta_j = Z*u^q/(u^q + (1-u)^q), u = j/n
//
// zeta_c[j] stores Z - zeta_j evaluated from the grading formula directly.
// This matters: for strong grading toward b the node coordinates collapse
// onto Z in double precision (Z - zeta_j below machine epsilon relative to
// Z), and right-sided operators would otherwise lose the entire endpoint
// resolution to cancellation. Right-sided code must consume zeta_c, never
// Z - zeta[j].
struct Mesh {
    double a = 1.0;
    double b = 2.0;
    double rho = 1.0;
    double q = 3.0;
    Grading grading = Grading::toward_a;

    std::vector<double> zeta;    // zeta_0 = 0 < ... < zeta_n = Z
    std::vector<double> zeta_c;  // Z - zeta_j, cancellation-free
    std::vector<double> t;       // t_j = (a^rho + rho*zeta_j)^(1/rho)

    int n() const { return static_cast<int>(zeta.size()) - 1; }
    double length() const { return zeta.empty() ? 0.0 : zeta.back(); }

    static Mesh make(double a, double b, double rho, int n, double q,
                     Grading grading = Grading::toward_a);
};

}  // namespace kfrac
