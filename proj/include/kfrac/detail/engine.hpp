#pragma once

#include <optional>
#include <utility>
#include <vector>

// Product-integration engine on [0, Z] in the transformed coordinate.
//
// Everything in this header treats densities f(z) on a fixed increasing node
// set zs (zs[0] == 0) and computes Riemann-Liouville quantities
//
//   I[alpha] f (z_j) = 1/Gamma(alpha) * int_0^{z_j} (z_j - s)^(alpha-1) f(s) ds
//
// and the z-derivative of the same representation. The kernel is integrated
// exactly against a piecewise-linear interpolant of f per cell, plus a
// per-cell quadratic correction built from second divided differences, so
// smooth densities get third-order cells without any singularity in the
// weights.
//
// Near z = 0 a density is usually not smooth: the problems this library
// targets have f ~ w(z) * z^p0 with w continuous and p0 possibly negative
// (p0 > -1). A Density can carry that model; the first `kw` cells are then
// integrated exactly in the weighted form via incomplete beta functions
// (value path) or via substitutions that absorb the z^p0 measure
// (derivative path). Past those cells the raw piecewise-polynomial rule
// takes over.
//
// Numerical ground rules, learned the hard way:
//  - never form A^e - B^e directly when B -> A (powdiff uses expm1/log1p);
//  - the diagonal cell's coefficient must come from closed forms, not from
//    differencing two large sums (node_affine);
//  - weighted cells must consume the weighted profile w, never the raw
//    values, which may be huge or infinite near 0.

namespace kfrac::detail {

// Cells treated with the weighted (singular-aware) model near z = 0 when a
// model is present. Callers may lower or raise this; the time-stepping code
// scales it with the mesh (see solver).
inline constexpr int kDefaultWeightedCells = 128;

struct Density {
    std::vector<double> zs;    // strictly increasing, zs[0] == 0
    std::vector<double> vals;  // raw node values; vals[0] may be non-finite
    bool has_model = false;
    double p0 = 0.0;           // model: f ~ w(z) * z^p0 near 0, w pw-linear
    std::vector<double> w;     // weighted profile w_j = vals_j * z_j^(-p0)

    int n() const { return static_cast<int>(zs.size()) - 1; }

    // Raw samples only; every cell uses the piecewise-polynomial rule.
    static Density plain(std::vector<double> zs, std::vector<double> vals);

    // Samples plus the leading-power model. w[0] is pinned to w[1]: the model
    // continues the first interior weighted value to the origin, which is
    // the only consistent choice when vals[0] is infinite.
    static Density modeled(std::vector<double> zs, std::vector<double> vals,
                           double p0);

    // Build from the weighted profile itself (vals derived as w * z^p0).
    static Density from_weighted(std::vector<double> zs,
                                 std::vector<double> wvals, double p0);

    // Update one node value (and its weighted image); used by the marching
    // solver. Re-pins w[0] when j == 1.
    void set_val(int j, double v);
};

// I[alpha] f at z = zs[j]. alpha > 0 (alpha = 1 gives the plain integral).
double frac_integral_at(double alpha, const Density& d, int j,
                        int kw = kDefaultWeightedCells);

// I[alpha] f at every node; out[0] = 0.
std::vector<double> frac_integral_grid(double alpha, const Density& d,
                                       int kw = kDefaultWeightedCells);

// d/dz I[alpha] f at every node, alpha in (0,1), differentiating the
// product-integration representation analytically. out[0] is NaN: at the
// origin the derivative generally diverges and only the modeled limit makes
// sense, which is the caller's business.
std::vector<double> frac_integral_dgrid(double alpha, const Density& d,
                                        int kw = kDefaultWeightedCells);

// Affine split at a node: I[alpha] f (zs[j]) = H + c * f_j with f_j entering
// only through the diagonal cell. Head cells are evaluated once and the
// diagonal coefficient comes from closed forms, so c carries no cancellation.
// Requires a model or j >= 2.
struct AffineSplit {
    double head;  // H
    double diag;  // c
};
AffineSplit node_affine(double alpha, const Density& d, int j,
                        int kw = kDefaultWeightedCells);

// Leading power exponent near 0 estimated from the first two interior nodes,
// clipped to [-0.999, 6]; 0 when the samples give no usable signal.
double estimate_p0(const std::vector<double>& zs,
                   const std::vector<double>& vals);

// int_0^Z f dz with the same singular-aware cells (I[1] at the last node).
double integral_over(const Density& d, int kw = kDefaultWeightedCells);

}  // namespace kfrac::detail
