#include "kfrac/detail/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kfrac/special.hpp"

namespace kfrac::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// A^e - B^e as -A^e * expm1(e * log(B/A)), which stays accurate when the two
// powers agree to many digits (adjacent far-field cells). log1m = log(B/A)
// is passed in precomputed; -inf encodes B = 0 and yields A^e for e > 0.
inline double powdiff(double A, double log1m, double expo) {
    if (std::isinf(log1m)) return std::pow(A, expo);
    return -std::pow(A, expo) * std::expm1(expo * log1m);
}

// Exact int_{zl}^{zr} (z-s)^(alpha-1) s^p0 (wl + sw*(s-zl)) ds via incomplete
// beta functions. Covers interior cells, the diagonal cell (zr == z) and
// cell 0 (zl == 0).
double beta_cell_value(double alpha, double z, double zl, double zr, double p0,
                       double wl, double wr) {
    if (zr == zl) return 0.0;
    const double a0 = p0 + 1.0;
    const double rl = zl / z;
    const double rr = std::min(zr / z, 1.0);
    const double J0 = std::pow(z, alpha + p0) *
                      (lower_inc_beta(a0, alpha, rr) - lower_inc_beta(a0, alpha, rl));
    const double J1 = std::pow(z, alpha + p0 + 1.0) *
                      (lower_inc_beta(a0 + 1.0, alpha, rr) -
                       lower_inc_beta(a0 + 1.0, alpha, rl));
    const double sw = (wr - wl) / (zr - zl);
    return (wl - sw * zl) * J0 + sw * J1;
}

// The two moments of the diagonal weighted cell, needed separately by
// node_affine to expose the f_j coefficient.
std::pair<double, double> beta_cell_J(double alpha, double z, double zl,
                                      double zr, double p0) {
    const double a0 = p0 + 1.0;
    const double rl = zl / z;
    const double rr = std::min(zr / z, 1.0);
    const double J0 = std::pow(z, alpha + p0) *
                      (lower_inc_beta(a0, alpha, rr) - lower_inc_beta(a0, alpha, rl));
    const double J1 = std::pow(z, alpha + p0 + 1.0) *
                      (lower_inc_beta(a0 + 1.0, alpha, rr) -
                       lower_inc_beta(a0 + 1.0, alpha, rl));
    return {J0, J1};
}

// Second divided difference attached to cell k of the raw range [k0, jend).
// Three-point stencil looking backward; at the range head it borrows the
// previous cell when one exists and is finite, else looks forward.
double second_divdiff(const std::vector<double>& zs,
                      const std::vector<double>& vals, int k0, int jend, int k,
                      double s_k, double s_prev, bool have_prev) {
    if (k > k0) return (s_k - s_prev) / (zs[k + 1] - zs[k - 1]);
    (void)have_prev;
    if (k0 >= 1 && std::isfinite(vals[k0 - 1])) {
        const double s_left =
            (vals[k0] - vals[k0 - 1]) / (zs[k0] - zs[k0 - 1]);
        return (s_k - s_left) / (zs[k0 + 1] - zs[k0 - 1]);
    }
    if (k0 + 1 < jend) {
        const double s1 =
            (vals[k0 + 2] - vals[k0 + 1]) / (zs[k0 + 2] - zs[k0 + 1]);
        return (s1 - s_k) / (zs[k0 + 2] - zs[k0]);
    }
    if (jend + 1 < static_cast<int>(zs.size()) && std::isfinite(vals[jend + 1])) {
        const double s_next =
            (vals[jend + 1] - vals[jend]) / (zs[jend + 1] - zs[jend]);
        return (s_next - s_k) / (zs[jend + 1] - zs[k0]);
    }
    return 0.0;
}

// Sum over raw cells k0..jend-1 of the exact kernel moments against the
// piecewise-linear interpolant plus the quadratic correction. With diag set,
// the last cell is the diagonal one (upper limit z == zs[jend]).
double raw_cells_value(double alpha, double z, const std::vector<double>& zs,
                       const std::vector<double>& vals, int k0, int jend,
                       bool diag) {
    double acc = 0.0;
    double s_prev = 0.0;
    bool have_prev = false;
    for (int k = k0; k < jend; ++k) {
        const double zl = zs[k], zr = zs[k + 1];
        const double fl = vals[k], fr = vals[k + 1];
        const double A = z - zl;
        const bool last = diag && (k == jend - 1);
        const double B = last ? 0.0 : z - zr;
        const double log1m = last ? -kInf : std::log1p(-(A - B) / A);
        const double P0 = powdiff(A, log1m, alpha);
        const double P1 = powdiff(A, log1m, alpha + 1.0);
        const double P2 = powdiff(A, log1m, alpha + 2.0);
        const double M0 = P0 / alpha;
        const double M1c = A * M0 - P1 / (alpha + 1.0);
        const double s = (fr - fl) / (zr - zl);
        acc += fl * M0 + s * M1c;
        const double A2 =
            second_divdiff(zs, vals, k0, jend, k, s, s_prev, have_prev);
        const double corr = A * B * P0 / alpha - (A + B) * P1 / (alpha + 1.0) +
                            P2 / (alpha + 2.0);
        acc += A2 * corr;
        s_prev = s;
        have_prev = true;
    }
    return acc;
}

// ----- derivative-path cells ------------------------------------------------

// d/dz of an interior weighted cell: (alpha-1) int (z-s)^(alpha-2) g(s) ds,
// plain Gauss (the integrand is smooth away from the diagonal).
double gauss_cell_dvalue(double alpha, double z, double zl, double zr,
                         double p0, double wl, double wr) {
    const double sw = (wr - wl) / (zr - zl);
    double acc = 0.0;
    for (int i = 0; i < kGaussN; ++i) {
        const double s = zl + (zr - zl) * kGaussX[i];
        const double g = std::pow(s, p0) * (wl + sw * (s - zl));
        acc += kGaussW[i] * std::pow(z - s, alpha - 2.0) * g;
    }
    return (zr - zl) * (alpha - 1.0) * acc;
}

// Cell 0 of the derivative path. At z == z1 the one-sided derivative of the
// frozen cell-0 model (the density continued as w-linear times z^p0) is used;
// elsewhere the z^p0 measure is absorbed by v = (s/z1)^(1+p0).
double gauss_cell0_dvalue(double alpha, double z, double z1, double p0,
                          double w0, double w1) {
    if (z <= z1 * (1.0 + 1e-14)) {
        const double v = std::pow(z1, alpha + p0) *
                         (w0 * beta_fn(alpha, p0 + 1.0) +
                          (w1 - w0) * beta_fn(alpha, p0 + 2.0));
        return (alpha + p0) * v / z1;
    }
    double acc = 0.0;
    for (int i = 0; i < kGaussN; ++i) {
        const double s = z1 * std::pow(kGaussX[i], 1.0 / (1.0 + p0));
        const double g = w0 + (w1 - w0) * s / z1;
        acc += kGaussW[i] * std::pow(z - s, alpha - 2.0) * g;
    }
    return std::pow(z1, 1.0 + p0) / (1.0 + p0) * (alpha - 1.0) * acc;
}

// d/dz of the diagonal weighted cell with the density profile frozen:
//   h^(alpha-1) int g(z - h v^(1/alpha)) dv
//   + h^alpha/alpha int g'(z - h v^(1/alpha)) (1 - v^(1/alpha)) dv,
// the substitution putting all kernel singularity into the measure.
double gauss_diag_dvalue(double alpha, double z, double zl, double p0,
                         double wl, double wz) {
    const double h = z - zl;
    const double sw = (wz - wl) / h;
    double acc1 = 0.0, acc2 = 0.0;
    for (int i = 0; i < kGaussN; ++i) {
        const double r = std::pow(kGaussX[i], 1.0 / alpha);
        const double s = z - h * r;
        const double lin = wl + sw * (s - zl);
        const double g = std::pow(s, p0) * lin;
        const double gp = p0 * std::pow(s, p0 - 1.0) * lin + std::pow(s, p0) * sw;
        acc1 += kGaussW[i] * g;
        acc2 += kGaussW[i] * gp * (1.0 - r);
    }
    return std::pow(h, alpha - 1.0) * acc1 +
           std::pow(h, alpha) / alpha * acc2;
}

// Raw-cell derivative sums: d/dz of the moments used in raw_cells_value.
double raw_cells_dvalue(double alpha, double z, const std::vector<double>& zs,
                        const std::vector<double>& vals, int k0, int jend) {
    double acc = 0.0;
    double s_prev = 0.0;
    bool have_prev = false;
    for (int k = k0; k < jend; ++k) {
        const double zl = zs[k], zr = zs[k + 1];
        const double fl = vals[k], fr = vals[k + 1];
        const double A = z - zl;
        const bool last = (k == jend - 1);
        const double B = last ? 0.0 : z - zr;
        const double log1m = last ? -kInf : std::log1p(-(A - B) / A);
        const double P0 = powdiff(A, log1m, alpha);
        const double P1 = powdiff(A, log1m, alpha + 1.0);
        // (alpha-1 < 0)-power difference diverges on the diagonal; there the
        // derivative of the M0 moment is the one-sided kernel value itself.
        const double dM0 =
            last ? std::pow(A, alpha - 1.0) : powdiff(A, log1m, alpha - 1.0);
        const double M0 = P0 / alpha;
        const double dM1c = M0 + A * dM0 - P0;
        const double s = (fr - fl) / (zr - zl);
        acc += fl * dM0 + s * dM1c;
        const double A2 =
            second_divdiff(zs, vals, k0, jend, k, s, s_prev, have_prev);
        const double cross = last ? 0.0 : A * B * dM0;
        acc += A2 * ((1.0 - alpha) / alpha * (A + B) * P0 + cross -
                     (1.0 - alpha) / (alpha + 1.0) * P1);
        s_prev = s;
        have_prev = true;
    }
    return acc;
}

void check_grid(const std::vector<double>& zs, const std::vector<double>& vals) {
    if (zs.size() < 2 || zs.size() != vals.size())
        throw std::invalid_argument("density: need matching node/value arrays");
    if (zs.front() != 0.0)
        throw std::invalid_argument("density: node range must start at 0");
}

}  // namespace

Density Density::plain(std::vector<double> zs, std::vector<double> vals) {
    check_grid(zs, vals);
    Density d;
    d.zs = std::move(zs);
    d.vals = std::move(vals);
    return d;
}

Density Density::modeled(std::vector<double> zs, std::vector<double> vals,
                         double p0) {
    check_grid(zs, vals);
    if (p0 <= -1.0)
        throw std::invalid_argument("density: model exponent must be > -1");
    Density d;
    d.zs = std::move(zs);
    d.vals = std::move(vals);
    d.has_model = true;
    d.p0 = p0;
    d.w.resize(d.vals.size());
    for (std::size_t j = 1; j < d.vals.size(); ++j)
        d.w[j] = d.vals[j] * std::pow(d.zs[j], -p0);
    d.w[0] = d.w[1];
    return d;
}

Density Density::from_weighted(std::vector<double> zs,
                               std::vector<double> wvals, double p0) {
    check_grid(zs, wvals);
    if (p0 <= -1.0)
        throw std::invalid_argument("density: model exponent must be > -1");
    Density d;
    d.zs = std::move(zs);
    d.has_model = true;
    d.p0 = p0;
    d.w = std::move(wvals);
    d.w[0] = d.w[1];
    d.vals.resize(d.w.size());
    d.vals[0] = (p0 > 0.0) ? 0.0 : (p0 == 0.0 ? d.w[0] : kInf);
    for (std::size_t j = 1; j < d.w.size(); ++j)
        d.vals[j] = d.w[j] * std::pow(d.zs[j], p0);
    return d;
}

void Density::set_val(int j, double v) {
    vals[j] = v;
    if (has_model) {
        w[j] = v * std::pow(zs[j], -p0);
        if (j == 1) w[0] = w[1];
    }
}

double frac_integral_at(double alpha, const Density& d, int j, int kw) {
    if (alpha <= 0.0)
        throw std::domain_error("frac_integral_at: order must be positive");
    if (j <= 0) return 0.0;
    const double z = d.zs[j];
    double acc = 0.0;
    int k0 = 0;
    if (d.has_model) {
        const int kweff = std::min(kw, j);
        for (int k = 0; k < kweff; ++k)
            acc += beta_cell_value(alpha, z, d.zs[k], d.zs[k + 1], d.p0,
                                   d.w[k], d.w[k + 1]);
        k0 = kweff;
    }
    if (j > k0) acc += raw_cells_value(alpha, z, d.zs, d.vals, k0, j, true);
    return acc / gamma_fn(alpha);
}

std::vector<double> frac_integral_grid(double alpha, const Density& d, int kw) {
    std::vector<double> out(d.zs.size(), 0.0);
    for (int j = 1; j <= d.n(); ++j) out[j] = frac_integral_at(alpha, d, j, kw);
    return out;
}

std::vector<double> frac_integral_dgrid(double alpha, const Density& d,
                                        int kw) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("frac_integral_dgrid: order must be in (0,1)");
    const int n = d.n();
    std::vector<double> out(d.zs.size(), kNaN);
    const double ga = gamma_fn(alpha);
    for (int j = 1; j <= n; ++j) {
        const double z = d.zs[j];
        double acc = 0.0;
        int k0 = 0;
        if (d.has_model) {
            const int kweff = std::min(kw, j);
            acc += gauss_cell0_dvalue(alpha, z, d.zs[1], d.p0, d.w[0], d.w[1]);
            if (j == 1) {
                out[j] = acc / ga;
                continue;
            }
            for (int k = 1; k < kweff; ++k) {
                if (k == j - 1)
                    acc += gauss_diag_dvalue(alpha, z, d.zs[k], d.p0, d.w[k],
                                             d.w[k + 1]);
                else
                    acc += gauss_cell_dvalue(alpha, z, d.zs[k], d.zs[k + 1],
                                             d.p0, d.w[k], d.w[k + 1]);
            }
            k0 = kweff;
        }
        if (j > k0) acc += raw_cells_dvalue(alpha, z, d.zs, d.vals, k0, j);
        out[j] = acc / ga;
    }
    return out;
}

AffineSplit node_affine(double alpha, const Density& d, int j, int kw) {
    if (j < 1) throw std::invalid_argument("node_affine: need j >= 1");
    if (!d.has_model && j < 2)
        throw std::invalid_argument(
            "node_affine: first node needs a density model");
    const auto& zs = d.zs;
    const auto& vals = d.vals;
    const double z = zs[j];
    const double ga = gamma_fn(alpha);
    double acc = 0.0;
    int k0 = 0;
    if (d.has_model) {
        const int kweff = std::min(kw, j);
        const int head = std::min(kweff, j - 1);
        for (int k = 0; k < head; ++k)
            acc += beta_cell_value(alpha, z, zs[k], zs[k + 1], d.p0, d.w[k],
                                   d.w[k + 1]);
        k0 = kweff;
    }
    if (j - 1 > k0)
        acc += raw_cells_value(alpha, z, zs, vals, k0, j - 1, false);

    const double zl = zs[j - 1];
    const double h = z - zl;
    if (d.has_model && j <= kw) {
        const auto [J0, J1] = beta_cell_J(alpha, z, zl, z, d.p0);
        if (j == 1) {
            // pinned w0 == w1: the whole first cell is linear in w1 alone
            return {acc / ga, std::pow(z, -d.p0) * J0 / ga};
        }
        const double qc = (J1 - zl * J0) / h;
        const double headpart = d.w[j - 1] * (z * J0 - J1) / h;
        return {(acc + headpart) / ga, std::pow(z, -d.p0) * qc / ga};
    }
    // raw diagonal: closed product-integration weights plus the quadratic
    // correction, grouped so the f_j coefficient never leaves closed form
    const double base_l = std::pow(h, alpha) / (alpha + 1.0);
    const double base_r = std::pow(h, alpha) / (alpha * (alpha + 1.0));
    const double s_prev = (vals[j - 1] - vals[j - 2]) / (zs[j - 1] - zs[j - 2]);
    const double D = z - zs[j - 2];
    const double cv =
        -std::pow(h, alpha + 2.0) / ((alpha + 1.0) * (alpha + 2.0));
    const double headpart =
        vals[j - 1] * base_l + cv * (-vals[j - 1] / h - s_prev) / D;
    return {(acc + headpart) / ga, (base_r + cv / (h * D)) / ga};
}

double estimate_p0(const std::vector<double>& zs,
                   const std::vector<double>& vals) {
    if (zs.size() < 3) return 0.0;
    const double v1 = std::fabs(vals[1]);
    const double v2 = std::fabs(vals[2]);
    if (v1 == 0.0 || v2 == 0.0 || !std::isfinite(v1) || !std::isfinite(v2))
        return 0.0;
    const double p = std::log(v2 / v1) / std::log(zs[2] / zs[1]);
    if (!std::isfinite(p)) return 0.0;
    return std::clamp(p, -0.999, 6.0);
}

double integral_over(const Density& d, int kw) {
    return frac_integral_at(1.0, d, d.n(), kw);
}

}  // namespace kfrac::detail
