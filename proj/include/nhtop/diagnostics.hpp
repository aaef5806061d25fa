#pragma once

// Scalar diagnostics of open-boundary spectra and singular-value spectra:
// Min|E|, Min[s], zero-mode counting, corner-state maps, wipr, eigenvector
// condition number and finite-size scaling of the smallest singular value.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nhtop/model.hpp"
#include "nhtop/numerics.hpp"

namespace nhtop {

inline double min_abs_energy(const ComplexDense& h) {
    const ComplexVector e = eigenvalues(h);
    return e.size() == 0 ? 0.0 : e.cwiseAbs().minCoeff();
}

/// min |ex_i + ey_j| over the spectra of the two 1D factors.
inline double min_abs_energy_separable(const ComplexVector& ex, const ComplexVector& ey) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ex.size(); ++i) {
        for (Eigen::Index j = 0; j < ey.size(); ++j) best = std::min(best, std::abs(ex(i) + ey(j)));
    }
    return best;
}

inline double min_abs_energy_separable(const ComplexDense& hx, const ComplexDense& hy) {
    return min_abs_energy_separable(eigenvalues(hx), eigenvalues(hy));
}

inline double min_singular(const ComplexDense& h) {
    const RealVector s = singular_values(h);
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

// ---------------------------------------------------------------------------
// Zero modes
// ---------------------------------------------------------------------------

struct ZeroModePolicy {
    enum class Kind { Default, Absolute, Relative, GapClustering };
    Kind kind = Kind::Default;
    double absolute = 1e-6;
    double relative_factor = 1e3;  // threshold = factor * eps * ||H||_2
    double gap_decades = 2.0;      // required separation around the threshold
    double cluster_ceiling = 1e-2; // gap clustering only looks below this value

    double threshold(double norm2) const {
        switch (kind) {
            case Kind::Absolute: return absolute;
            case Kind::Relative: return relative_factor * kEpsilon * norm2;
            case Kind::Default:
            case Kind::GapClustering: break;
        }
        return std::max(absolute, relative_factor * kEpsilon * norm2);
    }
};

struct ZeroModeCount {
    int count = 0;
    bool ambiguous = false;
    int threshold_count = 0;
    int cluster_count = 0;
    double threshold = 0.0;
    double gap_ratio = std::numeric_limits<double>::infinity();  // s_k / s_{k-1} at the cut
};

/// Classify singular values (any order) as zero modes.
inline ZeroModeCount zero_mode_count(const RealVector& singular, const ZeroModePolicy& policy = {}) {
    std::vector<double> s(singular.data(), singular.data() + singular.size());
    std::sort(s.begin(), s.end());
    const double norm2 = s.empty() ? 0.0 : s.back();
    const double required = std::pow(10.0, policy.gap_decades);

    ZeroModeCount r;
    r.threshold = policy.threshold(norm2);
    const auto k = static_cast<int>(std::lower_bound(s.begin(), s.end(), r.threshold) - s.begin());
    r.threshold_count = k;
    if (k > 0 && k < static_cast<int>(s.size())) {
        r.gap_ratio = s[k - 1] > 0.0 ? s[k] / s[k - 1] : std::numeric_limits<double>::infinity();
    }

    double best = 0.0;
    for (std::size_t i = 1; i < s.size() && s[i - 1] < policy.cluster_ceiling; ++i) {
        const double ratio = s[i - 1] > 0.0 ? s[i] / s[i - 1] : std::numeric_limits<double>::infinity();
        if (ratio > best) {
            best = ratio;
            r.cluster_count = static_cast<int>(i);
        }
    }
    if (best < required) r.cluster_count = 0;

    r.count = policy.kind == ZeroModePolicy::Kind::GapClustering ? r.cluster_count : r.threshold_count;
    r.ambiguous = (k > 0 && r.gap_ratio < required) || r.cluster_count != r.threshold_count;
    return r;
}

inline ZeroModeCount zero_mode_count(const ComplexDense& h, const ZeroModePolicy& policy = {}) {
    return zero_mode_count(singular_values(h), policy);
}

// ---------------------------------------------------------------------------
// Corner states
// ---------------------------------------------------------------------------

struct CornerState {
    RealDense field;                     // Lx x Ly, four sublattice channels summed per cell
    std::array<double, 4> quadrant_mass; // (x lo, y lo), (x lo, y hi), (x hi, y lo), (x hi, y hi)
    int cluster_size = 1;                // degenerate singular vectors mixed during localization

    double max_quadrant_mass() const {
        return *std::max_element(quadrant_mass.begin(), quadrant_mass.end());
    }

    /// Largest mass inside a block x block square anchored at one of the four corners.
    double max_corner_block_mass(int block) const {
        const auto lx = static_cast<int>(field.rows());
        const auto ly = static_cast<int>(field.cols());
        const int bx = std::min(block, lx);
        const int by = std::min(block, ly);
        double best = 0.0;
        for (int cx : {0, lx - bx}) {
            for (int cy : {0, ly - by}) best = std::max(best, field.block(cx, cy, bx, by).sum());
        }
        return best;
    }
};

inline CornerState fold_probability(const ComplexVector& psi, int Lx, int Ly) {
    if (psi.size() != Eigen::Index{4} * Lx * Ly) throw InvalidInput("fold_probability: size must be 4 Lx Ly");
    CornerState cs;
    cs.field = RealDense::Zero(Lx, Ly);
    for (int ix = 0; ix < Lx; ++ix) {
        for (int sx = 0; sx < 2; ++sx) {
            for (int iy = 0; iy < Ly; ++iy) {
                for (int sy = 0; sy < 2; ++sy) cs.field(ix, iy) += std::norm(psi(site_index(ix, sx, iy, sy, Ly)));
            }
        }
    }
    const int hx = Lx / 2;
    const int hy = Ly / 2;
    cs.quadrant_mass = {cs.field.block(0, 0, hx, hy).sum(), cs.field.block(0, hy, hx, Ly - hy).sum(),
                        cs.field.block(hx, 0, Lx - hx, hy).sum(),
                        cs.field.block(hx, hy, Lx - hx, Ly - hy).sum()};
    return cs;
}

struct CornerStateOptions {
    ZeroModePolicy policy{};
    double degeneracy_rtol = 1e-8;
    bool localize = true;
};

/// |v_n|^2 of the right singular vector with the n-th smallest singular value
/// (n = 0 is the smallest), folded onto the cell grid. Degenerate singular
/// vectors (the whole zero-mode cluster, or a cluster of equal non-zero
/// values) are first rotated to the eigenbasis of the projected coordinate
/// operator x/Lx + pi*y/Ly, which separates states living at different corners.
inline CornerState singular_corner_state(const SvdTriple& t, int Lx, int Ly, int n,
                                         const CornerStateOptions& opt = {}) {
    const auto dim = static_cast<int>(t.S.size());
    if (n < 0 || n >= dim) throw InvalidInput("singular_corner_state: index out of range");
    if (dim != 4 * Lx * Ly) throw InvalidInput("singular_corner_state: dimension must be 4 Lx Ly");

    auto col_of = [dim](int ascending) { return dim - 1 - ascending; };  // S is descending
    const double sn = t.S(col_of(n));

    int lo = n;
    int hi = n + 1;
    if (opt.localize) {
        const ZeroModeCount zm = zero_mode_count(t.S, opt.policy);
        if (n < zm.count) {
            lo = 0;
            hi = zm.count;
        } else {
            const double tol = opt.degeneracy_rtol * std::max(sn, kEpsilon * t.S(0));
            while (lo > 0 && std::abs(t.S(col_of(lo - 1)) - sn) <= tol) --lo;
            while (hi < dim && std::abs(t.S(col_of(hi)) - sn) <= tol) ++hi;
        }
    }
    const int m = hi - lo;
    if (m == 1) {
        CornerState cs = fold_probability(t.V.col(col_of(n)), Lx, Ly);
        return cs;
    }

    ComplexDense basis(dim, m);
    for (int c = 0; c < m; ++c) basis.col(c) = t.V.col(col_of(lo + c));
    RealVector coord(dim);
    for (int ix = 0; ix < Lx; ++ix) {
        for (int sx = 0; sx < 2; ++sx) {
            for (int iy = 0; iy < Ly; ++iy) {
                for (int sy = 0; sy < 2; ++sy) {
                    coord(site_index(ix, sx, iy, sy, Ly)) =
                        static_cast<double>(ix) / Lx + std::numbers::pi * iy / Ly;
                }
            }
        }
    }
    const ComplexDense projected = basis.adjoint() * coord.cast<Complex>().asDiagonal() * basis;
    Eigen::SelfAdjointEigenSolver<ComplexDense> es(projected);
    const ComplexVector psi = basis * es.eigenvectors().col(n - lo);
    CornerState cs = fold_probability(psi, Lx, Ly);
    cs.cluster_size = m;
    return cs;
}

inline CornerState singular_corner_state(const ComplexDense& h, int Lx, int Ly, int n,
                                         const CornerStateOptions& opt = {}) {
    return singular_corner_state(svd(h), Lx, Ly, n, opt);
}

// ---------------------------------------------------------------------------
// wipr
// ---------------------------------------------------------------------------

/// Site: x, y in 1..2L (site index including sublattice), center L.
/// Cell: x, y in 1..L (unit-cell index), center L/2.
enum class WiprCoordinates { Site, Cell };

namespace detail {

inline RealVector axis_coordinates(int L, WiprCoordinates c) {
    RealVector x(2 * L);
    for (int i = 0; i < 2 * L; ++i) {
        x(i) = c == WiprCoordinates::Site ? static_cast<double>(i + 1) : static_cast<double>(i / 2 + 1);
    }
    return x;
}

inline double axis_center(int L, WiprCoordinates c) {
    return c == WiprCoordinates::Site ? static_cast<double>(L) : L / 2.0;
}

inline void require_unit_columns(const ComplexDense& v, const char* who) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        if (std::abs(v.col(j).norm() - 1.0) > 1e-8) {
            throw InvalidInput(std::string(who) + ": eigenvector column " + std::to_string(j) +
                               " is not unit-normalized");
        }
    }
}

}  // namespace detail

/// sum_{n,x,y} |psi_{n,x,y}|^4 / (4 Lx Ly) * sqrt((x - cx)^2 + (y - cy)^2), over
/// the right eigenvectors in `e` (each unit-normalized).
inline double wipr(const EigResult& e, int Lx, int Ly, WiprCoordinates coords = WiprCoordinates::Site) {
    if (e.vectors.rows() != Eigen::Index{4} * Lx * Ly) throw InvalidInput("wipr: dimension must be 4 Lx Ly");
    detail::require_unit_columns(e.vectors, "wipr");
    const RealVector xs = detail::axis_coordinates(Lx, coords);
    const RealVector ys = detail::axis_coordinates(Ly, coords);
    const double cx = detail::axis_center(Lx, coords);
    const double cy = detail::axis_center(Ly, coords);
    RealVector dist(e.vectors.rows());
    for (int a = 0; a < 2 * Lx; ++a) {
        for (int b = 0; b < 2 * Ly; ++b) {
            dist(Eigen::Index{a} * 2 * Ly + b) = std::hypot(xs(a) - cx, ys(b) - cy);
        }
    }
    const RealVector quartic = e.vectors.cwiseAbs2().cwiseAbs2().rowwise().sum();
    return quartic.dot(dist) / (4.0 * Lx * Ly);
}

/// wipr of the product eigenbasis {psi_x (x) psi_y} from the two 1D factors.
inline double wipr_separable(const EigResult& ex, const EigResult& ey, int Lx, int Ly,
                             WiprCoordinates coords = WiprCoordinates::Site) {
    if (ex.vectors.rows() != 2 * Lx || ey.vectors.rows() != 2 * Ly) {
        throw InvalidInput("wipr_separable: factor dimensions must be 2 Lx and 2 Ly");
    }
    detail::require_unit_columns(ex.vectors, "wipr_separable");
    detail::require_unit_columns(ey.vectors, "wipr_separable");
    const RealVector fx = ex.vectors.cwiseAbs2().cwiseAbs2().rowwise().sum();
    const RealVector fy = ey.vectors.cwiseAbs2().cwiseAbs2().rowwise().sum();
    const RealVector xs = detail::axis_coordinates(Lx, coords);
    const RealVector ys = detail::axis_coordinates(Ly, coords);
    const double cx = detail::axis_center(Lx, coords);
    const double cy = detail::axis_center(Ly, coords);
    double total = 0.0;
    for (int a = 0; a < 2 * Lx; ++a) {
        for (int b = 0; b < 2 * Ly; ++b) total += fx(a) * fy(b) * std::hypot(xs(a) - cx, ys(b) - cy);
    }
    return total / (4.0 * Lx * Ly);
}

// ---------------------------------------------------------------------------
// Condition number
// ---------------------------------------------------------------------------

struct ConditionNumber {
    double kappa = 1.0;
    bool numerically_singular = false;  // kappa * eps >= 1: digits beyond 1/eps are not meaningful
};

inline ConditionNumber condition_number(const EigResult& e) {
    ConditionNumber c;
    c.kappa = condition_number_2(e.vectors);
    c.numerically_singular = !std::isfinite(c.kappa) || c.kappa * kEpsilon >= 1.0;
    return c;
}

/// kappa(Sx (x) Sy) = kappa(Sx) kappa(Sy) for the 2-norm.
inline ConditionNumber condition_number_separable(const EigResult& ex, const EigResult& ey) {
    const ConditionNumber cx = condition_number(ex);
    const ConditionNumber cy = condition_number(ey);
    ConditionNumber c;
    c.kappa = cx.kappa * cy.kappa;
    c.numerically_singular = cx.numerically_singular || cy.numerically_singular ||
                             !std::isfinite(c.kappa) || c.kappa * kEpsilon >= 1.0;
    return c;
}

// ---------------------------------------------------------------------------
// Finite-size scaling
// ---------------------------------------------------------------------------

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = std::numeric_limits<double>::quiet_NaN();
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() >= 3) f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

struct ScalingSeries {
    std::vector<int> sizes;
    std::vector<double> min_s;
    std::vector<int> excluded;  // sizes whose Min[s] fell below the double-precision floor
    double fit_slope = 0.0;
    double fit_intercept = 0.0;
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
};

/// Min[s] for each L of a model family, and a least-squares fit of ln Min[s] vs L.
inline ScalingSeries scaling_min_singular(const std::function<ComplexDense(int)>& family,
                                          const std::vector<int>& sizes, double floor = 1e-14) {
    if (sizes.size() < 3) throw InvalidInput("scaling_min_singular: need at least 3 sizes");
    ScalingSeries s;
    std::vector<double> xs, ys;
    for (int L : sizes) {
        const double ms = min_singular(family(L));
        s.sizes.push_back(L);
        s.min_s.push_back(ms);
        if (ms < floor) {
            s.excluded.push_back(L);
            continue;
        }
        xs.push_back(L);
        ys.push_back(std::log(ms));
    }
    const LinearFit f = linear_fit(xs, ys);
    s.fit_slope = f.slope;
    s.fit_intercept = f.intercept;
    s.fit_r2 = f.r2;
    return s;
}

}  // namespace nhtop
