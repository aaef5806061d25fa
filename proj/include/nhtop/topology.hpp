#pragma once

// Topological invariants: non-Bloch windings on the generalized Brillouin
// zone, and the SVD-based real-space winding of the doubled Hamiltonian.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nhtop/model.hpp"
#include "nhtop/numerics.hpp"

namespace nhtop {

/// Invariant is undefined at this parameter point (gap closing, singular GBZ).
class TopologyUndefined : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |beta| = r circle, sampled counterclockwise on a uniform k grid.
struct GbzContour {
    double radius = 1.0;
    std::vector<Complex> samples;
};

struct PhaseWindings {
    double plus = 0.0;   // winding of h+ = hx + i hy
    double minus = 0.0;  // winding of h- = hx - i hy
    int v = 0;           // round((plus - minus) / 2)
    int grid = 0;        // samples actually used
    bool converged = true;
};

inline double gbz_radius(const ChainParams& p) {
    const double num = p.w - p.gamma / 2.0;
    const double den = p.w + p.gamma / 2.0;
    if (den == 0.0) throw TopologyUndefined("gbz_radius: w + gamma/2 = 0, GBZ undefined");
    const double r = std::sqrt(std::abs(num / den));
    if (r == 0.0) throw TopologyUndefined("gbz_radius: w - gamma/2 = 0, GBZ collapses to the origin");
    return r;
}

inline GbzContour gbz_contour(const ChainParams& p, int grid) {
    GbzContour c;
    c.radius = gbz_radius(p);
    c.samples.reserve(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) {
        const double k = 2.0 * std::numbers::pi * j / grid;
        c.samples.push_back(std::polar(c.radius, k));
    }
    return c;
}

/// h+ and h- at complex momentum k - i ln r.
inline std::pair<Complex, Complex> bloch_vector_pm(const ChainParams& p, double k, double r) {
    const Complex kc(k, -std::log(r));
    const Complex hx = p.w + p.v * std::cos(kc);
    const Complex hy = p.v * std::sin(kc) + Complex(0.0, p.gamma / 2.0);
    const Complex i(0.0, 1.0);
    return {hx + i * hy, hx - i * hy};
}

struct NonBlochOptions {
    int grid = 512;
    int max_grid = 1 << 18;
    double gap_tol = 1e-8;
    double integer_tol = 1e-3;
};

inline PhaseWindings winding_nonbloch_1d(const ChainParams& p, const NonBlochOptions& opt = {}) {
    if (opt.grid < 64) throw InvalidInput("winding_nonbloch_1d: grid must be >= 64");
    p.validate();
    const double r = gbz_radius(p);
    const double two_pi = 2.0 * std::numbers::pi;

    for (int grid = opt.grid;; grid *= 2) {
        double dplus = 0.0;
        double dminus = 0.0;
        double max_step = 0.0;
        auto prev = bloch_vector_pm(p, 0.0, r);
        const auto first = prev;
        for (int j = 1; j <= grid; ++j) {
            const auto cur = (j == grid) ? first : bloch_vector_pm(p, two_pi * j / grid, r);
            if (std::abs(cur.first) < opt.gap_tol || std::abs(cur.second) < opt.gap_tol) {
                throw TopologyUndefined("winding_nonbloch_1d: |h+-| vanishes on the GBZ (gap closing)");
            }
            const double sp = std::arg(cur.first / prev.first);
            const double sm = std::arg(cur.second / prev.second);
            max_step = std::max({max_step, std::abs(sp), std::abs(sm)});
            dplus += sp;
            dminus += sm;
            prev = cur;
        }
        PhaseWindings out;
        out.plus = dplus / two_pi;
        out.minus = dminus / two_pi;
        out.grid = grid;
        const double total = (out.plus - out.minus) / 2.0;
        out.v = static_cast<int>(std::lround(total));
        const bool resolved = max_step < std::numbers::pi / 2.0;
        const bool integral = std::abs(total - std::round(total)) <= opt.integer_tol;
        if ((resolved && integral) || grid * 2 > opt.max_grid) {
            out.converged = resolved && integral;
            return out;
        }
    }
}

inline int winding_2d(const ChainParams& px, const ChainParams& py, const NonBlochOptions& opt = {}) {
    return winding_nonbloch_1d(px, opt).v * winding_nonbloch_1d(py, opt).v;
}

/// diag(e^{-i 2pi j/(Lx Ly)}, j = 1..Lx Ly) (x) I_channels, literal Kronecker layout.
inline ComplexDense position_phase_matrix(int Lx, int Ly, int channels) {
    if (Lx < 1 || Ly < 1) throw InvalidInput("position_phase_matrix: Lx, Ly must be >= 1");
    if (channels != 2 && channels != 4) throw InvalidInput("position_phase_matrix: channels must be 2 or 4");
    const Eigen::Index cells = Eigen::Index{Lx} * Ly;
    ComplexVector d(cells * channels);
    for (Eigen::Index j = 1; j <= cells; ++j) {
        const Complex phase = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) /
                                                  static_cast<double>(cells));
        for (int c = 0; c < channels; ++c) d((j - 1) * channels + c) = phase;
    }
    return d.asDiagonal();
}

/// Per-cell phase e^{-i 2pi j/(Lx Ly)} with j = ix*Ly + iy + 1, laid out in the
/// model basis (all four sites of a cell share the phase).
inline ComplexVector cell_phase_diagonal(int Lx, int Ly) {
    if (Lx < 1 || Ly < 1) throw InvalidInput("cell_phase_diagonal: Lx, Ly must be >= 1");
    const double cells = static_cast<double>(Lx) * Ly;
    ComplexVector d(Eigen::Index{4} * Lx * Ly);
    for (int ix = 0; ix < Lx; ++ix) {
        for (int iy = 0; iy < Ly; ++iy) {
            const double j = static_cast<double>(ix) * Ly + iy + 1;
            const Complex phase = std::polar(1.0, -2.0 * std::numbers::pi * j / cells);
            for (int sx = 0; sx < 2; ++sx) {
                for (int sy = 0; sy < 2; ++sy) d(site_index(ix, sx, iy, sy, Ly)) = phase;
            }
        }
    }
    return d;
}

enum class PhaseLayout {
    PerCell,    // phase per unit cell in the model basis
    BasisKron,  // literal diag (x) I_4 applied in raw basis order
};

struct WindingResult {
    double value = 0.0;
    int rounded = 0;
    bool quantized = false;  // |value - rounded| <= integer_tol
    double imaginary_residue = 0.0;
    double max_modulus_deviation = 0.0;
};

struct RealSpaceWindingOptions {
    PhaseLayout layout = PhaseLayout::PerCell;
    double integer_tol = 1e-3;
    double unimodular_tol = 1e-6;
    UnitaryLogMethod method = UnitaryLogMethod::Cayley;
};

namespace detail {

/// Q = U V^dag. P^A P^B^dag = U^dag (P Q P^dag Q^dag) U, so the winding only
/// needs the spectrum of D Q D^dag Q^dag with D the diagonal of P.
inline ComplexDense polar_factor(const SvdTriple& t) {
    if (is_real(t.U) && is_real(t.V)) return (t.U.real() * t.V.real().transpose()).cast<Complex>();
    return t.U * t.V.adjoint();
}

inline ComplexDense winding_operator(const SvdTriple& t, const ComplexVector& phase) {
    const ComplexDense q = polar_factor(t);
    return phase.asDiagonal() * q * phase.conjugate().asDiagonal() * q.adjoint();
}

}  // namespace detail

/// (1/4 pi i) Tr ln(P^A P^B^dagger), P^A = U^dag P U, P^B = V^dag P V, from an
/// existing SVD of the 4 Lx Ly dimensional operator.
inline WindingResult real_space_winding(const SvdTriple& t, int Lx, int Ly,
                                        const RealSpaceWindingOptions& opt = {}) {
    const Eigen::Index n = t.U.rows();
    if (n != Eigen::Index{4} * Lx * Ly) {
        throw InvalidInput("real_space_winding: operator dimension must be 4 Lx Ly");
    }
    const ComplexVector phase = opt.layout == PhaseLayout::PerCell
                                    ? cell_phase_diagonal(Lx, Ly)
                                    : ComplexVector(position_phase_matrix(Lx, Ly, 4).diagonal());
    LogTraceResult lt;
    if (opt.method == UnitaryLogMethod::GeneralEig) {
        try {
            lt = unitary_log_trace(detail::winding_operator(t, phase), opt.unimodular_tol, opt.method);
        } catch (const InvalidInput& e) {
            throw NumericalError(std::string("real_space_winding: ") + e.what(), n);
        }
    } else {
        const ComplexDense q = detail::polar_factor(t);
        const ComplexDense qh = q.adjoint();
        auto apply = [&](const ComplexVector& x) {
            return ComplexVector(phase.cwiseProduct(q * phase.conjugate().cwiseProduct(qh * x)));
        };
        auto apply_adjoint = [&](const ComplexVector& x) {
            return ComplexVector(q * phase.cwiseProduct(qh * phase.conjugate().cwiseProduct(x)));
        };
        lt.max_modulus_deviation = detail::unitarity_defect(n, apply, apply_adjoint);
        if (lt.max_modulus_deviation > opt.unimodular_tol) {
            throw NumericalError("real_space_winding: P^A P^B^dag is not unitary, defect " +
                                     std::to_string(lt.max_modulus_deviation),
                                 n);
        }
        lt.value = commutator_eigenphases(q, phase).sum() / (4.0 * std::numbers::pi);
    }
    WindingResult r;
    r.value = lt.value;
    r.rounded = static_cast<int>(std::lround(lt.value));
    r.quantized = std::abs(lt.value - r.rounded) <= opt.integer_tol;
    r.imaginary_residue = lt.imaginary_residue;
    r.max_modulus_deviation = lt.max_modulus_deviation;
    return r;
}

inline WindingResult real_space_winding(const ComplexDense& h, int Lx, int Ly,
                                        const RealSpaceWindingOptions& opt = {}) {
    return real_space_winding(svd(h), Lx, Ly, opt);
}

}  // namespace nhtop
