#pragma once

// Two-stage periodically driven model: only the inter-cell hopping is
// modulated, v(t) = f on [mT, mT + T1) and q f on [mT + T1, (m + 1)T).

#include <cmath>
#include <numbers>
#include <optional>

#include "nhtop/diagnostics.hpp"
#include "nhtop/model.hpp"
#include "nhtop/numerics.hpp"
#include "nhtop/topology.hpp"

namespace nhtop {

struct DriveProtocol {
    double T = 0.6;
    double T1 = 0.3;
    double qx = 0.2;
    double qy = 0.2;
    double fx = 0.0;
    double fy = 0.0;

    double T2() const { return T - T1; }
    double q(Axis a) const { return a == Axis::X ? qx : qy; }
    double f(Axis a) const { return a == Axis::X ? fx : fy; }

    void validate() const {
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("DriveProtocol: T must be positive");
        if (!(T1 > 0.0) || !(T1 < T)) throw InvalidInput("DriveProtocol: T1 must lie in (0, T)");
        for (double x : {qx, qy, fx, fy}) {
            if (!std::isfinite(x)) throw InvalidInput("DriveProtocol: amplitudes must be finite");
        }
    }
};

inline double drive_value(const DriveProtocol& p, Axis axis, double t) {
    double phase = std::fmod(t, p.T);
    if (phase < 0.0) phase += p.T;
    return phase < p.T1 ? p.f(axis) : p.q(axis) * p.f(axis);
}

/// e^{-i H2 T2} e^{-i H1 T1} for one open chain; p.v is ignored, the drive
/// supplies the inter-cell amplitude of each segment.
inline ComplexDense evolution_operator_1d(const ChainParams& p, const DriveProtocol& proto, Axis axis, int L) {
    proto.validate();
    const ComplexDense h1 = real_h1d(p.with_v(proto.f(axis)), L);
    const ComplexDense h2 = real_h1d(p.with_v(proto.q(axis) * proto.f(axis)), L);
    return expm(h2, proto.T2()) * expm(h1, proto.T1);
}

/// Ux(T) (x) Uy(T); the x and y generators commute at every instant.
inline ComplexDense evolution_operator_2d(const Model2D& m, const DriveProtocol& proto) {
    m.validate();
    check_dimension_cap(m.dimension(), m.max_dim);
    return kron(evolution_operator_1d(m.x, proto, Axis::X, m.Lx), evolution_operator_1d(m.y, proto, Axis::Y, m.Ly));
}

/// Time-ordered product built on the full 2D generators of each segment.
inline ComplexDense evolution_operator_2d_direct(const Model2D& m, const DriveProtocol& proto) {
    m.validate();
    proto.validate();
    Model2D first = m;
    first.x.v = proto.fx;
    first.y.v = proto.fy;
    Model2D second = m;
    second.x.v = proto.qx * proto.fx;
    second.y.v = proto.qy * proto.fy;
    return expm(real_h2d(second), proto.T2()) * expm(real_h2d(first), proto.T1);
}

/// (i/T) ln(lambda) per eigenvalue, principal branch: real part -arg(lambda)/T
/// lies in [-pi/T, pi/T].
inline ComplexVector quasienergies_from_eigenvalues(const ComplexVector& lambda, double T, Eigen::Index dim) {
    ComplexVector eps(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i)) == 0.0) throw NumericalError("quasienergies: zero eigenvalue of U(T)", dim);
        eps(i) = Complex(-std::arg(lambda(i)), std::log(std::abs(lambda(i)))) / T;
    }
    return eps;
}

inline ComplexVector quasienergies(const ComplexDense& U, double T) {
    return quasienergies_from_eigenvalues(eigenvalues(U), T, U.rows());
}

/// Quasienergies of Ux (x) Uy from the factor spectra.
inline ComplexVector quasienergies_separable(const ComplexDense& ux, const ComplexDense& uy, double T) {
    const ComplexVector lx = eigenvalues(ux);
    const ComplexVector ly = eigenvalues(uy);
    ComplexVector prod(lx.size() * ly.size());
    for (Eigen::Index i = 0; i < lx.size(); ++i) {
        for (Eigen::Index j = 0; j < ly.size(); ++j) prod(i * ly.size() + j) = lx(i) * ly(j);
    }
    return quasienergies_from_eigenvalues(prod, T, prod.size());
}

/// U(T) + sign * I; sign = -1 probes 0-modes, sign = +1 probes pi-modes.
inline ComplexDense shifted_propagator(const ComplexDense& U, int sign) {
    if (sign != 1 && sign != -1) throw InvalidInput("floquet: sign must be +1 or -1");
    ComplexDense m = U;
    m.diagonal().array() += static_cast<double>(sign);
    return m;
}

inline double floquet_min_singular(const ComplexDense& U, int sign) {
    return min_singular(shifted_propagator(U, sign));
}

inline WindingResult floquet_winding(const ComplexDense& U, int Lx, int Ly, int sign,
                                     const RealSpaceWindingOptions& opt = {}) {
    return real_space_winding(shifted_propagator(U, sign), Lx, Ly, opt);
}

/// Distance of the quasienergy spectrum to 0 and to the zone edge pi/T.
inline std::pair<double, double> quasienergy_gaps(const ComplexVector& eps, double T) {
    double g0 = std::numeric_limits<double>::infinity();
    double gpi = std::numeric_limits<double>::infinity();
    const double edge = std::numbers::pi / T;
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
        g0 = std::min(g0, std::abs(eps(i)));
        gpi = std::min(gpi, std::hypot(edge - std::abs(eps(i).real()), eps(i).imag()));
    }
    return {g0, gpi};
}

struct FloquetResult {
    ComplexDense U;
    ComplexVector quasienergies;
    double min_s_minus = 0.0;
    double min_s_plus = 0.0;
    ZeroModeCount zero_modes_minus;
    ZeroModeCount zero_modes_plus;
    std::optional<WindingResult> v_minus;
    std::optional<WindingResult> v_plus;
    double quasienergy_gap_0 = 0.0;
    double quasienergy_gap_pi = 0.0;
};

struct FloquetOptions {
    bool windings = true;
    ZeroModePolicy policy{};
    RealSpaceWindingOptions winding{};
};

/// Full diagnostic set for one drive: propagator, quasienergies, Min[s-+], V-+.
inline FloquetResult analyze_floquet(const Model2D& m, const DriveProtocol& proto, const FloquetOptions& opt = {}) {
    m.validate();
    check_dimension_cap(m.dimension(), m.max_dim);
    const ComplexDense ux = evolution_operator_1d(m.x, proto, Axis::X, m.Lx);
    const ComplexDense uy = evolution_operator_1d(m.y, proto, Axis::Y, m.Ly);
    FloquetResult r;
    r.U = kron(ux, uy);
    r.quasienergies = quasienergies_separable(ux, uy, proto.T);
    std::tie(r.quasienergy_gap_0, r.quasienergy_gap_pi) = quasienergy_gaps(r.quasienergies, proto.T);
    for (int sign : {-1, 1}) {
        const ComplexDense shifted = shifted_propagator(r.U, sign);
        RealVector s;
        std::optional<WindingResult> w;
        if (opt.windings) {
            const SvdTriple t = svd(shifted);
            s = t.S;
            w = real_space_winding(t, m.Lx, m.Ly, opt.winding);
        } else {
            s = singular_values(shifted);
        }
        const double smin = s.size() ? s(s.size() - 1) : 0.0;
        if (sign < 0) {
            r.min_s_minus = smin;
            r.zero_modes_minus = zero_mode_count(s, opt.policy);
            r.v_minus = w;
        } else {
            r.min_s_plus = smin;
            r.zero_modes_plus = zero_mode_count(s, opt.policy);
            r.v_plus = w;
        }
    }
    return r;
}

}  // namespace nhtop
