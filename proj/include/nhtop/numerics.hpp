#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

namespace nhtop {

using Complex = std::complex<double>;
using ComplexDense = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealDense = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-8;
inline constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

// A decomposition or kernel did not converge / produced non-finite output.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, Eigen::Index dim)
        : std::runtime_error(what + " (dimension " + std::to_string(dim) + ")"), dim_(dim) {}
    Eigen::Index dimension() const noexcept { return dim_; }

private:
    Eigen::Index dim_;
};

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested matrix exceeds the configured dimension cap.
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EigResult {
    ComplexVector values;
    ComplexDense vectors;  // unit 2-norm columns
};

/// H = U diag(S) V^dagger with S sorted descending.
struct SvdTriple {
    ComplexDense U;
    RealVector S;
    ComplexDense V;
};

struct LogTraceResult {
    double value = 0.0;                  // (1/4pi) sum arg(lambda)
    double imaginary_residue = 0.0;      // -(1/4pi) sum ln|lambda|, discarded from value
    double max_modulus_deviation = 0.0;  // max | |lambda| - 1 |
};

namespace detail {

inline void require_square(const ComplexDense& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw InvalidInput(std::string(who) + ": matrix must be square, got " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void require_finite(const ComplexDense& m, const char* who) {
    if (!m.allFinite()) throw InvalidInput(std::string(who) + ": non-finite entries");
}

inline lapack_int to_lapack(Eigen::Index n) { return static_cast<lapack_int>(n); }

inline void check_info(lapack_int info, const char* routine, Eigen::Index n) {
    if (info < 0) {
        throw std::logic_error(std::string(routine) + ": illegal argument " + std::to_string(-info));
    }
    if (info > 0) throw NumericalError(std::string(routine) + " did not converge", n);
}

// Assemble complex eigenvectors from dgeev's packed conjugate-pair layout.
inline ComplexDense unpack_real_eigvecs(const RealDense& vr, const RealVector& wi) {
    const Eigen::Index n = vr.rows();
    ComplexDense out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (wi(j) == 0.0) {
            out.col(j) = vr.col(j).cast<Complex>();
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                out(i, j) = Complex(vr(i, j), vr(i, j + 1));
                out(i, j + 1) = Complex(vr(i, j), -vr(i, j + 1));
            }
            ++j;
        }
    }
    return out;
}

inline void normalize_columns(ComplexDense& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const double nrm = v.col(j).norm();
        if (nrm > 0.0) v.col(j) /= nrm;
    }
}

}  // namespace detail

/// True when every imaginary part is exactly zero.
inline bool is_real(const ComplexDense& m) {
    return (m.imag().array() == 0.0).all();
}

inline ComplexDense kron(const ComplexDense& a, const ComplexDense& b) {
    ComplexDense out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// a (x) I + I (x) b for square a, b.
inline ComplexDense kron_sum(const ComplexDense& a, const ComplexDense& b) {
    const Eigen::Index na = a.rows();
    const Eigen::Index nb = b.rows();
    ComplexDense out = ComplexDense::Zero(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) {
            if (a(i, j) != Complex{}) {
                out.block(i * nb, j * nb, nb, nb).diagonal().array() += a(i, j);
            }
        }
        out.block(i * nb, i * nb, nb, nb) += b;
    }
    return out;
}

/// Eigenvalues only (no vectors).
inline ComplexVector eigenvalues(const ComplexDense& m) {
    detail::require_square(m, "eigenvalues");
    detail::require_finite(m, "eigenvalues");
    const Eigen::Index n = m.rows();
    const lapack_int ln = detail::to_lapack(n);
    if (n == 0) return {};
    if (is_real(m)) {
        RealDense a = m.real();
        RealVector wr(n), wi(n);
        const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', ln, a.data(), ln, wr.data(),
                                              wi.data(), nullptr, 1, nullptr, 1);
        detail::check_info(info, "dgeev", n);
        ComplexVector out(n);
        for (Eigen::Index i = 0; i < n; ++i) out(i) = Complex(wr(i), wi(i));
        return out;
    }
    ComplexDense a = m;
    ComplexVector w(n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', ln, a.data(), ln, w.data(), nullptr, 1, nullptr, 1);
    detail::check_info(info, "zgeev", n);
    return w;
}

/// Eigenvalues and unit-norm right eigenvectors, in no particular order.
inline EigResult eig(const ComplexDense& m) {
    detail::require_square(m, "eig");
    detail::require_finite(m, "eig");
    const Eigen::Index n = m.rows();
    const lapack_int ln = detail::to_lapack(n);
    EigResult r;
    if (n == 0) return r;
    if (is_real(m)) {
        RealDense a = m.real();
        RealVector wr(n), wi(n);
        RealDense vr(n, n);
        const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', ln, a.data(), ln, wr.data(),
                                              wi.data(), nullptr, 1, vr.data(), ln);
        detail::check_info(info, "dgeev", n);
        r.values.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) r.values(i) = Complex(wr(i), wi(i));
        r.vectors = detail::unpack_real_eigvecs(vr, wi);
    } else {
        ComplexDense a = m;
        r.values.resize(n);
        r.vectors.resize(n, n);
        const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', ln, a.data(), ln,
                                              r.values.data(), nullptr, 1, r.vectors.data(), ln);
        detail::check_info(info, "zgeev", n);
    }
    detail::normalize_columns(r.vectors);
    return r;
}

/// Singular values only, descending. Computed from M directly (never M^dagger M).
inline RealVector singular_values(const ComplexDense& m) {
    detail::require_finite(m, "singular_values");
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    const Eigen::Index k = std::min(rows, cols);
    RealVector s(k);
    if (k == 0) return s;
    if (is_real(m)) {
        RealDense a = m.real();
        const lapack_int info =
            LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', detail::to_lapack(rows), detail::to_lapack(cols),
                           a.data(), detail::to_lapack(rows), s.data(), nullptr, 1, nullptr, 1);
        detail::check_info(info, "dgesdd", k);
    } else {
        ComplexDense a = m;
        const lapack_int info =
            LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', detail::to_lapack(rows), detail::to_lapack(cols),
                           a.data(), detail::to_lapack(rows), s.data(), nullptr, 1, nullptr, 1);
        detail::check_info(info, "zgesdd", k);
    }
    return s;
}

/// Full SVD of a square matrix.
inline SvdTriple svd(const ComplexDense& m) {
    detail::require_square(m, "svd");
    detail::require_finite(m, "svd");
    const Eigen::Index n = m.rows();
    const lapack_int ln = detail::to_lapack(n);
    SvdTriple t;
    t.S.resize(n);
    if (n == 0) return t;
    if (is_real(m)) {
        RealDense a = m.real();
        RealDense u(n, n), vt(n, n);
        const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'A', ln, ln, a.data(), ln, t.S.data(),
                                               u.data(), ln, vt.data(), ln);
        detail::check_info(info, "dgesdd", n);
        t.U = u.cast<Complex>();
        t.V = vt.transpose().cast<Complex>();
    } else {
        ComplexDense a = m;
        ComplexDense vh(n, n);
        t.U.resize(n, n);
        const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', ln, ln, a.data(), ln, t.S.data(),
                                               t.U.data(), ln, vh.data(), ln);
        detail::check_info(info, "zgesdd", n);
        t.V = vh.adjoint();
    }
    return t;
}

inline double spectral_norm(const ComplexDense& m) {
    if (m.size() == 0) return 0.0;
    return singular_values(m)(0);
}

/// 2-norm condition number; +inf when the smallest singular value is exactly zero.
inline double condition_number_2(const ComplexDense& m) {
    const RealVector s = singular_values(m);
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

/// e^{-i M t} via the eigendecomposition M = X diag(lambda) X^{-1}.
inline ComplexDense expm_eig(const ComplexDense& m, double t) {
    detail::require_square(m, "expm_eig");
    const EigResult e = eig(m);
    const Complex minus_i_t(0.0, -t);
    ComplexDense scaled = e.vectors;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= std::exp(minus_i_t * e.values(j));
    // scaled * X^{-1} = (X^{-T} scaled^T)^T
    ComplexDense out = e.vectors.transpose().partialPivLu().solve(scaled.transpose()).transpose();
    if (!out.allFinite()) throw NumericalError("expm_eig: non-finite result", m.rows());
    return out;
}

/// e^{A} by scaling and squaring with a diagonal Pade approximant (degrees 3..13).
inline ComplexDense expm_pade_raw(const ComplexDense& a) {
    detail::require_square(a, "expm_pade");
    const Eigen::Index n = a.rows();
    const ComplexDense id = ComplexDense::Identity(n, n);
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

    static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                    9.504178996162932e-1, 2.097847961257068e0};
    static constexpr std::array<int, 4> degrees = {3, 5, 7, 9};
    static constexpr std::array<std::array<double, 10>, 4> coeff = {{
        {120., 60., 12., 1., 0, 0, 0, 0, 0, 0},
        {30240., 15120., 3360., 420., 30., 1., 0, 0, 0, 0},
        {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1., 0, 0},
        {17643225600., 8821612800., 2075673600., 302702400., 30270240., 2162160., 110880., 3960., 90.,
         1.},
    }};

    auto solve_pq = [&](const ComplexDense& u, const ComplexDense& v) -> ComplexDense {
        return (v - u).partialPivLu().solve(v + u);
    };

    for (std::size_t k = 0; k < degrees.size(); ++k) {
        if (norm1 <= theta[k]) {
            const auto& b = coeff[k];
            const int m = degrees[k];
            const ComplexDense a2 = a * a;
            ComplexDense power = id;
            ComplexDense u_even = b[1] * id;
            ComplexDense v = b[0] * id;
            for (int j = 2; j <= m; j += 2) {
                power = power * a2;
                u_even += b[j + 1] * power;
                v += b[j] * power;
            }
            const ComplexDense u = a * u_even;
            return solve_pq(u, v);
        }
    }

    constexpr double theta13 = 5.371920351148152;
    static constexpr std::array<double, 14> b = {
        64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
        129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
        1323241920.,        40840800.,          960960.,           16380.,
        182.,               1.};
    int s = 0;
    if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    const ComplexDense as = a / std::ldexp(1.0, s);
    const ComplexDense a2 = as * as;
    const ComplexDense a4 = a2 * a2;
    const ComplexDense a6 = a4 * a2;
    const ComplexDense u =
        as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const ComplexDense v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    ComplexDense r = solve_pq(u, v);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

/// e^{-i M t} by scaling and squaring.
inline ComplexDense expm_pade(const ComplexDense& m, double t) {
    ComplexDense out = expm_pade_raw(Complex(0.0, -t) * m);
    if (!out.allFinite()) throw NumericalError("expm_pade: overflow in e^{-iMt}", m.rows());
    return out;
}

struct ExpmOptions {
    double max_eigvec_condition = 1e6;
};

/// e^{-i M t}. Uses the eigendecomposition when the eigenvector basis is
/// well conditioned, scaling-and-squaring otherwise.
inline ComplexDense expm(const ComplexDense& m, double t, const ExpmOptions& opt = {}) {
    detail::require_square(m, "expm");
    detail::require_finite(m, "expm");
    const Eigen::Index n = m.rows();
    if (t == 0.0 || n == 0) return ComplexDense::Identity(n, n);
    const EigResult e = eig(m);
    const double kappa = condition_number_2(e.vectors);
    if (kappa < opt.max_eigvec_condition) {
        const Complex minus_i_t(0.0, -t);
        ComplexDense scaled = e.vectors;
        for (Eigen::Index j = 0; j < n; ++j) scaled.col(j) *= std::exp(minus_i_t * e.values(j));
        ComplexDense out = e.vectors.transpose().partialPivLu().solve(scaled.transpose()).transpose();
        if (out.allFinite()) return out;
    }
    return expm_pade(m, t);
}

enum class UnitaryLogMethod {
    GeneralEig,  // eigenvalues of M by the general nonsymmetric solver
    Cayley,      // Hermitian eigenproblem of the Cayley transform; M must be unitary
};

/// (1/4 pi i) Tr ln M for M with unimodular spectrum, principal branch per
/// eigenvalue. Throws InvalidInput when some |lambda| is off the unit circle
/// by more than `unimodular_tol`.
inline LogTraceResult unitary_log_trace_general(const ComplexDense& m, double unimodular_tol = 1e-6) {
    detail::require_square(m, "unitary_log_trace");
    const ComplexVector w = eigenvalues(m);
    LogTraceResult r;
    double arg_sum = 0.0;
    double log_mod_sum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double mod = std::abs(w(i));
        r.max_modulus_deviation = std::max(r.max_modulus_deviation, std::abs(mod - 1.0));
        arg_sum += std::arg(w(i));
        log_mod_sum += std::log(mod);
    }
    if (r.max_modulus_deviation > unimodular_tol) {
        throw InvalidInput("unitary_log_trace: spectrum off the unit circle by " +
                           std::to_string(r.max_modulus_deviation));
    }
    r.value = arg_sum / (4.0 * std::numbers::pi);
    r.imaginary_residue = -log_mod_sum / (4.0 * std::numbers::pi);
    return r;
}

namespace detail {

/// Power-iteration estimate of ||M^dag M - I||_2 (a lower bound, tight after a
/// few steps) for an operator given by its action and adjoint action.
template <class Apply, class ApplyAdjoint>
double unitarity_defect(Eigen::Index n, Apply apply, ApplyAdjoint apply_adjoint, int steps = 12) {
    if (n == 0) return 0.0;
    ComplexVector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = std::polar(1.0, 0.7 * static_cast<double>(i * i % 97));
    x.normalize();
    double est = 0.0;
    for (int k = 0; k < steps; ++k) {
        ComplexVector y = apply_adjoint(apply(x)) - x;
        est = y.norm();
        if (est == 0.0) break;
        x = y / est;
    }
    return est;
}

inline double unitarity_defect(const ComplexDense& m) {
    return unitarity_defect(
        m.rows(), [&](const ComplexVector& v) { return ComplexVector(m * v); },
        [&](const ComplexVector& v) { return ComplexVector(m.adjoint() * v); });
}

inline RealVector hermitian_eigenvalues(ComplexDense a) {
    const Eigen::Index n = a.rows();
    RealVector w(n);
    if (n == 0) return w;
    const lapack_int ln = to_lapack(n);
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', ln, a.data(), ln, w.data());
    check_info(info, "zheevd", n);
    return w;
}

/// i B A^{-1} for the Cayley transform, or nullopt when A is near singular.
inline std::optional<ComplexDense> cayley_quotient(ComplexDense a, const ComplexDense& b, double min_rcond) {
    const Eigen::Index n = a.rows();
    const lapack_int ln = to_lapack(n);
    const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
    std::vector<lapack_int> piv(static_cast<std::size_t>(n));
    lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, ln, ln, a.data(), ln, piv.data());
    if (info > 0) return std::nullopt;
    check_info(info, "zgetrf", n);
    double rcond = 0.0;
    info = LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', ln, a.data(), ln, anorm, &rcond);
    check_info(info, "zgecon", n);
    if (!(rcond > min_rcond)) return std::nullopt;
    // X A = B  <=>  A^T X^T = B^T.
    ComplexDense xt = b.transpose();
    info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'T', ln, ln, a.data(), ln, piv.data(), xt.data(), ln);
    check_info(info, "zgetrs", n);
    return ComplexDense(Complex(0.0, 1.0) * xt.transpose());
}

/// Eigenphases from the Hermitian matrix with eigenvalues tan((theta - phi)/2).
inline RealVector phases_from_cayley(ComplexDense c, double phi) {
    c = (c + c.adjoint()).eval() / 2.0;
    const RealVector t = hermitian_eigenvalues(std::move(c));
    RealVector theta(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) theta(i) = std::arg(std::polar(1.0, 2.0 * std::atan(t(i)) + phi));
    return theta;
}

inline constexpr std::array<double, 6> kCayleyRotations = {0.0, 1.0, -2.1, 2.7, -0.45, 0.3};
inline constexpr double kCayleyMinRcond = 1e-8;

}  // namespace detail

/// Eigenphases in (-pi, pi] of a unitary matrix. The Cayley transform
/// C = i (I - e^{-i phi} M)(I + e^{-i phi} M)^{-1} is Hermitian with eigenvalues
/// tan((theta - phi)/2); the rotation phi is chosen so I + e^{-i phi} M is well
/// conditioned.
inline RealVector unitary_eigenphases(const ComplexDense& m) {
    detail::require_square(m, "unitary_eigenphases");
    detail::require_finite(m, "unitary_eigenphases");
    const Eigen::Index n = m.rows();
    const ComplexDense id = ComplexDense::Identity(n, n);
    for (double phi : detail::kCayleyRotations) {
        const Complex rot = std::polar(1.0, -phi);
        auto c = detail::cayley_quotient(id + rot * m, id - rot * m, detail::kCayleyMinRcond);
        if (c) return detail::phases_from_cayley(std::move(*c), phi);
    }
    throw NumericalError("unitary_eigenphases: no well-conditioned Cayley rotation", n);
}

/// Eigenphases of D Q D^dag Q^dag for unitary Q and diagonal unitary D,
/// without forming the product: I +- W = (Q +- D Q D^dag) Q^dag, so the
/// Cayley transform is i (Q - r DQD^dag)(Q + r DQD^dag)^{-1}.
inline RealVector commutator_eigenphases(const ComplexDense& q, const ComplexVector& d) {
    detail::require_square(q, "commutator_eigenphases");
    const Eigen::Index n = q.rows();
    if (d.size() != n) throw InvalidInput("commutator_eigenphases: phase vector size mismatch");
    const ComplexDense dq = d.asDiagonal() * q * d.conjugate().asDiagonal();
    for (double phi : detail::kCayleyRotations) {
        const Complex rot = std::polar(1.0, -phi);
        auto c = detail::cayley_quotient(q + rot * dq, q - rot * dq, detail::kCayleyMinRcond);
        if (c) return detail::phases_from_cayley(std::move(*c), phi);
    }
    throw NumericalError("commutator_eigenphases: no well-conditioned Cayley rotation", n);
}

inline LogTraceResult unitary_log_trace(const ComplexDense& m, double unimodular_tol = 1e-6,
                                        UnitaryLogMethod method = UnitaryLogMethod::GeneralEig) {
    if (method == UnitaryLogMethod::GeneralEig) return unitary_log_trace_general(m, unimodular_tol);
    detail::require_square(m, "unitary_log_trace");
    LogTraceResult r;
    // |lambda|^2 - 1 lies in the spectrum range of M^dag M - I.
    r.max_modulus_deviation = detail::unitarity_defect(m);
    if (r.max_modulus_deviation > unimodular_tol) {
        throw InvalidInput("unitary_log_trace: matrix is not unitary, ||M^dag M - I|| ~ " +
                           std::to_string(r.max_modulus_deviation));
    }
    r.value = unitary_eigenphases(m).sum() / (4.0 * std::numbers::pi);
    return r;
}

}  // namespace nhtop
