#pragma once

// Static 2D non-Hermitian SSH model: Bloch blocks, open-boundary real-space
// matrices and the two disorder ensembles.
//
// Basis convention (shared by every module): a 1D chain of L cells is ordered
// (A_0, B_0, A_1, B_1, ...). The 2D basis is the lexicographic tensor order
// (x-cell, x-sublattice, y-cell, y-sublattice), i.e. index
//   ((2*ix + sx) * 2*Ly) + 2*iy + sy.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "nhtop/numerics.hpp"
#include "nhtop/rng.hpp"

namespace nhtop {

enum class Axis { X = 0, Y = 1 };

/// One direction's hopping set: intra-cell w, inter-cell v, asymmetry gamma.
struct ChainParams {
    double w = 0.0;
    double v = 0.0;
    double gamma = 0.0;

    void validate() const {
        if (!std::isfinite(w) || !std::isfinite(v) || !std::isfinite(gamma)) {
            throw InvalidInput("ChainParams: all fields must be finite");
        }
    }
    ChainParams with_v(double new_v) const { return {w, new_v, gamma}; }
};

enum class DisorderKind { ChiralPreserving, FullyRandom };

/// Which A_i -> B_j cell pairs the chiral-preserving ensemble populates.
enum class DisorderRange { Dense, NearestNeighbor };

struct DisorderSpec {
    DisorderKind kind = DisorderKind::ChiralPreserving;
    double strength = 0.0;
    std::uint64_t seed = 0;
    DisorderRange range = DisorderRange::Dense;
    bool reciprocal = false;  // force kappa_ji = kappa_ij

    void validate() const {
        if (!(strength >= 0.0) || !std::isfinite(strength)) {
            throw InvalidInput("DisorderSpec: strength must be finite and non-negative");
        }
    }
};

inline constexpr Eigen::Index kDefaultMaxDim = 8192;

struct Model2D {
    ChainParams x;
    ChainParams y;
    int Lx = 1;
    int Ly = 1;
    std::optional<DisorderSpec> disorder;
    Eigen::Index max_dim = kDefaultMaxDim;

    Eigen::Index dimension() const { return Eigen::Index{4} * Lx * Ly; }

    void validate() const {
        x.validate();
        y.validate();
        if (Lx < 1 || Ly < 1) throw InvalidInput("Model2D: Lx and Ly must be >= 1");
        if (disorder) disorder->validate();
    }
};

inline Eigen::Index site_index(int ix, int sx, int iy, int sy, int Ly) {
    return (Eigen::Index{2} * ix + sx) * (Eigen::Index{2} * Ly) + 2 * iy + sy;
}

inline ComplexDense pauli_x() {
    ComplexDense s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

inline ComplexDense pauli_y() {
    ComplexDense s(2, 2);
    s << 0, Complex(0, -1), Complex(0, 1), 0;
    return s;
}

/// (w + v cos k) sigma_x + (v sin k + i gamma/2) sigma_y.
inline ComplexDense bloch_h1d(const ChainParams& p, double k) {
    const Complex hx = p.w + p.v * std::cos(k);
    const Complex hy = Complex(p.v * std::sin(k), p.gamma / 2.0);
    return hx * pauli_x() + hy * pauli_y();
}

inline ComplexDense bloch_h2d(const ChainParams& px, const ChainParams& py, double kx, double ky) {
    return kron_sum(bloch_h1d(px, kx), bloch_h1d(py, ky));
}

/// Open chain of L cells. H[A_i, B_i] = w + gamma/2, H[B_i, A_i] = w - gamma/2,
/// H[B_i, A_{i+1}] = H[A_{i+1}, B_i] = v.
inline ComplexDense real_h1d(const ChainParams& p, int L) {
    if (L < 1) throw InvalidInput("real_h1d: L must be >= 1");
    const Eigen::Index n = Eigen::Index{2} * L;
    ComplexDense h = ComplexDense::Zero(n, n);
    for (int i = 0; i < L; ++i) {
        const Eigen::Index a = 2 * i;
        const Eigen::Index b = a + 1;
        h(a, b) = p.w + p.gamma / 2.0;
        h(b, a) = p.w - p.gamma / 2.0;
        if (i + 1 < L) {
            h(b, b + 1) = p.v;
            h(b + 1, b) = p.v;
        }
    }
    return h;
}

inline void check_dimension_cap(Eigen::Index dim, Eigen::Index cap) {
    if (dim > cap) {
        throw ResourceLimit("matrix dimension " + std::to_string(dim) + " exceeds cap " +
                            std::to_string(cap));
    }
}

/// Clean real-space Hamiltonian Hx (x) I + I (x) Hy; ignores m.disorder.
inline ComplexDense real_h2d(const Model2D& m) {
    m.validate();
    check_dimension_cap(m.dimension(), m.max_dim);
    return kron_sum(real_h1d(m.x, m.Lx), real_h1d(m.y, m.Ly));
}

/// d * (kappa_ij on A_i -> B_j, kappa_ji on B_j -> A_i), kappa ~ U[-1/2, 1/2].
inline ComplexDense chiral_disorder_1d(int L, double d, std::uint64_t seed,
                                       DisorderRange range = DisorderRange::Dense,
                                       bool reciprocal = false) {
    if (L < 1) throw InvalidInput("chiral_disorder_1d: L must be >= 1");
    if (!(d >= 0.0)) throw InvalidInput("chiral_disorder_1d: d must be >= 0");
    const Eigen::Index n = Eigen::Index{2} * L;
    ComplexDense out = ComplexDense::Zero(n, n);
    if (d == 0.0) return out;
    Stream rng(seed);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            if (range == DisorderRange::NearestNeighbor && j != i && j != i - 1) continue;
            const double k_ij = rng.uniform(-0.5, 0.5);
            const double k_ji = reciprocal ? k_ij : rng.uniform(-0.5, 0.5);
            out(2 * i, 2 * j + 1) = d * k_ij;
            out(2 * j + 1, 2 * i) = d * k_ji;
        }
    }
    return out;
}

/// Dense real matrix with every entry ~ U[-d', d'].
inline ComplexDense random_disorder_1d(int L, double dprime, std::uint64_t seed) {
    if (L < 1) throw InvalidInput("random_disorder_1d: L must be >= 1");
    if (!(dprime >= 0.0)) throw InvalidInput("random_disorder_1d: d' must be >= 0");
    const Eigen::Index n = Eigen::Index{2} * L;
    ComplexDense out = ComplexDense::Zero(n, n);
    if (dprime == 0.0) return out;
    Stream rng(seed);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = rng.uniform(-dprime, dprime);
    }
    return out;
}

/// One axis' realization of `spec`; the x and y streams are children of spec.seed.
inline ComplexDense disorder_1d(const DisorderSpec& spec, int L, Axis axis) {
    const std::uint64_t seed = child_seed(spec.seed, static_cast<std::uint64_t>(axis));
    switch (spec.kind) {
        case DisorderKind::ChiralPreserving:
            return chiral_disorder_1d(L, spec.strength, seed, spec.range, spec.reciprocal);
        case DisorderKind::FullyRandom:
            return random_disorder_1d(L, spec.strength, seed);
    }
    throw InvalidInput("disorder_1d: unknown kind");
}

inline ComplexDense assemble_perturbed_2d(const Model2D& m, const ComplexDense& dx, const ComplexDense& dy) {
    const Eigen::Index nx = Eigen::Index{2} * m.Lx;
    const Eigen::Index ny = Eigen::Index{2} * m.Ly;
    if (dx.rows() != nx || dx.cols() != nx || dy.rows() != ny || dy.cols() != ny) {
        throw InvalidInput("assemble_perturbed_2d: disorder blocks must be 2Lx x 2Lx and 2Ly x 2Ly");
    }
    m.validate();
    check_dimension_cap(m.dimension(), m.max_dim);
    return kron_sum(real_h1d(m.x, m.Lx) + dx, real_h1d(m.y, m.Ly) + dy);
}

/// Perturbed 1D factors: the 2D matrix is kron_sum(hx, hy).
struct SeparableFactors {
    ComplexDense hx;
    ComplexDense hy;
};

inline SeparableFactors separable_factors(const Model2D& m) {
    m.validate();
    SeparableFactors f{real_h1d(m.x, m.Lx), real_h1d(m.y, m.Ly)};
    if (m.disorder) {
        f.hx += disorder_1d(*m.disorder, m.Lx, Axis::X);
        f.hy += disorder_1d(*m.disorder, m.Ly, Axis::Y);
    }
    return f;
}

/// Full real-space matrix including the model's disorder attachment.
inline ComplexDense hamiltonian(const Model2D& m) {
    m.validate();
    check_dimension_cap(m.dimension(), m.max_dim);
    const SeparableFactors f = separable_factors(m);
    return kron_sum(f.hx, f.hy);
}

/// Sublattice sign diag(+1, -1, +1, -1, ...) of an L-cell chain.
inline ComplexDense chiral_operator_1d(int L) {
    ComplexVector d(Eigen::Index{2} * L);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = (i % 2 == 0) ? 1.0 : -1.0;
    return d.asDiagonal();
}

inline ComplexDense chiral_operator_2d(int Lx, int Ly) {
    return kron(chiral_operator_1d(Lx), chiral_operator_1d(Ly));
}

}  // namespace nhtop
