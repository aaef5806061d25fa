#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "nhtop/diagnostics.hpp"
#include "test_util.hpp"

using namespace nhtop;
using nhtop::testing::random_complex;
using nhtop::testing::random_unitary;

namespace {

Model2D make(ChainParams x, ChainParams y, int Lx, int Ly) {
    Model2D m;
    m.x = x;
    m.y = y;
    m.Lx = Lx;
    m.Ly = Ly;
    return m;
}

Model2D fig3(double vx, int L) { return make({1.0, vx, 1.5}, {0.0, 6.0 * vx, 9.0}, L, L); }

Model2D hermitian_topological(int L) { return make({0.2, 1.0, 0.0}, {0.2, 1.0, 0.0}, L, L); }

// Identical Hermitian chains give exact bulk zeros eps_x = -eps_y in the tensor
// sum; these pairs keep the |eps_x| and |eps_y| bands apart.
Model2D hermitian_trivial_gapped(int L) { return make({1.0, 0.2, 0.0}, {3.0, 0.5, 0.0}, L, L); }
Model2D hermitian_topological_gapped(int L) { return make({0.2, 1.0, 0.0}, {0.5, 3.0, 0.0}, L, L); }

}  // namespace

TEST_CASE("min_abs_energy closed forms") {
    CHECK(min_abs_energy(real_h1d({1, 0, 0}, 10)) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(min_abs_energy(real_h1d({0, 1, 0}, 10)) < 1e-14);
}

TEST_CASE("Min|E| vanishes in the topological phase at 200 cells (separable path)") {
    const Model2D m = make({1.0, 1.5, 1.5}, {0.0, 9.0, 9.0}, 200, 200);
    CHECK(min_abs_energy_separable(real_h1d(m.x, 200), real_h1d(m.y, 200)) < 1e-6);
}

TEST_CASE("separable fast paths agree with the dense 2D computation") {
    for (int L : {2, 4, 6}) {
        const Model2D m = make({1.0, 0.8, 0.3}, {0.5, 1.3, 0.4}, L, L);
        const ComplexDense hx = real_h1d(m.x, L);
        const ComplexDense hy = real_h1d(m.y, L);
        const ComplexDense h = real_h2d(m);
        CHECK(std::abs(min_abs_energy(h) - min_abs_energy_separable(hx, hy)) < 1e-8);

        const EigResult ex = eig(hx);
        const EigResult ey = eig(hy);
        // The dense eigenbasis of the product spectrum is the Kronecker product
        // of the factor bases (spectrum is non-degenerate for these parameters).
        EigResult e2;
        e2.vectors = kron(ex.vectors, ey.vectors);
        e2.values = testing::pairwise_sums(ex.values, ey.values);
        const EigResult dense = eig(h);
        CHECK(std::abs(wipr(e2, L, L) - wipr_separable(ex, ey, L, L)) < 1e-12);
        CHECK(std::abs(wipr(dense, L, L) - wipr_separable(ex, ey, L, L)) < 1e-8);
        CHECK(std::abs(wipr(dense, L, L, WiprCoordinates::Cell) -
                       wipr_separable(ex, ey, L, L, WiprCoordinates::Cell)) < 1e-8);
    }
}

TEST_CASE("min_singular") {
    CHECK(min_singular(random_unitary(12, 3)) == Catch::Approx(1.0).epsilon(1e-12));

    const double s14 = min_singular(real_h2d(fig3(1.5, 14)));
    const double s20 = min_singular(real_h2d(fig3(1.5, 20)));
    CHECK(s20 < 1e-3);
    CHECK(s20 < s14);

    std::vector<double> trivial;
    for (int L : {10, 14, 20}) trivial.push_back(min_singular(real_h2d(fig3(0.3, L))));
    for (double s : trivial) CHECK(s > 1e-2);
    const auto [lo, hi] = std::minmax_element(trivial.begin(), trivial.end());
    CHECK(*hi / *lo < 1.5);
}

TEST_CASE("min_singular equals the smallest non-negative eigenvalue of the doubled matrix") {
    for (int L : {2, 4, 8}) {
        const ComplexDense h = real_h2d(fig3(1.2, L));
        const Eigen::Index n = h.rows();
        ComplexDense d = ComplexDense::Zero(2 * n, 2 * n);
        d.topRightCorner(n, n) = h;
        d.bottomLeftCorner(n, n) = h.adjoint();
        Eigen::SelfAdjointEigenSolver<ComplexDense> es(d, Eigen::EigenvaluesOnly);
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            if (es.eigenvalues()(i) >= 0.0) best = std::min(best, es.eigenvalues()(i));
        }
        CHECK(std::abs(min_singular(h) - best) < 1e-8);
    }
}

TEST_CASE("Weyl stability of Min[s] under random perturbations") {
    const ComplexDense h = real_h2d(fig3(1.5, 6));
    const double base = min_singular(h);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double scale = 1e-3 * std::pow(10.0, static_cast<double>(seed % 4));
        const ComplexDense dh = scale * random_complex(h.rows(), h.cols(), 500 + seed);
        CHECK(std::abs(min_singular(h + dh) - base) <= spectral_norm(dh) * (1.0 + 1e-12));
    }
}

TEST_CASE("zero_mode_count") {
    CHECK(zero_mode_count(real_h2d(hermitian_trivial_gapped(6))).count == 0);
    // Mirrored bands of identical chains close the 2D gap in the bulk.
    CHECK(zero_mode_count(real_h2d(make({1, 0.2, 0}, {1, 0.2, 0}, 6, 6))).count == 12);

    // Two corner modes per unit of winding.
    const ZeroModeCount z = zero_mode_count(real_h2d(fig3(1.5, 20)));
    CHECK(z.count == 2);
    CHECK_FALSE(z.ambiguous);

    RealVector s(5);
    s << 3.0, 0.3, 2e-7, 5e-12, 1e-13;
    const ZeroModeCount a = zero_mode_count(s);
    CHECK(a.count == 3);
    CHECK(a.cluster_count == 3);
    CHECK_FALSE(a.ambiguous);

    // A candidate just under the threshold with no two-decade gap is flagged.
    s << 3.0, 0.3, 2e-6, 9e-7, 1e-13;
    const ZeroModeCount b = zero_mode_count(s);
    CHECK(b.threshold_count == 2);
    CHECK(b.ambiguous);

    ZeroModePolicy absolute;
    absolute.kind = ZeroModePolicy::Kind::Absolute;
    absolute.absolute = 1e-3;
    CHECK(zero_mode_count(s, absolute).count == 3);
}

TEST_CASE("corner state of the Hermitian topological model") {
    const SvdTriple t = svd(real_h2d(hermitian_topological(20)));
    const CornerState cs = singular_corner_state(t, 20, 20, 0);
    CHECK(cs.field.sum() == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(cs.max_corner_block_mass(5) >= 0.9);

    // Largest singular value: a bulk state.
    const CornerState bulk = singular_corner_state(t, 20, 20, 4 * 20 * 20 - 1);
    CHECK(bulk.max_corner_block_mass(5) < 0.25);
}

TEST_CASE("corner state at fig3 parameters is localized in one quadrant") {
    const SvdTriple t = svd(real_h2d(fig3(1.5, 20)));
    const CornerState cs = singular_corner_state(t, 20, 20, 0);
    CHECK(cs.max_quadrant_mass() >= 0.9);
    CHECK_THROWS_AS(singular_corner_state(t, 20, 20, 1600), InvalidInput);
}

TEST_CASE("wipr of delta states") {
    const int L = 60;
    EigResult e;
    e.values = ComplexVector::Zero(1);
    e.vectors = ComplexDense::Zero(4 * L * L, 1);

    // Site convention: centre site (L, L) in 1-based site coordinates.
    e.vectors(Eigen::Index{L - 1} * 2 * L + (L - 1), 0) = 1.0;
    CHECK(wipr(e, L, L) == 0.0);

    // Cell convention: corner cell (1, 1), centre (L/2, L/2).
    e.vectors.setZero();
    e.vectors(site_index(0, 0, 0, 0, L), 0) = 1.0;
    CHECK(wipr(e, L, L, WiprCoordinates::Cell) == Catch::Approx(2.848e-3).epsilon(1e-3));
    CHECK(wipr(e, L, L, WiprCoordinates::Cell) ==
          Catch::Approx(std::hypot(29.0, 29.0) / (4.0 * 60 * 60)).epsilon(1e-14));

    e.vectors(site_index(0, 0, 0, 0, L), 0) = 2.0;
    CHECK_THROWS_AS(wipr(e, L, L), InvalidInput);
}

TEST_CASE("wipr drops under strong chiral disorder at fig2b parameters") {
    const int L = 60;
    const Model2D clean = make({1.0, -1.5, 1.5}, {0.0, -9.0, 9.0}, L, L);
    const double w0 = wipr_separable(eig(real_h1d(clean.x, L)), eig(real_h1d(clean.y, L)), L, L);
    Model2D dis = clean;
    dis.disorder = DisorderSpec{DisorderKind::ChiralPreserving, 0.4, 42};
    const SeparableFactors f = separable_factors(dis);
    const double w4 = wipr_separable(eig(f.hx), eig(f.hy), L, L);
    CHECK(w4 < 0.5 * w0);
}

TEST_CASE("condition number") {
    const ComplexDense herm = real_h2d(make({0.3, 1.0, 0.0}, {0.7, 0.4, 0.0}, 3, 3));
    CHECK(condition_number(eig(herm)).kappa == Catch::Approx(1.0).margin(1e-6));

    const Model2D m = make({1.0, 0.8, 0.3}, {0.5, 1.3, 0.4}, 4, 4);
    const EigResult ex = eig(real_h1d(m.x, 4));
    const EigResult ey = eig(real_h1d(m.y, 4));
    EigResult prod;
    prod.vectors = kron(ex.vectors, ey.vectors);
    const double dense = condition_number(prod).kappa;
    CHECK(condition_number_separable(ex, ey).kappa == Catch::Approx(dense).epsilon(1e-8));
    // Non-degenerate product spectrum: the dense eigenbasis matches up to column phases.
    CHECK(condition_number(eig(real_h2d(m))).kappa == Catch::Approx(dense).epsilon(1e-6));
}

TEST_CASE("condition number grows exponentially with chain length for non-reciprocal hopping") {
    const ChainParams px{1.0, -1.5, 1.5};
    const double k10 = condition_number(eig(real_h1d(px, 10))).kappa;
    const double k20 = condition_number(eig(real_h1d(px, 20))).kappa;
    CHECK(k10 > 1e2);
    CHECK(k20 > 1e2 * k10);
}

TEST_CASE("linear_fit") {
    const LinearFit f = linear_fit({1, 2, 3, 4}, {1, 3, 5, 7});
    CHECK(f.slope == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == Catch::Approx(-1.0).epsilon(1e-14));
    CHECK(f.r2 == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(std::isnan(linear_fit({1, 2}, {0, 1}).r2));
}

TEST_CASE("scaling_min_singular") {
    const auto trivial = scaling_min_singular([](int L) { return real_h2d(fig3(0.3, L)); }, {6, 8, 10, 12});
    CHECK(std::abs(trivial.fit_slope) < 0.05);

    const auto herm =
        scaling_min_singular([](int L) { return real_h2d(hermitian_topological_gapped(L)); }, {3, 4, 5, 6});
    CHECK(herm.fit_slope < 0.0);

    const auto topo = scaling_min_singular([](int L) { return real_h2d(fig3(1.5, L)); }, {8, 10, 12, 14});
    CHECK(topo.fit_slope < 0.0);
    CHECK(topo.excluded.empty());

    CHECK_THROWS_AS(scaling_min_singular([](int L) { return real_h2d(fig3(1.5, L)); }, {4, 6}), InvalidInput);
}

TEST_CASE("scaling excludes values below the precision floor") {
    // Corner splitting ~ (w/v)^L = 0.2^L is far below 1e-14 by L = 24.
    const auto s =
        scaling_min_singular([](int L) { return real_h2d(hermitian_topological_gapped(L)); }, {3, 4, 24});
    CHECK(s.excluded == std::vector<int>{24});
    CHECK(s.min_s.size() == 3);
}
