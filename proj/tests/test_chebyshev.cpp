// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pstab/chebyshev.hpp"

using namespace pstab;
using std::numbers::pi;

TEST_CASE("nodes are decreasing, exactly antisymmetric and hit the ends")
{
    for (int n : {1, 2, 5, 16, 64}) {
        const RealVector y = chebyshev_nodes(n);
        CHECK(y[0] == 1.0);
        CHECK(y[n] == -1.0);
        for (int j = 0; j <= n; ++j) {
            CHECK(y[j] == -y[n - j]);
            if (j > 0)
                CHECK(y[j] < y[j - 1]);
        }
    }
    CHECK(chebyshev_nodes(2)[1] == 0.0);
    CHECK_THROWS_AS(chebyshev_nodes(0), std::invalid_argument);
}

TEST_CASE("grids need at least four intervals and an ordered interval")
{
    CHECK_THROWS_AS(make_grid(3), std::invalid_argument);
    CHECK_NOTHROW(make_grid(4));
    CHECK_THROWS_AS(make_grid_on(8, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid_on(8, 0.5, -0.5), std::invalid_argument);
}

TEST_CASE("Clenshaw-Curtis integrates polynomials up to degree n exactly")
{
    for (int n : {4, 7, 16, 33}) {
        const auto g = make_grid(n);
        for (int m = 0; m <= n; ++m) {
            const double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
            const double q = g.quad_weights().dot(g.nodes().array().pow(m).matrix());
            CHECK(q == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("mapped grid integrates and keeps exact endpoints")
{
    const auto g = make_grid_on(24, -0.3, 0.7);
    CHECK(g.nodes()[0] == 0.7);
    CHECK(g.nodes()[24] == -0.3);
    // int_{-0.3}^{0.7} exp(y) dy
    const double exact = std::exp(0.7) - std::exp(-0.3);
    CHECK(g.quad_weights().dot(g.nodes().array().exp().matrix()) ==
          doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("differentiation matrices are exact on polynomials and annihilate constants")
{
    const int n = 12;
    const auto g = make_grid_on(n, -2.0, 1.0);
    const auto d = diff_ops(g);
    const RealVector y = g.nodes();
    const RealVector p = (y.array().pow(5) - 3.0 * y.array().square() + 1.0).matrix();
    const RealVector dp = (5.0 * y.array().pow(4) - 6.0 * y.array()).matrix();
    const RealVector d2p = (20.0 * y.array().pow(3) - 6.0).matrix();
    CHECK((d.d1 * p - dp).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((d.d2 * p - d2p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.d1 * RealVector::Ones(n + 1)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((d.d2 * RealVector::Ones(n + 1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Helmholtz solve recovers a manufactured sine profile")
{
    const auto g = make_grid(48);
    const auto ops = diff_ops(g);
    for (int k : {1, 2, 5}) {
        const double c = -(pi * pi / 4.0 + k * k);
        ComplexVector rhs(47);
        ComplexVector exact(49);
        for (int j = 0; j <= 48; ++j)
            exact[j] = cplx(0.0, 1.0) * std::sin(pi * (g.nodes()[j] + 1.0) / 2.0);
        for (int j = 1; j < 48; ++j)
            rhs[j - 1] = c * exact[j];
        const ComplexVector phi = helmholtz_solve(g, ops, k, rhs);
        CHECK(phi[0] == cplx(0.0));
        CHECK(phi[48] == cplx(0.0));
        CHECK((phi - exact).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(helmholtz_solve(g, ops, 0, ComplexVector::Zero(47)), std::invalid_argument);
    CHECK_THROWS_AS(helmholtz_solve(g, ops, 1, ComplexVector::Zero(10)), std::invalid_argument);
}

TEST_CASE("inner product is linear in the first slot and matches the norm")
{
    const auto g = make_grid(16);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    ComplexVector a(17), b(17);
    for (int j = 0; j < 17; ++j) {
        a[j] = {n01(rng), n01(rng)};
        b[j] = {n01(rng), n01(rng)};
    }
    const cplx c(0.3, -1.7);
    CHECK(std::abs(l2_inner(g, c * a, b) - c * l2_inner(g, a, b)) < 1e-13);
    CHECK(std::abs(l2_inner(g, a, c * b) - std::conj(c) * l2_inner(g, a, b)) < 1e-13);
    CHECK(l2_inner(g, a, a).real() == doctest::Approx(std::pow(l2_norm(g, a), 2)).epsilon(1e-14));
    // int (1 - y^2)^2 = 16/15
    const RealVector f = (1.0 - g.nodes().array().square()).matrix();
    CHECK(l2_norm(g, f) == doctest::Approx(std::sqrt(16.0 / 15.0)).epsilon(1e-14));
}

TEST_CASE("barycentric interpolation reproduces polynomials off the grid")
{
    const auto g = make_grid_on(10, 0.0, 2.0);
    ComplexVector v(11);
    for (int j = 0; j <= 10; ++j) {
        const double y = g.nodes()[j];
        v[j] = cplx(y * y * y - y, 2.0 * y);
    }
    for (double y : {0.0, 0.123, 1.0, 1.77, 2.0}) {
        const cplx p = interpolate(g, v, y);
        CHECK(std::abs(p - cplx(y * y * y - y, 2.0 * y)) < 1e-13);
    }
    const auto fine = make_grid_on(40, 0.0, 2.0);
    const ComplexVector r = resample(g, v, fine);
    CHECK(std::abs(r[7] - cplx(std::pow(fine.nodes()[7], 3) - fine.nodes()[7], 2.0 * fine.nodes()[7])) < 1e-13);
}
