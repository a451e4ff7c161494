// SPDX-License-Identifier: Apache-2.0
#include "pstab/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pstab {

RealVector chebyshev_nodes(int n_intervals)
{
    if (n_intervals < 1)
        throw std::invalid_argument("chebyshev_nodes: need at least one interval");
    const int n = n_intervals;
    RealVector y(n + 1);
    // sin form keeps the node set exactly symmetric about 0.
    for (int j = 0; j <= n; ++j)
        y[j] = std::sin(std::numbers::pi * (n - 2.0 * j) / (2.0 * n));
    return y;
}

RealVector clenshaw_curtis_weights(int n_intervals)
{
    const int n = n_intervals;
    if (n < 1)
        throw std::invalid_argument("clenshaw_curtis_weights: need at least one interval");
    RealVector w(n + 1);
    const double end = (n % 2 == 0) ? 1.0 / (double(n) * n - 1.0) : 1.0 / (double(n) * n);
    w[0] = w[n] = end;
    for (int j = 1; j <= n / 2; ++j) {
        const double theta = std::numbers::pi * j / n;
        double v = 1.0;
        if (n % 2 == 0) {
            for (int m = 1; m < n / 2; ++m)
                v -= 2.0 * std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
            v -= std::cos(n * theta) / (double(n) * n - 1.0);
        } else {
            for (int m = 1; m <= (n - 1) / 2; ++m)
                v -= 2.0 * std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
        }
        w[j] = w[n - j] = 2.0 * v / n;
    }
    return w;
}

ChebyshevGrid make_grid(int n_intervals) { return make_grid_on(n_intervals, -1.0, 1.0); }

ChebyshevGrid make_grid_on(int n_intervals, double a, double b)
{
    if (n_intervals < 4)
        throw std::invalid_argument("make_grid: n_intervals must be >= 4, got " +
                                    std::to_string(n_intervals));
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("make_grid: interval must satisfy a < b");
    ChebyshevGrid g;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    g.nodes_ = chebyshev_nodes(n_intervals);
    g.weights_ = clenshaw_curtis_weights(n_intervals) * half;
    if (a != -1.0 || b != 1.0) {
        g.nodes_ = (mid + half * g.nodes_.array()).matrix();
        g.nodes_[0] = b;
        g.nodes_[n_intervals] = a;
    }
    g.lower_ = a;
    g.upper_ = b;
    return g;
}

DiffOp diff_ops(const ChebyshevGrid& grid)
{
    const int n = grid.n_intervals();
    const double scale = 2.0 / (grid.upper() - grid.lower());
    RealMatrix d1 = RealMatrix::Zero(n + 1, n + 1);
    auto c = [n](int j) { return (j == 0 || j == n) ? 2.0 : 1.0; };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == j)
                continue;
            // x_i - x_j through the product formula avoids cancellation.
            const double diff = 2.0 * std::sin((i + j) * std::numbers::pi / (2.0 * n)) *
                                std::sin((j - i) * std::numbers::pi / (2.0 * n));
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            d1(i, j) = c(i) / c(j) * sign / diff;
        }
        d1(i, i) = 0.0;
        d1(i, i) = -d1.row(i).sum();
    }
    d1 *= scale;

    RealMatrix d2 = d1 * d1;
    for (int i = 0; i <= n; ++i) {
        d2(i, i) = 0.0;
        d2(i, i) = -d2.row(i).sum();
    }
    return {std::move(d1), std::move(d2)};
}

HelmholtzSolver::HelmholtzSolver(const ChebyshevGrid& grid, const DiffOp& ops, double k_squared)
{
    const int n = grid.n_intervals();
    RealMatrix full = ops.d2;
    full.diagonal().array() -= k_squared;
    interior_ = full.block(1, 1, n - 1, n - 1);

    // Boundary rows become phi(a) = phi(b) = 0.
    full.row(0).setZero();
    full.row(n).setZero();
    full(0, 0) = 1.0;
    full(n, n) = 1.0;
    lu_.compute(full);
    if (!std::isfinite(lu_.rcond()) || lu_.rcond() < 1e-14)
        throw std::runtime_error("HelmholtzSolver: singular Dirichlet system");
}

ComplexVector HelmholtzSolver::solve(const ComplexVector& rhs_interior) const
{
    const auto n = lu_.rows() - 1;
    if (rhs_interior.size() != n - 1)
        throw std::invalid_argument("HelmholtzSolver::solve: rhs must hold interior values");
    RealMatrix rhs = RealMatrix::Zero(n + 1, 2);
    rhs.col(0).segment(1, n - 1) = rhs_interior.real();
    rhs.col(1).segment(1, n - 1) = rhs_interior.imag();
    const RealMatrix sol = lu_.solve(rhs);
    ComplexVector phi(n + 1);
    for (Eigen::Index j = 0; j <= n; ++j)
        phi[j] = cplx(sol(j, 0), sol(j, 1));
    phi[0] = 0.0;
    phi[n] = 0.0;
    return phi;
}

ComplexVector helmholtz_solve(const ChebyshevGrid& grid, const DiffOp& ops, int k,
                              const ComplexVector& rhs_interior)
{
    if (k == 0)
        throw std::invalid_argument("helmholtz_solve: |k| >= 1 required");
    return HelmholtzSolver(grid, ops, double(k) * k).solve(rhs_interior);
}

cplx l2_inner(const ChebyshevGrid& grid, const ComplexVector& a, const ComplexVector& b)
{
    if (a.size() != grid.n_points() || b.size() != grid.n_points())
        throw std::invalid_argument("l2_inner: profile size does not match grid");
    cplx s = 0.0;
    const auto& w = grid.quad_weights();
    for (Eigen::Index j = 0; j < a.size(); ++j)
        s += w[j] * a[j] * std::conj(b[j]);
    return s;
}

double l2_norm(const ChebyshevGrid& grid, const ComplexVector& profile)
{
    if (profile.size() != grid.n_points())
        throw std::invalid_argument("l2_norm: profile size does not match grid");
    return std::sqrt((grid.quad_weights().array() * profile.array().abs2()).sum());
}

double l2_norm(const ChebyshevGrid& grid, const RealVector& profile)
{
    if (profile.size() != grid.n_points())
        throw std::invalid_argument("l2_norm: profile size does not match grid");
    return std::sqrt((grid.quad_weights().array() * profile.array().square()).sum());
}

cplx interpolate(const ChebyshevGrid& grid, const ComplexVector& values, double y)
{
    const int n = grid.n_intervals();
    const auto& x = grid.nodes();
    cplx num = 0.0;
    double den = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double dx = y - x[j];
        if (dx == 0.0)
            return values[j];
        double wj = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n)
            wj *= 0.5;
        const double t = wj / dx;
        num += t * values[j];
        den += t;
    }
    return num / den;
}

ComplexVector resample(const ChebyshevGrid& from, const ComplexVector& values,
                       const ChebyshevGrid& to)
{
    ComplexVector out(to.n_points());
    for (int j = 0; j < to.n_points(); ++j)
        out[j] = interpolate(from, values, to.nodes()[j]);
    return out;
}

ComplexVector with_zero_ends(const ComplexVector& interior)
{
    ComplexVector full = ComplexVector::Zero(interior.size() + 2);
    full.segment(1, interior.size()) = interior;
    return full;
}

}  // namespace pstab
