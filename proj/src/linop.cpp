// SPDX-License-Identifier: Apache-2.0
#include "pstab/linop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace pstab {

void ModeParams::validate() const
{
    if (!(nu > 0.0 && nu <= 1.0))
        throw std::invalid_argument("nu must lie in (0, 1], got " + std::to_string(nu));
    if (k == 0)
        throw std::invalid_argument("|k| >= 1 required: the k = 0 mode carries no shear "
                                    "coupling and is handled by the DNS mean-flow solve");
}

Discretization Discretization::make(int n_intervals)
{
    auto grid = std::make_shared<const ChebyshevGrid>(make_grid(n_intervals));
    auto ops = std::make_shared<const DiffOp>(diff_ops(*grid));
    return {std::move(grid), std::move(ops)};
}

cplx ModeOperator::inner(const ComplexVector& a, const ComplexVector& b) const
{
    const auto w = weight_sqrt_.array().square();
    return (w * a.array() * b.array().conjugate()).sum();
}

double ModeOperator::norm(const ComplexVector& v) const
{
    return std::sqrt((weight_sqrt_.array().square() * v.array().abs2()).sum());
}

ModeOperator assemble(const Discretization& disc, ModeParams params, Assembly assembly)
{
    params.validate();
    const auto& grid = *disc.grid;
    const int n = grid.n_intervals() - 1;
    const double k = params.k;

    HelmholtzSolver helmholtz(grid, *disc.ops, k * k);
    const RealMatrix& h = helmholtz.interior_matrix();

    ModeOperator op;
    op.params_ = params;
    op.assembly_ = assembly;
    op.disc_ = disc;
    op.matrix_ = (-params.nu * h).cast<cplx>();

    if (assembly == Assembly::Full) {
        const RealVector y = grid.interior_nodes();
        for (int j = 0; j < n; ++j)
            op.matrix_(j, j) += cplx(0.0, k * (1.0 - y[j] * y[j]));
        // Nonlocal block: one factorisation of H, solved against the identity.
        const RealMatrix h_inv = h.partialPivLu().solve(RealMatrix::Identity(n, n));
        op.matrix_ += cplx(0.0, 2.0 * k) * h_inv.cast<cplx>();
    }

    op.weight_sqrt_ = grid.interior_weights().array().sqrt().matrix();
    const RealVector inv = op.weight_sqrt_.cwiseInverse();
    op.symmetrized_ = op.weight_sqrt_.asDiagonal() * op.matrix_ * inv.asDiagonal();
    return op;
}

ResolventSolution resolvent_solve(const ModeOperator& op, double mu, const ComplexVector& forcing)
{
    if (forcing.size() != op.dim())
        throw std::invalid_argument("resolvent_solve: forcing must hold interior values");
    if (!forcing.allFinite())
        throw std::invalid_argument("resolvent_solve: forcing is not finite");
    ComplexMatrix a = op.matrix();
    a.diagonal().array() -= cplx(0.0, mu);
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    ResolventSolution out;
    out.w = lu.solve(forcing);
    out.rcond = lu.rcond();
    out.near_singular = !(out.rcond > 1e-14) || !out.w.allFinite();
    return out;
}

double sigma_min(const ModeOperator& op, double mu)
{
    ComplexMatrix a = op.symmetrized();
    a.diagonal().array() -= cplx(0.0, mu);
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    return svd.singularValues().minCoeff();
}

std::size_t ResolventReport::argmax_resolvent() const
{
    return static_cast<std::size_t>(
        std::max_element(resolvent_norm.begin(), resolvent_norm.end()) - resolvent_norm.begin());
}

double ResolventReport::max_resolvent_norm() const
{
    return resolvent_norm.empty() ? 0.0 : resolvent_norm[argmax_resolvent()];
}

double ResolventReport::max_scaled_norm() const
{
    return scaled_norm.empty() ? 0.0 : *std::max_element(scaled_norm.begin(), scaled_norm.end());
}

bool ResolventReport::any_flagged() const
{
    return std::any_of(flagged.begin(), flagged.end(), [](bool f) { return f; });
}

ResolventReport resolvent_sweep(const ModeOperator& op, double mu_min, double mu_max, int n_mu)
{
    if (!(mu_min < mu_max))
        throw std::invalid_argument("resolvent_sweep: mu_min < mu_max required");
    if (n_mu < 3)
        throw std::invalid_argument("resolvent_sweep: n_mu >= 3 required");

    const auto& p = op.params();
    const double scale = std::sqrt(p.nu * std::abs(p.k));
    // Round-off floor for sigma_min relative to the operator scale.
    const double floor = 1e-14 * op.symmetrized().cwiseAbs().rowwise().sum().maxCoeff();

    ResolventReport rep;
    rep.params = p;
    rep.mu_grid.resize(n_mu);
    rep.sigma_min.resize(n_mu);
    rep.resolvent_norm.resize(n_mu);
    rep.scaled_norm.resize(n_mu);
    rep.flagged.assign(n_mu, false);
    for (int i = 0; i < n_mu; ++i) {
        const double mu = mu_min + (mu_max - mu_min) * i / (n_mu - 1);
        double s = 0.0;
        bool bad = false;
        try {
            s = sigma_min(op, mu);
        } catch (const std::exception&) {
            bad = true;
        }
        bad = bad || !std::isfinite(s) || s <= floor;
        rep.mu_grid[i] = mu;
        rep.sigma_min[i] = s;
        rep.resolvent_norm[i] = s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
        rep.scaled_norm[i] = rep.resolvent_norm[i] * scale;
        rep.flagged[i] = bad;
    }
    return rep;
}

}  // namespace pstab
