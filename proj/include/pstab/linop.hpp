// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "pstab/chebyshev.hpp"

namespace pstab {

/// Viscosity and streamwise wavenumber of one Fourier mode.
struct ModeParams {
    double nu = 1.0;
    int k = 1;

    /// Throws std::invalid_argument unless nu in (0, 1] and |k| >= 1.
    void validate() const;
};

enum class Assembly {
    Full,           ///< diffusion + shear advection + nonlocal stream-function term
    DiffusionOnly,  ///< diagnostic: -nu (d2 - k^2) only
};

/// Grid and differentiation matrices shared by every operator built on them.
struct Discretization {
    std::shared_ptr<const ChebyshevGrid> grid;
    std::shared_ptr<const DiffOp> ops;

    static Discretization make(int n_intervals);
};

/// Linearised Poiseuille operator for one wavenumber,
///
///     M = -nu (d2 - k^2) + i k (1 - y^2) + 2 i k (d2 - k^2)^{-1},
///
/// acting on vorticity values at the interior nodes (w = 0 at both walls).
/// The L2 norm of a profile is the quadrature norm, so the weighted matrix
/// S = W^{1/2} M W^{-1/2} carries every norm-based quantity (singular values,
/// semigroup norms) in the plain Euclidean 2-norm.
class ModeOperator {
public:
    const ModeParams& params() const { return params_; }
    Assembly assembly() const { return assembly_; }
    const ComplexMatrix& matrix() const { return matrix_; }
    const ComplexMatrix& symmetrized() const { return symmetrized_; }
    const RealVector& weight_sqrt() const { return weight_sqrt_; }
    const ChebyshevGrid& grid() const { return *disc_.grid; }
    const DiffOp& ops() const { return *disc_.ops; }
    const Discretization& discretization() const { return disc_; }
    Eigen::Index dim() const { return matrix_.rows(); }

    /// <a, b>_W over the interior nodes (same convention as l2_inner).
    cplx inner(const ComplexVector& a, const ComplexVector& b) const;
    double norm(const ComplexVector& v) const;

private:
    friend ModeOperator assemble(const Discretization&, ModeParams, Assembly);
    ModeParams params_;
    Assembly assembly_ = Assembly::Full;
    Discretization disc_;
    ComplexMatrix matrix_;
    ComplexMatrix symmetrized_;
    RealVector weight_sqrt_;
};

/// Throws std::invalid_argument for k == 0 or nu outside (0, 1].
ModeOperator assemble(const Discretization& disc, ModeParams params,
                      Assembly assembly = Assembly::Full);

/// Shifts use mu = k * lambda throughout: (M - i mu) w = F is the
/// Orr-Sommerfeld resolvent problem -nu(w'' - k^2 w) + ik[(1-y^2-lambda) w + 2 phi] = F.
inline double mu_from_lambda(int k, double lambda) { return k * lambda; }
inline double lambda_from_mu(int k, double mu) { return mu / k; }

struct ResolventSolution {
    ComplexVector w;        ///< interior values
    double rcond = 0.0;     ///< reciprocal condition estimate of (M - i mu)
    bool near_singular = false;
};

/// Solves (M - i mu) w = forcing. A condition estimate above 1e14 is
/// reported through near_singular; the solve is still returned.
ResolventSolution resolvent_solve(const ModeOperator& op, double mu, const ComplexVector& forcing);

/// Smallest singular value of S - i mu, i.e. 1 / ||(M - i mu)^{-1}||_{L2->L2}.
double sigma_min(const ModeOperator& op, double mu);

struct ResolventReport {
    ModeParams params;
    std::vector<double> mu_grid;
    std::vector<double> sigma_min;
    std::vector<double> resolvent_norm;
    std::vector<double> scaled_norm;  ///< resolvent_norm * nu^{1/2} |k|^{1/2}
    std::vector<bool> flagged;        ///< sigma_min at round-off level

    std::size_t argmax_resolvent() const;
    double max_resolvent_norm() const;
    double max_scaled_norm() const;
    bool any_flagged() const;
};

/// Uniform sweep over [mu_min, mu_max] with n_mu >= 3 points (inclusive).
ResolventReport resolvent_sweep(const ModeOperator& op, double mu_min, double mu_max, int n_mu);

}  // namespace pstab
