// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace pstab {

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

/// Chebyshev-Gauss-Lobatto nodes cos(j*pi/n), j = 0..n, on [-1, 1].
/// Strictly decreasing and exactly antisymmetric (y_j == -y_{n-j}).
/// Accepts any n >= 1; grids used for solves go through make_grid.
RealVector chebyshev_nodes(int n_intervals);

/// Clenshaw-Curtis weights on the Chebyshev-Gauss-Lobatto nodes of [-1, 1].
RealVector clenshaw_curtis_weights(int n_intervals);

/// Collocation grid on an interval [a, b] (default [-1, 1]).
///
/// Node 0 is the upper end b and node n is the lower end a, the usual
/// ordering for y_j = cos(j*pi/n). Quadrature weights are Clenshaw-Curtis on
/// the same nodes, so a field's L2 norm is computed from its node values
/// without interpolation. Immutable after construction.
class ChebyshevGrid {
public:
    int n_intervals() const { return static_cast<int>(nodes_.size()) - 1; }
    int n_points() const { return static_cast<int>(nodes_.size()); }
    const RealVector& nodes() const { return nodes_; }
    const RealVector& quad_weights() const { return weights_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    /// Interior nodes 1..n-1.
    auto interior_nodes() const { return nodes_.segment(1, n_intervals() - 1); }
    auto interior_weights() const { return weights_.segment(1, n_intervals() - 1); }

private:
    friend ChebyshevGrid make_grid_on(int, double, double);
    RealVector nodes_;
    RealVector weights_;
    double lower_ = -1.0;
    double upper_ = 1.0;
};

/// Grid with n_intervals + 1 nodes on [-1, 1]. Throws std::invalid_argument
/// for n_intervals < 4.
ChebyshevGrid make_grid(int n_intervals);

/// Same, affinely mapped onto [a, b] (a < b).
ChebyshevGrid make_grid_on(int n_intervals, double a, double b);

/// Spectral differentiation matrices at the grid nodes.
struct DiffOp {
    RealMatrix d1;
    RealMatrix d2;
};

/// d1 uses the negative-sum trick on the diagonal; d2 = d1*d1 with the same
/// diagonal correction.
DiffOp diff_ops(const ChebyshevGrid& grid);

/// Dirichlet Helmholtz operator (d2 - k^2 I) with phi = 0 at both ends,
/// imposed by replacing the two boundary rows with identity rows. Factored
/// once; solve() is const and may be called concurrently.
class HelmholtzSolver {
public:
    HelmholtzSolver(const ChebyshevGrid& grid, const DiffOp& ops, double k_squared);

    /// rhs holds values at the interior nodes; the result covers all nodes
    /// and is exactly zero at both ends.
    ComplexVector solve(const ComplexVector& rhs_interior) const;

    /// Interior block of (d2 - k^2 I), the matrix the interior unknowns see.
    const RealMatrix& interior_matrix() const { return interior_; }

private:
    RealMatrix interior_;
    Eigen::PartialPivLU<RealMatrix> lu_;
};

/// One-shot solve of (phi'' - k^2 phi) = rhs, phi(a) = phi(b) = 0 for a
/// streamwise wavenumber |k| >= 1.
ComplexVector helmholtz_solve(const ChebyshevGrid& grid, const DiffOp& ops, int k,
                              const ComplexVector& rhs_interior);

/// Quadrature inner product <a, b> = sum_j w_j a_j conj(b_j): linear in the
/// first slot, conjugate-linear in the second. Profiles live on all nodes.
cplx l2_inner(const ChebyshevGrid& grid, const ComplexVector& a, const ComplexVector& b);
double l2_norm(const ChebyshevGrid& grid, const ComplexVector& profile);
double l2_norm(const ChebyshevGrid& grid, const RealVector& profile);

/// Barycentric evaluation of the grid interpolant at an arbitrary point.
cplx interpolate(const ChebyshevGrid& grid, const ComplexVector& values, double y);

/// Resample node values onto another grid covering the same interval.
ComplexVector resample(const ChebyshevGrid& from, const ComplexVector& values,
                       const ChebyshevGrid& to);

/// Embed interior values into a full profile with zero end values.
ComplexVector with_zero_ends(const ComplexVector& interior);

}  // namespace pstab
