// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pstab/calibration.hpp"
#include "pstab/chebyshev.hpp"

namespace pstab {

/// Critical-layer geometry of the Poiseuille symbol: 1 - y^2 = lambda at
/// y1 = -y2 and y2, with an offset delta used by the integral bounds.
struct CriticalLayerGeom {
    double lambda = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
    double delta = 0.0;

    /// y2 in [0, 1], delta in (0, 1]. Throws std::invalid_argument otherwise.
    static CriticalLayerGeom make(double y2, double delta);

    /// 1 - y^2 - lambda = (y2 - y)(y - y1).
    double symbol(double y) const { return 1.0 - y * y - lambda; }
    double width() const { return y2 - y1; }
};

/// A stream function / vorticity pair on a sub-interval grid.
struct FieldPair {
    std::shared_ptr<const ChebyshevGrid> grid;
    std::shared_ptr<const DiffOp> ops;
    ComplexVector phi;
    ComplexVector w;
    int k = 0;
};

/// Grid plus differentiation matrices on [a, b].
struct SubGrid {
    std::shared_ptr<const ChebyshevGrid> grid;
    std::shared_ptr<const DiffOp> ops;
    static SubGrid make(int n_intervals, double a, double b);
};

/// w = phi'' - k^2 phi evaluated spectrally from phi's node values.
FieldPair pair_from_phi(const SubGrid& sub, const std::function<cplx(double)>& phi, int k);

/// phi from w by a Dirichlet solve on the sub-interval (k = 0 allowed).
FieldPair pair_from_w(const SubGrid& sub, const std::function<cplx(double)>& w, int k);

/// Resample both profiles onto a grid with n_intervals on the same interval.
FieldPair resample(const FieldPair& pair, int n_intervals);

struct EnergyIdentityReport {
    double lhs = 0.0;  ///< -<phi, w> on (y1, y2), real part
    double rhs = 0.0;  ///< ||phi'||^2 + k^2 ||phi||^2 on (y1, y2)
    double gap = 0.0;
    double imag_part = 0.0;      ///< Im <phi, w>, zero up to quadrature error
    double boundary_value = 0.0; ///< max |phi| at y1, y2
    bool boundary_ok = true;     ///< boundary_value <= 1e-10
    bool passed = false;         ///< gap <= 1e-8 (|lhs| + |rhs|)
};

/// The pair's grid must span exactly [y1, y2].
EnergyIdentityReport check_energy_identity(const FieldPair& pair, double y1, double y2);

struct EnergyKeyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  ///< rhs - lhs
    double refinement_change = 0.0;
    bool resolved = true;  ///< lhs stable to 1e-6 under grid doubling
    bool passed = false;   ///< slack >= -1e-8 |rhs|
};

/// Weighted energy inequality on the critical layer (y1, y2):
///   2( int g^2 |(phi/g)'|^2 + k^2 int |phi|^2 ) <= int g |w|^2 + 2 Re <phi, w>,
/// with g = 1 - y^2 - lambda. The pair's grid must span [y1, y2].
EnergyKeyReport check_energy_key(const FieldPair& pair, const CriticalLayerGeom& geom);

struct HardyReport {
    double lhs = 0.0;         ///< int |phi|^2 / g^2
    double derivative_term = 0.0;  ///< int g^2 |(phi/g)'|^2 / (y2 - y1)^2
    double point_term = 0.0;  ///< |phi(0)|^2 / (y2 - y1)^3
    double ratio = 0.0;
    double refinement_change = 0.0;
    bool resolved = true;
};

/// Throws std::invalid_argument for the empty layer y1 = y2 = 0.
HardyReport check_hardy(const FieldPair& pair, const CriticalLayerGeom& geom);

struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool applicable = true;
};

struct PEquality {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_error = 0.0;
};

/// 1 / |1 - (y1 - delta)^2 - lambda| against 1 / ((y2 - y1 + delta) delta).
PEquality p_equality(const CriticalLayerGeom& geom);

struct PBoundsReport {
    double eq_lhs = 0.0;   ///< 1 / |1 - (y1 - delta)^2 - lambda|
    double eq_rhs = 0.0;   ///< 1 / ((y2 - y1 + delta) delta)
    double eq_rel_error = 0.0;
    std::vector<BoundCheck> bounds;  ///< P-L2, P-L1, P-L2-w, P-L2-in

    double max_ratio() const;
};

/// Integrals over (-1, 1) \ (y1 - delta, y2 + delta) and, when
/// delta < (y2 - y1)/4, over (y1 + delta, y2 - delta), by adaptive
/// Gauss-Kronrod bisection.
PBoundsReport check_p_bounds(const CriticalLayerGeom& geom);

/// Outside-region and inner-region integrals exposed for calibration.
double outside_integral(const CriticalLayerGeom& geom, const std::function<double(double)>& f,
                        double tol = 1e-10);
double inner_integral(const CriticalLayerGeom& geom, const std::function<double(double)>& f,
                      double tol = 1e-10);

struct LemmaSuiteConfig {
    std::uint64_t seed = 20240611;
    int n_draws = 200;
    int n_sub = 32;                   ///< sub-grid intervals on (y1, y2)
    std::vector<int> k_values{1};
    double corpus_y2 = 0.5;           ///< layer edge for the field corpus; <= 0 draws it per field
    std::vector<double> y2_values;    ///< sweep for the P bounds
    std::vector<double> delta_values;
    int n_random_geoms = 1000;        ///< exact-identity check
    Calibration calibration;
    bool inject_violation = false;    ///< adds a hand-broken energy identity
};

struct LemmaSuiteResult {
    std::vector<std::string> lines;  ///< JSON objects, one per line
    int n_checks = 0;
    int n_failed = 0;
};

/// Default delta grid: 25 log-spaced values on [1e-3, 1]; y2 grid: 19 values on [0.05, 0.95].
std::vector<double> default_delta_sweep();
std::vector<double> default_y2_sweep();

/// Degree-10 complex polynomial phi = g * p vanishing at y1, y2 (and at 0
/// when vanish_at_centre is set).
std::function<cplx(double)> random_dirichlet_polynomial(const CriticalLayerGeom& geom,
                                                        std::uint64_t seed,
                                                        bool vanish_at_centre = false);

/// Throws std::invalid_argument on an empty corpus.
LemmaSuiteResult run_lemma_suite(const LemmaSuiteConfig& cfg);

}  // namespace pstab
