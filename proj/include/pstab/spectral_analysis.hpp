// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pstab/linop.hpp"

namespace pstab {

/// Pseudospectral bound: inf over real mu of sigma_min(S - i mu).
struct PsiResult {
    ModeParams params;
    double psi = 0.0;
    double mu_star = 0.0;
    std::pair<double, double> mu_bracket;  ///< final golden-section bracket
    bool widened = false;                  ///< search range was widened once
};

/// Coarse scan of 201 shifts over [mu_lo, mu_hi], then golden-section
/// refinement of every coarse local minimum that could still beat the best
/// sample (sigma_min is 1-Lipschitz in mu), down to a bracket below tol.
/// A minimiser on the edge of the range widens it once; a second edge hit
/// throws std::runtime_error.
PsiResult psi_bound(const ModeOperator& op, double mu_lo, double mu_hi, double tol);

/// Default search: mu = k * lambda for lambda in [-2, 3], tol = 1e-4 |k|.
PsiResult psi_bound(const ModeOperator& op);

/// Eigenvalues of the operator, sorted by real part, then imaginary part.
std::vector<cplx> spectrum(const ModeOperator& op);

struct DecaySeries {
    std::vector<double> times;
    std::vector<double> norms;
};

/// ||exp(-t M)|| in the L2 (quadrature) norm for each requested time; the
/// exponential is taken by scaling and squaring. times must be increasing
/// and start at 0.
DecaySeries semigroup_norms(const ModeOperator& op, const std::vector<double>& times);

/// Gearhart-Pruss envelope exp(-t psi + pi/2).
double gearhart_pruss_bound(double t, double psi);

struct DecayFit {
    double c_fit = 0.0;
    double log_prefactor = 0.0;
    std::pair<double, double> fit_window;
    double residual = 0.0;  ///< max |log norm - fitted line| on the window
    int n_samples = 0;
};

/// Frozen window convention: starts where the norm first drops below
/// start_threshold and ends at the last sample still above floor.
std::pair<double, double> default_fit_window(const DecaySeries& series,
                                             double start_threshold = 0.5,
                                             double floor = 1e-10);

/// Least-squares line through (t, log norm) on the window; c_fit = -slope.
/// Throws std::invalid_argument when the window holds fewer than 8 samples.
DecayFit fit_decay(const DecaySeries& series, std::optional<std::pair<double, double>> window = {});

/// Evenly spaced times 0..t_max (n >= 2 samples).
std::vector<double> linspace_times(double t_max, int n);

/// Slope of the least-squares line through (log x, log y).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pstab
