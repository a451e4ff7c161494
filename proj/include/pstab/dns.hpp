// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pstab/chebyshev.hpp"

namespace pstab::dns {

/// Vorticity perturbation on T x (-1, 1):
///   omega(x, y) = sum_{|k| <= K} w_k(y) e^{ikx},  w_{-k} = conj(w_k).
/// Only k = 0..K are stored; negative modes are implied by conjugation, so
/// the reality condition holds exactly. Profiles cover every Chebyshev node
/// and vanish at y = +-1.
struct VorticityState {
    double time = 0.0;
    int x_modes = 0;  ///< K
    std::shared_ptr<const ChebyshevGrid> grid;
    std::shared_ptr<const DiffOp> ops;
    std::vector<ComplexVector> modes;  ///< modes[k], k = 0..K

    static VorticityState zero(int x_modes, int n_intervals);
    int n_intervals() const { return grid->n_intervals(); }
    /// floor(2K/3): the highest wavenumber kept after each step.
    int kept_modes() const { return 2 * x_modes / 3; }
};

struct StreamVelocity {
    std::vector<ComplexVector> phi;  ///< phi_k, zero at both walls
    std::vector<ComplexVector> u1;   ///< d/dy phi_k
    std::vector<ComplexVector> u2;   ///< -ik phi_k
};

/// Mode-by-mode Dirichlet solve of (d2 - k^2) phi_k = w_k; the k = 0
/// profile solves phi'' = w.
StreamVelocity stream_solve(const VorticityState& state);

/// Fourier coefficients of div(omega u) = d/dx(omega u1) + d/dy(omega u2),
/// with products formed on 3K points in x. Modes above floor(2K/3) are zeroed.
std::vector<ComplexVector> nonlinear_term(const VorticityState& state, const StreamVelocity& vel);

/// L2 norms over T x (-1, 1) (the 2 pi of the x-integral included).
double nonzero_norm(const VorticityState& state);
double mean_norm(const VorticityState& state);
double total_norm(const VorticityState& state);
/// sup over the physical grid of |u| built from the k != 0 modes.
double nonzero_velocity_sup(const StreamVelocity& vel, int x_modes);

/// Advective limit 0.5 / (K max|u|) with the base flow included in max|u|,
/// and the Adams-Bashforth limit (nu / kmax^2)^{1/3}, kmax = floor(2K/3),
/// that keeps the explicit treatment of ik(1 - y^2) damped by diffusion.
double dt_max(double nu, int x_modes, double perturbation_speed);

/// Advances the state with Crank-Nicolson diffusion and Adams-Bashforth
/// (Euler on the first step) for advection, the nonlocal term and the
/// nonlinearity. Operator factorisations are built once per (nu, K, N, dt).
class Stepper {
public:
    Stepper(double nu, int x_modes, int n_intervals, double dt, bool linearized = false);
    ~Stepper();
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    void step(VorticityState& state);
    double dt() const;
    double nu() const;
    /// Forget the Adams-Bashforth history (next step is Euler).
    void reset();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class Shape { SinCos, RandomModes };

Shape parse_shape(const std::string& name);
std::string shape_name(Shape s);

/// amplitude * sin(pi y) cos(x), or a seeded multi-mode field with the same
/// L2 norm (amplitude * sqrt(pi)) and no x-mean.
VorticityState initial_state(Shape shape, double amplitude, int x_modes, int n_intervals,
                             std::uint64_t seed);

struct RunConfig {
    double nu = 1e-3;
    int x_modes = 16;
    int n_intervals = 48;
    double dt = 0.0;        ///< 0 picks dt_max, shortened to divide t_end evenly
    double t_end = 0.0;     ///< 0 means 20 / sqrt(nu)
    double amplitude = 0.0;
    Shape shape = Shape::SinCos;
    std::uint64_t seed = 20240611;
    double c_prime_factor = 0.4;
    std::optional<double> c_fit;  ///< linear k = 1 decay rate; computed when absent
    double output_interval = 0.0;  ///< 0 means t_end / 200
    bool linearized = false;
    double max_amplification = 2.0;  ///< stability rule
    double end_fraction = 0.1;
    double blowup_factor = 1e6;

    void validate() const;
    double resolved_t_end() const;
};

struct RunDiagnostics {
    std::vector<double> times;
    std::vector<double> nonzero_norm;
    std::vector<double> mean_norm;
    std::vector<double> uinf_ratio;
    std::vector<double> xnorm_sq;

    double dt = 0.0;
    long n_steps = 0;
    double c_prime = 0.0;
    double max_amplification = 0.0;  ///< sup_t ||w_nz(t)|| / ||w_nz(0)|| over every step
    double end_fraction = 0.0;       ///< ||w_nz(T)|| / ||w_nz(0)||
    bool blew_up = false;
    bool stable = false;
    double decay_rate = 0.0;  ///< fitted on the sampled nonzero_norm; NaN when unfit
};

/// Linear semigroup decay rate at (nu, k = 1) on an n-interval grid.
double linear_decay_rate(double nu, int n_intervals);

RunDiagnostics run(const RunConfig& cfg);

/// Runs from a prepared initial state (state.time is reset to 0).
RunDiagnostics run_from(const RunConfig& cfg, VorticityState state);

struct ThresholdRun {
    double nu = 0.0;
    double amplitude = 0.0;
    double gamma_scaled_amp = 0.0;  ///< amplitude / nu^{3/4}
    bool stable = false;
    double max_amplification = 0.0;
    double end_fraction = 0.0;
};

enum class SweepStatus { Boundary, StableToCap, BracketInvalid };

struct SweepOutcome {
    double nu = 0.0;
    SweepStatus status = SweepStatus::BracketInvalid;
    double a_crit = 0.0;  ///< geometric midpoint of the final bracket (Boundary only)
    double a_lo = 0.0;
    double a_hi = 0.0;
};

struct SweepConfig {
    std::vector<double> nu_values;
    double scaled_lo = 0.05;  ///< bracket in units of nu^{3/4}
    double scaled_hi = 50.0;
    int iterations = 8;
    RunConfig base;  ///< nu and amplitude are overwritten per run
};

struct SweepTable {
    std::vector<ThresholdRun> rows;  ///< every run, grouped by nu in input order
    std::vector<SweepOutcome> outcomes;
    std::optional<double> a_crit_slope;  ///< log A_crit vs log nu, >= 2 boundaries
};

/// Geometric bisection between the bracket ends, per nu. A_lo must be stable;
/// a stable A_hi is recorded as stable up to the cap.
SweepTable threshold_sweep(const SweepConfig& cfg);

/// One sweep for a single nu (what threshold_sweep runs per entry).
SweepOutcome threshold_for_nu(const SweepConfig& cfg, double nu, std::vector<ThresholdRun>& rows);

}  // namespace pstab::dns
