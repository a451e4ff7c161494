// SPDX-License-Identifier: Apache-2.0
#include "pstab/dns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fftw3.h>

#include "pstab/linop.hpp"
#include "pstab/spectral_analysis.hpp"

namespace pstab::dns {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// Real transforms in x for every Chebyshev row at once, on 3K points.
class XTransform {
public:
    XTransform(int x_modes, int n_points)
        : k_(x_modes), rows_(n_points), mx_(3 * x_modes), mc_(mx_ / 2 + 1)
    {
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(rows_) * mc_);
        phys_ = fftw_alloc_real(static_cast<std::size_t>(rows_) * mx_);
        std::lock_guard<std::mutex> lock(planner_mutex());
        to_phys_ = fftw_plan_many_dft_c2r(1, &mx_, rows_, spec_, nullptr, 1, mc_, phys_, nullptr, 1,
                                          mx_, FFTW_ESTIMATE);
        to_spec_ = fftw_plan_many_dft_r2c(1, &mx_, rows_, phys_, nullptr, 1, mx_, spec_, nullptr, 1,
                                          mc_, FFTW_ESTIMATE);
        if (!to_phys_ || !to_spec_)
            throw std::runtime_error("fftw planning failed");
    }
    ~XTransform()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(to_phys_);
        fftw_destroy_plan(to_spec_);
        fftw_free(spec_);
        fftw_free(phys_);
    }
    XTransform(const XTransform&) = delete;
    XTransform& operator=(const XTransform&) = delete;

    int mx() const { return mx_; }

    // Physical values, row-major (row = Chebyshev node, column = x index).
    RealMatrix to_physical(const std::vector<ComplexVector>& modes, int first_mode = 0)
    {
        auto* c = reinterpret_cast<cplx*>(spec_);
        std::fill(c, c + static_cast<std::size_t>(rows_) * mc_, cplx(0.0));
        const int kmax = std::min<int>(k_, static_cast<int>(modes.size()) - 1);
        for (int k = first_mode; k <= kmax; ++k)
            for (int j = 0; j < rows_; ++j)
                c[j * mc_ + k] = (k == 0) ? cplx(modes[k][j].real(), 0.0) : modes[k][j];
        fftw_execute(to_phys_);
        RealMatrix out(rows_, mx_);
        for (int j = 0; j < rows_; ++j)
            for (int m = 0; m < mx_; ++m)
                out(j, m) = phys_[j * mx_ + m];
        return out;
    }

    // Coefficients k = 0..kmax of a physical field.
    std::vector<ComplexVector> to_spectral(const RealMatrix& field, int kmax)
    {
        for (int j = 0; j < rows_; ++j)
            for (int m = 0; m < mx_; ++m)
                phys_[j * mx_ + m] = field(j, m);
        fftw_execute(to_spec_);
        const auto* c = reinterpret_cast<const cplx*>(spec_);
        std::vector<ComplexVector> out(k_ + 1, ComplexVector::Zero(rows_));
        for (int k = 0; k <= kmax; ++k)
            for (int j = 0; j < rows_; ++j)
                out[k][j] = c[j * mc_ + k] / double(mx_);
        return out;
    }

private:
    int k_;
    int rows_;
    int mx_;
    int mc_;
    fftw_complex* spec_ = nullptr;
    double* phys_ = nullptr;
    fftw_plan to_phys_ = nullptr;
    fftw_plan to_spec_ = nullptr;
};

std::vector<ComplexVector> products(XTransform& xt, const VorticityState& s,
                                    const StreamVelocity& vel)
{
    const RealMatrix w = xt.to_physical(s.modes);
    const RealMatrix u1 = xt.to_physical(vel.u1);
    const RealMatrix u2 = xt.to_physical(vel.u2);
    const int kept = s.kept_modes();
    const auto p1 = xt.to_spectral(w.cwiseProduct(u1), kept);
    const auto p2 = xt.to_spectral(w.cwiseProduct(u2), kept);
    std::vector<ComplexVector> out(s.x_modes + 1, ComplexVector::Zero(s.grid->n_points()));
    for (int k = 0; k <= kept; ++k)
        out[k] = cplx(0.0, k) * p1[k] + s.ops->d1 * p2[k];
    return out;
}

double mode_sq_sum(const ChebyshevGrid& g, const std::vector<ComplexVector>& modes, int first)
{
    double s = 0.0;
    for (std::size_t k = first; k < modes.size(); ++k)
        s += g.quad_weights().dot(modes[k].cwiseAbs2());
    return s;
}

void velocity_from_phi(const DiffOp& ops, int k, ComplexVector phi, StreamVelocity& v)
{
    v.u1[k] = ops.d1 * phi;
    v.u2[k] = cplx(0.0, -k) * phi;
    v.phi[k] = std::move(phi);
}

}  // namespace

VorticityState VorticityState::zero(int x_modes, int n_intervals)
{
    if (x_modes < 2)
        throw std::invalid_argument("dns: x_modes >= 2 required");
    VorticityState s;
    s.x_modes = x_modes;
    s.grid = std::make_shared<const ChebyshevGrid>(make_grid(n_intervals));
    s.ops = std::make_shared<const DiffOp>(diff_ops(*s.grid));
    s.modes.assign(x_modes + 1, ComplexVector::Zero(n_intervals + 1));
    return s;
}

StreamVelocity stream_solve(const VorticityState& state)
{
    const int n = state.n_intervals();
    const int kk = state.x_modes;
    StreamVelocity v;
    v.phi.resize(kk + 1);
    v.u1.resize(kk + 1);
    v.u2.resize(kk + 1);
    for (int k = 0; k <= kk; ++k) {
        const ComplexVector& w = state.modes[k];
        if (w.cwiseAbs().maxCoeff() == 0.0) {
            velocity_from_phi(*state.ops, k, ComplexVector::Zero(n + 1), v);
            continue;
        }
        HelmholtzSolver solver(*state.grid, *state.ops, double(k) * k);
        velocity_from_phi(*state.ops, k, solver.solve(w.segment(1, n - 1)), v);
    }
    return v;
}

std::vector<ComplexVector> nonlinear_term(const VorticityState& state, const StreamVelocity& vel)
{
    XTransform xt(state.x_modes, state.grid->n_points());
    return products(xt, state, vel);
}

double nonzero_norm(const VorticityState& s)
{
    return std::sqrt(2.0 * two_pi * mode_sq_sum(*s.grid, s.modes, 1));
}

double mean_norm(const VorticityState& s)
{
    return std::sqrt(two_pi * s.grid->quad_weights().dot(s.modes[0].cwiseAbs2()));
}

double total_norm(const VorticityState& s)
{
    const double a = mean_norm(s);
    const double b = nonzero_norm(s);
    return std::sqrt(a * a + b * b);
}

double nonzero_velocity_sup(const StreamVelocity& vel, int x_modes)
{
    XTransform xt(x_modes, static_cast<int>(vel.u1[0].size()));
    const RealMatrix u1 = xt.to_physical(vel.u1, 1);
    const RealMatrix u2 = xt.to_physical(vel.u2, 1);
    return std::sqrt((u1.array().square() + u2.array().square()).maxCoeff());
}

double dt_max(double nu, int x_modes, double perturbation_speed)
{
    const int kmax = std::max(1, 2 * x_modes / 3);
    const double advective = 0.5 / (x_modes * (1.0 + perturbation_speed));
    const double multistep = std::cbrt(nu / (double(kmax) * kmax));
    return std::min(advective, multistep);
}

struct Stepper::Impl {
    double nu;
    int kk;
    int kept;
    int n;
    double dt;
    bool linearized;
    std::shared_ptr<const ChebyshevGrid> grid;
    std::shared_ptr<const DiffOp> ops;
    std::vector<RealMatrix> propagate;  // (I - dt/2 L)^{-1} (I + dt/2 L)
    std::vector<RealMatrix> forcing;    // dt (I - dt/2 L)^{-1}
    std::vector<RealMatrix> inverse_laplacian;
    RealVector shear;                   // 1 - y^2 at interior nodes
    std::vector<ComplexVector> previous;  // explicit terms of the last step
    bool has_previous = false;
    std::unique_ptr<XTransform> xt;
};

Stepper::Stepper(double nu, int x_modes, int n_intervals, double dt, bool linearized)
    : impl_(std::make_unique<Impl>())
{
    if (!(nu > 0.0 && nu <= 1.0))
        throw std::invalid_argument("dns: nu must lie in (0, 1]");
    if (!(dt > 0.0))
        throw std::invalid_argument("dns: dt must be positive");
    auto& p = *impl_;
    p.nu = nu;
    p.kk = x_modes;
    p.kept = 2 * x_modes / 3;
    p.n = n_intervals;
    p.dt = dt;
    p.linearized = linearized;
    p.grid = std::make_shared<const ChebyshevGrid>(make_grid(n_intervals));
    p.ops = std::make_shared<const DiffOp>(diff_ops(*p.grid));
    p.shear = (1.0 - p.grid->interior_nodes().array().square()).matrix();

    const int m = n_intervals - 1;
    const RealMatrix d2 = p.ops->d2.block(1, 1, m, m);
    const RealMatrix id = RealMatrix::Identity(m, m);
    for (int k = 0; k <= p.kept; ++k) {
        RealMatrix lap = d2;
        lap.diagonal().array() -= double(k) * k;
        const RealMatrix implicit = id - 0.5 * dt * nu * lap;
        const Eigen::PartialPivLU<RealMatrix> lu(implicit);
        p.propagate.push_back(lu.solve(id + 0.5 * dt * nu * lap));
        p.forcing.push_back(lu.solve(dt * id));
        p.inverse_laplacian.push_back(lap.partialPivLu().solve(id));
    }
    p.xt = std::make_unique<XTransform>(x_modes, n_intervals + 1);
}

Stepper::~Stepper() = default;

double Stepper::dt() const { return impl_->dt; }
double Stepper::nu() const { return impl_->nu; }
void Stepper::reset() { impl_->has_previous = false; }

void Stepper::step(VorticityState& s)
{
    auto& p = *impl_;
    if (s.x_modes != p.kk || s.n_intervals() != p.n)
        throw std::invalid_argument("Stepper::step: state does not match the stepper");
    const int m = p.n - 1;

    StreamVelocity vel;
    vel.phi.resize(p.kk + 1);
    vel.u1.resize(p.kk + 1);
    vel.u2.resize(p.kk + 1);
    for (int k = 0; k <= p.kk; ++k) {
        if (k > p.kept) {
            velocity_from_phi(*p.ops, k, ComplexVector::Zero(p.n + 1), vel);
            continue;
        }
        velocity_from_phi(*p.ops, k,
                          with_zero_ends(p.inverse_laplacian[k] * s.modes[k].segment(1, m)), vel);
    }

    std::vector<ComplexVector> nl;
    if (!p.linearized)
        nl = products(*p.xt, s, vel);

    std::vector<ComplexVector> explicit_terms(p.kept + 1);
    for (int k = 0; k <= p.kept; ++k) {
        const auto w = s.modes[k].segment(1, m);
        ComplexVector e = cplx(0.0, -k) * (p.shear.cwiseProduct(w) +
                                           2.0 * vel.phi[k].segment(1, m));
        if (!p.linearized)
            e -= nl[k].segment(1, m);
        explicit_terms[k] = std::move(e);
    }

    for (int k = 0; k <= p.kept; ++k) {
        ComplexVector rhs = p.has_previous
                                ? ComplexVector(1.5 * explicit_terms[k] - 0.5 * p.previous[k])
                                : explicit_terms[k];
        ComplexVector next = p.propagate[k] * s.modes[k].segment(1, m) + p.forcing[k] * rhs;
        s.modes[k].segment(1, m) = next;
        s.modes[k][0] = 0.0;
        s.modes[k][p.n] = 0.0;
    }
    s.modes[0] = s.modes[0].real().cast<cplx>();
    for (int k = p.kept + 1; k <= p.kk; ++k)
        s.modes[k].setZero();

    p.previous = std::move(explicit_terms);
    p.has_previous = true;
    s.time += p.dt;
}

Shape parse_shape(const std::string& name)
{
    if (name == "sincos")
        return Shape::SinCos;
    if (name == "random")
        return Shape::RandomModes;
    throw std::invalid_argument("unknown shape '" + name + "' (expected sincos or random)");
}

std::string shape_name(Shape s) { return s == Shape::SinCos ? "sincos" : "random"; }

VorticityState initial_state(Shape shape, double amplitude, int x_modes, int n_intervals,
                             std::uint64_t seed)
{
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("dns: amplitude must be finite and >= 0");
    auto s = VorticityState::zero(x_modes, n_intervals);
    const auto& y = s.grid->nodes();
    const double pi = std::numbers::pi;
    if (shape == Shape::SinCos) {
        for (int j = 1; j < n_intervals; ++j)
            s.modes[1][j] = 0.5 * amplitude * std::sin(pi * y[j]);
        return s;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int kmax = std::min(3, s.kept_modes());
    for (int k = 1; k <= kmax; ++k) {
        for (int mode = 1; mode <= 4; ++mode) {
            const cplx c(gauss(rng), gauss(rng));
            for (int j = 1; j < n_intervals; ++j)
                s.modes[k][j] += c / double(mode) * std::sin(mode * pi * (y[j] + 1.0) / 2.0);
        }
    }
    const double norm = nonzero_norm(s);
    for (auto& w : s.modes)
        w *= amplitude * std::sqrt(pi) / norm;
    return s;
}

void RunConfig::validate() const
{
    if (!(nu > 0.0 && nu <= 1.0))
        throw std::invalid_argument("dns: nu must lie in (0, 1]");
    if (x_modes < 2)
        throw std::invalid_argument("dns: K >= 2 required");
    if (n_intervals < 8)
        throw std::invalid_argument("dns: N >= 8 required");
    if (dt < 0.0 || t_end < 0.0 || output_interval < 0.0)
        throw std::invalid_argument("dns: dt, t_end and output_interval must be >= 0");
    if (!(c_prime_factor > 0.0 && c_prime_factor < 1.0))
        throw std::invalid_argument("dns: c_prime_factor must lie in (0, 1)");
    if (!(amplitude >= 0.0))
        throw std::invalid_argument("dns: amplitude must be >= 0");
}

double RunConfig::resolved_t_end() const { return t_end > 0.0 ? t_end : 20.0 / std::sqrt(nu); }

double linear_decay_rate(double nu, int n_intervals)
{
    const auto op = assemble(Discretization::make(n_intervals), ModeParams{nu, 1});
    const auto series = semigroup_norms(op, linspace_times(30.0 / std::sqrt(nu), 301));
    return fit_decay(series).c_fit;
}

RunDiagnostics run(const RunConfig& cfg)
{
    cfg.validate();
    return run_from(cfg, initial_state(cfg.shape, cfg.amplitude, cfg.x_modes, cfg.n_intervals,
                                       cfg.seed));
}

RunDiagnostics run_from(const RunConfig& cfg, VorticityState state)
{
    cfg.validate();
    if (state.x_modes != cfg.x_modes || state.n_intervals() != cfg.n_intervals)
        throw std::invalid_argument("dns: initial state does not match K and N");
    state.time = 0.0;
    const double t_end = cfg.resolved_t_end();

    RunDiagnostics d;
    d.c_prime = cfg.c_prime_factor * (cfg.c_fit ? *cfg.c_fit : linear_decay_rate(cfg.nu, cfg.n_intervals));

    StreamVelocity vel = stream_solve(state);
    const double limit = dt_max(cfg.nu, cfg.x_modes, nonzero_velocity_sup(vel, cfg.x_modes) +
                                                         vel.u1[0].cwiseAbs().maxCoeff());
    if (cfg.dt > limit * (1.0 + 1e-12))
        throw std::invalid_argument("dns: dt exceeds the stability limit " + std::to_string(limit));
    const double dt_target = cfg.dt > 0.0 ? cfg.dt : limit;
    d.n_steps = std::max<long>(1, static_cast<long>(std::ceil(t_end / dt_target - 1e-9)));
    d.dt = t_end / d.n_steps;
    const double interval = cfg.output_interval > 0.0 ? cfg.output_interval : t_end / 200.0;
    const long every = std::max<long>(1, std::lround(interval / d.dt));

    Stepper stepper(cfg.nu, cfg.x_modes, cfg.n_intervals, d.dt, cfg.linearized);
    const double sqrt_nu = std::sqrt(cfg.nu);
    const double n0 = nonzero_norm(state);
    const double total0 = total_norm(state);

    auto gradient_sq = [&](const VorticityState& s) {
        double g = 0.0;
        for (int k = 1; k <= s.x_modes; ++k) {
            const ComplexVector dw = s.ops->d1 * s.modes[k];
            g += double(k) * k * s.grid->quad_weights().dot(s.modes[k].cwiseAbs2()) +
                 s.grid->quad_weights().dot(dw.cwiseAbs2());
        }
        return 2.0 * two_pi * g;
    };

    double sup_term = 0.0;
    double l2_term = 0.0;
    double grad_term = 0.0;
    double prev_weighted = n0 * n0;
    double prev_grad = gradient_sq(state);
    sup_term = prev_weighted;

    auto sample = [&](double nz) {
        const auto v = stream_solve(state);
        d.times.push_back(state.time);
        d.nonzero_norm.push_back(nz);
        d.mean_norm.push_back(mean_norm(state));
        d.uinf_ratio.push_back(nz > 0.0 ? nonzero_velocity_sup(v, state.x_modes) / nz : 0.0);
        d.xnorm_sq.push_back(sup_term + sqrt_nu * l2_term + cfg.nu * grad_term);
    };
    sample(n0);

    double peak = n0;
    double nz = n0;
    for (long i = 1; i <= d.n_steps; ++i) {
        stepper.step(state);
        state.time = i * d.dt;
        nz = nonzero_norm(state);
        const double total = total_norm(state);
        if (!std::isfinite(total) || total > cfg.blowup_factor * std::max(total0, 1e-300)) {
            d.blew_up = true;
            peak = std::isfinite(nz) ? std::max(peak, nz) : std::numeric_limits<double>::infinity();
            break;
        }
        peak = std::max(peak, nz);

        const double weight = std::exp(2.0 * d.c_prime * sqrt_nu * state.time);
        const double weighted = weight * nz * nz;
        const double grad = weight * gradient_sq(state);
        sup_term = std::max(sup_term, weighted);
        l2_term += 0.5 * d.dt * (prev_weighted + weighted);
        grad_term += 0.5 * d.dt * (prev_grad + grad);
        prev_weighted = weighted;
        prev_grad = grad;

        if (i % every == 0 || i == d.n_steps)
            sample(nz);
    }

    if (n0 > 0.0) {
        d.max_amplification = peak / n0;
        d.end_fraction = d.blew_up ? std::numeric_limits<double>::infinity() : nz / n0;
    }
    d.stable = !d.blew_up && d.max_amplification <= cfg.max_amplification &&
               d.end_fraction <= cfg.end_fraction;

    d.decay_rate = std::numeric_limits<double>::quiet_NaN();
    if (n0 > 0.0 && !d.blew_up) {
        DecaySeries series{d.times, {}};
        for (double v : d.nonzero_norm)
            series.norms.push_back(v / n0);
        try {
            d.decay_rate = fit_decay(series).c_fit;
        } catch (const std::invalid_argument&) {
        }
    }
    return d;
}

SweepOutcome threshold_for_nu(const SweepConfig& cfg, double nu, std::vector<ThresholdRun>& rows)
{
    const double scale = std::pow(nu, 0.75);
    auto classify = [&](double amplitude) {
        RunConfig rc = cfg.base;
        rc.nu = nu;
        rc.amplitude = amplitude;
        const auto d = run(rc);
        rows.push_back({nu, amplitude, amplitude / scale, d.stable, d.max_amplification,
                        d.end_fraction});
        return d.stable;
    };

    SweepOutcome out;
    out.nu = nu;
    double lo = cfg.scaled_lo * scale;
    double hi = cfg.scaled_hi * scale;
    out.a_lo = lo;
    out.a_hi = hi;
    if (!(lo < hi) || !classify(lo)) {
        out.status = SweepStatus::BracketInvalid;
        return out;
    }
    if (classify(hi)) {
        out.status = SweepStatus::StableToCap;
        return out;
    }
    for (int i = 0; i < cfg.iterations; ++i) {
        const double mid = std::sqrt(lo * hi);
        (classify(mid) ? lo : hi) = mid;
    }
    out.status = SweepStatus::Boundary;
    out.a_lo = lo;
    out.a_hi = hi;
    out.a_crit = std::sqrt(lo * hi);
    return out;
}

SweepTable threshold_sweep(const SweepConfig& cfg)
{
    if (cfg.nu_values.empty())
        throw std::invalid_argument("threshold sweep: empty nu list");
    if (cfg.iterations < 0)
        throw std::invalid_argument("threshold sweep: iterations must be >= 0");
    SweepTable t;
    std::vector<double> nus, crit;
    for (double nu : cfg.nu_values) {
        auto o = threshold_for_nu(cfg, nu, t.rows);
        if (o.status == SweepStatus::Boundary) {
            nus.push_back(nu);
            crit.push_back(o.a_crit);
        }
        t.outcomes.push_back(o);
    }
    if (nus.size() >= 2)
        t.a_crit_slope = loglog_slope(nus, crit);
    return t;
}

}  // namespace pstab::dns
