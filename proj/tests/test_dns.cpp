// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "pstab/dns.hpp"
#include "pstab/linop.hpp"

using namespace pstab;
using namespace pstab::dns;
using std::numbers::pi;

namespace {

VorticityState random_state(int kk, int n, int kmax, std::uint64_t seed, double scale = 1.0)
{
    auto s = VorticityState::zero(kk, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto& y = s.grid->nodes();
    for (int k = 0; k <= kmax; ++k) {
        for (int j = 1; j < n; ++j)
            s.modes[k][j] = scale * cplx(g(rng), k == 0 ? 0.0 : g(rng)) * (1.0 - y[j] * y[j]);
    }
    return s;
}

double max_diff(const VorticityState& a, const VorticityState& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.modes.size(); ++k)
        m = std::max(m, (a.modes[k] - b.modes[k]).cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

TEST_CASE("state construction and norms")
{
    CHECK_THROWS_AS(VorticityState::zero(1, 16), std::invalid_argument);
    const auto s = initial_state(Shape::SinCos, 0.3, 8, 32, 1);
    CHECK(s.kept_modes() == 5);
    CHECK(nonzero_norm(s) == doctest::Approx(0.3 * std::sqrt(pi)).epsilon(1e-12));
    CHECK(mean_norm(s) == 0.0);
    const auto r = initial_state(Shape::RandomModes, 0.3, 8, 32, 7);
    CHECK(nonzero_norm(r) == doctest::Approx(0.3 * std::sqrt(pi)).epsilon(1e-12));
    CHECK(r.modes[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(parse_shape("random") == Shape::RandomModes);
    CHECK(shape_name(Shape::SinCos) == "sincos");
    CHECK_THROWS_AS(parse_shape("gauss"), std::invalid_argument);
    CHECK_THROWS_AS(initial_state(Shape::SinCos, -1.0, 8, 32, 1), std::invalid_argument);
}

TEST_CASE("stream function solve: manufactured profiles")
{
    auto s = VorticityState::zero(4, 32);
    const auto& y = s.grid->nodes();
    const double q = pi / 2.0;
    for (int j = 1; j < 32; ++j) {
        s.modes[1][j] = -(q * q + 1.0) * std::sin(q * (y[j] + 1.0));
        s.modes[0][j] = -2.0;
    }
    const auto v = stream_solve(s);
    for (int j = 0; j <= 32; ++j) {
        CHECK(std::abs(v.phi[1][j] - std::sin(q * (y[j] + 1.0))) < 1e-11);
        CHECK(std::abs(v.u1[1][j] - q * std::cos(q * (y[j] + 1.0))) < 1e-9);
        CHECK(std::abs(v.phi[0][j] - (1.0 - y[j] * y[j])) < 1e-11);
        CHECK(std::abs(v.u1[0][j] + 2.0 * y[j]) < 1e-10);
        CHECK(std::abs(v.u2[0][j]) == 0.0);
    }
}

TEST_CASE("velocity is divergence free mode by mode")
{
    const auto s = random_state(6, 24, 4, 3);
    const auto v = stream_solve(s);
    for (int k = 0; k <= 6; ++k) {
        const ComplexVector div = cplx(0.0, k) * v.u1[k] + s.ops->d1 * v.u2[k];
        CHECK(div.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + v.u1[k].cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("nonlinear term against a direct sum over 64 x-points")
{
    const int kk = 8;
    const int n = 16;
    const int mx = 64;
    for (int kmax : {3, kk}) {
        const auto s = random_state(kk, n, kmax, 11 + kmax);
        const auto v = stream_solve(s);
        const auto nl = nonlinear_term(s, v);

        auto field = [&](const std::vector<ComplexVector>& m, double x, int j) {
            double f = m[0][j].real();
            for (int k = 1; k <= kk; ++k)
                f += 2.0 * (m[k][j] * std::polar(1.0, k * x)).real();
            return f;
        };
        for (int k = 0; k <= kk; ++k) {
            ComplexVector p1 = ComplexVector::Zero(n + 1);
            ComplexVector p2 = ComplexVector::Zero(n + 1);
            for (int i = 0; i < mx; ++i) {
                const double x = 2.0 * pi * i / mx;
                const cplx e = std::polar(1.0 / mx, -k * x);
                for (int j = 0; j <= n; ++j) {
                    const double w = field(s.modes, x, j);
                    p1[j] += e * w * field(v.u1, x, j);
                    p2[j] += e * w * field(v.u2, x, j);
                }
            }
            const ComplexVector expect = cplx(0.0, k) * p1 + s.ops->d1 * p2;
            const double scale = 1.0 + expect.cwiseAbs().maxCoeff();
            if (k <= s.kept_modes())
                CHECK((nl[k] - expect).cwiseAbs().maxCoeff() < 1e-8 * scale);
            else
                CHECK(nl[k].cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("nonlinear term: zero field and the k = 1 selection rule")
{
    const auto z = VorticityState::zero(8, 16);
    for (const auto& m : nonlinear_term(z, stream_solve(z)))
        CHECK(m.cwiseAbs().maxCoeff() == 0.0);

    auto s = random_state(8, 16, 1, 5);
    s.modes[0].setZero();
    const auto nl = nonlinear_term(s, stream_solve(s));
    const double big = nl[2].cwiseAbs().maxCoeff();
    CHECK(big > 1e-3);
    for (int k : {1, 3, 4, 5})
        CHECK(nl[k].cwiseAbs().maxCoeff() < 1e-12 * big);
}

TEST_CASE("mean mode diffuses as the heat equation")
{
    const double nu = 0.1;
    const double dt = 1e-3;
    auto s = VorticityState::zero(4, 32);
    const auto& y = s.grid->nodes();
    for (int j = 1; j < 32; ++j)
        s.modes[0][j] = std::sin(pi * (y[j] + 1.0) / 2.0);
    Stepper st(nu, 4, 32, dt, true);
    for (int i = 0; i < 1000; ++i)
        st.step(s);
    const double decay = std::exp(-nu * pi * pi / 4.0);
    for (int j = 0; j <= 32; ++j)
        CHECK(std::abs(s.modes[0][j] - decay * std::sin(pi * (y[j] + 1.0) / 2.0)) < 1e-8);
    CHECK(s.time == doctest::Approx(1.0));
}

TEST_CASE("linearised stepper matches the matrix exponential of the mode operator")
{
    const double nu = 1e-2;
    const int n = 32;
    const double dt = 2.5e-4;
    const auto op = assemble(Discretization::make(n), {nu, 1});
    auto s = initial_state(Shape::SinCos, 1.0, 2, n, 0);
    const ComplexVector w0 = s.modes[1].segment(1, n - 1);
    Stepper st(nu, 2, n, dt, true);
    long done = 0;
    for (double t : {1.0, 4.0, 10.0}) {
        const long target = std::lround(t / dt);
        for (; done < target; ++done)
            st.step(s);
        const ComplexMatrix e = (-t * op.matrix()).exp();
        const ComplexVector expect = e * w0;
        const ComplexVector got = s.modes[1].segment(1, n - 1);
        CHECK((got - expect).norm() <= 1e-6 * expect.norm());
    }
}

TEST_CASE("time stepping keeps walls, reality of the mean, and truncation")
{
    auto s = initial_state(Shape::RandomModes, 0.5, 8, 24, 9);
    Stepper st(1e-2, 8, 24, 0.01);
    for (int i = 0; i < 50; ++i)
        st.step(s);
    CHECK(s.modes[0].imag().cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k <= 8; ++k) {
        CHECK(s.modes[k][0] == cplx(0.0));
        CHECK(s.modes[k][24] == cplx(0.0));
    }
    for (int k = 6; k <= 8; ++k)
        CHECK(s.modes[k].cwiseAbs().maxCoeff() == 0.0);
    CHECK(mean_norm(s) > 0.0);

    auto z = VorticityState::zero(8, 24);
    st.reset();
    for (int i = 0; i < 10; ++i)
        st.step(z);
    CHECK(total_norm(z) == 0.0);

    auto wrong = VorticityState::zero(8, 16);
    CHECK_THROWS_AS(st.step(wrong), std::invalid_argument);
}

TEST_CASE("small data: the mean stays at the quadratic level")
{
    RunConfig cfg;
    cfg.nu = 1e-2;
    cfg.x_modes = 8;
    cfg.n_intervals = 24;
    cfg.t_end = 20.0;
    cfg.amplitude = 1e-6;
    const auto d = run(cfg);
    for (double m : d.mean_norm)
        CHECK(m <= 1e-10);
    CHECK(d.stable);
}

TEST_CASE("nonlinear correction is quadratic in the amplitude")
{
    auto deviation = [](double a) {
        auto s = initial_state(Shape::RandomModes, a, 8, 24, 4);
        auto l = s;
        Stepper full(1e-2, 8, 24, 0.01);
        Stepper lin(1e-2, 8, 24, 0.01, true);
        for (int i = 0; i < 200; ++i) {
            full.step(s);
            lin.step(l);
        }
        return max_diff(s, l);
    };
    const double d1 = deviation(1e-2);
    const double d2 = deviation(5e-3);
    CHECK(d1 > 0.0);
    CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("time-step refinement converges at second order")
{
    auto solve = [](double dt) {
        auto s = initial_state(Shape::RandomModes, 0.5, 8, 24, 2);
        Stepper st(1e-2, 8, 24, dt);
        const long n = std::lround(2.0 / dt);
        for (long i = 0; i < n; ++i)
            st.step(s);
        return s;
    };
    const auto a = solve(0.02);
    const auto b = solve(0.01);
    const auto c = solve(0.005);
    const double ratio = max_diff(a, b) / max_diff(b, c);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("step-size limit")
{
    CHECK(dt_max(1e-2, 8, 0.0) == doctest::Approx(0.5 / 8.0));
    CHECK(dt_max(1e-6, 8, 0.0) == doctest::Approx(std::cbrt(1e-6 / 25.0)));
    CHECK(dt_max(1e-2, 8, 1.0) < dt_max(1e-2, 8, 0.0));

    RunConfig cfg;
    cfg.nu = 1e-2;
    cfg.x_modes = 8;
    cfg.n_intervals = 16;
    cfg.t_end = 1.0;
    cfg.amplitude = 0.1;
    cfg.dt = 1.0;
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
    cfg.dt = 0.0;
    const auto d = run(cfg);
    CHECK(d.dt * d.n_steps == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.dt <= dt_max(1e-2, 8, 0.0));
}

TEST_CASE("run configuration validation")
{
    RunConfig cfg;
    cfg.amplitude = 0.1;
    cfg.n_intervals = 4;
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
    cfg.n_intervals = 16;
    cfg.nu = 0.0;
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
    cfg.nu = 1e-2;
    cfg.c_prime_factor = 1.0;
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
    cfg.c_prime_factor = 0.4;
    CHECK(cfg.resolved_t_end() == doctest::Approx(200.0));
    CHECK_THROWS_AS(run_from(cfg, VorticityState::zero(4, 16)), std::invalid_argument);
}

TEST_CASE("classification follows the amplification and end-fraction rule")
{
    RunConfig cfg;
    cfg.nu = 1e-2;
    cfg.x_modes = 8;
    cfg.n_intervals = 24;
    cfg.t_end = 40.0;
    cfg.c_fit = 0.2;
    cfg.amplitude = 1e-3;
    const auto d = run(cfg);
    CHECK(d.stable == (!d.blew_up && d.max_amplification <= 2.0 && d.end_fraction <= 0.1));
    CHECK(d.max_amplification >= 1.0);
    CHECK(d.c_prime == doctest::Approx(0.08));
    CHECK(d.times.front() == 0.0);
    CHECK(d.times.back() == doctest::Approx(40.0));
    for (std::size_t i = 1; i < d.xnorm_sq.size(); ++i)
        CHECK(d.xnorm_sq[i] >= d.xnorm_sq[i - 1]);

    cfg.end_fraction = d.end_fraction * 0.5;
    CHECK_FALSE(run(cfg).stable);

    cfg.amplitude = 0.0;
    const auto zero = run(cfg);
    CHECK(zero.stable);
    CHECK(zero.max_amplification == 0.0);

    cfg.amplitude = 1e3;
    cfg.end_fraction = 0.1;
    const auto big = run(cfg);
    CHECK_FALSE(big.stable);
}

TEST_CASE("linear decay rate is positive and below the diffusive rate at the wall scale")
{
    const double c = linear_decay_rate(1e-2, 32);
    CHECK(c > 0.0);
    CHECK(std::isfinite(c));
}

TEST_CASE("threshold bisection statuses")
{
    SweepConfig cfg;
    cfg.base.x_modes = 4;
    cfg.base.n_intervals = 16;
    cfg.base.t_end = 30.0;
    cfg.base.c_fit = 0.2;
    cfg.iterations = 2;
    std::vector<ThresholdRun> rows;

    cfg.scaled_lo = 2.0;
    cfg.scaled_hi = 1.0;
    CHECK(threshold_for_nu(cfg, 1e-2, rows).status == SweepStatus::BracketInvalid);

    rows.clear();
    cfg.scaled_lo = 1e-3;
    cfg.scaled_hi = 2e-3;
    CHECK(threshold_for_nu(cfg, 1e-2, rows).status == SweepStatus::StableToCap);
    CHECK(rows.size() == 2);

    rows.clear();
    cfg.scaled_hi = 1e4;
    const auto o = threshold_for_nu(cfg, 1e-2, rows);
    REQUIRE(o.status == SweepStatus::Boundary);
    CHECK(rows.size() == 4);
    CHECK(o.a_lo < o.a_crit);
    CHECK(o.a_crit < o.a_hi);
    CHECK(o.a_hi / o.a_lo == doctest::Approx(std::pow(1e7, 0.25)).epsilon(1e-9));
    for (const auto& r : rows)
        CHECK(r.gamma_scaled_amp == doctest::Approx(r.amplitude / std::pow(1e-2, 0.75)));

    cfg.nu_values.clear();
    CHECK_THROWS_AS(threshold_sweep(cfg), std::invalid_argument);
}
