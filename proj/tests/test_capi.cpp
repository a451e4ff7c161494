// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "pstab.h"

TEST_CASE("version and default calibration path")
{
    CHECK(std::string(pstab_version()).size() > 0);
    pstab_calibration c{};
    REQUIRE(pstab_calibration_load(pstab_default_calibration_path(), &c) == PSTAB_OK);
    CHECK(c.c_resolvent > 0.0);
    CHECK(c.c_hardy > 0.0);
    CHECK(c.c_p > 0.0);
    CHECK(c.c_u > 0.0);
}

TEST_CASE("status codes and the last error message")
{
    pstab_operator* op = nullptr;
    CHECK(pstab_operator_create(1e-2, 0, 32, 0, &op) == PSTAB_ERR_INVALID_ARGUMENT);
    CHECK(op == nullptr);
    CHECK(std::strlen(pstab_last_error()) > 0);
    CHECK(pstab_operator_create(-1.0, 1, 32, 0, &op) == PSTAB_ERR_INVALID_ARGUMENT);
    CHECK(pstab_operator_create(1e-2, 1, 32, 0, nullptr) == PSTAB_ERR_INVALID_ARGUMENT);

    pstab_calibration c{};
    CHECK(pstab_calibration_load("/nonexistent/calibration.txt", &c) == PSTAB_ERR_IO);

    REQUIRE(pstab_operator_create(1e-2, 1, 32, 0, &op) == PSTAB_OK);
    CHECK(std::string(pstab_last_error()).empty());
    CHECK(pstab_operator_dim(op) == 31);
    std::vector<double> re(10), im(10);
    CHECK(pstab_operator_spectrum(op, re.data(), im.data(), 10) == PSTAB_ERR_RANGE);
    const double bad_times[] = {1.0, 2.0};
    double norms[2];
    CHECK(pstab_operator_semigroup(op, bad_times, 2, norms) == PSTAB_ERR_INVALID_ARGUMENT);
    pstab_operator_destroy(op);
    pstab_operator_destroy(nullptr);
}

TEST_CASE("operator queries through the C interface")
{
    pstab_operator* op = nullptr;
    REQUIRE(pstab_operator_create(1e-2, 1, 32, 1, &op) == PSTAB_OK);
    const int n = pstab_operator_dim(op);
    std::vector<double> re(n), im(n);
    REQUIRE(pstab_operator_spectrum(op, re.data(), im.data(), n) == PSTAB_OK);
    const double lowest = 1e-2 * (1.0 + M_PI * M_PI / 4.0);
    CHECK(re[0] == doctest::Approx(lowest).epsilon(1e-8));
    double psi = 0.0, mu = 0.0, smin = 0.0;
    REQUIRE(pstab_operator_psi(op, &psi, &mu) == PSTAB_OK);
    CHECK(psi == doctest::Approx(lowest).epsilon(1e-8));
    REQUIRE(pstab_operator_sigma_min(op, 0.0, &smin) == PSTAB_OK);
    CHECK(smin == doctest::Approx(lowest).epsilon(1e-8));
    const double times[] = {0.0, 10.0};
    double norms[2];
    REQUIRE(pstab_operator_semigroup(op, times, 2, norms) == PSTAB_OK);
    CHECK(norms[0] == 1.0);
    CHECK(norms[1] == doctest::Approx(std::exp(-10.0 * lowest)).epsilon(1e-9));

    pstab_resolvent_report* r = nullptr;
    REQUIRE(pstab_resolvent_sweep(op, -1.0, 1.0, 5, &r) == PSTAB_OK);
    CHECK(pstab_resolvent_report_size(r) == 5);
    double m, s, rn, sn;
    int flagged;
    REQUIRE(pstab_resolvent_report_row(r, 2, &m, &s, &rn, &sn, &flagged) == PSTAB_OK);
    CHECK(m == 0.0);
    CHECK(rn == doctest::Approx(1.0 / s));
    CHECK(sn == doctest::Approx(rn * 0.1));
    CHECK(flagged == 0);
    CHECK(pstab_resolvent_report_row(r, 5, &m, &s, &rn, &sn, &flagged) == PSTAB_ERR_RANGE);
    pstab_resolvent_report_destroy(r);
    pstab_operator_destroy(op);
}

TEST_CASE("fits through the C interface")
{
    std::vector<double> t, y;
    for (int i = 0; i < 40; ++i) {
        t.push_back(i);
        y.push_back(0.4 * std::exp(-0.3 * i));
    }
    pstab_decay_fit fit{};
    REQUIRE(pstab_fit_decay(t.data(), y.data(), 40, &fit) == PSTAB_OK);
    CHECK(fit.c_fit == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(pstab_fit_decay(t.data(), y.data(), 4, &fit) == PSTAB_ERR_INVALID_ARGUMENT);
    double slope = 0.0;
    const double x[] = {1.0, 10.0, 100.0};
    const double z[] = {2.0, 20.0, 200.0};
    REQUIRE(pstab_loglog_slope(x, z, 3, &slope) == PSTAB_OK);
    CHECK(slope == doctest::Approx(1.0));
    CHECK(pstab_gearhart_pruss_bound(0.0, 1.0) == doctest::Approx(std::exp(M_PI / 2.0)));
}

TEST_CASE("lemma suite through the C interface")
{
    pstab_lemma_config cfg;
    pstab_lemma_config_default(&cfg);
    cfg.n_draws = 3;
    cfg.n_random_geoms = 5;
    const double y2[] = {0.5};
    const double delta[] = {0.1};
    cfg.y2_values = y2;
    cfg.n_y2 = 1;
    cfg.delta_values = delta;
    cfg.n_delta = 1;
    REQUIRE(pstab_calibration_load(pstab_default_calibration_path(), &cfg.calibration) == PSTAB_OK);
    pstab_lemma_report* r = nullptr;
    REQUIRE(pstab_lemma_suite_run(&cfg, &r) == PSTAB_OK);
    CHECK(pstab_lemma_report_failures(r) == 0);
    CHECK(pstab_lemma_report_checks(r) > 0);
    const int lines = pstab_lemma_report_line_count(r);
    REQUIRE(lines >= 5);
    CHECK(std::string(pstab_lemma_report_line(r, lines - 1)).find("P-bounds") != std::string::npos);
    CHECK(pstab_lemma_report_line(r, lines) == nullptr);
    pstab_lemma_report_destroy(r);

    cfg.n_draws = 0;
    CHECK(pstab_lemma_suite_run(&cfg, &r) == PSTAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulation and threshold through the C interface")
{
    pstab_dns_config cfg;
    pstab_dns_config_default(&cfg);
    cfg.nu = 1e-2;
    cfg.x_modes = 4;
    cfg.n_intervals = 16;
    cfg.t_end = 10.0;
    cfg.amplitude = 1e-3;
    cfg.c_fit = 0.2;
    pstab_dns_result* r = nullptr;
    REQUIRE(pstab_dns_run(&cfg, &r) == PSTAB_OK);
    const int n = pstab_dns_result_samples(r);
    CHECK(n >= 2);
    double t, nz, mn, ur, xn;
    REQUIRE(pstab_dns_result_sample(r, 0, &t, &nz, &mn, &ur, &xn) == PSTAB_OK);
    CHECK(t == 0.0);
    CHECK(nz == doctest::Approx(1e-3 * std::sqrt(M_PI)));
    CHECK(pstab_dns_result_sample(r, n, &t, &nz, &mn, &ur, &xn) == PSTAB_ERR_RANGE);
    pstab_dns_summary s{};
    REQUIRE(pstab_dns_result_summary(r, &s) == PSTAB_OK);
    CHECK(s.n_steps > 0);
    CHECK(s.dt * s.n_steps == doctest::Approx(10.0));
    CHECK(s.c_prime == doctest::Approx(0.08));
    pstab_dns_result_destroy(r);

    cfg.dt = 5.0;
    CHECK(pstab_dns_run(&cfg, &r) == PSTAB_ERR_INVALID_ARGUMENT);
    cfg.dt = 0.0;
    cfg.t_end = 40.0;

    pstab_threshold_table* tab = nullptr;
    REQUIRE(pstab_threshold_run(&cfg, 1e-2, 1e-3, 2e-3, 2, &tab) == PSTAB_OK);
    pstab_sweep_status st;
    double a_crit;
    REQUIRE(pstab_threshold_table_outcome(tab, &st, &a_crit) == PSTAB_OK);
    CHECK(st == PSTAB_SWEEP_STABLE_TO_CAP);
    CHECK(pstab_threshold_table_size(tab) == 2);
    pstab_threshold_row row{};
    REQUIRE(pstab_threshold_table_row(tab, 0, &row) == PSTAB_OK);
    CHECK(row.stable == 1);
    pstab_threshold_table_destroy(tab);

    double c = 0.0;
    REQUIRE(pstab_linear_decay_rate(1e-2, 16, &c) == PSTAB_OK);
    CHECK(c > 0.0);
}
