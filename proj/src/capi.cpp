// SPDX-License-Identifier: Apache-2.0
#include "pstab.h"

#include <cmath>
#include <ios>
#include <stdexcept>
#include <string>
#include <vector>

#include "pstab/calibration.hpp"
#include "pstab/dns.hpp"
#include "pstab/lemmas.hpp"
#include "pstab/linop.hpp"
#include "pstab/spectral_analysis.hpp"

#ifndef PSTAB_VERSION_STRING
#define PSTAB_VERSION_STRING "0.0.0"
#endif
#ifndef PSTAB_CALIBRATION_PATH
#define PSTAB_CALIBRATION_PATH "calibration.txt"
#endif

struct pstab_operator {
    pstab::ModeOperator op;
};

struct pstab_resolvent_report {
    pstab::ResolventReport report;
};

struct pstab_lemma_report {
    pstab::LemmaSuiteResult result;
};

struct pstab_dns_result {
    pstab::dns::RunDiagnostics diag;
};

struct pstab_threshold_table {
    std::vector<pstab::dns::ThresholdRun> rows;
    pstab::dns::SweepOutcome outcome;
};

namespace {

thread_local std::string last_error;

pstab_status fail(pstab_status code, const std::string& message)
{
    last_error = message;
    return code;
}

template <class F>
pstab_status guarded(F&& body)
{
    try {
        last_error.clear();
        body();
        return PSTAB_OK;
    } catch (const std::invalid_argument& e) {
        return fail(PSTAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(PSTAB_ERR_RANGE, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(PSTAB_ERR_IO, e.what());
    } catch (const std::runtime_error& e) {
        return fail(PSTAB_ERR_NUMERICAL, e.what());
    } catch (const std::exception& e) {
        return fail(PSTAB_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PSTAB_ERR_INTERNAL, "unknown exception");
    }
}

void require(bool ok, const char* message)
{
    if (!ok)
        throw std::invalid_argument(message);
}

pstab::dns::RunConfig to_run_config(const pstab_dns_config& c)
{
    pstab::dns::RunConfig r;
    r.nu = c.nu;
    r.x_modes = c.x_modes;
    r.n_intervals = c.n_intervals;
    r.dt = c.dt;
    r.t_end = c.t_end;
    r.amplitude = c.amplitude;
    require(c.shape == PSTAB_SHAPE_SINCOS || c.shape == PSTAB_SHAPE_RANDOM, "unknown shape");
    r.shape = c.shape == PSTAB_SHAPE_SINCOS ? pstab::dns::Shape::SinCos
                                            : pstab::dns::Shape::RandomModes;
    r.seed = c.seed;
    r.c_prime_factor = c.c_prime_factor;
    if (c.c_fit > 0.0)
        r.c_fit = c.c_fit;
    r.output_interval = c.output_interval;
    r.linearized = c.linearized != 0;
    r.max_amplification = c.max_amplification;
    r.end_fraction = c.end_fraction;
    return r;
}

}  // namespace

extern "C" {

const char* pstab_last_error(void) { return last_error.c_str(); }
const char* pstab_version(void) { return PSTAB_VERSION_STRING; }
const char* pstab_default_calibration_path(void) { return PSTAB_CALIBRATION_PATH; }

pstab_status pstab_operator_create(double nu, int k, int n_intervals, int diffusion_only,
                                   pstab_operator** out)
{
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = nullptr;
        const auto assembly = diffusion_only ? pstab::Assembly::DiffusionOnly : pstab::Assembly::Full;
        auto op = pstab::assemble(pstab::Discretization::make(n_intervals), {nu, k}, assembly);
        *out = new pstab_operator{std::move(op)};
    });
}

void pstab_operator_destroy(pstab_operator* op) { delete op; }

int pstab_operator_dim(const pstab_operator* op)
{
    return op ? static_cast<int>(op->op.dim()) : 0;
}

pstab_status pstab_operator_spectrum(const pstab_operator* op, double* re, double* im, int capacity)
{
    return guarded([&] {
        require(op && re && im, "null argument");
        if (capacity < op->op.dim())
            throw std::out_of_range("spectrum: capacity below operator dimension");
        const auto ev = pstab::spectrum(op->op);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            re[i] = ev[i].real();
            im[i] = ev[i].imag();
        }
    });
}

pstab_status pstab_operator_sigma_min(const pstab_operator* op, double mu, double* out)
{
    return guarded([&] {
        require(op && out, "null argument");
        *out = pstab::sigma_min(op->op, mu);
    });
}

pstab_status pstab_operator_psi(const pstab_operator* op, double* psi, double* mu_star)
{
    return guarded([&] {
        require(op && psi, "null argument");
        const auto r = pstab::psi_bound(op->op);
        *psi = r.psi;
        if (mu_star)
            *mu_star = r.mu_star;
    });
}

pstab_status pstab_operator_semigroup(const pstab_operator* op, const double* times, int n,
                                      double* norms)
{
    return guarded([&] {
        require(op && times && norms && n > 0, "null argument or empty time list");
        const auto s = pstab::semigroup_norms(op->op, std::vector<double>(times, times + n));
        for (int i = 0; i < n; ++i)
            norms[i] = s.norms[i];
    });
}

pstab_status pstab_resolvent_sweep(const pstab_operator* op, double mu_min, double mu_max, int n_mu,
                                   pstab_resolvent_report** out)
{
    return guarded([&] {
        require(op && out, "null argument");
        *out = nullptr;
        *out = new pstab_resolvent_report{pstab::resolvent_sweep(op->op, mu_min, mu_max, n_mu)};
    });
}

void pstab_resolvent_report_destroy(pstab_resolvent_report* r) { delete r; }

int pstab_resolvent_report_size(const pstab_resolvent_report* r)
{
    return r ? static_cast<int>(r->report.mu_grid.size()) : 0;
}

pstab_status pstab_resolvent_report_row(const pstab_resolvent_report* r, int i, double* mu,
                                        double* sigma_min, double* resolvent_norm,
                                        double* scaled_norm, int* flagged)
{
    return guarded([&] {
        require(r != nullptr, "null report");
        const auto& rep = r->report;
        if (i < 0 || i >= static_cast<int>(rep.mu_grid.size()))
            throw std::out_of_range("resolvent report: row index out of range");
        if (mu)
            *mu = rep.mu_grid[i];
        if (sigma_min)
            *sigma_min = rep.sigma_min[i];
        if (resolvent_norm)
            *resolvent_norm = rep.resolvent_norm[i];
        if (scaled_norm)
            *scaled_norm = rep.scaled_norm[i];
        if (flagged)
            *flagged = rep.flagged[i] ? 1 : 0;
    });
}

double pstab_gearhart_pruss_bound(double t, double psi) { return pstab::gearhart_pruss_bound(t, psi); }

pstab_status pstab_fit_decay(const double* times, const double* norms, int n, pstab_decay_fit* out)
{
    return guarded([&] {
        require(times && norms && out && n > 0, "null argument or empty series");
        pstab::DecaySeries s{{times, times + n}, {norms, norms + n}};
        const auto f = pstab::fit_decay(s);
        *out = {f.c_fit, f.log_prefactor, f.fit_window.first, f.fit_window.second, f.residual,
                f.n_samples};
    });
}

pstab_status pstab_loglog_slope(const double* x, const double* y, int n, double* slope)
{
    return guarded([&] {
        require(x && y && slope && n > 0, "null argument or empty series");
        *slope = pstab::loglog_slope({x, x + n}, {y, y + n});
    });
}

pstab_status pstab_calibration_load(const char* path, pstab_calibration* out)
{
    return guarded([&] {
        require(path && out, "null argument");
        const auto c = pstab::Calibration::load(path);
        *out = {c.c_resolvent, c.c_hardy, c.c_p, c.c_u};
    });
}

void pstab_lemma_config_default(pstab_lemma_config* cfg)
{
    if (!cfg)
        return;
    const pstab::LemmaSuiteConfig d;
    *cfg = {};
    cfg->seed = d.seed;
    cfg->n_draws = d.n_draws;
    cfg->n_sub = d.n_sub;
    cfg->corpus_y2 = d.corpus_y2;
    cfg->n_random_geoms = d.n_random_geoms;
}

pstab_status pstab_lemma_suite_run(const pstab_lemma_config* cfg, pstab_lemma_report** out)
{
    return guarded([&] {
        require(cfg && out, "null argument");
        *out = nullptr;
        pstab::LemmaSuiteConfig c;
        c.seed = cfg->seed;
        c.n_draws = cfg->n_draws;
        c.n_sub = cfg->n_sub;
        if (cfg->k_values)
            c.k_values.assign(cfg->k_values, cfg->k_values + cfg->n_k);
        c.corpus_y2 = cfg->corpus_y2;
        if (cfg->y2_values)
            c.y2_values.assign(cfg->y2_values, cfg->y2_values + cfg->n_y2);
        if (cfg->delta_values)
            c.delta_values.assign(cfg->delta_values, cfg->delta_values + cfg->n_delta);
        c.n_random_geoms = cfg->n_random_geoms;
        c.calibration = {cfg->calibration.c_resolvent, cfg->calibration.c_hardy,
                         cfg->calibration.c_p, cfg->calibration.c_u};
        c.inject_violation = cfg->inject_violation != 0;
        *out = new pstab_lemma_report{pstab::run_lemma_suite(c)};
    });
}

void pstab_lemma_report_destroy(pstab_lemma_report* r) { delete r; }

int pstab_lemma_report_line_count(const pstab_lemma_report* r)
{
    return r ? static_cast<int>(r->result.lines.size()) : 0;
}

const char* pstab_lemma_report_line(const pstab_lemma_report* r, int i)
{
    if (!r || i < 0 || i >= static_cast<int>(r->result.lines.size()))
        return nullptr;
    return r->result.lines[i].c_str();
}

int pstab_lemma_report_checks(const pstab_lemma_report* r) { return r ? r->result.n_checks : 0; }
int pstab_lemma_report_failures(const pstab_lemma_report* r) { return r ? r->result.n_failed : 0; }

void pstab_dns_config_default(pstab_dns_config* cfg)
{
    if (!cfg)
        return;
    const pstab::dns::RunConfig d;
    *cfg = {};
    cfg->nu = d.nu;
    cfg->x_modes = d.x_modes;
    cfg->n_intervals = d.n_intervals;
    cfg->dt = d.dt;
    cfg->t_end = d.t_end;
    cfg->amplitude = d.amplitude;
    cfg->shape = PSTAB_SHAPE_SINCOS;
    cfg->seed = d.seed;
    cfg->c_prime_factor = d.c_prime_factor;
    cfg->c_fit = 0.0;
    cfg->output_interval = d.output_interval;
    cfg->linearized = 0;
    cfg->max_amplification = d.max_amplification;
    cfg->end_fraction = d.end_fraction;
}

pstab_status pstab_dns_run(const pstab_dns_config* cfg, pstab_dns_result** out)
{
    return guarded([&] {
        require(cfg && out, "null argument");
        *out = nullptr;
        *out = new pstab_dns_result{pstab::dns::run(to_run_config(*cfg))};
    });
}

void pstab_dns_result_destroy(pstab_dns_result* r) { delete r; }

int pstab_dns_result_samples(const pstab_dns_result* r)
{
    return r ? static_cast<int>(r->diag.times.size()) : 0;
}

pstab_status pstab_dns_result_sample(const pstab_dns_result* r, int i, double* t,
                                     double* nonzero_norm, double* mean_norm, double* uinf_ratio,
                                     double* xnorm_sq)
{
    return guarded([&] {
        require(r != nullptr, "null result");
        const auto& d = r->diag;
        if (i < 0 || i >= static_cast<int>(d.times.size()))
            throw std::out_of_range("dns result: sample index out of range");
        if (t)
            *t = d.times[i];
        if (nonzero_norm)
            *nonzero_norm = d.nonzero_norm[i];
        if (mean_norm)
            *mean_norm = d.mean_norm[i];
        if (uinf_ratio)
            *uinf_ratio = d.uinf_ratio[i];
        if (xnorm_sq)
            *xnorm_sq = d.xnorm_sq[i];
    });
}

pstab_status pstab_dns_result_summary(const pstab_dns_result* r, pstab_dns_summary* out)
{
    return guarded([&] {
        require(r && out, "null argument");
        const auto& d = r->diag;
        *out = {d.dt, d.n_steps, d.c_prime, d.max_amplification, d.end_fraction,
                d.blew_up ? 1 : 0, d.stable ? 1 : 0, d.decay_rate};
    });
}

pstab_status pstab_linear_decay_rate(double nu, int n_intervals, double* out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = pstab::dns::linear_decay_rate(nu, n_intervals);
    });
}

pstab_status pstab_threshold_run(const pstab_dns_config* base, double nu, double scaled_lo,
                                 double scaled_hi, int iterations, pstab_threshold_table** out)
{
    return guarded([&] {
        require(base && out, "null argument");
        require(iterations >= 0, "iterations must be >= 0");
        *out = nullptr;
        pstab::dns::SweepConfig sc;
        sc.base = to_run_config(*base);
        sc.scaled_lo = scaled_lo;
        sc.scaled_hi = scaled_hi;
        sc.iterations = iterations;
        auto* t = new pstab_threshold_table{};
        try {
            t->outcome = pstab::dns::threshold_for_nu(sc, nu, t->rows);
        } catch (...) {
            delete t;
            throw;
        }
        *out = t;
    });
}

void pstab_threshold_table_destroy(pstab_threshold_table* t) { delete t; }

int pstab_threshold_table_size(const pstab_threshold_table* t)
{
    return t ? static_cast<int>(t->rows.size()) : 0;
}

pstab_status pstab_threshold_table_row(const pstab_threshold_table* t, int i,
                                       pstab_threshold_row* out)
{
    return guarded([&] {
        require(t && out, "null argument");
        if (i < 0 || i >= static_cast<int>(t->rows.size()))
            throw std::out_of_range("threshold table: row index out of range");
        const auto& r = t->rows[i];
        *out = {r.nu, r.amplitude, r.gamma_scaled_amp, r.stable ? 1 : 0, r.max_amplification,
                r.end_fraction};
    });
}

pstab_status pstab_threshold_table_outcome(const pstab_threshold_table* t,
                                           pstab_sweep_status* status, double* a_crit)
{
    return guarded([&] {
        require(t && status, "null argument");
        switch (t->outcome.status) {
        case pstab::dns::SweepStatus::Boundary: *status = PSTAB_SWEEP_BOUNDARY; break;
        case pstab::dns::SweepStatus::StableToCap: *status = PSTAB_SWEEP_STABLE_TO_CAP; break;
        default: *status = PSTAB_SWEEP_BRACKET_INVALID; break;
        }
        if (a_crit)
            *a_crit = t->outcome.a_crit;
    });
}

}  // extern "C"
