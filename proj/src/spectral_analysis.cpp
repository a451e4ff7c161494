// SPDX-License-Identifier: Apache-2.0
#include "pstab/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace pstab {

namespace {

struct Minimum {
    double lambda;
    double value;
    double lo;
    double hi;
};

// Golden-section search on [lo, hi] for a function that is unimodal there.
template <class F>
Minimum golden_section(F&& f, double lo, double hi, double tol)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    Minimum m{mid, fm, lo, hi};
    if (fc < m.value)
        m = {c, fc, lo, hi};
    if (fd < m.value)
        m = {d, fd, lo, hi};
    return m;
}

constexpr int kCoarseSamples = 201;

}  // namespace

PsiResult psi_bound(const ModeOperator& op, double mu_lo, double mu_hi, double tol)
{
    if (!(mu_lo < mu_hi))
        throw std::invalid_argument("psi_bound: mu_lo < mu_hi required");
    if (!(tol > 0.0))
        throw std::invalid_argument("psi_bound: tol must be positive");

    // Search in lambda = mu / k so that k and -k visit mirrored shifts exactly.
    const int k = op.params().k;
    const double ak = std::abs(k);
    double lo = std::min(mu_lo / k, mu_hi / k);
    double hi = std::max(mu_lo / k, mu_hi / k);
    const double tol_lambda = tol / ak;
    auto f = [&](double lambda) { return sigma_min(op, k * lambda); };

    PsiResult res;
    res.params = op.params();
    for (int attempt = 0; attempt < 2; ++attempt) {
        const double h = (hi - lo) / (kCoarseSamples - 1);
        std::vector<double> lam(kCoarseSamples), val(kCoarseSamples);
        for (int i = 0; i < kCoarseSamples; ++i) {
            lam[i] = lo + h * i;
            val[i] = f(lam[i]);
        }
        const int best =
            static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
        if (best == 0 || best == kCoarseSamples - 1) {
            if (attempt == 1)
                throw std::runtime_error("psi_bound: minimiser on the edge of the widened range");
            const double width = hi - lo;
            if (best == 0)
                lo -= width;
            else
                hi += width;
            res.widened = true;
            continue;
        }

        // sigma_min(k lambda) is |k|-Lipschitz in lambda, so a coarse local
        // minimum more than |k| h above the best sample cannot hold the infimum.
        std::vector<int> candidates;
        for (int i = 1; i < kCoarseSamples - 1; ++i) {
            if (val[i] <= val[i - 1] && val[i] <= val[i + 1] && val[i] - ak * h <= val[best])
                candidates.push_back(i);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](int a, int b) { return val[a] < val[b]; });
        if (candidates.size() > 8)
            candidates.resize(8);

        Minimum winner{lam[best], val[best], lam[best - 1], lam[best + 1]};
        for (int i : candidates) {
            const Minimum m = golden_section(f, lam[i - 1], lam[i + 1], tol_lambda);
            if (m.value < winner.value)
                winner = m;
        }
        res.psi = winner.value;
        res.mu_star = k * winner.lambda;
        res.mu_bracket = {std::min(k * winner.lo, k * winner.hi),
                          std::max(k * winner.lo, k * winner.hi)};
        return res;
    }
    throw std::logic_error("psi_bound: unreachable");
}

PsiResult psi_bound(const ModeOperator& op)
{
    const int k = op.params().k;
    const double a = -2.0 * k;
    const double b = 3.0 * k;
    return psi_bound(op, std::min(a, b), std::max(a, b), 1e-4 * std::abs(k));
}

std::vector<cplx> spectrum(const ModeOperator& op)
{
    Eigen::ComplexEigenSolver<ComplexMatrix> es(op.symmetrized(), false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectrum: eigensolver did not converge");
    std::vector<cplx> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ev;
}

DecaySeries semigroup_norms(const ModeOperator& op, const std::vector<double>& times)
{
    if (times.empty() || times.front() != 0.0)
        throw std::invalid_argument("semigroup_norms: times must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("semigroup_norms: times must be increasing");

    DecaySeries s;
    s.times = times;
    s.norms.reserve(times.size());
    for (double t : times) {
        if (t == 0.0) {
            s.norms.push_back(1.0);
            continue;
        }
        const ComplexMatrix e = (-t * op.symmetrized()).exp();
        const double nrm = Eigen::BDCSVD<ComplexMatrix>(e).singularValues()(0);
        if (!std::isfinite(nrm) || nrm > 1e12)
            throw std::runtime_error("semigroup_norms: norm overflow for an accretive operator");
        s.norms.push_back(nrm);
    }
    return s;
}

double gearhart_pruss_bound(double t, double psi)
{
    return std::exp(-t * psi + std::numbers::pi / 2.0);
}

std::pair<double, double> default_fit_window(const DecaySeries& series, double start_threshold,
                                             double floor)
{
    const auto& t = series.times;
    const auto& n = series.norms;
    if (t.empty())
        return {0.0, 0.0};
    std::size_t first = t.size() - 1;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] < start_threshold) {
            first = i;
            break;
        }
    }
    std::size_t last = first;
    for (std::size_t i = first; i < n.size(); ++i)
        if (n[i] > floor)
            last = i;
    return {t[first], t[last]};
}

DecayFit fit_decay(const DecaySeries& series, std::optional<std::pair<double, double>> window)
{
    if (series.times.size() != series.norms.size())
        throw std::invalid_argument("fit_decay: times and norms differ in length");
    const auto win = window ? *window : default_fit_window(series);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        const double t = series.times[i];
        if (t >= win.first && t <= win.second && series.norms[i] > 0.0) {
            x.push_back(t);
            y.push_back(std::log(series.norms[i]));
        }
    }
    if (x.size() < 8)
        throw std::invalid_argument("fit_decay: fewer than 8 samples in the fit window");

    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    DecayFit fit;
    fit.c_fit = -slope;
    fit.log_prefactor = intercept;
    fit.fit_window = win;
    fit.n_samples = static_cast<int>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(y[i] - (intercept + slope * x[i])));
    return fit;
}

std::vector<double> linspace_times(double t_max, int n)
{
    if (n < 2 || !(t_max > 0.0))
        throw std::invalid_argument("linspace_times: need n >= 2 and t_max > 0");
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = t_max * i / (n - 1);
    return t;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]) - mx;
        sxx += lx * lx;
        sxy += lx * (std::log(y[i]) - my);
    }
    return sxy / sxx;
}

}  // namespace pstab
