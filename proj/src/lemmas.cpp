// SPDX-License-Identifier: Apache-2.0
#include "pstab/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "json.hpp"

namespace pstab {

CriticalLayerGeom CriticalLayerGeom::make(double y2, double delta)
{
    if (!(y2 >= 0.0 && y2 <= 1.0))
        throw std::invalid_argument("critical layer: y2 must lie in [0, 1]");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("critical layer: delta must lie in (0, 1]");
    CriticalLayerGeom g;
    g.y2 = y2;
    g.y1 = -y2;
    g.lambda = 1.0 - y2 * y2;
    g.delta = delta;
    return g;
}

SubGrid SubGrid::make(int n_intervals, double a, double b)
{
    auto grid = std::make_shared<const ChebyshevGrid>(make_grid_on(n_intervals, a, b));
    auto ops = std::make_shared<const DiffOp>(diff_ops(*grid));
    return {std::move(grid), std::move(ops)};
}

FieldPair pair_from_phi(const SubGrid& sub, const std::function<cplx(double)>& phi, int k)
{
    FieldPair p{sub.grid, sub.ops, ComplexVector(sub.grid->n_points()), {}, k};
    for (int j = 0; j < sub.grid->n_points(); ++j)
        p.phi[j] = phi(sub.grid->nodes()[j]);
    p.w = sub.ops->d2.cast<cplx>() * p.phi - double(k) * k * p.phi;
    return p;
}

FieldPair pair_from_w(const SubGrid& sub, const std::function<cplx(double)>& w, int k)
{
    FieldPair p{sub.grid, sub.ops, {}, ComplexVector(sub.grid->n_points()), k};
    for (int j = 0; j < sub.grid->n_points(); ++j)
        p.w[j] = w(sub.grid->nodes()[j]);
    HelmholtzSolver solver(*sub.grid, *sub.ops, double(k) * k);
    p.phi = solver.solve(p.w.segment(1, sub.grid->n_intervals() - 1));
    return p;
}

FieldPair resample(const FieldPair& pair, int n_intervals)
{
    const auto sub = SubGrid::make(n_intervals, pair.grid->lower(), pair.grid->upper());
    FieldPair out{sub.grid, sub.ops, {}, {}, pair.k};
    out.phi = resample(*pair.grid, pair.phi, *sub.grid);
    out.w = resample(*pair.grid, pair.w, *sub.grid);
    return out;
}

namespace {

void require_span(const FieldPair& pair, double y1, double y2, const char* who)
{
    const double tol = 1e-13;
    if (std::abs(pair.grid->lower() - y1) > tol || std::abs(pair.grid->upper() - y2) > tol)
        throw std::invalid_argument(std::string(who) + ": pair grid must span [y1, y2]");
}

double weighted_sum(const ChebyshevGrid& g, const RealVector& f)
{
    return g.quad_weights().dot(f);
}

// phi / g on the layer, with the end values taken as phi' / g'.
ComplexVector layer_quotient(const FieldPair& pair, const CriticalLayerGeom& geom)
{
    const auto& y = pair.grid->nodes();
    const int n = pair.grid->n_intervals();
    const ComplexVector dphi = pair.ops->d1.cast<cplx>() * pair.phi;
    ComplexVector q(n + 1);
    for (int j = 1; j < n; ++j)
        q[j] = pair.phi[j] / geom.symbol(y[j]);
    q[0] = dphi[0] / (-2.0 * y[0]);
    q[n] = dphi[n] / (-2.0 * y[n]);
    return q;
}

struct KeyTerms {
    double weighted_derivative;  // int g^2 |(phi/g)'|^2
    double phi_sq;               // int |phi|^2
    double quotient_sq;          // int |phi/g|^2
};

KeyTerms key_terms(const FieldPair& pair, const CriticalLayerGeom& geom)
{
    const auto& grid = *pair.grid;
    const ComplexVector q = layer_quotient(pair, geom);
    const ComplexVector dq = pair.ops->d1.cast<cplx>() * q;
    RealVector g2 = grid.nodes().unaryExpr([&](double y) { return geom.symbol(y); });
    g2 = g2.array().square();
    return {weighted_sum(grid, (g2.array() * dq.array().abs2()).matrix()),
            weighted_sum(grid, pair.phi.array().abs2().matrix()),
            weighted_sum(grid, q.array().abs2().matrix())};
}

double key_lhs(const FieldPair& pair, const CriticalLayerGeom& geom)
{
    const auto t = key_terms(pair, geom);
    return 2.0 * (t.weighted_derivative + double(pair.k) * pair.k * t.phi_sq);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol)
{
    if (!(b > a))
        return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, tol, &err);
}

}  // namespace

PEquality p_equality(const CriticalLayerGeom& geom)
{
    // Extended precision: the left side cancels to O(delta (2 y2 + delta)).
    const long double d = geom.delta;
    const long double lam = 1.0L - static_cast<long double>(geom.y2) * geom.y2;
    const long double shifted = static_cast<long double>(geom.y1) - d;
    PEquality r;
    r.lhs = static_cast<double>(1.0L / std::fabs(1.0L - shifted * shifted - lam));
    r.rhs = 1.0 / ((geom.width() + geom.delta) * geom.delta);
    r.rel_error = std::abs(r.lhs - r.rhs) / r.rhs;
    return r;
}

EnergyIdentityReport check_energy_identity(const FieldPair& pair, double y1, double y2)
{
    require_span(pair, y1, y2, "check_energy_identity");
    const auto& grid = *pair.grid;
    const ComplexVector dphi = pair.ops->d1.cast<cplx>() * pair.phi;
    const cplx pw = l2_inner(grid, pair.phi, pair.w);

    EnergyIdentityReport r;
    r.lhs = -pw.real();
    r.imag_part = pw.imag();
    r.rhs = weighted_sum(grid, dphi.array().abs2().matrix()) +
            double(pair.k) * pair.k * weighted_sum(grid, pair.phi.array().abs2().matrix());
    r.gap = std::abs(r.lhs - r.rhs);
    r.boundary_value = std::max(std::abs(pair.phi[0]), std::abs(pair.phi[grid.n_intervals()]));
    r.boundary_ok = r.boundary_value <= 1e-10;
    r.passed = r.gap <= 1e-8 * (std::abs(r.lhs) + std::abs(r.rhs));
    return r;
}

EnergyKeyReport check_energy_key(const FieldPair& pair, const CriticalLayerGeom& geom)
{
    require_span(pair, geom.y1, geom.y2, "check_energy_key");
    if (!(geom.y2 > 0.0))
        throw std::invalid_argument("check_energy_key: empty critical layer");
    const auto& grid = *pair.grid;
    RealVector g = grid.nodes().unaryExpr([&](double y) { return geom.symbol(y); });

    EnergyKeyReport r;
    r.lhs = key_lhs(pair, geom);
    r.rhs = weighted_sum(grid, (g.array() * pair.w.array().abs2()).matrix()) +
            2.0 * l2_inner(grid, pair.phi, pair.w).real();
    r.slack = r.rhs - r.lhs;

    const double fine = key_lhs(resample(pair, 2 * grid.n_intervals()), geom);
    r.refinement_change = std::abs(fine - r.lhs) / std::max(std::abs(fine), 1e-300);
    r.resolved = r.refinement_change <= 1e-6 || (fine == 0.0 && r.lhs == 0.0);
    r.passed = r.slack >= -1e-8 * std::abs(r.rhs);
    return r;
}

HardyReport check_hardy(const FieldPair& pair, const CriticalLayerGeom& geom)
{
    if (!(geom.y2 > 0.0))
        throw std::invalid_argument("check_hardy: empty critical layer (y1 = y2 = 0)");
    require_span(pair, geom.y1, geom.y2, "check_hardy");
    auto terms = [&](const FieldPair& p) {
        const auto t = key_terms(p, geom);
        const double w = geom.width();
        HardyReport h;
        h.lhs = t.quotient_sq;
        h.derivative_term = t.weighted_derivative / (w * w);
        h.point_term = std::norm(interpolate(*p.grid, p.phi, 0.0)) / (w * w * w);
        const double rhs = h.derivative_term + h.point_term;
        h.ratio = rhs > 0.0 ? h.lhs / rhs : (h.lhs == 0.0 ? 0.0 : HUGE_VAL);
        return h;
    };
    HardyReport r = terms(pair);
    const HardyReport fine = terms(resample(pair, 2 * pair.grid->n_intervals()));
    r.refinement_change = std::abs(fine.lhs - r.lhs) / std::max(std::abs(fine.lhs), 1e-300);
    r.resolved = r.refinement_change <= 1e-6 || (fine.lhs == 0.0 && r.lhs == 0.0);
    return r;
}

double outside_integral(const CriticalLayerGeom& geom, const std::function<double(double)>& f,
                        double tol)
{
    return integrate(f, -1.0, geom.y1 - geom.delta, tol) +
           integrate(f, geom.y2 + geom.delta, 1.0, tol);
}

double inner_integral(const CriticalLayerGeom& geom, const std::function<double(double)>& f,
                      double tol)
{
    return integrate(f, geom.y1 + geom.delta, geom.y2 - geom.delta, tol);
}

double PBoundsReport::max_ratio() const
{
    double m = 0.0;
    for (const auto& b : bounds)
        if (b.applicable)
            m = std::max(m, b.ratio);
    return m;
}

PBoundsReport check_p_bounds(const CriticalLayerGeom& geom)
{
    const double d = geom.delta;
    const double w = geom.width();
    PBoundsReport r;
    const auto eq = p_equality(geom);
    r.eq_lhs = eq.lhs;
    r.eq_rhs = eq.rhs;
    r.eq_rel_error = eq.rel_error;

    auto inv_g = [&](double y) { return 1.0 / geom.symbol(y); };
    auto inv_g2 = [&](double y) { const double v = inv_g(y); return v * v; };
    auto inv_abs_g = [&](double y) { return std::abs(inv_g(y)); };
    auto weighted = [&](double y) {
        const double v = 2.0 * y * inv_g2(y);
        return v * v;
    };

    auto make = [](std::string name, double lhs, double rhs, bool applicable = true) {
        return BoundCheck{std::move(name), lhs, rhs, applicable ? lhs / rhs : 0.0, applicable};
    };
    r.bounds.push_back(make("P-L2", std::sqrt(outside_integral(geom, inv_g2)),
                            1.0 / ((w + d) * std::sqrt(d))));
    r.bounds.push_back(make("P-L1", outside_integral(geom, inv_abs_g),
                            (1.0 + std::log(1.0 + w / d)) / (w + d)));
    r.bounds.push_back(make("P-L2-w", std::sqrt(outside_integral(geom, weighted)),
                            1.0 / ((w + d) * std::pow(d, 1.5))));
    const bool inner_ok = w > 0.0 && d < w / 4.0;
    r.bounds.push_back(make("P-L2-in", inner_ok ? std::sqrt(inner_integral(geom, inv_g2)) : 0.0,
                            inner_ok ? 1.0 / (w * std::sqrt(d)) : 1.0, inner_ok));
    return r;
}

std::vector<double> default_delta_sweep()
{
    std::vector<double> d(25);
    for (int i = 0; i < 25; ++i)
        d[i] = std::pow(10.0, -3.0 + 3.0 * i / 24.0);
    d.back() = 1.0;
    return d;
}

std::vector<double> default_y2_sweep()
{
    std::vector<double> y(19);
    for (int i = 0; i < 19; ++i)
        y[i] = 0.05 + 0.05 * i;
    return y;
}

std::function<cplx(double)> random_dirichlet_polynomial(const CriticalLayerGeom& geom,
                                                        std::uint64_t seed, bool vanish_at_centre)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> c(9);
    for (auto& ci : c)
        ci = cplx(u(rng), u(rng));
    if (vanish_at_centre)
        c[0] = 0.0;
    const double scale = geom.y2 > 0.0 ? geom.y2 : 1.0;
    return [c, geom, scale](double y) {
        // Horner in s = y / y2 keeps the coefficients O(1) on the layer.
        const double s = y / scale;
        cplx p = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it)
            p = p * s + *it;
        return geom.symbol(y) * p;
    };
}

LemmaSuiteResult run_lemma_suite(const LemmaSuiteConfig& cfg)
{
    if (cfg.n_draws <= 0 || cfg.k_values.empty())
        throw std::invalid_argument("lemma suite: empty random corpus");
    const auto y2s = cfg.y2_values.empty() ? default_y2_sweep() : cfg.y2_values;
    const auto deltas = cfg.delta_values.empty() ? default_delta_sweep() : cfg.delta_values;
    const auto& cal = cfg.calibration;
    if (!(cal.c_hardy > 0.0) || !(cal.c_p > 0.0))
        throw std::invalid_argument("lemma suite: calibration constants C_hardy and C_P required");

    using nlohmann::json;
    LemmaSuiteResult out;
    auto emit = [&](json j) { out.lines.push_back(j.dump()); };

    struct Tally {
        int count = 0;
        int failed = 0;
        double worst = 0.0;
    };
    Tally identity, key, hardy, peq, pbound;
    double min_key_slack_rel = HUGE_VAL;

    std::mt19937_64 geom_rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (int i = 0; i < cfg.n_draws; ++i) {
        const double drawn = 0.05 + 0.9 * unif(geom_rng);
        const double y2 = cfg.corpus_y2 > 0.0 ? cfg.corpus_y2 : drawn;
        const int k = cfg.k_values[i % cfg.k_values.size()];
        const auto geom = CriticalLayerGeom::make(y2, 0.5);
        const auto sub = SubGrid::make(cfg.n_sub, geom.y1, geom.y2);
        const std::uint64_t field_seed = cfg.seed + 7919 * (i + 1);
        const auto pair = pair_from_phi(sub, random_dirichlet_polynomial(geom, field_seed), k);

        const auto e = check_energy_identity(pair, geom.y1, geom.y2);
        ++identity.count;
        const double rel = e.gap / (std::abs(e.lhs) + std::abs(e.rhs));
        identity.worst = std::max(identity.worst, rel);
        if (!e.passed || !e.boundary_ok) {
            ++identity.failed;
            emit({{"check", "energy_identity"}, {"draw", i}, {"y2", y2}, {"k", k},
                  {"lhs", e.lhs}, {"rhs", e.rhs}, {"gap", e.gap}, {"pass", false}});
        }

        const auto kr = check_energy_key(pair, geom);
        ++key.count;
        min_key_slack_rel = std::min(min_key_slack_rel, kr.slack / std::abs(kr.rhs));
        if (!kr.passed || !kr.resolved) {
            ++key.failed;
            emit({{"check", "energy_key"}, {"draw", i}, {"y2", y2}, {"k", k}, {"lhs", kr.lhs},
                  {"rhs", kr.rhs}, {"slack", kr.slack}, {"resolved", kr.resolved}, {"pass", false}});
        }

        const auto h = check_hardy(
            pair_from_phi(sub, random_dirichlet_polynomial(geom, field_seed, true), k), geom);
        ++hardy.count;
        hardy.worst = std::max(hardy.worst, h.ratio);
        if (!(h.ratio <= cal.c_hardy) || !h.resolved) {
            ++hardy.failed;
            emit({{"check", "hardy"}, {"draw", i}, {"y2", y2}, {"ratio", h.ratio},
                  {"bound", cal.c_hardy}, {"resolved", h.resolved}, {"pass", false}});
        }
    }

    if (cfg.inject_violation) {
        const auto sub = SubGrid::make(cfg.n_sub, -1.0, 1.0);
        auto pair = pair_from_phi(sub, [](double y) { return cplx(1.0 - y * y); }, 1);
        pair.w.array() += 0.25;  // no longer phi'' - k^2 phi
        const auto e = check_energy_identity(pair, -1.0, 1.0);
        ++identity.count;
        if (!e.passed) {
            ++identity.failed;
            emit({{"check", "energy_identity"}, {"draw", "injected"}, {"lhs", e.lhs},
                  {"rhs", e.rhs}, {"gap", e.gap}, {"pass", false}});
        }
    }

    std::mt19937_64 peq_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int i = 0; i < cfg.n_random_geoms; ++i) {
        const double y2 = unif(peq_rng);
        const double delta = 1.0 - unif(peq_rng);  // (0, 1]
        const auto r = p_equality(CriticalLayerGeom::make(y2, delta));
        ++peq.count;
        peq.worst = std::max(peq.worst, r.rel_error);
        if (!(r.rel_error <= 1e-12)) {
            ++peq.failed;
            emit({{"check", "P-eq"}, {"y2", y2}, {"delta", delta}, {"lhs", r.lhs},
                  {"rhs", r.rhs}, {"rel_error", r.rel_error}, {"pass", false}});
        }
    }

    for (double y2 : y2s) {
        for (double delta : deltas) {
            const auto geom = CriticalLayerGeom::make(y2, delta);
            const auto r = check_p_bounds(geom);
            for (const auto& b : r.bounds) {
                if (!b.applicable)
                    continue;
                ++pbound.count;
                pbound.worst = std::max(pbound.worst, b.ratio);
                if (!(b.ratio <= cal.c_p)) {
                    ++pbound.failed;
                    emit({{"check", b.name}, {"y2", y2}, {"delta", delta}, {"lhs", b.lhs},
                          {"rhs", b.rhs}, {"ratio", b.ratio}, {"bound", cal.c_p}, {"pass", false}});
                }
            }
        }
    }

    auto summary = [&](const char* name, const Tally& t, const char* stat, double value) {
        emit({{"check", name}, {"summary", true}, {"count", t.count}, {"failed", t.failed},
              {stat, value}, {"pass", t.failed == 0}});
        out.n_checks += t.count;
        out.n_failed += t.failed;
    };
    summary("energy_identity", identity, "max_rel_gap", identity.worst);
    summary("energy_key", key, "min_rel_slack", min_key_slack_rel);
    summary("hardy", hardy, "max_ratio", hardy.worst);
    summary("P-eq", peq, "max_rel_error", peq.worst);
    summary("P-bounds", pbound, "max_ratio", pbound.worst);
    return out;
}

}  // namespace pstab
