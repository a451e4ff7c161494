// SPDX-License-Identifier: Apache-2.0
// Regenerates data/calibration.txt: each constant is 1.2x the largest ratio
// seen by a brute-force sweep finer than the one the tests run.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pstab/calibration.hpp"
#include "pstab/dns.hpp"
#include "pstab/lemmas.hpp"
#include "pstab/linop.hpp"
#include "pstab/spectral_analysis.hpp"

using namespace pstab;

namespace {

constexpr double margin = 1.2;

double resolvent_ratio_max()
{
    double worst = 0.0;
    const auto disc = Discretization::make(64);
    for (double nu : {1e-2, 1e-3, 1e-4, 1e-5}) {
        for (int k : {1, 2, 4}) {
            const auto op = assemble(disc, {nu, k});
            // max_mu ||R(i mu)|| = 1 / inf_mu sigma_min.
            const auto psi = psi_bound(op);
            const double scaled = std::sqrt(nu * k) / psi.psi;
            std::printf("  resolvent nu=%-6g k=%d  scaled max %.6f\n", nu, k, scaled);
            worst = std::max(worst, scaled);
        }
    }
    return worst;
}

double hardy_ratio_max(std::uint64_t seed)
{
    double worst = 0.0;
    std::vector<double> y2s = default_y2_sweep();
    y2s.push_back(0.5);
    int draw = 0;
    for (double y2 : y2s) {
        const auto geom = CriticalLayerGeom::make(y2, 0.5);
        const auto sub = SubGrid::make(128, geom.y1, geom.y2);
        for (int i = 0; i < 100; ++i, ++draw) {
            const auto pair =
                pair_from_phi(sub, random_dirichlet_polynomial(geom, seed + 104729 * draw, true), 1);
            worst = std::max(worst, check_hardy(pair, geom).ratio);
        }
    }
    std::printf("  hardy: %d draws, max ratio %.6f\n", draw, worst);
    return worst;
}

double p_ratio_max()
{
    double worst = 0.0;
    for (int i = 0; i <= 36; ++i) {
        const double y2 = 0.05 + 0.9 * i / 36.0;
        for (int j = 0; j <= 48; ++j) {
            const double delta = std::pow(10.0, -3.0 + 3.0 * j / 48.0);
            const auto r = check_p_bounds(CriticalLayerGeom::make(y2, std::min(delta, 1.0)));
            worst = std::max(worst, r.max_ratio());
        }
    }
    std::printf("  P bounds: max ratio %.6f\n", worst);
    return worst;
}

// sup |u| / ||omega|| for the k != 0 part: random fields plus, per mode, the
// exact maximiser of each point functional omega_k -> u(y_j).
double velocity_ratio_max(std::uint64_t seed)
{
    const int kk = 16;
    const int n = 48;
    double worst = 0.0;
    for (int draw = 0; draw < 400; ++draw) {
        auto s = dns::initial_state(dns::Shape::RandomModes, 1.0, kk, n, seed + draw);
        const auto v = dns::stream_solve(s);
        worst = std::max(worst, dns::nonzero_velocity_sup(v, kk) / dns::nonzero_norm(s));
    }
    std::printf("  velocity: random fields max %.6f\n", worst);

    auto base = dns::VorticityState::zero(kk, n);
    const auto& grid = *base.grid;
    const int m = n - 1;
    const RealVector sw = grid.interior_weights().array().sqrt().matrix();
    for (int k = 1; k <= base.kept_modes(); ++k) {
        HelmholtzSolver h(grid, *base.ops, double(k) * k);
        const RealMatrix hinv = h.interior_matrix().partialPivLu().solve(RealMatrix::Identity(m, m));
        RealMatrix d1_full = base.ops->d1.block(0, 1, n + 1, m);
        const RealMatrix u1 = d1_full * hinv;  // interior omega -> u1 at every node
        for (int row = 0; row < n + 1; ++row) {
            // Maximiser of |a . w| under sum w_j |w_j|^2 = 1 is a_j / w_j.
            RealVector a = u1.row(row).transpose();
            for (int variant = 0; variant < 2; ++variant) {
                if (variant == 1) {
                    if (row == 0 || row == n)
                        continue;
                    a = double(k) * hinv.row(row - 1).transpose();
                }
                ComplexVector w = with_zero_ends((a.array() / sw.array().square()).matrix().cast<cplx>());
                auto s = dns::VorticityState::zero(kk, n);
                s.modes[k] = w;
                const auto v = dns::stream_solve(s);
                worst = std::max(worst, dns::nonzero_velocity_sup(v, kk) / dns::nonzero_norm(s));
            }
        }
    }
    std::printf("  velocity: with point maximisers %.6f\n", worst);
    return worst;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Regenerate the frozen calibration constants"};
    std::string out = "data/calibration.txt";
    std::uint64_t seed = 977;
    app.add_option("--out", out, "calibration file to write");
    app.add_option("--seed", seed, "seed for the calibration corpora");
    CLI11_PARSE(app, argc, argv);

    std::printf("calibrating (margin %.1f)\n", margin);
    Calibration c;
    c.c_resolvent = margin * resolvent_ratio_max();
    c.c_hardy = margin * hardy_ratio_max(seed);
    c.c_p = margin * p_ratio_max();
    c.c_u = margin * velocity_ratio_max(seed);
    c.save(out, "SPDX-License-Identifier: Apache-2.0\n"
                "Frozen constants: 1.2 x the largest ratio from pstab-calibrate (seed " +
                    std::to_string(seed) + ").");
    std::printf("wrote %s\n", out.c_str());
    return 0;
}
