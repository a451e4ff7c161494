// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("pstab_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const std::string& env = {})
{
    const std::string cmd = env + " " + PSTAB_CLI_PATH + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::string dir_arg(const fs::path& p) { return "--out '" + p.string() + "'"; }

const char* small_dns = "--set nu=1e-2 --set K=4 --set N=16 --set T_end=20 --set c_fit=0.2";

}  // namespace

TEST_CASE("csv headers of every subcommand")
{
    const auto d = scratch("headers");
    REQUIRE(run("spectrum --set nu=1e-2 --set N=16 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "spectrum.csv") == "k,nu,re_sigma,im_sigma");
    REQUIRE(run("psi-sweep --set nu=1e-2 --set N=16 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "psi_sweep.csv") == "nu,k,psi,mu_star");
    REQUIRE(run("resolvent-sweep --set nu=1e-2 --set N=16 --set n_mu=11 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "resolvent_sweep.csv") == "nu,k,mu,sigma_min,resolvent_norm,scaled_norm");
    REQUIRE(run("semigroup --set nu=1e-2 --set N=16 --set n_t=11 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "semigroup.csv") == "nu,k,t,norm,gp_bound");
    REQUIRE(run(std::string("dns ") + small_dns + " --set amplitude=1e-3 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "dns_diagnostics.csv") == "t,nonzero_norm,mean_norm,uinf_ratio,xnorm_sq");
    REQUIRE(run(std::string("threshold ") + small_dns +
                " --set nu=1e-2 --set amp_lo_scaled=1e-3 --set amp_hi_scaled=2e-3 " + dir_arg(d)) == 0);
    CHECK(first_line(d / "threshold.csv") ==
          "nu,amplitude,gamma_scaled_amp,stable,max_amplification,end_fraction");
    REQUIRE(run("lemma-suite --set n_draws=2 --set n_random_geoms=5 --set y2=0.5 --set delta=0.1 " +
                dir_arg(d)) == 0);
    CHECK(first_line(d / "lemma_suite.jsonl").front() == '{');

    for (const char* m : {"spectrum", "psi_sweep", "resolvent_sweep", "semigroup", "dns_diagnostics",
                          "threshold", "lemma_suite"}) {
        const auto text = slurp(d / (std::string(m) + ".manifest"));
        CHECK(text.find("# pstab ") == 0);
        CHECK(text.find("\ncommand = ") != std::string::npos);
    }
}

TEST_CASE("configuration errors exit with 2")
{
    const auto d = scratch("errors");
    CHECK(run("spectrum --set bogus=1 " + dir_arg(d)) == 2);
    CHECK(run("spectrum --set k=0 --set N=16 " + dir_arg(d)) == 2);
    CHECK(run("spectrum --set nu= " + dir_arg(d)) == 2);
    CHECK(run("spectrum --set N=abc " + dir_arg(d)) == 2);
    CHECK(run("spectrum --config /nonexistent.cfg " + dir_arg(d)) == 2);
    CHECK(run("lemma-suite --set n_draws=0 " + dir_arg(d)) == 2);
    CHECK(run("no-such-command") == 2);
    CHECK(run(std::string("dns ") + small_dns + " --set amplitude=1e-3 --set dt=5 " + dir_arg(d)) == 2);
    CHECK(run("dns --set shape=gauss " + dir_arg(d)) == 2);
    CHECK(run("spectrum --set N=16 " + dir_arg(d), "POISEUILLE_STAB_SEED=xyz") == 0);
    CHECK(run("dns --set amplitude=0 --set N=16 --set K=4 --set T_end=1 " + dir_arg(d),
              "POISEUILLE_STAB_SEED=xyz") == 2);
}

TEST_CASE("flagged numerical failures exit with 3")
{
    const auto d = scratch("failures");
    CHECK(run("lemma-suite --set n_draws=2 --set n_random_geoms=5 --set y2=0.5 --set delta=0.1 "
              "--set inject_violation=1 " + dir_arg(d)) == 3);
    const auto text = slurp(d / "lemma_suite.jsonl");
    CHECK(text.find("injected") != std::string::npos);
}

TEST_CASE("outputs are deterministic and reproducible from the manifest")
{
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto c = scratch("det_c");
    const std::string args = std::string("dns ") + small_dns + " --set amplitude=0.01 --set shape=random ";
    REQUIRE(run(args + dir_arg(a)) == 0);
    REQUIRE(run(args + dir_arg(b)) == 0);
    CHECK(slurp(a / "dns_diagnostics.csv") == slurp(b / "dns_diagnostics.csv"));

    REQUIRE(run("dns --config '" + (a / "dns_diagnostics.manifest").string() + "' " + dir_arg(c)) == 0);
    CHECK(slurp(a / "dns_diagnostics.csv") == slurp(c / "dns_diagnostics.csv"));

    CHECK(run("spectrum --config '" + (a / "dns_diagnostics.manifest").string() + "' " + dir_arg(c)) == 2);
}

TEST_CASE("seed override from the environment is honoured and recorded")
{
    const auto a = scratch("seed_a");
    const auto b = scratch("seed_b");
    const std::string args = std::string("dns ") + small_dns + " --set amplitude=0.01 --set shape=random ";
    REQUIRE(run(args + dir_arg(a), "POISEUILLE_STAB_SEED=42") == 0);
    REQUIRE(run(args + "--set seed=42 " + dir_arg(b)) == 0);
    CHECK(slurp(a / "dns_diagnostics.csv") == slurp(b / "dns_diagnostics.csv"));
    CHECK(slurp(a / "dns_diagnostics.manifest").find("\nseed = 42\n") != std::string::npos);

    const auto c = scratch("seed_c");
    REQUIRE(run(args + dir_arg(c), "POISEUILLE_STAB_SEED=43") == 0);
    CHECK(slurp(a / "dns_diagnostics.csv") != slurp(c / "dns_diagnostics.csv"));
}

TEST_CASE("worker count does not change the output")
{
    const auto a = scratch("jobs_1");
    const auto b = scratch("jobs_4");
    const std::string args = "psi-sweep --set 'nu=1e-2, 1e-3' --set 'k=1, 2' --set N=24 ";
    REQUIRE(run(args + "--jobs 1 " + dir_arg(a)) == 0);
    REQUIRE(run(args + "--jobs 4 " + dir_arg(b)) == 0);
    CHECK(slurp(a / "psi_sweep.csv") == slurp(b / "psi_sweep.csv"));
}

TEST_CASE("shipped configs are accepted")
{
    const auto d = scratch("configs");
    const std::string dir = PSTAB_CONFIG_DIR;
    auto cfg = [&](const std::string& name) { return " --config '" + dir + "/" + name + ".cfg' "; };
    CHECK(run("spectrum" + cfg("spectrum") + "--set N=16 " + dir_arg(d)) == 0);
    CHECK(run("psi-sweep" + cfg("psi_sweep") + "--set N=16 " + dir_arg(d)) == 0);
    CHECK(run("resolvent-sweep" + cfg("resolvent_sweep") + "--set N=16 --set n_mu=5 " + dir_arg(d)) == 0);
    CHECK(run("semigroup" + cfg("semigroup") + "--set N=16 --set n_t=5 " + dir_arg(d)) == 0);
    CHECK(run("lemma-suite" + cfg("lemma_suite") + "--set n_draws=2 --set n_random_geoms=2 " + dir_arg(d)) == 0);
    CHECK(run("dns" + cfg("dns") + "--set N=16 --set T_end=2 " + dir_arg(d)) == 0);
    CHECK(run("threshold" + cfg("threshold") + "--set N=16 --set T_end=2 --set nu=1e-2 --set iterations=0 " +
              dir_arg(d)) == 0);
    CHECK(run("dns" + cfg("spectrum") + dir_arg(d)) == 2);
}
