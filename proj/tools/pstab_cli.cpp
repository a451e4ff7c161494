// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library through pstab.h only.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pstab.h"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
    pstab_status status;
    ApiError(pstab_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(pstab_status s, const char* what)
{
    if (s != PSTAB_OK)
        throw ApiError(s, std::string(what) + ": " + pstab_last_error());
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// key = value lines, '#' comments; every key must be consumed by the command.
class Config {
public:
    void parse_text(const std::string& text, const std::string& origin)
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            raw_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    void load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        parse_text(ss.str(), path);
    }

    void set(const std::string& assignment) { parse_text(assignment, "--set"); }

    double real(const std::string& key, double def)
    {
        const std::string v = take(key);
        const double out = v.empty() ? def : to_double(key, v);
        record(key, fmt(out));
        return out;
    }

    long integer(const std::string& key, long def)
    {
        const std::string v = take(key);
        const long out = v.empty() ? def : to_long(key, v);
        record(key, std::to_string(out));
        return out;
    }

    std::string text(const std::string& key, const std::string& def)
    {
        const std::string v = take(key);
        const std::string out = v.empty() ? def : v;
        record(key, out);
        return out;
    }

    std::vector<double> reals(const std::string& key, const std::vector<double>& def)
    {
        const auto present = raw_.count(key) > 0;
        std::vector<double> out = def;
        if (present) {
            out.clear();
            for (const auto& item : split(take(key)))
                out.push_back(to_double(key, item));
        }
        std::string joined;
        for (double v : out)
            joined += (joined.empty() ? "" : ", ") + fmt(v);
        record(key, joined);
        return out;
    }

    std::vector<long> integers(const std::string& key, const std::vector<long>& def)
    {
        const auto present = raw_.count(key) > 0;
        std::vector<long> out = def;
        if (present) {
            out.clear();
            for (const auto& item : split(take(key)))
                out.push_back(to_long(key, item));
        }
        std::string joined;
        for (long v : out)
            joined += (joined.empty() ? "" : ", ") + std::to_string(v);
        record(key, joined);
        return out;
    }

    void reject_unknown() const
    {
        for (const auto& [k, v] : raw_)
            if (!used_.count(k))
                throw ConfigError("unknown config key '" + k + "'");
    }

    const std::vector<std::pair<std::string, std::string>>& resolved() const { return resolved_; }

    void replace(const std::string& key, const std::string& value)
    {
        for (auto& [k, v] : resolved_)
            if (k == key)
                v = value;
    }

private:
    std::string take(const std::string& key)
    {
        used_.insert({key, true});
        const auto it = raw_.find(key);
        return it == raw_.end() ? std::string{} : it->second;
    }

    void record(const std::string& key, const std::string& value)
    {
        resolved_.emplace_back(key, value);
    }

    static std::vector<std::string> split(const std::string& s)
    {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',' || c == ' ' || c == '\t') {
                if (!cur.empty())
                    out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty())
            out.push_back(cur);
        return out;
    }

    static double to_double(const std::string& key, const std::string& v)
    {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0' || !std::isfinite(d))
            throw ConfigError("bad number for '" + key + "': " + v);
        return d;
    }

    static long to_long(const std::string& key, const std::string& v)
    {
        char* end = nullptr;
        const long d = std::strtol(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw ConfigError("bad integer for '" + key + "': " + v);
        return d;
    }

    std::map<std::string, std::string> raw_;
    std::map<std::string, bool> used_;
    std::vector<std::pair<std::string, std::string>> resolved_;
};

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    std::vector<std::string> sets;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

// Runs tasks on a pool; results land by index so output order never
// depends on completion order.
void parallel_for(int n, int jobs, const std::function<void(int)>& task)
{
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::uint64_t seed_from(Config& cfg)
{
    long seed = cfg.integer("seed", 20240611);
    if (const char* env = std::getenv("POISEUILLE_STAB_SEED")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0')
            throw ConfigError(std::string("bad POISEUILLE_STAB_SEED: ") + env);
        seed = v;
        cfg.replace("seed", std::to_string(seed));
    }
    return static_cast<std::uint64_t>(seed);
}

class Output {
public:
    Output(const Options& opt, std::string command)
        : dir_(opt.out_dir), command_(std::move(command)), start_(opt.start)
    {
        fs::create_directories(dir_);
    }

    std::ofstream open(const std::string& name)
    {
        const auto path = (fs::path(dir_) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw ConfigError("cannot write " + path);
        outputs_.push_back(name);
        return f;
    }

    void manifest(const Config& cfg, const std::vector<std::string>& notes = {}) const
    {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        for (const auto& name : outputs_) {
            const auto path = fs::path(dir_) / (fs::path(name).stem().string() + ".manifest");
            std::ofstream f(path, std::ios::binary);
            f << "# pstab " << pstab_version() << "\n";
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3f", secs);
            f << "# wall_seconds " << buf << "\n";
            for (const auto& o : outputs_)
                f << "# output " << o << "\n";
            for (const auto& n : notes)
                f << "# " << n << "\n";
            f << "command = " << command_ << "\n";
            for (const auto& [k, v] : cfg.resolved())
                if (k != "command")
                    f << k << " = " << v << "\n";
        }
    }

private:
    std::string dir_;
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> outputs_;
};

struct ModeSpec {
    double nu;
    int k;
};

std::vector<ModeSpec> mode_grid(Config& cfg, const std::vector<double>& nu_def,
                                const std::vector<long>& k_def)
{
    const auto nus = cfg.reals("nu", nu_def);
    const auto ks = cfg.integers("k", k_def);
    if (nus.empty())
        throw ConfigError("empty nu list");
    if (ks.empty())
        throw ConfigError("empty k list");
    for (long k : ks)
        if (k == 0)
            throw ConfigError("k = 0 rejected: the linear operator needs |k| >= 1");
    for (double nu : nus)
        if (!(nu > 0.0 && nu <= 1.0))
            throw ConfigError("nu must lie in (0, 1], got " + fmt(nu));
    std::vector<ModeSpec> out;
    for (double nu : nus)
        for (long k : ks)
            out.push_back({nu, static_cast<int>(k)});
    return out;
}

using OperatorPtr = std::unique_ptr<pstab_operator, decltype(&pstab_operator_destroy)>;

OperatorPtr make_operator(double nu, int k, int n, bool diffusion_only)
{
    pstab_operator* op = nullptr;
    check(pstab_operator_create(nu, k, n, diffusion_only ? 1 : 0, &op), "operator");
    return {op, &pstab_operator_destroy};
}

const std::vector<double> default_nus{1e-2, 1e-3, 1e-4, 1e-5};

int cmd_spectrum(Config& cfg, const Options& opt)
{
    const auto modes = mode_grid(cfg, default_nus, {1});
    const int n = static_cast<int>(cfg.integer("N", 64));
    const bool diffusion_only = cfg.integer("diffusion_only", 0) != 0;
    cfg.reject_unknown();

    std::vector<std::string> blocks(modes.size());
    parallel_for(static_cast<int>(modes.size()), opt.jobs, [&](int i) {
        auto op = make_operator(modes[i].nu, modes[i].k, n, diffusion_only);
        const int dim = pstab_operator_dim(op.get());
        std::vector<double> re(dim), im(dim);
        check(pstab_operator_spectrum(op.get(), re.data(), im.data(), dim), "spectrum");
        std::string s;
        for (int j = 0; j < dim; ++j)
            s += std::to_string(modes[i].k) + "," + fmt(modes[i].nu) + "," + fmt(re[j]) + "," +
                 fmt(im[j]) + "\n";
        blocks[i] = std::move(s);
    });

    Output out(opt, "spectrum");
    auto f = out.open("spectrum.csv");
    f << "k,nu,re_sigma,im_sigma\n";
    for (const auto& b : blocks)
        f << b;
    f.close();
    out.manifest(cfg);
    return exit_ok;
}

int cmd_psi_sweep(Config& cfg, const Options& opt)
{
    const auto modes = mode_grid(cfg, default_nus, {1});
    const int n = static_cast<int>(cfg.integer("N", 64));
    cfg.reject_unknown();

    std::vector<double> psi(modes.size(), NAN), mu(modes.size(), NAN);
    std::vector<char> failed(modes.size(), 0);
    parallel_for(static_cast<int>(modes.size()), opt.jobs, [&](int i) {
        auto op = make_operator(modes[i].nu, modes[i].k, n, false);
        const auto s = pstab_operator_psi(op.get(), &psi[i], &mu[i]);
        if (s == PSTAB_ERR_NUMERICAL) {
            std::fprintf(stderr, "psi-sweep: nu=%s k=%d: %s\n", fmt(modes[i].nu).c_str(),
                         modes[i].k, pstab_last_error());
            failed[i] = 1;
            psi[i] = mu[i] = NAN;
        } else {
            check(s, "psi");
        }
    });

    Output out(opt, "psi-sweep");
    auto f = out.open("psi_sweep.csv");
    f << "nu,k,psi,mu_star\n";
    for (std::size_t i = 0; i < modes.size(); ++i)
        f << fmt(modes[i].nu) << "," << modes[i].k << "," << fmt(psi[i]) << "," << fmt(mu[i])
          << "\n";
    f.close();
    out.manifest(cfg);
    return std::count(failed.begin(), failed.end(), 1) ? exit_numerical : exit_ok;
}

int cmd_resolvent_sweep(Config& cfg, const Options& opt)
{
    const auto modes = mode_grid(cfg, default_nus, {1});
    const int n = static_cast<int>(cfg.integer("N", 64));
    const double lam_lo = cfg.real("lambda_min", -0.5);
    const double lam_hi = cfg.real("lambda_max", 1.5);
    const int n_mu = static_cast<int>(cfg.integer("n_mu", 201));
    cfg.reject_unknown();

    std::vector<std::string> blocks(modes.size());
    std::atomic<int> flagged{0};
    parallel_for(static_cast<int>(modes.size()), opt.jobs, [&](int i) {
        const auto [nu, k] = modes[i];
        auto op = make_operator(nu, k, n, false);
        const double a = k * lam_lo, b = k * lam_hi;
        pstab_resolvent_report* rep = nullptr;
        check(pstab_resolvent_sweep(op.get(), std::min(a, b), std::max(a, b), n_mu, &rep),
              "resolvent sweep");
        std::unique_ptr<pstab_resolvent_report, decltype(&pstab_resolvent_report_destroy)> guard(
            rep, &pstab_resolvent_report_destroy);
        std::string s;
        for (int j = 0; j < pstab_resolvent_report_size(rep); ++j) {
            double mu, smin, rn, sn;
            int flag;
            check(pstab_resolvent_report_row(rep, j, &mu, &smin, &rn, &sn, &flag), "row");
            flagged += flag;
            s += fmt(nu) + "," + std::to_string(k) + "," + fmt(mu) + "," + fmt(smin) + "," +
                 fmt(rn) + "," + fmt(sn) + "\n";
        }
        blocks[i] = std::move(s);
    });

    Output out(opt, "resolvent-sweep");
    auto f = out.open("resolvent_sweep.csv");
    f << "nu,k,mu,sigma_min,resolvent_norm,scaled_norm\n";
    for (const auto& b : blocks)
        f << b;
    f.close();
    out.manifest(cfg);
    if (flagged > 0)
        std::fprintf(stderr, "resolvent-sweep: %d row(s) at round-off level\n", flagged.load());
    return flagged > 0 ? exit_numerical : exit_ok;
}

int cmd_semigroup(Config& cfg, const Options& opt)
{
    const auto modes = mode_grid(cfg, default_nus, {1});
    const int n = static_cast<int>(cfg.integer("N", 64));
    const bool diffusion_only = cfg.integer("diffusion_only", 0) != 0;
    const double t_scaled = cfg.real("t_max_scaled", 30.0);
    const double t_abs = cfg.real("t_max", 0.0);
    const int n_t = static_cast<int>(cfg.integer("n_t", 301));
    cfg.reject_unknown();
    if (n_t < 2 || t_scaled <= 0.0 || t_abs < 0.0)
        throw ConfigError("semigroup: need n_t >= 2 and positive time range");

    std::vector<std::string> blocks(modes.size());
    std::atomic<int> failures{0};
    parallel_for(static_cast<int>(modes.size()), opt.jobs, [&](int i) {
        const auto [nu, k] = modes[i];
        auto op = make_operator(nu, k, n, diffusion_only);
        const double t_max = t_abs > 0.0 ? t_abs : t_scaled / std::sqrt(nu);
        std::vector<double> t(n_t), norm(n_t, NAN);
        for (int j = 0; j < n_t; ++j)
            t[j] = t_max * j / (n_t - 1);
        double psi = NAN;
        const auto s1 = pstab_operator_psi(op.get(), &psi, nullptr);
        const auto s2 = pstab_operator_semigroup(op.get(), t.data(), n_t, norm.data());
        for (auto s : {s1, s2}) {
            if (s == PSTAB_ERR_NUMERICAL) {
                std::fprintf(stderr, "semigroup: nu=%s k=%d: %s\n", fmt(nu).c_str(), k,
                             pstab_last_error());
                ++failures;
            } else {
                check(s, "semigroup");
            }
        }
        std::string out;
        for (int j = 0; j < n_t; ++j)
            out += fmt(nu) + "," + std::to_string(k) + "," + fmt(t[j]) + "," + fmt(norm[j]) + "," +
                   fmt(pstab_gearhart_pruss_bound(t[j], psi)) + "\n";
        blocks[i] = std::move(out);
    });

    Output out(opt, "semigroup");
    auto f = out.open("semigroup.csv");
    f << "nu,k,t,norm,gp_bound\n";
    for (const auto& b : blocks)
        f << b;
    f.close();
    out.manifest(cfg);
    return failures > 0 ? exit_numerical : exit_ok;
}

pstab_calibration load_calibration(Config& cfg)
{
    const auto path = cfg.text("calibration", pstab_default_calibration_path());
    pstab_calibration c{};
    const auto s = pstab_calibration_load(path.c_str(), &c);
    if (s != PSTAB_OK)
        throw ConfigError(std::string("calibration: ") + pstab_last_error());
    return c;
}

int cmd_lemma_suite(Config& cfg, const Options& opt)
{
    pstab_lemma_config lc;
    pstab_lemma_config_default(&lc);
    lc.seed = seed_from(cfg);
    lc.n_draws = static_cast<int>(cfg.integer("n_draws", lc.n_draws));
    lc.n_sub = static_cast<int>(cfg.integer("n_sub", lc.n_sub));
    const auto ks = cfg.integers("k", {1});
    lc.corpus_y2 = cfg.real("corpus_y2", lc.corpus_y2);
    const auto y2 = cfg.reals("y2", {});
    const auto delta = cfg.reals("delta", {});
    lc.n_random_geoms = static_cast<int>(cfg.integer("n_random_geoms", lc.n_random_geoms));
    lc.inject_violation = static_cast<int>(cfg.integer("inject_violation", 0));
    lc.calibration = load_calibration(cfg);
    cfg.reject_unknown();
    if (lc.n_draws <= 0 || ks.empty())
        throw ConfigError("lemma-suite: empty random corpus");

    std::vector<int> kv(ks.begin(), ks.end());
    lc.k_values = kv.data();
    lc.n_k = static_cast<int>(kv.size());
    if (!y2.empty()) {
        lc.y2_values = y2.data();
        lc.n_y2 = static_cast<int>(y2.size());
    }
    if (!delta.empty()) {
        lc.delta_values = delta.data();
        lc.n_delta = static_cast<int>(delta.size());
    }

    pstab_lemma_report* rep = nullptr;
    check(pstab_lemma_suite_run(&lc, &rep), "lemma suite");
    std::unique_ptr<pstab_lemma_report, decltype(&pstab_lemma_report_destroy)> guard(
        rep, &pstab_lemma_report_destroy);

    Output out(opt, "lemma-suite");
    auto f = out.open("lemma_suite.jsonl");
    for (int i = 0; i < pstab_lemma_report_line_count(rep); ++i)
        f << pstab_lemma_report_line(rep, i) << "\n";
    f.close();
    out.manifest(cfg);
    const int failed = pstab_lemma_report_failures(rep);
    std::printf("lemma-suite: %d checks, %d failed\n", pstab_lemma_report_checks(rep), failed);
    return failed > 0 ? exit_numerical : exit_ok;
}

pstab_dns_config dns_config(Config& cfg)
{
    pstab_dns_config c;
    pstab_dns_config_default(&c);
    c.x_modes = static_cast<int>(cfg.integer("K", c.x_modes));
    c.n_intervals = static_cast<int>(cfg.integer("N", c.n_intervals));
    c.dt = cfg.real("dt", c.dt);
    c.t_end = cfg.real("T_end", c.t_end);
    const auto shape = cfg.text("shape", "sincos");
    if (shape == "sincos")
        c.shape = PSTAB_SHAPE_SINCOS;
    else if (shape == "random")
        c.shape = PSTAB_SHAPE_RANDOM;
    else
        throw ConfigError("shape must be sincos or random, got " + shape);
    c.seed = seed_from(cfg);
    c.c_prime_factor = cfg.real("c_prime_factor", c.c_prime_factor);
    c.c_fit = cfg.real("c_fit", 0.0);
    c.output_interval = cfg.real("output_interval", c.output_interval);
    c.linearized = static_cast<int>(cfg.integer("linearized", 0));
    c.max_amplification = cfg.real("max_amplification", c.max_amplification);
    c.end_fraction = cfg.real("end_fraction", c.end_fraction);
    return c;
}

int cmd_dns(Config& cfg, const Options& opt)
{
    pstab_dns_config c = dns_config(cfg);
    c.nu = cfg.real("nu", 1e-3);
    const double scaled = cfg.real("amplitude_scaled", -1.0);
    c.amplitude = cfg.real("amplitude", 0.0);
    cfg.reject_unknown();
    if (scaled >= 0.0)
        c.amplitude = scaled * std::pow(c.nu, 0.75);

    pstab_dns_result* res = nullptr;
    check(pstab_dns_run(&c, &res), "dns");
    std::unique_ptr<pstab_dns_result, decltype(&pstab_dns_result_destroy)> guard(
        res, &pstab_dns_result_destroy);
    pstab_dns_summary sum;
    check(pstab_dns_result_summary(res, &sum), "dns summary");

    Output out(opt, "dns");
    auto f = out.open("dns_diagnostics.csv");
    f << "t,nonzero_norm,mean_norm,uinf_ratio,xnorm_sq\n";
    for (int i = 0; i < pstab_dns_result_samples(res); ++i) {
        double t, nz, mn, ur, xn;
        check(pstab_dns_result_sample(res, i, &t, &nz, &mn, &ur, &xn), "sample");
        f << fmt(t) << "," << fmt(nz) << "," << fmt(mn) << "," << fmt(ur) << "," << fmt(xn) << "\n";
    }
    f.close();
    out.manifest(cfg, {"dt " + fmt(sum.dt), "steps " + std::to_string(sum.n_steps),
                       "c_prime " + fmt(sum.c_prime), "stable " + std::to_string(sum.stable),
                       "max_amplification " + fmt(sum.max_amplification),
                       "end_fraction " + fmt(sum.end_fraction),
                       "decay_rate " + fmt(sum.decay_rate)});
    std::printf("dns: %s (max_amplification %.4g, end_fraction %.4g, decay_rate %.4g)\n",
                sum.stable ? "stable" : "unstable", sum.max_amplification, sum.end_fraction,
                sum.decay_rate);
    return exit_ok;
}

int cmd_threshold(Config& cfg, const Options& opt)
{
    pstab_dns_config base = dns_config(cfg);
    const auto nus = cfg.reals("nu", {1e-2, 1e-3});
    const double lo = cfg.real("amp_lo_scaled", 0.05);
    const double hi = cfg.real("amp_hi_scaled", 50.0);
    const int iterations = static_cast<int>(cfg.integer("iterations", 8));
    cfg.reject_unknown();
    if (nus.empty())
        throw ConfigError("empty nu list");
    if (!(lo > 0.0 && lo < hi))
        throw ConfigError("threshold: need 0 < amp_lo_scaled < amp_hi_scaled");

    struct Result {
        std::vector<pstab_threshold_row> rows;
        pstab_sweep_status status = PSTAB_SWEEP_BRACKET_INVALID;
        double a_crit = 0.0;
    };
    std::vector<Result> results(nus.size());
    parallel_for(static_cast<int>(nus.size()), opt.jobs, [&](int i) {
        pstab_threshold_table* t = nullptr;
        check(pstab_threshold_run(&base, nus[i], lo, hi, iterations, &t), "threshold");
        std::unique_ptr<pstab_threshold_table, decltype(&pstab_threshold_table_destroy)> guard(
            t, &pstab_threshold_table_destroy);
        for (int j = 0; j < pstab_threshold_table_size(t); ++j) {
            pstab_threshold_row r;
            check(pstab_threshold_table_row(t, j, &r), "row");
            results[i].rows.push_back(r);
        }
        check(pstab_threshold_table_outcome(t, &results[i].status, &results[i].a_crit), "outcome");
    });

    std::vector<pstab_threshold_row> rows;
    std::vector<std::string> notes;
    std::vector<double> bnu, bcrit;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        rows.insert(rows.end(), results[i].rows.begin(), results[i].rows.end());
        switch (results[i].status) {
        case PSTAB_SWEEP_BOUNDARY:
            notes.push_back("nu " + fmt(nus[i]) + " a_crit " + fmt(results[i].a_crit));
            bnu.push_back(nus[i]);
            bcrit.push_back(results[i].a_crit);
            break;
        case PSTAB_SWEEP_STABLE_TO_CAP:
            notes.push_back("nu " + fmt(nus[i]) + " stable up to cap");
            break;
        default:
            notes.push_back("nu " + fmt(nus[i]) + " bracket invalid");
            std::fprintf(stderr, "threshold: nu=%s bracket invalid (lower end unstable)\n",
                         fmt(nus[i]).c_str());
            break;
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.nu != b.nu ? a.nu < b.nu : a.amplitude < b.amplitude;
    });
    if (bnu.size() >= 2) {
        double slope = NAN;
        check(pstab_loglog_slope(bnu.data(), bcrit.data(), static_cast<int>(bnu.size()), &slope),
              "slope");
        notes.push_back("a_crit_slope " + fmt(slope));
        std::printf("threshold: log A_crit vs log nu slope %.4f\n", slope);
    }

    Output out(opt, "threshold");
    auto f = out.open("threshold.csv");
    f << "nu,amplitude,gamma_scaled_amp,stable,max_amplification,end_fraction\n";
    for (const auto& r : rows)
        f << fmt(r.nu) << "," << fmt(r.amplitude) << "," << fmt(r.gamma_scaled_amp) << ","
          << r.stable << "," << fmt(r.max_amplification) << "," << fmt(r.end_fraction) << "\n";
    f.close();
    out.manifest(cfg, notes);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Linear and nonlinear stability toolkit for plane Poiseuille flow"};
    app.set_version_flag("--version", std::string(pstab_version()));
    app.require_subcommand(1);

    Options opt;
    using Handler = int (*)(Config&, const Options&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"spectrum", "eigenvalues of the mode operator", cmd_spectrum},
        {"psi-sweep", "pseudospectral bound over a (nu, k) grid", cmd_psi_sweep},
        {"resolvent-sweep", "resolvent norm along the imaginary axis", cmd_resolvent_sweep},
        {"semigroup", "semigroup norms with the exponential envelope", cmd_semigroup},
        {"lemma-suite", "critical-layer energy and integral checks", cmd_lemma_suite},
        {"dns", "nonlinear run with decay diagnostics", cmd_dns},
        {"threshold", "amplitude bisection for the stability boundary", cmd_threshold},
    };
    std::map<CLI::App*, Handler> handlers;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config_path, "key = value config file");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--set", opt.sets, "override one key (key=value)");
        handlers[sub] = fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        Config cfg;
        if (!opt.config_path.empty())
            cfg.load(opt.config_path);
        for (const auto& s : opt.sets)
            cfg.set(s);
        CLI::App* chosen = app.get_subcommands().front();
        const std::string expected = cfg.text("command", chosen->get_name());
        if (expected != chosen->get_name())
            throw ConfigError("config was written for '" + expected + "'");
        return handlers.at(chosen)(cfg, opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const ApiError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return e.status == PSTAB_ERR_INVALID_ARGUMENT ? exit_config : exit_numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
