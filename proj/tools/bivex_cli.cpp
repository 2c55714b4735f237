#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bivex/mc.hpp"
#include "bivex/oracle.hpp"
#include "bivex/table.hpp"
#include "bivex/verify.hpp"

namespace {

using namespace bivex;

struct OutputOptions {
    std::string format = "csv";
    std::string path;
};

void add_output_options(CLI::App* cmd, OutputOptions& out) {
    cmd->add_option("--format", out.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", out.path, "Output path (default: stdout)");
}

void emit(const Table& t, const OutputOptions& out) {
    write_table(t, out.format == "json" ? OutputFormat::Json : OutputFormat::Csv, out.path);
}

struct Grid {
    std::vector<double> rho;
    std::vector<double> u1, u2;
};

void add_grid_options(CLI::App* cmd, Grid& g) {
    cmd->add_option("--rho", g.rho, "Correlation (repeatable)")->required();
    cmd->add_option("--u1", g.u1, "First threshold coordinate (repeatable)")->required();
    cmd->add_option("--u2", g.u2, "Second threshold coordinate (repeatable, zipped with --u1)")
        ->required();
}

int check_grid(const Grid& g) {
    if (g.u1.size() != g.u2.size()) {
        std::cerr << "bivex: --u1 and --u2 must be repeated the same number of times\n";
        return 2;
    }
    return 0;
}

int run_rate(const Grid& g, const std::string& scale, double sigma1, double sigma2,
             const OutputOptions& out) {
    if (int rc = check_grid(g)) return rc;
    Table t;
    t.header = {"scale", "rho",  "sigma1", "sigma2", "u1",     "u2",    "status",
                "rate",  "case", "min1",   "min2",   "regime"};
    for (double rho : g.rho) {
        for (size_t i = 0; i < g.u1.size(); ++i) {
            Threshold u{g.u1[i], g.u2[i]};
            std::vector<Cell> row = {scale, rho, sigma1, sigma2, u.u1, u.u2};
            try {
                CorrelationStructure corr(sigma1, sigma2, rho);
                RateResult r = scale == "right"
                                   ? right_scale_rate(u, corr)
                                   : large_scale_rate({u.u1 / sigma1, u.u2 / sigma2}, rho);
                Regime regime =
                    classify_regime(u, corr, scale == "right" ? Scale::Right : Scale::Large);
                row.insert(row.end(),
                           {std::string("ok"), r.value, std::string(to_string(r.case_label)),
                            r.minimizer1, r.minimizer2, std::string(to_string(regime))});
            } catch (const InvalidThreshold&) {
                row.insert(row.end(), {std::string("skipped: invalid threshold"), Cell{},
                                       Cell{}, Cell{}, Cell{}, Cell{}});
            } catch (const DegenerateCorrelation&) {
                row.insert(row.end(), {std::string("skipped: degenerate correlation"), Cell{},
                                       Cell{}, Cell{}, Cell{}, Cell{}});
            }
            t.add_row(std::move(row));
        }
    }
    emit(t, out);
    return 0;
}

int run_sharp(const Grid& g, double n, std::vector<double> a_n_values, bool sort,
              const OutputOptions& out) {
    if (int rc = check_grid(g)) return rc;
    Table t;
    t.header = {"rho", "u1", "u2", "n",     "a_n",        "b",     "c",
                "k",   "rate", "ratio", "ratio_over_k", "status"};
    for (double rho : g.rho) {
        for (size_t i = 0; i < g.u1.size(); ++i) {
            Threshold u{g.u1[i], g.u2[i]};
            if (u.u2 > u.u1) {
                if (!sort) {
                    std::cerr << "bivex sharp: thresholds must satisfy u2 <= u1 "
                                 "(pass --sort to sort automatically)\n";
                    return 2;
                }
                u = u.sorted();
            }
            for (double a_n : a_n_values) {
                std::vector<Cell> row = {rho, u.u1, u.u2, n, a_n};
                try {
                    SharpAsymptote s = sharp_asymptote(u, rho);
                    double ratio =
                        sharp_ratio(ScalingSequence::large(std::log(n), a_n), u, rho);
                    row.insert(row.end(),
                               {static_cast<std::int64_t>(s.b), static_cast<std::int64_t>(s.c),
                                s.k, s.rate, ratio, ratio / s.k, std::string("ok")});
                } catch (const std::exception& e) {
                    row.insert(row.end(), {Cell{}, Cell{}, Cell{}, Cell{}, Cell{}, Cell{},
                                           std::string("skipped: ") + e.what()});
                }
                t.add_row(std::move(row));
            }
        }
    }
    emit(t, out);
    return 0;
}

int run_oracle(const Grid& g, double n, double log_n, std::vector<double> a_n_values,
               const OutputOptions& out) {
    if (int rc = check_grid(g)) return rc;
    if (n > 0.0) log_n = std::log(n);
    Table t;
    t.header = {"rho",   "u1",          "u2",          "log_n",   "a_n",
                "log_t", "log_s_unequal", "log_s_equal", "log_e_n", "precision_loss"};
    for (double rho : g.rho) {
        for (size_t i = 0; i < g.u1.size(); ++i) {
            for (double a_n : a_n_values) {
                Threshold u{g.u1[i], g.u2[i]};
                TailDecomposition d =
                    tail_decomposition(ScalingSequence::explicit_scale(log_n, a_n), u, rho);
                t.add_row({rho, u.u1, u.u2, log_n, a_n, d.log_t.log, d.log_s_unequal.log,
                           d.log_s_equal.log, d.log_e_n.log, d.precision_loss});
            }
        }
    }
    emit(t, out);
    return 0;
}

int run_mc(const Grid& g, std::uint64_t n, std::uint64_t trials, std::uint64_t seed,
           const std::string& method, bool coincidence, double a_n, const std::string& scale,
           int workers, const OutputOptions& out) {
    if (int rc = check_grid(g)) return rc;
    Table t;
    if (coincidence) {
        t.header = {"mode", "n",     "a_n",  "u1",           "u2",
                    "rho",  "trials", "seed", "p_distinct",   "std_err",
                    "conditioning_hits", "distinct_hits", "warning"};
    } else {
        t.header = {"mode", "n",   "u1",   "u2",          "rho", "trials", "seed",
                    "log_p", "std_err_log", "hits", "ess", "warning"};
    }
    for (double rho : g.rho) {
        for (size_t i = 0; i < g.u1.size(); ++i) {
            Threshold u{g.u1[i], g.u2[i]};
            if (coincidence) {
                double an_eff = scale == "right" ? std::sqrt(std::log(double(n))) : a_n;
                IndexCoincidenceEstimate e =
                    index_coincidence(n, an_eff, u, rho, trials, seed, workers);
                t.add_row({std::string("coincidence"), n, an_eff, u.u1, u.u2, rho, trials,
                           seed, e.p_distinct, e.std_err, e.conditioning_hits,
                           e.distinct_hits,
                           std::string(e.insufficient_hits ? "insufficient hits" : "")});
            } else {
                TailEstimate e = method == "is"
                                     ? estimate_tail_importance(n, u, rho, trials, seed, workers)
                                     : estimate_tail_naive(n, u, rho, trials, seed, workers);
                std::string warning;
                if (e.zero_hits) warning = "zero hits";
                if (e.ess_collapse) warning = "effective sample collapse";
                t.add_row({std::string(to_string(e.method)), n, u.u1, u.u2, rho, trials, seed,
                           e.log_p.log, e.std_err_log, e.hits, e.ess, warning});
            }
        }
    }
    emit(t, out);
    return 0;
}

int run_verify(const std::vector<std::string>& criteria, std::uint64_t seed, int workers,
               bool strict, const OutputOptions& out) {
    verify::Options opt;
    opt.criteria = criteria;
    opt.seed = seed;
    opt.workers = workers;
    verify::Report report = verify::run(opt);
    emit(verify::to_table(report), out);

    std::size_t unexpected = report.fail_count(false);
    std::size_t expected = report.fail_count(true) - unexpected;
    std::cerr << "verify: " << report.rows.size() << " rows, " << unexpected
              << " unexpected failures, " << expected << " expected failures\n";
    if (strict) return report.all_pass() ? 0 : 1;
    return report.acceptable() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bivariate Gaussian extreme-value tails: rates, sharp constants, "
                 "exact oracles, Monte Carlo"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key=value config file; a [subcommand] section supplies its flags");

    Grid grid;
    OutputOptions out;

    // rate
    auto* rate = app.add_subcommand("rate", "Tail decay rates and regime classification");
    rate->configurable();
    std::string scale = "right";
    double sigma1 = 1.0, sigma2 = 1.0;
    rate->add_option("--scale", scale, "right or large")
        ->check(CLI::IsMember({"right", "large"}));
    rate->add_option("--sigma1", sigma1, "Marginal std. dev. of coordinate 1");
    rate->add_option("--sigma2", sigma2, "Marginal std. dev. of coordinate 2");
    add_grid_options(rate, grid);
    add_output_options(rate, out);

    // sharp
    auto* sharp = app.add_subcommand("sharp", "Sharp-limit constants and oracle ratios");
    sharp->configurable();
    double sharp_n = 1000.0;
    std::vector<double> a_n_values;
    bool sort = false;
    sharp->add_option("--n", sharp_n, "Sample count n");
    sharp->add_option("--an", a_n_values, "Scale a_n (repeatable)")->required();
    sharp->add_flag("--sort", sort, "Sort thresholds so u2 <= u1");
    add_grid_options(sharp, grid);
    add_output_options(sharp, out);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact tail decompositions");
    oracle->configurable();
    double oracle_n = 0.0, oracle_log_n = std::log(1000.0);
    std::vector<double> oracle_an{8.0};
    oracle->add_option("--n", oracle_n, "Sample count n (plain)");
    oracle->add_option("--logn", oracle_log_n, "log n (for n beyond integer range)");
    oracle->add_option("--an", oracle_an, "Scale a_n (repeatable)");
    add_grid_options(oracle, grid);
    add_output_options(oracle, out);

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo tail and coincidence estimates");
    mc->configurable();
    std::uint64_t mc_n = 100, trials = 100000, seed = 1;
    std::string method = "naive", mc_scale = "explicit";
    bool coincidence = false;
    double mc_an = 1.0;
    int workers = 0;
    mc->add_option("--n", mc_n, "Sample count per trial");
    mc->add_option("--trials", trials, "Number of trials");
    mc->add_option("--seed", seed, "RNG seed");
    mc->add_option("--method", method, "naive or is")->check(CLI::IsMember({"naive", "is"}));
    mc->add_flag("--coincidence", coincidence, "Estimate P(argmax1 != argmax2 | tail)");
    mc->add_option("--an", mc_an, "Threshold scale a_n for --coincidence");
    mc->add_option("--scale", mc_scale, "right: use a_n = sqrt(log n) for --coincidence")
        ->check(CLI::IsMember({"explicit", "right"}));
    mc->add_option("--workers", workers, "Worker threads (0 = hardware default)");
    add_grid_options(mc, grid);
    add_output_options(mc, out);

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance criteria sweeps");
    verify_cmd->configurable();
    std::vector<std::string> criteria;
    std::uint64_t verify_seed = 20250808;
    int verify_workers = 0;
    bool strict = false;
    verify_cmd->add_option("--criterion", criteria, "Restrict to criteria (e.g. C4; repeatable)");
    verify_cmd->add_option("--seed", verify_seed, "RNG seed for the stochastic criteria");
    verify_cmd->add_option("--workers", verify_workers, "Worker threads");
    verify_cmd->add_flag("--strict", strict, "Exit nonzero on expected failures too");
    add_output_options(verify_cmd, out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (rate->parsed()) return run_rate(grid, scale, sigma1, sigma2, out);
        if (sharp->parsed()) return run_sharp(grid, sharp_n, a_n_values, sort, out);
        if (oracle->parsed())
            return run_oracle(grid, oracle_n, oracle_log_n, oracle_an, out);
        if (mc->parsed())
            return run_mc(grid, mc_n, trials, seed, method, coincidence, mc_an, mc_scale,
                          workers, out);
        if (verify_cmd->parsed())
            return run_verify(criteria, verify_seed, verify_workers, strict, out);
    } catch (const std::exception& e) {
        std::cerr << "bivex: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
