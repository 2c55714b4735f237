#include "bivex/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "bivex/mc.hpp"
#include "bivex/oracle.hpp"

namespace bivex::verify {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string point(double rho, double u1, double u2) {
    std::ostringstream os;
    os.precision(6);
    os << "rho=" << rho << " u=(" << u1 << "," << u2 << ")";
    return os.str();
}

// Brute-force minimizer of (1/2) x' Sigma^{-1} x over x >= u on a shrinking
// grid; the independent check for the closed-form QP.
double grid_qp_value(double u1, double u2, double rho) {
    double om = (1.0 - rho) * (1.0 + rho);
    auto f = [&](double x1, double x2) {
        return 0.5 * (x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / om;
    };
    double span = 2.0 + 2.0 * std::max({std::abs(u1), std::abs(u2), 1.0});
    double c1 = u1 + 0.5 * span, c2 = u2 + 0.5 * span;
    double s1 = 0.5 * span, s2 = 0.5 * span;
    double best = f(u1, u2), b1 = u1, b2 = u2;
    const int n = 60;
    for (int round = 0; round < 12; ++round) {
        double lo1 = std::max(u1, c1 - s1), hi1 = c1 + s1;
        double lo2 = std::max(u2, c2 - s2), hi2 = c2 + s2;
        for (int i = 0; i <= n; ++i) {
            double x1 = lo1 + (hi1 - lo1) * i / n;
            for (int j = 0; j <= n; ++j) {
                double x2 = lo2 + (hi2 - lo2) * j / n;
                double v = f(x1, x2);
                if (v < best) {
                    best = v;
                    b1 = x1;
                    b2 = x2;
                }
            }
        }
        c1 = b1;
        c2 = b2;
        s1 = std::max((hi1 - lo1) * 0.11, 1e-12);
        s2 = std::max((hi2 - lo2) * 0.11, 1e-12);
    }
    return best;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void add_runtime_row(std::vector<Row>& rows, const std::string& criterion, double elapsed,
                     double budget) {
    rows.push_back({criterion + ".runtime", "wall clock seconds", budget, elapsed, budget,
                    elapsed < budget, false, ""});
}

// ---------------------------------------------------------------- C1: QP ---

void criterion_qp(const Options& opt, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    RngStream rng(opt.seed, 777);
    double max_value_diff = 0.0;
    double max_kkt_violation = 0.0;
    const int points = 1000;
    for (int k = 0; k < points; ++k) {
        double rho = -0.95 + 1.9 * rng.next_uniform();
        double u1 = 0.1 + 3.9 * rng.next_uniform();
        double u2 = 0.1 + 3.9 * rng.next_uniform();
        RateResult r = orthant_qp({u1, u2}, CorrelationStructure(1.0, 1.0, rho));
        double brute = grid_qp_value(u1, u2, rho);
        max_value_diff = std::max(max_value_diff, std::abs(r.value - brute));

        double om = (1.0 - rho) * (1.0 + rho);
        double g1 = (r.minimizer1 - rho * r.minimizer2) / om;
        double g2 = (r.minimizer2 - rho * r.minimizer1) / om;
        auto coord_violation = [](double x, double u, double g) {
            bool active = std::abs(x - u) <= 1e-10;
            if (active) return std::max(0.0, -g);  // dual feasibility
            return std::abs(g);                    // stationarity
        };
        max_kkt_violation = std::max(max_kkt_violation, coord_violation(r.minimizer1, u1, g1));
        max_kkt_violation = std::max(max_kkt_violation, coord_violation(r.minimizer2, u2, g2));
    }
    rows.push_back({"C1.value", "1000 random (rho,u), closed form vs grid refinement", 0.0,
                    max_value_diff, 1e-8, max_value_diff <= 1e-8, false, "max |diff|"});
    rows.push_back({"C1.kkt", "stationarity/dual feasibility at returned minimizer", 0.0,
                    max_kkt_violation, 1e-10, max_kkt_violation <= 1e-10, false,
                    "max violation"});
    add_runtime_row(rows, "C1", seconds_since(t0), 10.0);
}

// -------------------------------------------------------- C2: quadrature ---

void criterion_quadrature(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    double worst_indep = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            double a = -2.0 + 0.6 * i;
            double b = -2.0 + 0.6 * j;
            double log_prod = std_normal_tail(a) + std_normal_tail(b);
            double rel = std::abs(std::expm1(bvn_upper_tail(a, b, 0.0).log - log_prod));
            worst_indep = std::max(worst_indep, rel);
        }
    }
    rows.push_back({"C2.independence", "10x10 grid, rho=0 vs marginal product", 0.0,
                    worst_indep, 1e-12, worst_indep <= 1e-12, false, "max rel err"});

    double worst_orthant = 0.0;
    for (double rho : {-0.9, -0.5, 0.25, 0.5, 0.9}) {
        double exact = std::log(0.25 + std::asin(rho) / (2.0 * M_PI));
        double rel = std::abs(std::expm1(bvn_upper_tail(0.0, 0.0, rho).log - exact));
        worst_orthant = std::max(worst_orthant, rel);
    }
    rows.push_back({"C2.orthant", "(0,0,rho) vs arcsin identity", 0.0, worst_orthant, 1e-10,
                    worst_orthant <= 1e-10, false, "max rel err"});
    add_runtime_row(rows, "C2", seconds_since(t0), 5.0);
}

// -------------------------------------------------- C3: Laplace prefactor ---

void criterion_laplace(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    struct Point {
        double rho, u1, u2;
    };
    for (Point p : {Point{0.5, 2.0, 2.0}, Point{0.0, 2.0, 1.0}, Point{0.3, 1.5, 1.2}}) {
        double om = (1.0 - p.rho) * (1.0 + p.rho);
        double target =
            om * std::sqrt(om) / ((p.u1 - p.rho * p.u2) * (p.u2 - p.rho * p.u1));
        double at8 = laplace_prefactor(8.0, {p.u1, p.u2}, p.rho);
        double at4 = laplace_prefactor(4.0, {p.u1, p.u2}, p.rho);
        double gap8 = std::abs(at8 / target - 1.0);
        double gap4 = std::abs(at4 / target - 1.0);
        rows.push_back({"C3.limit", point(p.rho, p.u1, p.u2) + " a_n=8", target, at8, 0.05,
                        gap8 <= 0.05, false, "rel gap " + fmt(gap8)});
        rows.push_back({"C3.shrink", point(p.rho, p.u1, p.u2) + " gap(8) < gap(4)", gap4, gap8,
                        gap4, gap8 < gap4, false, ""});
    }
    add_runtime_row(rows, "C3", seconds_since(t0), 5.0);
}

// ------------------------------------------------------- C4: sharp limit ---

void criterion_sharp(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    struct Point {
        double rho, u1, u2;
        const char* row;
    };
    const Point points[] = {
        {-0.5, 2.0, 1.0, "two-index"},
        {-0.5, 2.0, 2.0, "two-index symmetric"},
        {0.8, 2.0, 1.0, "cone interior"},
        {0.5, 2.0, 1.0, "cone boundary"},
        {0.5, 2.0, 2.0, "laplace interior"},
    };
    double log_n = std::log(1000.0);
    for (const Point& p : points) {
        SharpAsymptote sharp = sharp_asymptote({p.u1, p.u2}, p.rho);
        double ratio = sharp_ratio(ScalingSequence::large(log_n, 8.0), {p.u1, p.u2}, p.rho);
        double gap = std::abs(ratio / sharp.k - 1.0);
        std::ostringstream note;
        note << p.row << " b=" << sharp.b << " c=" << sharp.c << " rel gap " << fmt(gap);
        rows.push_back({"C4.limit", point(p.rho, p.u1, p.u2) + " n=1e3 a_n=8", sharp.k, ratio,
                        0.10, gap <= 0.10, false, note.str()});
    }
    add_runtime_row(rows, "C4", seconds_since(t0), 30.0);
}

// -------------------------------------------- C5: large-scale rate limit ---

void criterion_large_rate(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    double log_n = std::log(1000.0);
    for (double rho : {-0.5, 0.5, 0.8}) {
        for (Threshold u : {Threshold{2.0, 2.0}, Threshold{2.0, 1.0}, Threshold{1.5, 1.2}}) {
            double rate = large_scale_rate(u, rho).value;
            auto gap_at = [&](double a_n) {
                double log_t =
                    exact_max_tail(log_n, {a_n * u.u1, a_n * u.u2}, rho).log_prob.log;
                return std::abs(log_t / (a_n * a_n) + rate);
            };
            double g10 = gap_at(10.0);
            double g14 = gap_at(14.0);
            // The signed gap can cross zero, so "decreasing" is checked
            // against the a_n^{-2}-scaled target when gap(10) sits below it.
            bool pass = g10 < 0.08 && g14 < std::max(g10, 0.08 * 100.0 / 196.0);
            rows.push_back({"C5.rate", point(rho, u.u1, u.u2) + " n=1e3 a_n=10", 0.0, g10, 0.08,
                            pass, false, "gap(14)=" + fmt(g14)});
        }
    }
    add_runtime_row(rows, "C5", seconds_since(t0), 30.0);
}

// ------------------------------------------- C6/C7: right-scale rate limit ---

struct RightScalePoint {
    double rho, u1, u2;
    bool prefactor_floor;  // non-cone regime: log-prefactor/log n exceeds 0.1 at log n = 46
};

const RightScalePoint kRightScaleGrid[] = {
    {-0.5, 1.6, 1.6, true}, {-0.5, 2.0, 1.7, true}, {-0.5, 2.0, 2.0, true},
    {0.0, 1.6, 1.6, true},  {0.0, 2.0, 1.7, true},  {0.0, 2.2, 2.2, true},
    {0.5, 3.0, 1.45, false}, {0.5, 3.2, 1.5, false}, {0.5, 3.6, 1.6, false},
    {0.9, 2.5, 1.6, false}, {0.9, 2.0, 1.7, false}, {0.9, 3.0, 2.0, false},
};

const char* kFloorNote =
    "Mills/Laplace log-prefactor over log n = 46 exceeds the 0.1 target in "
    "non-cone regimes; convergence is asserted by the companion .conv row";

void criterion_right_rate(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    for (const RightScalePoint& p : kRightScaleGrid) {
        Threshold u{p.u1, p.u2};
        CorrelationStructure corr(1.0, 1.0, p.rho);
        double rate = right_scale_rate(u, corr).value;
        auto gap_at = [&](double log_n) {
            double a_n = std::sqrt(log_n);
            double log_t = exact_max_tail(log_n, {a_n * p.u1, a_n * p.u2}, p.rho).log_prob.log;
            return std::abs(log_t / log_n - rate);
        };
        double g46 = gap_at(46.0);
        double g100 = gap_at(100.0);
        bool in_band = g46 >= 0.10 && g46 <= 0.22;
        rows.push_back({"C6.rate", point(p.rho, p.u1, p.u2) + " log n=46", 0.0, g46, 0.10,
                        g46 < 0.10, p.prefactor_floor && in_band,
                        p.prefactor_floor ? kFloorNote : ""});
        rows.push_back({"C6.conv", point(p.rho, p.u1, p.u2) + " log n=100", 0.0, g100, 0.10,
                        g100 < 0.10 && g100 < g46, false, "gap(100) < gap(46)=" + fmt(g46)});
    }
    add_runtime_row(rows, "C6", seconds_since(t0), 10.0);
}

void criterion_single_index(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    for (const RightScalePoint& p : kRightScaleGrid) {
        RateResult qp = orthant_qp({p.u1, p.u2}, CorrelationStructure(1.0, 1.0, p.rho));
        double target = 1.0 - qp.value;
        auto gap_at = [&](double log_n) {
            double a_n = std::sqrt(log_n);
            double log_p = any_single_draw_tail(log_n, {a_n * p.u1, a_n * p.u2}, p.rho).log;
            return std::abs(log_p / log_n - target);
        };
        double g46 = gap_at(46.0);
        double g100 = gap_at(100.0);
        bool in_band = g46 >= 0.10 && g46 <= 0.22;
        rows.push_back({"C7.rate", point(p.rho, p.u1, p.u2) + " log n=46", 0.0, g46, 0.10,
                        g46 < 0.10, p.prefactor_floor && in_band,
                        p.prefactor_floor ? kFloorNote : ""});
        rows.push_back({"C7.conv", point(p.rho, p.u1, p.u2) + " log n=100", 0.0, g100, 0.10,
                        g100 < 0.10 && g100 < g46, false, "gap(100) < gap(46)=" + fmt(g46)});
    }
    add_runtime_row(rows, "C7", seconds_since(t0), 5.0);
}

// ------------------------------------------------ C8: estimator calibration ---

void criterion_estimators(const Options& opt, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    // Naive vs exact on overlap-regime points.
    double worst_naive_z = 0.0;
    for (double rho : {-0.6, -0.3, 0.0, 0.3, 0.6}) {
        for (Threshold v : {Threshold{2.2, 2.2}, Threshold{2.5, 2.2}, Threshold{2.5, 2.5},
                            Threshold{2.8, 2.5}}) {
            TailEstimate e =
                estimate_tail_naive(100, v, rho, 200000, opt.seed + 1, opt.workers);
            double exact = exact_max_tail(std::log(100.0), v, rho).log_prob.log;
            double z = (e.log_p.log - exact) / e.std_err_log;
            worst_naive_z = std::max(worst_naive_z, std::abs(z));
        }
    }
    rows.push_back({"C8.naive", "20 overlap points, n=100, 2e5 trials", 0.0, worst_naive_z,
                    4.0, worst_naive_z < 4.0, false, "max |z| vs exact"});

    // Importance sampling vs exact on deep-tail points.
    double worst_is_z = 0.0;
    bool ess_ok = true;
    for (double rho : {-0.5, 0.0, 0.5, 0.8}) {
        for (double a_n : {4.0, 4.5, 5.0, 5.5, 6.0}) {
            Threshold v{a_n, a_n};
            TailEstimate e =
                estimate_tail_importance(1000, v, rho, 20000, opt.seed + 2, opt.workers);
            double exact = exact_max_tail(std::log(1000.0), v, rho).log_prob.log;
            double z = (e.log_p.log - exact) / e.std_err_log;
            worst_is_z = std::max(worst_is_z, std::abs(z));
            ess_ok = ess_ok && !e.ess_collapse;
        }
    }
    rows.push_back({"C8.is", "20 deep-tail points, n=1e3, a_n in [4,6], 2e4 trials", 0.0,
                    worst_is_z, 4.0, worst_is_z < 4.0 && ess_ok, false,
                    ess_ok ? "max |z| vs exact" : "ESS collapse"});

    // Bit-exact determinism across worker counts.
    TailEstimate w1 = estimate_tail_importance(500, {5.0, 5.0}, 0.5, 20000, opt.seed + 3, 1);
    TailEstimate w8 = estimate_tail_importance(500, {5.0, 5.0}, 0.5, 20000, opt.seed + 3, 8);
    bool identical = w1.log_p.log == w8.log_p.log && w1.std_err_log == w8.std_err_log &&
                     w1.hits == w8.hits && w1.ess == w8.ess;
    rows.push_back({"C8.determinism", "IS estimate, 1 vs 8 workers", 0.0,
                    identical ? 0.0 : 1.0, 0.0, identical, false, "bitwise comparison"});
    add_runtime_row(rows, "C8", seconds_since(t0), 300.0);
}

// ------------------------------------------------- C9: index coincidence ---

void criterion_coincidence(const Options& opt, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    double log_n = std::log(1.0e6);
    double a_n = std::sqrt(log_n);

    IndexCoincidenceEstimate two = index_coincidence(1000000, a_n, {1.6, 1.6}, 0.0, 200000,
                                                     opt.seed + 4, opt.workers);
    rows.push_back({"C9.two_index", "rho=0 u=(1.6,1.6) n=1e6 right scale",
                    1.0, two.p_distinct, 0.10, two.p_distinct > 0.9 &&
                    two.conditioning_hits >= 100, false,
                    "hits=" + std::to_string(two.conditioning_hits)});

    IndexCoincidenceEstimate one = index_coincidence(1000000, a_n, {2.5, 1.6}, 0.9, 5000,
                                                     opt.seed + 5, opt.workers);
    rows.push_back({"C9.one_index", "rho=0.9 u=(2.5,1.6) n=1e6 right scale",
                    0.0, one.p_distinct, 0.10, one.p_distinct < 0.1 &&
                    one.conditioning_hits >= 100, false,
                    "hits=" + std::to_string(one.conditioning_hits)});
    add_runtime_row(rows, "C9", seconds_since(t0), 120.0);
}

// ------------------------------------------------------- C10: sandwich ---

void criterion_sandwich(const Options&, std::vector<Row>& rows) {
    auto t0 = Clock::now();
    double worst_upper = -std::numeric_limits<double>::infinity();
    double worst_lower = -std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    double log_n = std::log(1000.0);
    for (double rho : {-0.5, 0.0, 0.5, 0.8}) {
        for (Threshold u : {Threshold{2.0, 2.0}, Threshold{2.0, 1.0}, Threshold{1.5, 1.2}}) {
            for (double a_n : {6.0, 8.0}) {
                TailDecomposition d =
                    tail_decomposition(ScalingSequence::large(log_n, a_n), u, rho);
                double upper = log_add(d.log_s_unequal.log, d.log_s_equal.log);
                worst_upper = std::max(worst_upper, d.log_t.log - upper);
                double lower = log_sub(upper, d.log_e_n.log);
                worst_lower = std::max(worst_lower, lower - d.log_t.log);
                double dominant = std::max(d.log_s_unequal.log, d.log_s_equal.log);
                min_margin = std::min(min_margin, dominant - d.log_e_n.log);
            }
        }
    }
    rows.push_back({"C10.upper", "log T <= union sum, 24-point grid", 0.0, worst_upper, 1e-6,
                    worst_upper <= 1e-6, false, "max log excess"});
    rows.push_back({"C10.lower", "log T >= log(sum - e_n), 24-point grid", 0.0, worst_lower,
                    1e-6, worst_lower <= 1e-6, false, "max log deficit"});
    rows.push_back({"C10.margin", "dominant sum - e_n bound, a_n >= 6", 5.0, min_margin, 5.0,
                    min_margin >= 5.0, false, "min log-unit margin"});
    add_runtime_row(rows, "C10", seconds_since(t0), 30.0);
}

}  // namespace

bool Report::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
}

bool Report::acceptable() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const Row& r) { return r.pass || r.expected_fail; });
}

std::size_t Report::fail_count(bool include_expected) const {
    std::size_t n = 0;
    for (const Row& r : rows)
        if (!r.pass && (include_expected || !r.expected_fail)) ++n;
    return n;
}

Report run(const Options& options) {
    using Fn = std::function<void(const Options&, std::vector<Row>&)>;
    const std::pair<const char*, Fn> criteria[] = {
        {"C1", criterion_qp},         {"C2", criterion_quadrature},
        {"C3", criterion_laplace},    {"C4", criterion_sharp},
        {"C5", criterion_large_rate}, {"C6", criterion_right_rate},
        {"C7", criterion_single_index}, {"C8", criterion_estimators},
        {"C9", criterion_coincidence}, {"C10", criterion_sandwich},
    };
    Report report;
    for (const auto& [id, fn] : criteria) {
        if (!options.criteria.empty()) {
            bool wanted = false;
            for (const std::string& c : options.criteria) {
                if (c == id || ("C" + c) == id) wanted = true;
            }
            if (!wanted) continue;
        }
        fn(options, report.rows);
    }
    return report;
}

Table to_table(const Report& report) {
    Table t;
    t.header = {"criterion", "params", "expected", "observed", "tolerance",
                "pass", "expected_fail", "note"};
    for (const Row& r : report.rows) {
        t.add_row({r.criterion, r.params, r.expected, r.observed, r.tolerance, r.pass,
                   r.expected_fail, r.note});
    }
    return t;
}

}  // namespace bivex::verify
