#include "bivex/mc.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bivex {

std::string_view to_string(Method m) {
    return m == Method::Naive ? "naive" : "is";
}

int resolve_workers(int requested) {
    int w = requested;
    if (w <= 0) {
#ifdef _OPENMP
        w = omp_get_max_threads();
#else
        w = 1;
#endif
    }
    if (const char* cap = std::getenv("BIVEX_THREADS")) {
        int c = std::atoi(cap);
        if (c > 0) w = std::min(w, c);
    }
    return std::max(w, 1);
}

namespace {

constexpr std::uint64_t kBlock = 1024;

// Streaming log-sum-exp accumulator; merging two accumulators is exact in
// a fixed order, which keeps block reductions deterministic.
struct LogSum {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;  // sum of exp(x - max)

    void add(double x) {
        if (std::isinf(x) && x < 0) return;
        if (x <= max) {
            sum += std::exp(x - max);
        } else {
            sum = sum * std::exp(max - x) + 1.0;
            max = x;
        }
    }
    void merge(const LogSum& o) {
        if (o.sum == 0.0) return;
        if (o.max <= max) {
            sum += o.sum * std::exp(o.max - max);
        } else {
            sum = sum * std::exp(max - o.max) + o.sum;
            max = o.max;
        }
    }
    double log() const {
        return sum == 0.0 ? -std::numeric_limits<double>::infinity()
                          : max + std::log(sum);
    }
};

// Runs `body(block_index)` over all blocks; with more than one worker the
// blocks run under OpenMP, otherwise as a plain serial loop. Each block
// writes only to its own slot, so results are identical either way.
template <typename Body>
void for_each_block(std::uint64_t blocks, int workers, Body&& body) {
#ifdef _OPENMP
    if (workers > 1) {
#pragma omp parallel for schedule(static) num_threads(workers)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b)
            body(static_cast<std::uint64_t>(b));
        return;
    }
#endif
    (void)workers;
    for (std::uint64_t b = 0; b < blocks; ++b) body(b);
}

}  // namespace

MaxSample sample_componentwise_max(std::uint64_t n, double rho, RngStream& rng) {
    if (n == 0) throw std::invalid_argument("sample_componentwise_max: n >= 1");
    MaxSample out;
    auto [z1, z2] = sample_bvn(rho, rng);
    out.max1 = z1;
    out.max2 = z2;
    for (std::uint64_t i = 2; i <= n; ++i) {
        auto [x1, x2] = sample_bvn(rho, rng);
        if (x1 > out.max1) {
            out.max1 = x1;
            out.argmax1 = i;
        }
        if (x2 > out.max2) {
            out.max2 = x2;
            out.argmax2 = i;
        }
    }
    return out;
}

TailEstimate estimate_tail_naive(std::uint64_t n, Threshold v, double rho,
                                 std::uint64_t trials, std::uint64_t seed, int workers) {
    if (trials == 0) throw std::invalid_argument("estimate_tail_naive: trials >= 1");
    int w = resolve_workers(workers);
    std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::uint64_t> block_hits(blocks, 0);

    for_each_block(blocks, w, [&](std::uint64_t b) {
        std::uint64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
        std::uint64_t hits = 0;
        for (std::uint64_t t = lo; t < hi; ++t) {
            RngStream rng(seed, t);
            MaxSample m = sample_componentwise_max(n, rho, rng);
            if (m.max1 > v.u1 && m.max2 > v.u2) ++hits;
        }
        block_hits[b] = hits;
    });

    std::uint64_t hits = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) hits += block_hits[b];

    TailEstimate out;
    out.trials = trials;
    out.method = Method::Naive;
    out.seed = seed;
    out.hits = hits;
    if (hits == 0) {
        out.zero_hits = true;
        out.std_err_log = std::numeric_limits<double>::infinity();
        return out;
    }
    out.log_p = LogProb{std::log(static_cast<double>(hits)) -
                        std::log(static_cast<double>(trials))};
    double p = static_cast<double>(hits) / static_cast<double>(trials);
    out.std_err_log = std::sqrt((1.0 - p) / static_cast<double>(hits));
    return out;
}

namespace {

struct IsBlockState {
    LogSum weight;      // sum of w over hit trials
    LogSum weight_sq;   // sum of w^2 over hit trials
    std::uint64_t hits = 0;
};

struct IsSetup {
    double shift_a1, shift_a2;  // dominant-point mean shift
    double theta1, theta2;      // inverse-covariance image of the shift
    double const_a;             // (1/2) shift . theta
    double shift_b11, shift_b12;  // tilt of the coordinate-1 sample
    double shift_b21, shift_b22;  // tilt of the coordinate-2 sample
};

}  // namespace

TailEstimate estimate_tail_importance(std::uint64_t n, Threshold v, double rho,
                                      std::uint64_t trials, std::uint64_t seed,
                                      int workers) {
    if (trials == 0) throw std::invalid_argument("estimate_tail_importance: trials >= 1");
    if (std::abs(rho) >= 1.0)
        throw DegenerateCorrelation("importance sampling requires |rho| < 1");
    int w = resolve_workers(workers);

    RateResult qp = orthant_qp(v, CorrelationStructure(1.0, 1.0, rho));
    double om = (1.0 - rho) * (1.0 + rho);
    IsSetup s;
    s.shift_a1 = qp.minimizer1;
    s.shift_a2 = qp.minimizer2;
    s.theta1 = (s.shift_a1 - rho * s.shift_a2) / om;
    s.theta2 = (s.shift_a2 - rho * s.shift_a1) / om;
    s.const_a = 0.5 * (s.theta1 * s.shift_a1 + s.theta2 * s.shift_a2);
    s.shift_b11 = v.u1;
    s.shift_b12 = rho * v.u1;
    s.shift_b21 = rho * v.u2;
    s.shift_b22 = v.u2;

    double log_n = std::log(static_cast<double>(n));
    double log_pairs = n >= 2 ? log_n + std::log(static_cast<double>(n - 1)) : 0.0;

    std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<IsBlockState> block_state(blocks);

    for_each_block(blocks, w, [&](std::uint64_t b) {
        static thread_local std::vector<double> t_score, u_score;
        t_score.resize(n);
        u_score.resize(n);
        IsBlockState st;
        std::uint64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
        for (std::uint64_t t = lo; t < hi; ++t) {
            RngStream rng(seed, t);
            double u_type = rng.next_uniform();
            std::uint64_t i_star = rng.next_index(n);
            std::uint64_t j_star = n >= 2 ? rng.next_index(n - 1) : 0;
            if (n >= 2 && j_star >= i_star) ++j_star;
            bool tilt_a = n < 2 || u_type < 0.5;

            double max1 = -std::numeric_limits<double>::infinity();
            double max2 = max1;
            LogSum lse_a;
            for (std::uint64_t i = 0; i < n; ++i) {
                auto [z1, z2] = sample_bvn(rho, rng);
                if (tilt_a) {
                    if (i == i_star) {
                        z1 += s.shift_a1;
                        z2 += s.shift_a2;
                    }
                } else {
                    if (i == i_star) {
                        z1 += s.shift_b11;
                        z2 += s.shift_b12;
                    } else if (i == j_star) {
                        z1 += s.shift_b21;
                        z2 += s.shift_b22;
                    }
                }
                max1 = std::max(max1, z1);
                max2 = std::max(max2, z2);
                lse_a.add(s.theta1 * z1 + s.theta2 * z2 - s.const_a);
                t_score[i] = v.u1 * z1 - 0.5 * v.u1 * v.u1;
                u_score[i] = v.u2 * z2 - 0.5 * v.u2 * v.u2;
            }
            if (!(max1 > v.u1 && max2 > v.u2)) continue;

            double log_r_a = lse_a.log() - log_n;
            double log_w;
            if (n >= 2) {
                // sum_{i != j} exp(t_i + u_j) = sum_i exp(t_i) * (S_u - exp(u_i))
                LogSum lse_u;
                std::uint64_t arg_u = 0;
                for (std::uint64_t i = 0; i < n; ++i) {
                    lse_u.add(u_score[i]);
                    if (u_score[i] > u_score[arg_u]) arg_u = i;
                }
                double log_su = lse_u.log();
                LogSum lse_u_wo_max;
                for (std::uint64_t i = 0; i < n; ++i)
                    if (i != arg_u) lse_u_wo_max.add(u_score[i]);
                LogSum lse_pairs;
                for (std::uint64_t i = 0; i < n; ++i) {
                    double rest = i == arg_u ? lse_u_wo_max.log()
                                             : log_sub(log_su, u_score[i]);
                    lse_pairs.add(t_score[i] + rest);
                }
                double log_r_b = lse_pairs.log() - log_pairs;
                log_w = -log_add(std::log(0.5) + log_r_a, std::log(0.5) + log_r_b);
            } else {
                log_w = -log_r_a;
            }
            st.weight.add(log_w);
            st.weight_sq.add(2.0 * log_w);
            ++st.hits;
        }
        block_state[b] = st;
    });

    LogSum weight, weight_sq;
    std::uint64_t hits = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        weight.merge(block_state[b].weight);
        weight_sq.merge(block_state[b].weight_sq);
        hits += block_state[b].hits;
    }

    TailEstimate out;
    out.trials = trials;
    out.method = Method::ImportanceSampling;
    out.seed = seed;
    out.hits = hits;
    if (hits == 0) {
        out.zero_hits = true;
        out.std_err_log = std::numeric_limits<double>::infinity();
        return out;
    }
    double log_t = std::log(static_cast<double>(trials));
    double log_sum_w = weight.log();
    double log_sum_w2 = weight_sq.log();
    out.log_p = LogProb{log_sum_w - log_t};
    out.ess = std::exp(2.0 * log_sum_w - log_sum_w2);
    out.ess_collapse = out.ess < 30.0;

    // Var(w 1E) = (sum w^2 - (sum w)^2 / T) / (T-1); se(log p) = se(mean)/mean.
    double log_var_num = log_sub(log_sum_w2, 2.0 * log_sum_w - log_t);
    if (std::isinf(log_var_num) || trials < 2) {
        out.std_err_log = 0.0;
    } else {
        double log_se_mean =
            0.5 * (log_var_num - std::log(static_cast<double>(trials - 1))) - 0.5 * log_t;
        out.std_err_log = std::exp(log_se_mean - out.log_p.log);
    }
    return out;
}

IndexCoincidenceEstimate index_coincidence(std::uint64_t n, double a_n, Threshold u,
                                           double rho, std::uint64_t trials,
                                           std::uint64_t seed, int workers) {
    if (trials == 0) throw std::invalid_argument("index_coincidence: trials >= 1");
    if (n == 0) throw std::invalid_argument("index_coincidence: n >= 1");
    int w = resolve_workers(workers);
    double v1 = a_n * u.u1, v2 = a_n * u.u2;
    if (!(v1 > 0.0))
        throw std::invalid_argument("index_coincidence: requires a_n*u1 > 0");

    double nd = static_cast<double>(n);
    double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    double log_phi_v1 = std_normal_log_cdf(v1);
    double c_none = std::exp(nd * log_phi_v1);  // P(max1 <= v1)
    double log_n_minus_1 = n >= 2 ? std::log(nd - 1.0) : -std::numeric_limits<double>::infinity();

    std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::uint64_t> block_ev(blocks, 0), block_dist(blocks, 0);

    for_each_block(blocks, w, [&](std::uint64_t b) {
        std::uint64_t ev = 0, dist = 0;
        std::uint64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
        for (std::uint64_t t = lo; t < hi; ++t) {
            RngStream rng(seed, t);
            double uu = rng.next_uniform();
            double xi = rng.next_normal();
            double vv = rng.next_uniform();

            // max1 conditioned on exceeding v1: Phi(m)^n uniform on (C, 1).
            double w1m = std::max((1.0 - c_none) * (1.0 - uu), 1e-308);
            double log_tu = std::log1p(-w1m);
            double log_s_scale = std::log(-log_tu) - std::log(nd);
            double log_y = log1m_exp_neg_from_log(log_s_scale);
            double m = std_normal_tail_quantile(std::min(log_y, -0.6932));

            double z2a = rho * m + s * xi;
            double theta = std::max(v2, z2a);
            // P(one of the other n-1 draws, conditioned below m in coord 1,
            // exceeds theta in coord 2).
            double log_gbar = bvn_upper_tail(theta, -m, -rho).log - std_normal_log_cdf(m);
            double p_exceed =
                n >= 2 ? std::exp(log_one_minus_pow(std::min(log_gbar, 0.0), log_n_minus_1))
                       : 0.0;

            if (z2a > v2) {
                ++ev;
                if (vv < p_exceed) ++dist;
            } else if (vv < p_exceed) {
                ++ev;
                ++dist;
            }
        }
        block_ev[b] = ev;
        block_dist[b] = dist;
    });

    IndexCoincidenceEstimate out;
    out.trials = trials;
    out.seed = seed;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        out.conditioning_hits += block_ev[b];
        out.distinct_hits += block_dist[b];
    }
    out.insufficient_hits = out.conditioning_hits < 30;
    if (out.conditioning_hits > 0) {
        out.p_distinct = static_cast<double>(out.distinct_hits) /
                         static_cast<double>(out.conditioning_hits);
        out.std_err = std::sqrt(std::max(out.p_distinct * (1.0 - out.p_distinct), 1e-12) /
                                static_cast<double>(out.conditioning_hits));
    }
    return out;
}

}  // namespace bivex
