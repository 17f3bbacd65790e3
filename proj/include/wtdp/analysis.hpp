#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wtdp {

struct KTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonConvergent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inputs of the closed-form neighbor-discovery model. n_tx is the number of
// same-frequency transmitters a receiving side can hear (the nearest is the
// true neighbor); exponent_sides is the number of independent (node, side)
// discovery instances the network-level metrics raise the per-side results to.
struct AnalysisInput {
    double snr0_lin = 31.622776601683793;
    double eta = 3.5;
    int reuse = 1;   // F
    int n_tx = 5;    // K
    double hello_prob = 0.15;
    double topo_prob = 0.15;
    double rate = 1.5;
    int hello_threshold = 10;  // m_h
    int exponent_sides = 10;

    double tx_prob() const { return hello_prob + topo_prob; }

    void validate() const {
        if (n_tx < 1) throw std::invalid_argument("K must be >= 1");
        if (hello_prob + topo_prob > 1.0 || hello_prob < 0.0 || topo_prob < 0.0)
            throw std::invalid_argument("require p_h, p_t >= 0 and p_h + p_t <= 1");
        if (hello_threshold < 1) throw std::invalid_argument("m_h must be >= 1");
        if (exponent_sides < 1) throw std::invalid_argument("exponent_sides must be >= 1");
    }
};

// Per-slot probability that a hello frame from the sender k hops away is
// decoded, for k = 1..K; each entry is bounded by the hello transmit
// probability.
struct SuccessProfile {
    std::vector<double> per_hop;
};

namespace detail {
inline double hop_loss(int k, const AnalysisInput& in) {
    return std::pow(1.0 + static_cast<double>(k - 1) * in.reuse, in.eta);
}
}  // namespace detail

// Success probability of the sender k hops away conditioned on one
// transmission state: the sender must be active, the frame must be a hello
// (factor p_h/p), the Rayleigh outage term covers noise, and every active
// interferer contributes an independent attenuation factor.
inline double frame_success_given_state(int k, std::span<const int> tx_state,
                                        const AnalysisInput& in) {
    const int K = static_cast<int>(tx_state.size());
    if (k < 1 || k > K) throw std::invalid_argument("sender index out of range");
    if (!tx_state[k - 1]) return 0.0;
    const double threshold = std::exp2(in.rate) - 1.0;
    const double dk = detail::hop_loss(k, in);
    double value = (in.hello_prob / in.tx_prob()) * std::exp(-threshold * dk / in.snr0_lin);
    for (int kp = 1; kp <= K; ++kp) {
        if (kp == k || !tx_state[kp - 1]) continue;
        value /= 1.0 + threshold * dk / detail::hop_loss(kp, in);
    }
    return value;
}

// Unconditional per-slot success probability: exact average over all 2^K
// transmission states, each transmitter active independently with
// probability p = p_h + p_t. Refused above K = 20.
inline double frame_success_prob(int k, const AnalysisInput& in) {
    const int K = in.n_tx;
    if (K > 20) throw KTooLarge("transmission-state enumeration refused for K > 20");
    if (k < 1 || k > K) throw std::invalid_argument("sender index out of range");
    const double p = in.tx_prob();
    std::vector<int> state(K, 0);
    double total = 0.0;
    for (std::uint32_t bits = 0; bits < (1u << K); ++bits) {
        double prob = 1.0;
        for (int j = 0; j < K; ++j) {
            state[j] = (bits >> j) & 1u;
            prob *= state[j] ? p : (1.0 - p);
        }
        if (!state[k - 1]) continue;
        total += prob * frame_success_given_state(k, state, in);
    }
    return total;
}

inline SuccessProfile success_profile(const AnalysisInput& in) {
    SuccessProfile sp;
    sp.per_hop.reserve(in.n_tx);
    for (int k = 1; k <= in.n_tx; ++k) sp.per_hop.push_back(frame_success_prob(k, in));
    return sp;
}

// Negative binomial with success probability q: pmf of the slot carrying the
// M-th success, and the tail Pr[T > t]. The tail is evaluated as the
// binomial probability of fewer than M successes in t slots, with per-term
// logs so that large t stays accurate; this equals
// 1 - I_q(M, t - M + 1) with I the regularized incomplete beta function.
inline double negbin_pmf(long t, int m, double q) {
    if (m < 1) throw std::invalid_argument("negbin order must be >= 1");
    if (q < 0.0 || q > 1.0) throw std::domain_error("negbin q outside [0,1]");
    if (t < m) return 0.0;
    if (q == 0.0) return 0.0;
    if (q == 1.0) return t == m ? 1.0 : 0.0;
    // log C(t-1, m-1) built incrementally: products of (t-m+j)/j.
    double log_choose = 0.0;
    for (int j = 1; j <= m - 1; ++j)
        log_choose += std::log(static_cast<double>(t - m + j)) - std::log(static_cast<double>(j));
    return std::exp(log_choose + m * std::log(q) +
                    static_cast<double>(t - m) * std::log1p(-q));
}

inline double negbin_ccdf(long t, int m, double q) {
    if (m < 1) throw std::invalid_argument("negbin order must be >= 1");
    if (q < 0.0 || q > 1.0) throw std::domain_error("negbin q outside [0,1]");
    if (t < m) return 1.0;
    if (q == 0.0) return 1.0;
    if (q == 1.0) return 0.0;
    const double log_ratio = std::log(q) - std::log1p(-q);
    double log_term = static_cast<double>(t) * std::log1p(-q);  // j = 0
    double max_log = log_term;
    std::vector<double> logs(m);
    logs[0] = log_term;
    for (int j = 1; j < m; ++j) {
        log_term += std::log(static_cast<double>(t - j + 1)) -
                    std::log(static_cast<double>(j)) + log_ratio;
        logs[j] = log_term;
        if (log_term > max_log) max_log = log_term;
    }
    double sum = 0.0;
    for (int j = 0; j < m; ++j) sum += std::exp(logs[j] - max_log);
    const double value = std::exp(max_log) * sum;
    return value < 1.0 ? value : 1.0;
}

namespace detail {
constexpr double kSeriesTail = 1e-10;
constexpr long kSeriesCap = 1000000;
}  // namespace detail

// Probability that the true neighbor (hop 1) is the first sender whose hello
// counter reaches the threshold: sum over finishing slots of the hop-1 pmf
// times every competitor still being short of the threshold. Senders are
// treated as independent; ties count against the neighbor.
inline double correct_discovery_prob(const SuccessProfile& sp, int hello_threshold) {
    if (sp.per_hop.empty()) throw std::invalid_argument("empty success profile");
    const double q1 = sp.per_hop.front();
    if (q1 <= 0.0) throw NonConvergent("hop-1 success probability is zero");
    double total = 0.0;
    for (long t = hello_threshold;; ++t) {
        if (t - hello_threshold > detail::kSeriesCap)
            throw NonConvergent("correct-discovery series exceeded the term cap");
        double term = negbin_pmf(t, hello_threshold, q1);
        for (std::size_t k = 1; k < sp.per_hop.size(); ++k)
            term *= negbin_ccdf(t, hello_threshold, sp.per_hop[k]);
        total += term;
        if (negbin_ccdf(t, hello_threshold, q1) < detail::kSeriesTail) break;
    }
    return total;
}

// CDF of the per-side completion time: discovery completes once any sender
// reaches the threshold, correct or not.
inline double discovery_time_cdf(long t, const SuccessProfile& sp, int hello_threshold) {
    double tail = 1.0;
    for (double q : sp.per_hop) tail *= negbin_ccdf(t, hello_threshold, q);
    return 1.0 - tail;
}

struct NetworkMetrics {
    double q_star = 0.0;        // probability every side discovers correctly
    double e_t_star = 0.0;      // mean slots until all sides complete
    double e_t_suc_star = 0.0;  // mean slots until the first fully correct run
};

namespace detail {
inline double expected_completion(std::span<const SuccessProfile> sides, int hello_threshold) {
    double total = 0.0;
    for (long t = 0;; ++t) {
        if (t > kSeriesCap) throw NonConvergent("completion-time series exceeded the term cap");
        double cdf = 1.0;
        for (const SuccessProfile& sp : sides)
            cdf *= discovery_time_cdf(t, sp, hello_threshold);
        const double term = 1.0 - cdf;
        total += term;
        if (term < kSeriesTail && t >= hello_threshold) break;
    }
    return total;
}
}  // namespace detail

// Network-level metrics under the homogeneous approximation: every side sees
// the same K transmitters, so the per-side results are raised to
// exponent_sides, and the mean time to the first correct run follows from
// Wald's equality as mean time over success probability.
inline NetworkMetrics network_metrics(const AnalysisInput& in) {
    in.validate();
    const SuccessProfile sp = success_profile(in);
    NetworkMetrics m;
    m.q_star = std::pow(correct_discovery_prob(sp, in.hello_threshold), in.exponent_sides);
    std::vector<SuccessProfile> sides(in.exponent_sides, sp);
    m.e_t_star = detail::expected_completion(sides, in.hello_threshold);
    m.e_t_suc_star = m.e_t_star / m.q_star;
    return m;
}

// Heterogeneous variant: one success profile per receiving side, each with
// that side's actual transmitter count.
inline NetworkMetrics network_metrics_per_side(const AnalysisInput& base,
                                               std::span<const int> per_side_tx) {
    if (per_side_tx.empty()) throw std::invalid_argument("no receiving sides");
    std::vector<SuccessProfile> sides;
    sides.reserve(per_side_tx.size());
    double q_star = 1.0;
    for (int k : per_side_tx) {
        AnalysisInput in = base;
        in.n_tx = k;
        in.validate();
        sides.push_back(success_profile(in));
        q_star *= correct_discovery_prob(sides.back(), base.hello_threshold);
    }
    NetworkMetrics m;
    m.q_star = q_star;
    m.e_t_star = detail::expected_completion(sides, base.hello_threshold);
    m.e_t_suc_star = m.e_t_star / m.q_star;
    return m;
}

}  // namespace wtdp
