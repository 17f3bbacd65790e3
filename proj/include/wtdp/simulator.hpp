#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wtdp/channel.hpp"
#include "wtdp/model.hpp"
#include "wtdp/protocol.hpp"
#include "wtdp/rng.hpp"

namespace wtdp {

// Full trials run the five protocol phases and stop at all-green, a red flag
// or the slot cap; NdOnly trials stop once every observed side has made its
// first identification (the neighbor-discovery study mode).
enum class Phase { Full, NdOnly };

struct Scenario {
    std::vector<GroundTruth> trains;  // one or two, aligned on parallel tracks
    double l_over_delta = 1.0;        // track separation over in-track spacing
    ChannelParams channel;
    AntennaPattern antenna;
    ProtocolParams proto;
    NdfMode ndf_mode = NdfMode::PerSender;
    int hop_range = 5;                // K: in-track hop cap for receivable transmitters
    long max_slots = 20000;
    std::uint64_t seed = 1;
    bool probe_filler = true;
    bool ideal_channel = false;
    Phase phase = Phase::Full;

    void validate() const {
        if (trains.empty() || trains.size() > 2)
            throw std::invalid_argument("scenario needs one or two trains");
        for (const GroundTruth& gt : trains)
            if (gt.bns.size() < 2) throw std::invalid_argument("each train needs >= 2 nodes");
        if (hop_range < 1) throw std::invalid_argument("K must be >= 1");
        if (max_slots < 1) throw std::invalid_argument("max_slots must be > 0");
        if (trains.size() == 2 && l_over_delta <= 0.0)
            throw std::invalid_argument("l_over_delta must be > 0 for two trains");
        channel.validate();
        antenna.validate();
        proto.validate();
    }
};

// Two frequency sets, one per pointing direction, each reused every F hops.
// A right-pointing transmitter of node i lands on the left-pointing receiver
// of node i+1; transmit and receive frequencies of one antenna always differ.
struct FrequencyPlan {
    int reuse = 1;

    int tx_frequency(int pos, Direction pointing) const {  // pos is 1-based
        const int c = mod(pos, reuse);
        return pointing == Direction::Right ? c : reuse + c;
    }
    int rx_frequency(int pos, Direction side) const {
        return side == Direction::Left ? mod(pos - 1, reuse)
                                       : reuse + mod(pos + 1, reuse);
    }

private:
    static int mod(int a, int m) { return ((a % m) + m) % m; }
};

// A transmit antenna able to reach a given receiving antenna on its
// frequency, with the mean SNR of that directed link.
struct InterfererLink {
    int tx_train = 0;
    int tx_pos = 0;  // 1-based position on its train
    Direction tx_dir = Direction::Right;
    double mean_snr = 0.0;
    double distance = 0.0;  // in units of the in-track spacing
};

// All same-frequency transmit antennas with a line into the given receiving
// antenna: in-track hop distance capped at 1+(K-1)F, cross-train links
// admitted per the sector patterns at both ends. Sorted nearest first.
inline std::vector<InterfererLink> interferer_set(int rx_train, int rx_pos, Direction side,
                                                  const Scenario& sc) {
    const FrequencyPlan plan{sc.channel.reuse};
    const double snr0 = sc.channel.snr0_lin();
    const int cap = 1 + (sc.hop_range - 1) * sc.channel.reuse;
    const int want = plan.rx_frequency(rx_pos, side);
    std::vector<InterfererLink> links;
    for (int train = 0; train < static_cast<int>(sc.trains.size()); ++train) {
        const int n = static_cast<int>(sc.trains[train].bns.size());
        const double dy = train == rx_train ? 0.0 : sc.l_over_delta;
        for (int pos = 1; pos <= n; ++pos) {
            if (train == rx_train && pos == rx_pos) continue;
            if (std::abs(pos - rx_pos) > cap) continue;
            for (Direction dir : {Direction::Left, Direction::Right}) {
                if (plan.tx_frequency(pos, dir) != want) continue;
                const double dx = static_cast<double>(rx_pos - pos);  // tx -> rx
                const double tx_bore = dir == Direction::Right ? 1.0 : -1.0;
                const double rx_bore = side == Direction::Right ? 1.0 : -1.0;
                const double ang_tx = std::atan2(std::abs(dy), tx_bore * dx);
                const double ang_rx = std::atan2(std::abs(dy), rx_bore * -dx);
                const double gain =
                    antenna_gain(ang_tx, sc.antenna) * antenna_gain(ang_rx, sc.antenna);
                if (gain <= 0.0) continue;
                InterfererLink link;
                link.tx_train = train;
                link.tx_pos = pos;
                link.tx_dir = dir;
                link.distance = std::hypot(dx, dy);
                link.mean_snr = snr0 * gain / std::pow(link.distance, sc.channel.eta);
                links.push_back(link);
            }
        }
    }
    std::sort(links.begin(), links.end(), [&](const InterfererLink& a, const InterfererLink& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return sc.trains[a.tx_train].bns[a.tx_pos - 1] < sc.trains[b.tx_train].bns[b.tx_pos - 1];
    });
    return links;
}

struct SideRecord {
    MacAddress mac;
    Direction side = Direction::Left;
    bool has_true_neighbor = false;
    MacAddress true_neighbor;
    std::optional<MacAddress> first_identified;
    long identified_slot = 0;

    bool operator==(const SideRecord&) const = default;
};

struct RunMetrics {
    bool nd_correct = false;
    std::optional<long> nd_complete_slot;
    bool inaug_correct = false;
    std::optional<long> inaug_complete_slot;
    std::optional<long> red_flag_slot;
    bool truncated = false;
    long end_slot = 0;
    std::vector<SideRecord> sides;  // observed train only

    bool operator==(const RunMetrics&) const = default;
};

// Per-node protocol events, exposed for tracing: (slot, mac, event).
using EventSink = std::function<void(long slot, MacAddress mac, const NodeEvent&)>;

namespace detail {

// Geometry and link lists shared by all trials of one scenario.
struct SimLayout {
    struct RxSide {
        int train, pos;
        Direction side;
        std::vector<InterfererLink> links;
        std::vector<int> link_tx_flat;
    };
    int n_antennas = 0;
    std::vector<RxSide> rx_sides;

    static int flat_antenna(const Scenario& sc, int train, int pos, Direction dir) {
        int base = 0;
        for (int t = 0; t < train; ++t) base += 2 * static_cast<int>(sc.trains[t].bns.size());
        return base + 2 * (pos - 1) + (dir == Direction::Right ? 1 : 0);
    }

    explicit SimLayout(const Scenario& sc) {
        for (const GroundTruth& gt : sc.trains)
            n_antennas += 2 * static_cast<int>(gt.bns.size());
        for (int train = 0; train < static_cast<int>(sc.trains.size()); ++train) {
            const int n = static_cast<int>(sc.trains[train].bns.size());
            for (int pos = 1; pos <= n; ++pos) {
                for (Direction side : {Direction::Left, Direction::Right}) {
                    RxSide rx{train, pos, side, {}, {}};
                    if (sc.ideal_channel) {
                        // wired emulation: only the true neighbor is audible
                        const int npos = side == Direction::Left ? pos - 1 : pos + 1;
                        if (npos >= 1 && npos <= n) {
                            InterfererLink link;
                            link.tx_train = train;
                            link.tx_pos = npos;
                            link.tx_dir = opposite(side);
                            link.distance = 1.0;
                            link.mean_snr = std::numeric_limits<double>::infinity();
                            rx.links.push_back(link);
                        }
                    } else {
                        rx.links = interferer_set(train, pos, side, sc);
                    }
                    rx.link_tx_flat.reserve(rx.links.size());
                    for (const InterfererLink& l : rx.links)
                        rx.link_tx_flat.push_back(
                            flat_antenna(sc, l.tx_train, l.tx_pos, l.tx_dir));
                    rx_sides.push_back(std::move(rx));
                }
            }
        }
    }
};

}  // namespace detail

// One slotted-ALOHA trial: per slot every antenna of every node draws
// hello/topology/idle on its own, frames are decoded per receiving antenna
// under that slot's fading, and decoded frames drive the per-node state
// machines. The observer watches train 0 against its ground truth.
class TrialEngine {
public:
    TrialEngine(const Scenario& sc, const detail::SimLayout& layout, std::uint64_t trial_seed)
        : sc_(sc), layout_(layout), rng_(Rng::stream(sc.seed, trial_seed)) {
        const ProtocolConfig cfg{sc.proto, sc.ndf_mode};
        for (int train = 0; train < static_cast<int>(sc.trains.size()); ++train) {
            const GroundTruth& gt = sc.trains[train];
            for (std::size_t i = 0; i < gt.bns.size(); ++i) {
                std::vector<CnId> own;
                for (const auto& [cn, mac] : gt.cn_attachments)
                    if (mac == gt.bns[i]) own.push_back(cn);
                nodes_.emplace_back(gt.bns[i], std::move(own), cfg);
            }
        }
        // one fading process per directed link, in rx-side order
        fading_.reserve(layout_.rx_sides.size());
        for (const auto& rx : layout_.rx_sides) {
            std::vector<FadingProcess> per_link;
            per_link.reserve(rx.links.size());
            for (std::size_t i = 0; i < rx.links.size(); ++i)
                per_link.push_back(make_fading(sc.channel, rng_));
            fading_.push_back(std::move(per_link));
        }
    }

    RunMetrics run(const EventSink& sink = {}) {
        RunMetrics metrics;
        init_side_records(metrics);
        const int observed = static_cast<int>(sc_.trains[0].bns.size());
        long tracked_open = 0;
        for (const SideRecord& r : metrics.sides)
            if (r.has_true_neighbor) ++tracked_open;

        std::vector<std::uint8_t> active(layout_.n_antennas, 0);
        std::vector<Frame> staged(layout_.n_antennas);
        std::vector<LinkGain> gains;
        std::vector<const Frame*> frames;
        std::vector<NodeEvent> events;

        for (long slot = 1; slot <= sc_.max_slots; ++slot) {
            // transmit draws, one fixed-order uniform per antenna
            int antenna = 0;
            int node = 0;
            for (int train = 0; train < static_cast<int>(sc_.trains.size()); ++train) {
                const int n = static_cast<int>(sc_.trains[train].bns.size());
                for (int pos = 1; pos <= n; ++pos, ++node) {
                    for (Direction dir : {Direction::Left, Direction::Right}) {
                        const double u = rng_.uniform();
                        if (u < sc_.proto.hello_prob) {
                            staged[antenna] = nodes_[node].build_frame(dir, FrameKind::Hello);
                            active[antenna] = 1;
                        } else if (u < sc_.proto.hello_prob + sc_.proto.topo_prob) {
                            staged[antenna] = nodes_[node].build_frame(dir, FrameKind::Topology);
                            active[antenna] =
                                staged[antenna].kind != FrameKind::Probe || sc_.probe_filler;
                        } else {
                            active[antenna] = 0;
                        }
                        ++antenna;
                    }
                }
            }

            // decode per receiving antenna, then feed the state machines;
            // all frames were staged from pre-slot state
            for (std::size_t r = 0; r < layout_.rx_sides.size(); ++r) {
                const auto& rx = layout_.rx_sides[r];
                gains.clear();
                frames.clear();
                for (std::size_t li = 0; li < rx.links.size(); ++li) {
                    if (!active[rx.link_tx_flat[li]]) continue;
                    LinkGain g;
                    g.avg_snr_lin = rx.links[li].mean_snr;
                    g.h2 = sc_.ideal_channel ? 1.0 : fading_[r][li].sample(slot, rng_);
                    gains.push_back(g);
                    frames.push_back(&staged[rx.link_tx_flat[li]]);
                }
                if (gains.empty()) continue;
                const int node_idx = node_index(rx.train, rx.pos);
                NodeState& receiver = nodes_[node_idx];
                events.clear();
                if (sc_.ideal_channel) {
                    for (const Frame* f : frames) dispatch(receiver, rx.side, *f, events);
                } else {
                    for (std::size_t j : decode_slot(std::span<const LinkGain>(gains),
                                                     sc_.channel.rate))
                        dispatch(receiver, rx.side, *frames[j], events);
                }
                for (const NodeEvent& ev : events) {
                    if (sink) sink(slot, receiver.mac(), ev);
                    observe(ev, rx, slot, metrics, tracked_open);
                }
            }

            // observer checks, train 0 only
            if (metrics.red_flag_slot) {
                metrics.end_slot = slot;
                return metrics;
            }
            if (!metrics.nd_complete_slot && tracked_open == 0) {
                metrics.nd_complete_slot = slot;
                metrics.nd_correct = true;
                for (const SideRecord& rec : metrics.sides)
                    if (rec.has_true_neighbor && rec.first_identified != rec.true_neighbor)
                        metrics.nd_correct = false;
                if (sc_.phase == Phase::NdOnly) {
                    metrics.end_slot = slot;
                    return metrics;
                }
            }
            if (sc_.phase == Phase::Full) {
                bool all_green = true;
                for (int i = 0; i < observed; ++i)
                    all_green = all_green && nodes_[i].green_flag();
                if (all_green) {
                    metrics.inaug_complete_slot = slot;
                    metrics.inaug_correct = true;
                    for (int i = 0; i < observed; ++i)
                        if (nodes_[i].full_topology() != sc_.trains[0].bns)
                            metrics.inaug_correct = false;
                    metrics.end_slot = slot;
                    return metrics;
                }
            }
        }
        metrics.truncated = true;
        metrics.end_slot = sc_.max_slots;
        return metrics;
    }

    const NodeState& node(int train, int pos) const { return nodes_[node_index(train, pos)]; }

private:
    static void dispatch(NodeState& receiver, Direction side, const Frame& frame,
                         std::vector<NodeEvent>& events) {
        switch (frame.kind) {
            case FrameKind::Hello:
                receiver.on_hello(side, frame.sender, events);
                break;
            case FrameKind::Topology:
                receiver.on_topology(side, frame, events);
                break;
            case FrameKind::Probe:
                break;  // interference only
        }
    }

    int node_index(int train, int pos) const {
        int base = 0;
        for (int t = 0; t < train; ++t) base += static_cast<int>(sc_.trains[t].bns.size());
        return base + pos - 1;
    }

    void init_side_records(RunMetrics& metrics) const {
        const GroundTruth& gt = sc_.trains[0];
        const int n = static_cast<int>(gt.bns.size());
        for (int pos = 1; pos <= n; ++pos) {
            for (Direction side : {Direction::Left, Direction::Right}) {
                SideRecord rec;
                rec.mac = gt.bns[pos - 1];
                rec.side = side;
                const int npos = side == Direction::Left ? pos - 1 : pos + 1;
                if (npos >= 1 && npos <= n) {
                    rec.has_true_neighbor = true;
                    rec.true_neighbor = gt.bns[npos - 1];
                }
                metrics.sides.push_back(rec);
            }
        }
    }

    void observe(const NodeEvent& ev, const detail::SimLayout::RxSide& rx, long slot,
                 RunMetrics& metrics, long& tracked_open) {
        if (rx.train != 0) return;
        if (ev.kind == NodeEvent::Kind::Identified) {
            SideRecord& rec =
                metrics.sides[2 * (rx.pos - 1) + (ev.dir == Direction::Right ? 1 : 0)];
            if (!rec.first_identified) {
                rec.first_identified = ev.peer;
                rec.identified_slot = slot;
                if (rec.has_true_neighbor) --tracked_open;
            }
        } else if (ev.kind == NodeEvent::Kind::RedFlag && !metrics.red_flag_slot) {
            metrics.red_flag_slot = slot;
        }
    }

    const Scenario& sc_;
    const detail::SimLayout& layout_;
    Rng rng_;
    std::vector<NodeState> nodes_;
    std::vector<std::vector<FadingProcess>> fading_;
};

inline RunMetrics run_trial(const Scenario& sc, std::uint64_t trial_index = 0,
                            const EventSink& sink = {}) {
    sc.validate();
    detail::SimLayout layout(sc);
    return TrialEngine(sc, layout, trial_index).run(sink);
}

// Aggregates over a batch of trials. "Attempt" times charge failed trials
// with the slots they consumed, which is what the sequential-restart and
// Wald-ratio estimators of the time to first success both build on.
struct BatchStats {
    long trials = 0;
    long nd_completed = 0;
    long inaug_completed = 0;
    long truncated = 0;
    long red_flags = 0;
    double nd_success = 0.0, nd_success_se = 0.0;
    double inaug_success = 0.0, inaug_success_se = 0.0;
    double mean_nd_time = 0.0;     // over trials that completed discovery
    double mean_inaug_time = 0.0;  // over trials that reached all-green
    double t_first_nd_seq = 0.0, t_first_nd_wald = 0.0;
    double t_first_inaug_seq = 0.0, t_first_inaug_wald = 0.0;
};

namespace detail {

inline double sequential_restart_mean(const std::vector<double>& attempt_time,
                                      const std::vector<std::uint8_t>& success) {
    // accumulate attempt times until each success, in trial order
    double acc = 0.0, total = 0.0;
    long samples = 0;
    for (std::size_t i = 0; i < attempt_time.size(); ++i) {
        acc += attempt_time[i];
        if (success[i]) {
            total += acc;
            acc = 0.0;
            ++samples;
        }
    }
    return samples > 0 ? total / static_cast<double>(samples)
                       : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline BatchStats summarize(const std::vector<RunMetrics>& runs, long max_slots) {
    BatchStats s;
    s.trials = static_cast<long>(runs.size());
    if (runs.empty()) return s;
    std::vector<double> nd_attempt(runs.size()), in_attempt(runs.size());
    std::vector<std::uint8_t> nd_ok(runs.size()), in_ok(runs.size());
    double nd_time_sum = 0.0, in_time_sum = 0.0;
    double nd_attempt_sum = 0.0, in_attempt_sum = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunMetrics& r = runs[i];
        s.truncated += r.truncated ? 1 : 0;
        s.red_flags += r.red_flag_slot ? 1 : 0;
        nd_ok[i] = r.nd_correct ? 1 : 0;
        in_ok[i] = r.inaug_correct ? 1 : 0;
        if (r.nd_complete_slot) {
            ++s.nd_completed;
            nd_time_sum += static_cast<double>(*r.nd_complete_slot);
        }
        if (r.inaug_complete_slot) {
            ++s.inaug_completed;
            in_time_sum += static_cast<double>(*r.inaug_complete_slot);
        }
        nd_attempt[i] = static_cast<double>(r.nd_complete_slot.value_or(
            r.end_slot > 0 ? r.end_slot : max_slots));
        in_attempt[i] = static_cast<double>(r.inaug_complete_slot.value_or(
            r.end_slot > 0 ? r.end_slot : max_slots));
        nd_attempt_sum += nd_attempt[i];
        in_attempt_sum += in_attempt[i];
    }
    const double n = static_cast<double>(runs.size());
    auto rate_and_se = [n](long hits, double& rate, double& se) {
        rate = static_cast<double>(hits) / n;
        se = std::sqrt(std::max(rate * (1.0 - rate), 0.0) / n);
    };
    long nd_hits = 0, in_hits = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        nd_hits += nd_ok[i];
        in_hits += in_ok[i];
    }
    rate_and_se(nd_hits, s.nd_success, s.nd_success_se);
    rate_and_se(in_hits, s.inaug_success, s.inaug_success_se);
    s.mean_nd_time = s.nd_completed ? nd_time_sum / s.nd_completed
                                    : std::numeric_limits<double>::quiet_NaN();
    s.mean_inaug_time = s.inaug_completed ? in_time_sum / s.inaug_completed
                                          : std::numeric_limits<double>::quiet_NaN();
    s.t_first_nd_seq = detail::sequential_restart_mean(nd_attempt, nd_ok);
    s.t_first_nd_wald = s.nd_success > 0.0 ? (nd_attempt_sum / n) / s.nd_success
                                           : std::numeric_limits<double>::quiet_NaN();
    s.t_first_inaug_seq = detail::sequential_restart_mean(in_attempt, in_ok);
    s.t_first_inaug_wald = s.inaug_success > 0.0 ? (in_attempt_sum / n) / s.inaug_success
                                                 : std::numeric_limits<double>::quiet_NaN();
    return s;
}

// Runs `trials` independent trials with per-trial RNG streams derived from
// (scenario seed, trial index); results do not depend on the thread count.
inline std::vector<RunMetrics> run_trials(const Scenario& sc, long trials, int threads = 1,
                                          const EventSink& sink = {}) {
    sc.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    detail::SimLayout layout(sc);
    std::vector<RunMetrics> runs(trials);
    if (threads <= 1 || trials == 1 || sink) {
        for (long i = 0; i < trials; ++i)
            runs[i] = TrialEngine(sc, layout, static_cast<std::uint64_t>(i)).run(sink);
        return runs;
    }
    const int workers = std::min<long>(threads, trials);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (long i = w; i < trials; i += workers)
                runs[i] = TrialEngine(sc, layout, static_cast<std::uint64_t>(i)).run();
        });
    }
    for (std::thread& t : pool) t.join();
    return runs;
}

inline BatchStats run_batch(const Scenario& sc, long trials, int threads = 1) {
    return summarize(run_trials(sc, trials, threads), sc.max_slots);
}

}  // namespace wtdp
