#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "wtdp/model.hpp"

namespace wtdp {

enum class RedFlagReason { IdentificationFailure, LockingFailure };

// How foreign-topology-frame counters trigger a red flag: one counter per
// sender reaching the threshold (default), or the sum over all senders.
enum class NdfMode { PerSender, AggregateSum };

struct ProtocolConfig {
    ProtocolParams params;
    NdfMode ndf_mode = NdfMode::PerSender;
};

struct NodeEvent {
    enum class Kind { Identified, Locked, NdRestart, RedFlag, TableUpdated, GreenFlag };
    Kind kind;
    Direction dir = Direction::Left;
    MacAddress peer;  // Identified/Locked only
    RedFlagReason reason = RedFlagReason::IdentificationFailure;
};

inline const char* to_string(NodeEvent::Kind k) {
    switch (k) {
        case NodeEvent::Kind::Identified: return "identified";
        case NodeEvent::Kind::Locked: return "locked";
        case NodeEvent::Kind::NdRestart: return "nd_restart";
        case NodeEvent::Kind::RedFlag: return "red_flag";
        case NodeEvent::Kind::TableUpdated: return "table_updated";
        case NodeEvent::Kind::GreenFlag: return "green_flag";
    }
    return "?";
}

// Discovery state for one antenna direction.
struct SideState {
    std::map<MacAddress, int> nd_counters;
    std::optional<MacAddress> identified;
    std::optional<MacAddress> locked;
    std::optional<Frame> pending_topology;  // topology heard before identification
    std::map<MacAddress, int> ndf_counters;
    int topo_counter = 0;
    bool converged = false;
};

class NodeState {
public:
    NodeState() = default;
    NodeState(MacAddress mac, std::vector<CnId> own_cns, ProtocolConfig cfg)
        : mac_(mac), cfg_(cfg) {
        cn_table_[mac] = std::move(own_cns);
    }

    MacAddress mac() const { return mac_; }
    const SideState& side(Direction d) const { return sides_[side_index(d)]; }
    const std::vector<MacAddress>& topo_table(Direction d) const {
        return topo_table_[side_index(d)];
    }
    const std::map<MacAddress, std::vector<CnId>>& cn_table() const { return cn_table_; }
    bool red_flag() const { return red_flag_; }
    bool green_flag() const { return green_flag_; }

    // Hello frames feed the neighbor-discovery counters until a neighbor is
    // identified on that side; afterwards they are ignored. A counter is
    // created at zero and then incremented, so the first reception counts as
    // one and identification takes exactly hello_threshold receptions.
    void on_hello(Direction dir, MacAddress sender, std::vector<NodeEvent>& out) {
        if (red_flag_) return;
        SideState& s = sides_[side_index(dir)];
        if (s.identified) return;
        const int count = ++s.nd_counters[sender];
        if (count < cfg_.params.hello_threshold) return;
        s.identified = sender;
        out.push_back({NodeEvent::Kind::Identified, dir, sender, {}});
        if (s.pending_topology) {
            const Frame saved = *std::exchange(s.pending_topology, std::nullopt);
            on_topology(dir, saved, out);
        }
    }

    void on_topology(Direction dir, const Frame& frame, std::vector<NodeEvent>& out) {
        if (red_flag_) return;
        SideState& s = sides_[side_index(dir)];

        // Nothing identified yet: keep the most recent frame for a later
        // pairwise consistency check.
        if (!s.identified) {
            s.pending_topology = frame;
            return;
        }

        if (!s.locked) {
            if (frame.dest == mac_) {
                if (frame.sender == *s.identified) {
                    // PCC passed: the identified neighbor addressed us.
                    s.locked = frame.sender;
                    s.ndf_counters.clear();
                    s.pending_topology.reset();
                    out.push_back({NodeEvent::Kind::Locked, dir, frame.sender, {}});
                    apply_table_update(dir, frame, out);
                } else {
                    // PCC failed: somebody else considers us their neighbor.
                    // Neighbor discovery restarts from scratch on this side.
                    s.nd_counters.clear();
                    s.identified.reset();
                    s.pending_topology.reset();
                    out.push_back({NodeEvent::Kind::NdRestart, dir, {}, {}});
                }
            } else {
                bump_ndf(s, dir, frame.sender, RedFlagReason::IdentificationFailure, out);
            }
            return;
        }

        // Locked. Frames from the locked neighbor addressed to us drive the
        // topology table; its frames addressed elsewhere are dropped without
        // counting; everything else counts toward a locking failure.
        if (frame.sender == *s.locked) {
            if (frame.dest == mac_) {
                s.ndf_counters.clear();
                apply_table_update(dir, frame, out);
            }
        } else {
            bump_ndf(s, dir, frame.sender, RedFlagReason::LockingFailure, out);
        }
    }

    // kind_draw comes from the MAC layer (hello vs topology slot). A topology
    // draw without any identified or locked neighbor yields a Probe: the
    // transmission happens (keeping the per-slot transmit probability at
    // p_h + p_t) but carries no protocol payload.
    Frame build_frame(Direction dir, FrameKind kind_draw) const {
        Frame f;
        f.sender = mac_;
        f.direction = dir;
        if (kind_draw == FrameKind::Hello) {
            f.kind = FrameKind::Hello;
            return f;
        }
        const SideState& s = sides_[side_index(dir)];
        const std::optional<MacAddress> neighbor = s.locked ? s.locked : s.identified;
        if (!neighbor) {
            f.kind = FrameKind::Probe;
            return f;
        }
        f.kind = FrameKind::Topology;
        f.dest = *neighbor;
        f.mac_list = topo_table_[side_index(opposite(dir))];
        append_cns(f.cn_map, mac_);
        for (const MacAddress& m : f.mac_list) append_cns(f.cn_map, m);
        return f;
    }

    // Everything this node currently believes about the backbone, reading
    // left to right; always defined, possibly partial.
    std::vector<MacAddress> full_topology() const {
        std::vector<MacAddress> out(topo_table_[side_index(Direction::Left)].rbegin(),
                                    topo_table_[side_index(Direction::Left)].rend());
        out.push_back(mac_);
        const auto& right = topo_table_[side_index(Direction::Right)];
        out.insert(out.end(), right.begin(), right.end());
        return out;
    }

private:
    void apply_table_update(Direction dir, const Frame& frame, std::vector<NodeEvent>& out) {
        SideState& s = sides_[side_index(dir)];
        std::vector<MacAddress> fresh;
        fresh.reserve(frame.mac_list.size() + 1);
        fresh.push_back(*s.locked);
        for (const MacAddress& m : frame.mac_list)
            if (m != mac_ && std::find(fresh.begin(), fresh.end(), m) == fresh.end())
                fresh.push_back(m);

        bool changed = fresh != topo_table_[side_index(dir)];
        for (const auto& [cn, owner] : frame.cn_map) {
            std::vector<CnId>& known = cn_table_[owner];
            if (std::find(known.begin(), known.end(), cn) == known.end()) {
                known.push_back(cn);
                changed = true;
            }
        }

        if (changed) {
            topo_table_[side_index(dir)] = std::move(fresh);
            s.topo_counter = 0;
            s.converged = false;
            out.push_back({NodeEvent::Kind::TableUpdated, dir, {}, {}});
            refresh_green(out);
        } else if (!s.converged) {
            ++s.topo_counter;
            if (s.topo_counter >= cfg_.params.topo_threshold) {
                s.converged = true;
                refresh_green(out);
            }
        }
    }

    void bump_ndf(SideState& s, Direction dir, MacAddress sender, RedFlagReason reason,
                  std::vector<NodeEvent>& out) {
        const int count = ++s.ndf_counters[sender];
        bool tripped = false;
        if (cfg_.ndf_mode == NdfMode::PerSender) {
            tripped = count >= cfg_.params.ndf_threshold;
        } else {
            int total = 0;
            for (const auto& [mac, c] : s.ndf_counters) total += c;
            tripped = total >= cfg_.params.ndf_threshold;
        }
        if (!tripped) return;
        red_flag_ = true;
        green_flag_ = false;
        out.push_back({NodeEvent::Kind::RedFlag, dir, sender, reason});
    }

    void refresh_green(std::vector<NodeEvent>& out) {
        bool any_locked = false;
        bool all_converged = true;
        for (const SideState& s : sides_) {
            if (!s.locked) continue;
            any_locked = true;
            all_converged = all_converged && s.converged;
        }
        const bool green = any_locked && all_converged && !red_flag_;
        if (green && !green_flag_)
            out.push_back({NodeEvent::Kind::GreenFlag, Direction::Left, {}, {}});
        green_flag_ = green;
    }

    void append_cns(std::vector<std::pair<CnId, MacAddress>>& cn_map, MacAddress bn) const {
        auto it = cn_table_.find(bn);
        if (it == cn_table_.end()) return;
        for (const CnId& cn : it->second) cn_map.emplace_back(cn, bn);
    }

    MacAddress mac_;
    ProtocolConfig cfg_;
    SideState sides_[2];
    std::vector<MacAddress> topo_table_[2];  // nearest first, never contains self
    std::map<MacAddress, std::vector<CnId>> cn_table_;
    bool red_flag_ = false;
    bool green_flag_ = false;
};

}  // namespace wtdp
