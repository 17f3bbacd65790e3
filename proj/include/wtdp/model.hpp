#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wtdp {

enum class Direction { Left, Right };

constexpr Direction opposite(Direction d) {
    return d == Direction::Left ? Direction::Right : Direction::Left;
}

constexpr int side_index(Direction d) { return d == Direction::Left ? 0 : 1; }

constexpr const char* to_string(Direction d) {
    return d == Direction::Left ? "left" : "right";
}

// Opaque node identifier. The total order exists for deterministic
// tie-breaking only; it carries no physical meaning.
struct MacAddress {
    std::uint64_t id = 0;
    auto operator<=>(const MacAddress&) const = default;
};

// Opaque consist-network identifier; one consist network may attach to
// several backbone nodes.
struct CnId {
    std::uint64_t id = 0;
    auto operator<=>(const CnId&) const = default;
};

enum class FrameKind { Hello, Topology, Probe };

// MAC-layer message. Hello and Probe frames carry only the sender; Topology
// frames add the addressee, the ordered far-side MAC list (nearest first,
// sender excluded) and the consist-network attachments known for the sender
// plus the listed nodes.
struct Frame {
    FrameKind kind = FrameKind::Hello;
    MacAddress sender;
    Direction direction = Direction::Right;  // boresight of the transmitting antenna
    std::optional<MacAddress> dest;
    std::vector<MacAddress> mac_list;
    std::vector<std::pair<CnId, MacAddress>> cn_map;

    bool operator==(const Frame&) const = default;
};

// Physical layout known to the omniscient observer: nodes in left-to-right
// order plus the consist-network attachment list.
struct GroundTruth {
    std::vector<MacAddress> bns;
    std::vector<std::pair<CnId, MacAddress>> cn_attachments;
};

struct ProtocolParams {
    int hello_threshold = 10;  // m_h: hello receptions that identify a neighbor
    int ndf_threshold = 20;    // m_ndf: foreign topology frames before a red flag
    int topo_threshold = 30;   // m_t: unchanged topology receptions to converge
    double hello_prob = 0.15;  // p_h
    double topo_prob = 0.15;   // p_t

    void validate() const {
        if (hello_threshold < 1 || ndf_threshold < 1 || topo_threshold < 1)
            throw std::invalid_argument("protocol thresholds must be >= 1");
        if (hello_prob < 0.0 || topo_prob < 0.0 || hello_prob + topo_prob > 1.0)
            throw std::invalid_argument("require p_h >= 0, p_t >= 0, p_h + p_t <= 1");
    }
};

// Post-inauguration identifier assignment for one node: numeric node id in
// physical order plus a subnet id per attached consist network.
struct IdAssignment {
    MacAddress mac;
    int bn_id = 0;
    std::vector<std::pair<CnId, int>> subnets;
};

// Node ids are 1..N in physical order. Subnet ids are handed out in
// left-to-right order of first attachment; repeated consist networks keep
// the id assigned at their first appearance.
inline std::vector<IdAssignment> assign_ids(const GroundTruth& gt) {
    if (gt.bns.size() < 2) throw std::invalid_argument("a backbone needs at least 2 nodes");
    std::vector<IdAssignment> out;
    out.reserve(gt.bns.size());
    std::map<CnId, int> subnet_of;
    int next_subnet = 1;
    int bn_id = 1;
    for (const MacAddress& mac : gt.bns) {
        IdAssignment a;
        a.mac = mac;
        a.bn_id = bn_id++;
        for (const auto& [cn, attached_to] : gt.cn_attachments) {
            if (attached_to != mac) continue;
            auto [it, fresh] = subnet_of.try_emplace(cn, next_subnet);
            if (fresh) ++next_subnet;
            a.subnets.emplace_back(cn, it->second);
        }
        out.push_back(std::move(a));
    }
    for (const auto& [cn, attached_to] : gt.cn_attachments) {
        if (std::find(gt.bns.begin(), gt.bns.end(), attached_to) == gt.bns.end())
            throw std::invalid_argument("consist network attached to unknown node");
    }
    return out;
}

}  // namespace wtdp
