#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "wtdp/protocol.hpp"
#include "wtdp/rng.hpp"

using namespace wtdp;

namespace {

MacAddress bn(std::uint64_t i) { return MacAddress{i}; }
CnId cn(std::uint64_t i) { return CnId{i}; }

ProtocolConfig cfg(int m_h, int m_ndf = 20, int m_t = 30) {
    ProtocolConfig c;
    c.params.hello_threshold = m_h;
    c.params.ndf_threshold = m_ndf;
    c.params.topo_threshold = m_t;
    return c;
}

Frame topo(MacAddress sender, MacAddress dest, std::vector<MacAddress> list = {},
           std::vector<std::pair<CnId, MacAddress>> cns = {}) {
    Frame f;
    f.kind = FrameKind::Topology;
    f.sender = sender;
    f.dest = dest;
    f.mac_list = std::move(list);
    f.cn_map = std::move(cns);
    return f;
}

bool has_event(const std::vector<NodeEvent>& evs, NodeEvent::Kind k) {
    for (const NodeEvent& e : evs)
        if (e.kind == k) return true;
    return false;
}

}  // namespace

TEST_CASE("identification needs exactly m_h hellos from one sender") {
    NodeState node(bn(100), {}, cfg(3));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_hello(Direction::Right, bn(2), evs);
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_hello(Direction::Right, bn(2), evs);
    REQUIRE(evs.empty());
    node.on_hello(Direction::Right, bn(1), evs);
    REQUIRE(evs.size() == 1);
    REQUIRE(evs[0].kind == NodeEvent::Kind::Identified);
    REQUIRE(evs[0].dir == Direction::Right);
    REQUIRE(evs[0].peer == bn(1));
    REQUIRE(node.side(Direction::Right).identified == bn(1));
    REQUIRE_FALSE(node.side(Direction::Left).identified.has_value());
}

TEST_CASE("threshold one identifies on the first hello") {
    NodeState node(bn(100), {}, cfg(1));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Left, bn(7), evs);
    REQUIRE(evs.size() == 1);
    REQUIRE(node.side(Direction::Left).identified == bn(7));
}

TEST_CASE("hellos after identification are ignored") {
    NodeState node(bn(100), {}, cfg(1));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    evs.clear();
    node.on_hello(Direction::Right, bn(2), evs);
    node.on_hello(Direction::Right, bn(1), evs);
    REQUIRE(evs.empty());
    REQUIRE(node.side(Direction::Right).identified == bn(1));
    REQUIRE(node.side(Direction::Right).nd_counters.count(bn(2)) == 0);
}

TEST_CASE("pairwise consistency: lock on a frame from the identified neighbor") {
    NodeState node(bn(100), {}, cfg(1));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    evs.clear();
    node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
    REQUIRE(has_event(evs, NodeEvent::Kind::Locked));
    REQUIRE(node.side(Direction::Right).locked == bn(1));
}

TEST_CASE("pairwise consistency: restart when somebody else addresses us") {
    NodeState node(bn(100), {}, cfg(2));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_hello(Direction::Right, bn(1), evs);
    evs.clear();
    node.on_topology(Direction::Right, topo(bn(2), bn(100)), evs);
    REQUIRE(has_event(evs, NodeEvent::Kind::NdRestart));
    REQUIRE_FALSE(node.side(Direction::Right).identified.has_value());
    REQUIRE(node.side(Direction::Right).nd_counters.empty());
}

TEST_CASE("overheard frames for other nodes raise a red flag at the threshold") {
    NodeState node(bn(100), {}, cfg(1, 2));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    evs.clear();
    node.on_topology(Direction::Right, topo(bn(2), bn(55)), evs);
    REQUIRE(evs.empty());
    node.on_topology(Direction::Right, topo(bn(2), bn(55)), evs);
    REQUIRE(evs.size() == 1);
    REQUIRE(evs[0].kind == NodeEvent::Kind::RedFlag);
    REQUIRE(evs[0].reason == RedFlagReason::IdentificationFailure);
    REQUIRE(node.red_flag());
    REQUIRE_FALSE(node.green_flag());
}

TEST_CASE("per-sender vs aggregate failure counters") {
    SECTION("per sender: two different senders do not trip a threshold of 2") {
        NodeState node(bn(100), {}, cfg(1, 2));
        std::vector<NodeEvent> evs;
        node.on_hello(Direction::Right, bn(1), evs);
        node.on_topology(Direction::Right, topo(bn(2), bn(55)), evs);
        node.on_topology(Direction::Right, topo(bn(3), bn(55)), evs);
        REQUIRE_FALSE(node.red_flag());
    }
    SECTION("aggregate: the sum trips it") {
        ProtocolConfig c = cfg(1, 2);
        c.ndf_mode = NdfMode::AggregateSum;
        NodeState node(bn(100), {}, c);
        std::vector<NodeEvent> evs;
        node.on_hello(Direction::Right, bn(1), evs);
        node.on_topology(Direction::Right, topo(bn(2), bn(55)), evs);
        node.on_topology(Direction::Right, topo(bn(3), bn(55)), evs);
        REQUIRE(node.red_flag());
    }
}

TEST_CASE("a topology frame heard before identification is kept for the check") {
    NodeState node(bn(100), {}, cfg(2));
    std::vector<NodeEvent> evs;

    SECTION("pending frame from the future neighbor locks immediately") {
        node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
        REQUIRE(evs.empty());
        node.on_hello(Direction::Right, bn(1), evs);
        node.on_hello(Direction::Right, bn(1), evs);
        REQUIRE(has_event(evs, NodeEvent::Kind::Identified));
        REQUIRE(has_event(evs, NodeEvent::Kind::Locked));
    }

    SECTION("only the most recent pending frame is kept") {
        node.on_topology(Direction::Right, topo(bn(2), bn(100)), evs);
        node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
        node.on_hello(Direction::Right, bn(1), evs);
        node.on_hello(Direction::Right, bn(1), evs);
        REQUIRE(has_event(evs, NodeEvent::Kind::Locked));
    }

    SECTION("pending frame from somebody else restarts discovery") {
        node.on_topology(Direction::Right, topo(bn(2), bn(100)), evs);
        node.on_hello(Direction::Right, bn(1), evs);
        node.on_hello(Direction::Right, bn(1), evs);
        REQUIRE(has_event(evs, NodeEvent::Kind::Identified));
        REQUIRE(has_event(evs, NodeEvent::Kind::NdRestart));
        REQUIRE_FALSE(node.side(Direction::Right).identified.has_value());
    }
}

TEST_CASE("locked side: foreign senders count toward a locking failure") {
    NodeState node(bn(100), {}, cfg(1, 2));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
    REQUIRE(node.side(Direction::Right).locked == bn(1));
    evs.clear();

    // a frame addressed to us by a third node is still a locking failure sign
    node.on_topology(Direction::Right, topo(bn(2), bn(100)), evs);
    REQUIRE_FALSE(node.red_flag());
    node.on_topology(Direction::Right, topo(bn(2), bn(77)), evs);
    REQUIRE(node.red_flag());
    REQUIRE(evs.back().reason == RedFlagReason::LockingFailure);
}

TEST_CASE("frames from the locked neighbor reset the failure counters") {
    NodeState node(bn(100), {}, cfg(1, 2));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
    node.on_topology(Direction::Right, topo(bn(2), bn(77)), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);  // reset
    node.on_topology(Direction::Right, topo(bn(2), bn(77)), evs);
    REQUIRE_FALSE(node.red_flag());
    // the locked neighbor talking to its other side is dropped without counting
    node.on_topology(Direction::Right, topo(bn(1), bn(77)), evs);
    REQUIRE_FALSE(node.red_flag());
    REQUIRE(node.side(Direction::Right).ndf_counters.count(bn(1)) == 0);
}

TEST_CASE("lock never changes afterwards") {
    NodeState node(bn(100), {}, cfg(1, 1000));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100)), evs);
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
        const MacAddress sender = bn(1 + static_cast<std::uint64_t>(rng.uniform() * 5));
        const MacAddress dest = rng.bernoulli(0.5) ? bn(100) : bn(55);
        node.on_topology(Direction::Right, topo(sender, dest), evs);
        node.on_hello(Direction::Right, sender, evs);
        REQUIRE(node.side(Direction::Right).locked == bn(1));
    }
}

TEST_CASE("table update, convergence counting and the green flag") {
    NodeState node(bn(100), {}, cfg(1, 100, 3));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2), bn(3)}), evs);
    REQUIRE(node.topo_table(Direction::Right) ==
            std::vector<MacAddress>{bn(1), bn(2), bn(3)});
    evs.clear();

    // unchanged tables tick the counter; the third quiet frame converges
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2), bn(3)}), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2), bn(3)}), evs);
    REQUIRE_FALSE(node.green_flag());
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2), bn(3)}), evs);
    REQUIRE(node.side(Direction::Right).converged);
    REQUIRE(node.green_flag());
    REQUIRE(has_event(evs, NodeEvent::Kind::GreenFlag));
    evs.clear();

    // a late change drops convergence and the green flag
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2), bn(3), bn(4)}), evs);
    REQUIRE(has_event(evs, NodeEvent::Kind::TableUpdated));
    REQUIRE_FALSE(node.side(Direction::Right).converged);
    REQUIRE_FALSE(node.green_flag());
}

TEST_CASE("a new consist-network attachment counts as a table change") {
    NodeState node(bn(100), {}, cfg(1, 100, 2));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Right, bn(1), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2)}), evs);
    node.on_topology(Direction::Right, topo(bn(1), bn(100), {bn(2)}), evs);
    evs.clear();
    node.on_topology(Direction::Right,
                     topo(bn(1), bn(100), {bn(2)}, {{cn(5), bn(2)}}), evs);
    REQUIRE(has_event(evs, NodeEvent::Kind::TableUpdated));
    REQUIRE(node.side(Direction::Right).topo_counter == 0);
}

TEST_CASE("topology frame construction") {
    // node 4 locked left to node 3, right table already holds 5 and 6,
    // consist networks: 23 and 22 on node 4, 23 on node 5, 22 and 21 on node 6
    NodeState node(bn(4), {cn(23), cn(22)}, cfg(1));
    std::vector<NodeEvent> evs;
    node.on_hello(Direction::Left, bn(3), evs);
    node.on_topology(Direction::Left, topo(bn(3), bn(4)), evs);
    node.on_hello(Direction::Right, bn(5), evs);
    node.on_topology(Direction::Right,
                     topo(bn(5), bn(4), {bn(6)},
                          {{cn(23), bn(5)}, {cn(22), bn(6)}, {cn(21), bn(6)}}),
                     evs);

    const Frame f = node.build_frame(Direction::Left, FrameKind::Topology);
    REQUIRE(f.kind == FrameKind::Topology);
    REQUIRE(f.dest == bn(3));
    REQUIRE(f.mac_list == std::vector<MacAddress>{bn(5), bn(6)});
    REQUIRE(f.cn_map == std::vector<std::pair<CnId, MacAddress>>{{cn(23), bn(4)},
                                                                 {cn(22), bn(4)},
                                                                 {cn(23), bn(5)},
                                                                 {cn(22), bn(6)},
                                                                 {cn(21), bn(6)}});
}

TEST_CASE("topology draw without a neighbor yields a probe, hello is unconditional") {
    NodeState node(bn(9), {}, cfg(5));
    REQUIRE(node.build_frame(Direction::Left, FrameKind::Topology).kind == FrameKind::Probe);
    const Frame hello = node.build_frame(Direction::Right, FrameKind::Hello);
    REQUIRE(hello.kind == FrameKind::Hello);
    REQUIRE(hello.sender == bn(9));
    REQUIRE_FALSE(hello.dest.has_value());
    REQUIRE(hello.mac_list.empty());
}

TEST_CASE("full topology view concatenates both sides around self") {
    NodeState node(bn(3), {}, cfg(1));
    std::vector<NodeEvent> evs;
    REQUIRE(node.full_topology() == std::vector<MacAddress>{bn(3)});
    node.on_hello(Direction::Left, bn(2), evs);
    node.on_topology(Direction::Left, topo(bn(2), bn(3), {bn(1)}), evs);
    node.on_hello(Direction::Right, bn(4), evs);
    node.on_topology(Direction::Right, topo(bn(4), bn(3), {bn(5), bn(6)}), evs);
    REQUIRE(node.full_topology() ==
            std::vector<MacAddress>{bn(1), bn(2), bn(3), bn(4), bn(5), bn(6)});
}

TEST_CASE("a node never stores itself in a topology table") {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        NodeState node(bn(100), {}, cfg(1, 1000, 5));
        std::vector<NodeEvent> evs;
        for (int step = 0; step < 300; ++step) {
            const Direction dir = rng.bernoulli(0.5) ? Direction::Left : Direction::Right;
            const MacAddress sender = bn(1 + static_cast<std::uint64_t>(rng.uniform() * 4));
            if (rng.bernoulli(0.4)) {
                node.on_hello(dir, sender, evs);
            } else {
                std::vector<MacAddress> list;
                for (int i = 0; i < 3; ++i)
                    if (rng.bernoulli(0.5))
                        list.push_back(bn(90 + static_cast<std::uint64_t>(rng.uniform() * 20)));
                // a malformed far-side list may even name the receiver
                const MacAddress dest = rng.bernoulli(0.6) ? bn(100) : bn(55);
                Frame f = topo(sender, dest, list);
                node.on_topology(dir, f, evs);
            }
            for (Direction d : {Direction::Left, Direction::Right})
                for (const MacAddress& m : node.topo_table(d)) REQUIRE(m != bn(100));
        }
    }
}

TEST_CASE("one right-ward and one left-ward pass complete every topology view") {
    // wired-style walkthrough: six nodes, each hears only its true neighbors
    const int n = 6;
    std::vector<NodeState> nodes;
    for (int i = 1; i <= n; ++i) nodes.emplace_back(bn(i), std::vector<CnId>{cn(i)}, cfg(1));
    std::vector<NodeEvent> evs;

    // neighbor discovery and locking on both sides
    for (int i = 0; i < n; ++i) {
        if (i > 0) nodes[i].on_hello(Direction::Left, bn(i), evs);
        if (i + 1 < n) nodes[i].on_hello(Direction::Right, bn(i + 2), evs);
    }
    auto deliver = [&](int from, int to, Direction sent_towards) {
        const Direction arrival = opposite(sent_towards);
        const Frame f = nodes[from].build_frame(sent_towards, FrameKind::Topology);
        REQUIRE(f.kind == FrameKind::Topology);
        REQUIRE(f.dest == nodes[to].mac());
        nodes[to].on_topology(arrival, f, evs);
    };
    for (int i = 0; i + 1 < n; ++i) deliver(i, i + 1, Direction::Right);  // locks the chain
    for (int i = n - 1; i > 0; --i) deliver(i, i - 1, Direction::Left);

    // one right-ward pass, then one left-ward pass
    for (int i = 0; i + 1 < n; ++i) deliver(i, i + 1, Direction::Right);
    for (int i = n - 1; i > 0; --i) deliver(i, i - 1, Direction::Left);

    std::vector<MacAddress> truth;
    for (int i = 1; i <= n; ++i) truth.push_back(bn(i));
    for (int i = 0; i < n; ++i) {
        REQUIRE(nodes[i].full_topology() == truth);
        REQUIRE_FALSE(nodes[i].red_flag());
        // every consist network learned with its owner
        for (int j = 1; j <= n; ++j) {
            const auto it = nodes[i].cn_table().find(bn(j));
            REQUIRE(it != nodes[i].cn_table().end());
            REQUIRE(it->second == std::vector<CnId>{cn(j)});
        }
    }
}

TEST_CASE("identical inputs replay to identical events") {
    struct Step {
        bool hello;
        Direction dir;
        MacAddress sender, dest;
    };
    Rng rng(23);
    std::vector<Step> script;
    for (int i = 0; i < 500; ++i)
        script.push_back({rng.bernoulli(0.5),
                          rng.bernoulli(0.5) ? Direction::Left : Direction::Right,
                          bn(1 + static_cast<std::uint64_t>(rng.uniform() * 4)),
                          rng.bernoulli(0.5) ? bn(100) : bn(55)});
    auto run = [&script] {
        NodeState node(bn(100), {}, cfg(2, 5, 3));
        std::vector<NodeEvent> evs;
        for (const Step& s : script) {
            if (s.hello)
                node.on_hello(s.dir, s.sender, evs);
            else
                node.on_topology(s.dir, topo(s.sender, s.dest, {s.sender}), evs);
        }
        return evs;
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].kind == b[i].kind);
        REQUIRE(a[i].dir == b[i].dir);
        REQUIRE(a[i].peer == b[i].peer);
    }
}
