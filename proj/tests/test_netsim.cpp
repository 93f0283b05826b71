#include "lwm2m/netsim/scenario.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace lwm2m;
using namespace lwm2m::netsim;
using testutil::errc_of;

namespace {

ScenarioConfig quick_config(ScenarioKind kind, std::uint32_t interval_ms, std::uint32_t count,
                            SecurityMode mode = SecurityMode::handshake) {
    ScenarioConfig cfg;
    cfg.kind = kind;
    cfg.mode = mode;
    cfg.interval_ms = interval_ms;
    cfg.count = count;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("fragment arithmetic follows the 104/63/96 byte budgets") {
    CHECK(FrameBudget::kLinkPayload == 104);
    CHECK(FrameBudget::kFirstFragmentBudget == 63);
    CHECK(fragments_for(0) == 1);
    CHECK(fragments_for(40) == 1);
    CHECK(fragments_for(63) == 1);
    CHECK(fragments_for(64) == 2);
    CHECK(fragments_for(63 + 96) == 2);
    CHECK(fragments_for(63 + 96 + 1) == 3);
    CHECK(fragments_for(200) == 3);
}

TEST_CASE("event loop is ordered and cancellable") {
    Sim sim;
    std::vector<int> order;
    sim.at(10, [&] { order.push_back(1); });
    auto id = sim.at(20, [&] { order.push_back(2); });
    sim.at(20, [&] { order.push_back(3); });
    sim.at(5, [&] { order.push_back(0); });
    sim.cancel(id);
    sim.run();
    CHECK(order == std::vector<int>{0, 1, 3});
    CHECK(sim.now() == 20);
}

TEST_CASE("chain routes cross the gateway; c2c stays local") {
    Topology topo = Topology::chain(2);
    auto up = topo.route("host", "server");
    REQUIRE(up.legs.size() == 2);
    CHECK(up.legs[0].kind == LinkKind::lowpan_hop);
    CHECK(up.legs[0].hops == 3);
    CHECK(up.legs[0].relays == std::vector<std::string>{"f1", "f2", "gw"});
    CHECK(up.legs[1].kind == LinkKind::internet_uplink);

    auto down = topo.route("server", "requester");
    REQUIRE(down.legs.size() == 2);
    CHECK(down.legs[0].kind == LinkKind::internet_uplink);
    CHECK(down.legs[1].hops == 3);
    CHECK(down.legs[1].relays.front() == "gw");

    auto direct = topo.route("host", "requester");
    REQUIRE(direct.legs.size() == 1);
    CHECK(direct.legs[0].hops == 1);
    CHECK(direct.legs[0].relays.empty());
}

TEST_CASE("random placement respects minimum spacing and yields hop counts") {
    Rng rng(3);
    auto placement = make_random_placement(20, rng);
    REQUIRE(placement.positions.size() == 20);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = i + 1; j < 20; ++j) {
            double dx = placement.positions[i].first - placement.positions[j].first;
            double dy = placement.positions[i].second - placement.positions[j].second;
            CHECK(dx * dx + dy * dy >= 2.2 * 2.2 - 1e-9);
        }
    CHECK(placement.hops_between(placement.host_index, placement.requester_index) >= 1);
}

TEST_CASE("c2c flow completes end to end with 5 provisioning operations") {
    auto metrics = run_scenario(quick_config(ScenarioKind::c2c, 1000, 3));
    CHECK(metrics.flow_completed);
    CHECK(metrics.provisioning_ops == 5);
    CHECK(metrics.sent == 3);
    CHECK(metrics.delivered == 3);
    CHECK(metrics.delivery_rate() == 1.0);
}

TEST_CASE("context mode provisions one more object and needs no flights") {
    auto metrics = run_scenario(quick_config(ScenarioKind::c2c, 1000, 3, SecurityMode::context));
    CHECK(metrics.flow_completed);
    CHECK(metrics.provisioning_ops == 6);
    // Context channels establish immediately.
    CHECK(metrics.channel_setup_us == 0);
}

TEST_CASE("handshake establishment lands in the 40-200 ms envelope on one hop") {
    auto metrics = run_scenario(quick_config(ScenarioKind::c2c, 1000, 1));
    CHECK(metrics.channel_setup_us >= 40 * kMillisecond);
    CHECK(metrics.channel_setup_us <= 200 * kMillisecond);
}

TEST_CASE("server-centric delivery is slower than c2c and grows per forwarder pair") {
    auto c2c = run_scenario(quick_config(ScenarioKind::c2c, 1000, 10));
    auto sc0 = run_scenario(quick_config(ScenarioKind::server_centric, 1000, 10));
    REQUIRE(c2c.median_delivery_ms > 0);
    REQUIRE(sc0.median_delivery_ms > 0);
    CHECK(c2c.median_delivery_ms < sc0.median_delivery_ms * 0.25);

    auto cfg1 = quick_config(ScenarioKind::server_centric, 1000, 10);
    cfg1.forwarders = 1;
    auto sc1 = run_scenario(cfg1);
    double growth = sc1.median_delivery_ms - sc0.median_delivery_ms;
    CHECK(growth >= 25.0);
    CHECK(growth <= 35.0);
}

TEST_CASE("delivery time respects causality") {
    auto metrics = run_scenario(quick_config(ScenarioKind::c2c, 1000, 5));
    for (const auto& u : metrics.updates) {
        REQUIRE(u.delivered);
        CHECK(u.t_deliver - u.t_emit >= static_cast<SimTime>(15 * kMillisecond));
    }
}

TEST_CASE("identical seeds give identical metrics, different seeds may differ") {
    auto cfg = quick_config(ScenarioKind::server_centric, 200, 20);
    auto a = run_scenario(cfg);
    auto b = run_scenario(cfg);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.summary_json(cfg) == b.summary_json(cfg));
}

TEST_CASE("forced loss of a confirmable produces the 2-second retransmission step") {
    ScenarioConfig cfg = quick_config(ScenarioKind::server_centric, 5000, 2);
    auto baseline = run_scenario(cfg);
    REQUIRE(baseline.delivered == 2);
    SimTime normal = baseline.updates[0].t_deliver - baseline.updates[0].t_emit;

    // Same scenario, but the write of the first update loses its radio leg.
    ScenarioWorld sw(cfg);
    Metrics metrics;
    metrics.updates.resize(cfg.count);
    auto* swp = &sw;
    sw.server().on_notification = [swp, &metrics](const std::string& from, const Message& msg) {
        if (from != "host") return;
        Message write;
        write.code = Code::put;
        write.set_uri_path(swp->sensor_path());
        write.payload = msg.payload;
        swp->server().send_request("requester", write, [](const Message&) {});
    };
    sw.requester().on_request_delivered = [swp, &metrics](const std::string& from, const Message& msg) {
        if (from != "server" || msg.code != Code::put || msg.payload.size() < 4) return;
        std::size_t seq = msg.payload[3];
        if (seq < metrics.updates.size() && !metrics.updates[seq].delivered) {
            metrics.updates[seq].delivered = true;
            metrics.updates[seq].t_deliver = swp->world.sim().now();
        }
    };
    sw.bring_up([swp, &metrics, &cfg](bool up) {
        REQUIRE(up);
        Message observe;
        observe.code = Code::get;
        observe.set_uri_path(swp->sensor_path());
        observe.set_observe(0);
        swp->server().send_request("host", observe, [swp, &metrics, &cfg](const Message&) {
            SimTime t0 = swp->world.sim().now() + 500 * kMillisecond;
            for (std::uint32_t i = 0; i < cfg.count; ++i) {
                swp->world.sim().at(t0 + static_cast<SimTime>(i) * cfg.interval_ms * kMillisecond,
                                    [swp, &metrics, i] {
                                        metrics.updates[i].t_emit = swp->world.sim().now();
                                        if (i == 0) {
                                            // Next lowpan tx is the notify; the one after is the
                                            // write's radio leg. Drop the write once.
                                            swp->world.force_drop_in(2);
                                        }
                                        std::vector<std::uint8_t> payload{0, 0, 0,
                                                                          static_cast<std::uint8_t>(i), 0};
                                        swp->host().node().set_value(swp->sensor_path(),
                                                                     ResourceValue::opaque(payload));
                                        swp->host().pump_outgoing();
                                    });
            }
        });
    });
    sw.world.sim().run();

    REQUIRE(metrics.updates[0].delivered);
    SimTime delayed = metrics.updates[0].t_deliver - metrics.updates[0].t_emit;
    CHECK(delayed >= normal + 2 * kSecond);
    CHECK(delayed <= normal + 2 * kSecond + 100 * kMillisecond);
    REQUIRE(metrics.updates[1].delivered);
    SimTime second = metrics.updates[1].t_deliver - metrics.updates[1].t_emit;
    CHECK(second <= normal + kMillisecond);
}

TEST_CASE("full loss gives up after the 30-second timer ladder") {
    World world(Topology::chain(0), LinkConfig{15.0, 78.0, 0.0, 1.0}, 5);
    Endpoint& a = world.add_endpoint("host");
    Endpoint& b = world.add_endpoint("requester");
    Psk psk = world.make_psk("ab");
    a.node().ensure_channel("requester", SecurityMode::context, psk.key, true, true);
    b.node().ensure_channel("host", SecurityMode::context, psk.key, false, true);

    bool gave_up = false;
    SimTime giveup_at = -1;
    Message msg;
    msg.code = Code::get;
    msg.set_uri_path(Path(3300, 0, 5700));
    a.send_request(
        "requester", msg, [](const Message&) { FAIL("response must never arrive"); },
        [&] {
            gave_up = true;
            giveup_at = world.sim().now();
        });
    world.sim().run();
    CHECK(gave_up);
    CHECK(giveup_at == 30 * kSecond);
}

TEST_CASE("zero loss and slow interval deliver every update exactly once") {
    auto cfg = quick_config(ScenarioKind::c2c, 100, 50);
    auto metrics = run_scenario(cfg);
    CHECK(metrics.delivered == 50);
    CHECK(metrics.goodput_Bps <= 1e-9 + static_cast<double>(cfg.payload_bytes) * 1000.0 / cfg.interval_ms);
}

TEST_CASE("c2c keeps the gateway idle; server-centric loads every forwarder") {
    auto cfg_c2c = quick_config(ScenarioKind::c2c, 1000, 10);
    auto c2c = run_scenario(cfg_c2c);
    CHECK(c2c.node_frames.count("gw") == 0);

    auto cfg_sc = quick_config(ScenarioKind::server_centric, 1000, 10);
    cfg_sc.forwarders = 2;
    auto sc = run_scenario(cfg_sc);
    CHECK(sc.node_frames.at("f1").forwarded >= 10);
    CHECK(sc.node_frames.at("f2").forwarded >= 10);
    CHECK(sc.node_frames.at("gw").forwarded >= 20);

    auto cfg_sc0 = quick_config(ScenarioKind::server_centric, 1000, 10);
    auto sc0 = run_scenario(cfg_sc0);
    CHECK(c2c.total_frames() < sc0.total_frames());
}

TEST_CASE("random topology scenarios run and stay c2c-favourable") {
    ScenarioConfig cfg = quick_config(ScenarioKind::c2c, 1000, 5);
    cfg.random_topology = true;
    auto c2c = run_scenario(cfg);
    CHECK(c2c.flow_completed);
    cfg.kind = ScenarioKind::server_centric;
    auto sc = run_scenario(cfg);
    CHECK(sc.median_delivery_ms > c2c.median_delivery_ms);
}

TEST_CASE("retransmitted requests are applied at most once and re-answered identically") {
    // One-hop world, drop the response's radio leg so the request is resent.
    World world(Topology::chain(0), LinkConfig{}, 11);
    Endpoint& server = world.add_endpoint("server");
    Endpoint& host = world.add_endpoint("host");

    Psk psk = world.make_psk("hs");
    ServerAccount account;
    account.short_id = 1;
    account.uri = "coap://server";
    account.credentials = psk;
    host.node().add_server_account(account);
    host.node().set_default_owner_uris({"coap://server"});
    host.node().tree().declare_object(kGenericSensorObjectId, {{5700, ValueKind::opaque}});
    server.node().ensure_channel("host", SecurityMode::context, psk.key, true, true);
    host.node().ensure_channel("server", SecurityMode::context, psk.key, false, true);

    Message create;
    create.code = Code::post;
    create.add_option_string(kOptUriPath, std::to_string(kGenericSensorObjectId));
    int responses = 0;
    SimTime response_at = -1;
    world.force_drop_in(2);  // request leg is offer 1, response leg offer 2
    server.send_request("host", create, [&](const Message& rsp) {
        ++responses;
        response_at = world.sim().now();
        CHECK(rsp.code == Code::created_201);
    });
    world.sim().run();

    CHECK(responses == 1);
    CHECK(response_at >= 2 * kSecond);                                // answered via retransmission
    CHECK(host.node().tree().instances(kGenericSensorObjectId).size() == 1);  // applied once
}

TEST_CASE("policy refusal leaves both peers untouched") {
    ScenarioConfig cfg = quick_config(ScenarioKind::c2c, 1000, 1);
    cfg.policy.allow("requester", "host", kGenericSensorObjectId, AccessFlags::of(Access::discover));
    cfg.policy_given = true;
    ScenarioWorld sw(cfg);

    auto host_acls_before = sw.host().node().acls().fingerprint();
    bool flow_ok = true;
    auto* swp = &sw;
    sw.bring_up([swp, &flow_ok](bool up) {
        REQUIRE(up);
        swp->run_authorization_flow([&flow_ok](bool ok) { flow_ok = ok; }, nullptr);
    });
    sw.world.sim().run();

    CHECK_FALSE(flow_ok);
    CHECK(sw.auth_app->refusals() == 1);
    CHECK(sw.host().node().acls().fingerprint() == host_acls_before);
    CHECK(sw.host().node().client_by_endpoint("requester") == nullptr);
    CHECK(sw.requester().node().client_by_endpoint("host") == nullptr);
}

TEST_CASE("refresh issues fresh credentials and extends the lifetime") {
    ScenarioConfig cfg = quick_config(ScenarioKind::c2c, 1000, 1);
    cfg.lifetime_s = 30;
    ScenarioWorld sw(cfg);
    auto* swp = &sw;

    struct Probe {
        bool first = false, refresh = false, read_ok = false;
    };
    auto probe = std::make_shared<Probe>();
    sw.bring_up([swp, probe](bool up) {
        REQUIRE(up);
        swp->run_authorization_flow(
            [swp, probe](bool ok) {
                probe->first = ok;
                if (!ok) return;
                // Refresh before expiry by repeating the access request.
                swp->world.sim().after(20 * kSecond, [swp, probe] {
                    swp->run_authorization_flow(
                        [swp, probe](bool ok2) {
                            probe->refresh = ok2;
                            if (!ok2) return;
                            // 45 s is beyond the original deadline but inside
                            // the refreshed one.
                            swp->world.sim().after(25 * kSecond, [swp, probe] {
                                Message read;
                                read.code = Code::get;
                                read.set_uri_path(swp->sensor_path());
                                swp->requester().send_request("host", read,
                                                              [probe](const Message& rsp) {
                                                                  probe->read_ok =
                                                                      rsp.code == Code::content_205;
                                                              });
                            });
                        },
                        nullptr);
                });
            },
            nullptr);
    });
    sw.world.sim().run();

    CHECK(probe->first);
    CHECK(probe->refresh);
    CHECK(probe->read_ok);
    CHECK(sw.auth_app->grants() == 2);
    CHECK(sw.auth_app->issued_keys().size() == 2);  // key freshness
    auto* account = sw.host().node().client_by_endpoint("requester");
    REQUIRE(account);
    CHECK(account->client_id == 3);  // refreshed, not duplicated
    CHECK_FALSE(account->expired);
}

TEST_CASE("sending before channel establishment is refused locally") {
    ScenarioConfig cfg = quick_config(ScenarioKind::c2c, 1000, 1);
    ScenarioWorld sw(cfg);
    std::uint64_t sends_before = sw.world.datagrams_sent();

    Message reg;
    reg.code = Code::post;
    reg.add_option_string(kOptUriPath, "rd");
    reg.add_option_string(kOptUriQuery, "ep=requester");
    CHECK(testutil::errc_of([&] {
        sw.requester().send_request("server", reg, [](const Message&) {});
    }) == Errc::channel_closed);
    CHECK(sw.world.datagrams_sent() == sends_before);
}

TEST_CASE("channel opening fails cleanly without credentials or after expiry") {
    ScenarioConfig cfg = quick_config(ScenarioKind::c2c, 1000, 1);
    ScenarioWorld sw(cfg);
    std::uint64_t sends_before = sw.world.datagrams_sent();

    bool unknown_result = true;
    sw.requester().open_channel_to("nowhere", [&](bool ok) { unknown_result = ok; });
    CHECK_FALSE(unknown_result);
    CHECK(sw.world.datagrams_sent() == sends_before);  // nothing on the wire

    ClientAccount expired;
    expired.client_id = 9;
    expired.endpoint_name = "host";
    expired.lifetime_s = 1;
    sw.requester().node().put_client_account(expired, 0);
    sw.requester().node().client_by_endpoint("host")->expired = true;
    bool expired_result = true;
    sw.requester().open_channel_to("host", [&](bool ok) { expired_result = ok; });
    CHECK_FALSE(expired_result);
    CHECK(sw.world.datagrams_sent() == sends_before);
}

TEST_CASE("config parsing validates and defaults") {
    auto cfg = ScenarioConfig::from_json_text(R"({
        "scenario": "c2c", "mode": "context",
        "topology": {"kind": "chain", "forwarders": 2},
        "links": {"lowpan_latency_ms": 15.0, "uplink_latency_ms": 78.0, "loss_prob": 0.0},
        "interval_ms": 100, "count": 10, "seed": 42,
        "policy": [{"requester": "requester", "host": "host", "object_id": 3300, "flags": ["read"]}]
    })");
    CHECK(cfg.kind == ScenarioKind::c2c);
    CHECK(cfg.mode == SecurityMode::context);
    CHECK(cfg.forwarders == 2);
    CHECK(cfg.seed == 42);

    CHECK(errc_of([] { ScenarioConfig::from_json_text("{"); }) == Errc::config_invalid);
    CHECK(errc_of([] { ScenarioConfig::from_json_text(R"({"scenario": "p2p"})"); }) == Errc::config_invalid);
    CHECK(errc_of([] {
        ScenarioConfig::from_json_text(R"({"scenario": "c2c", "interval_ms": 0})");
    }) == Errc::config_invalid);
    CHECK(errc_of([] {
        ScenarioConfig::from_json_text(R"({"scenario": "c2c", "links": {"loss_prob": 1.5}})");
    }) == Errc::config_invalid);
}
