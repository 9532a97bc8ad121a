#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "htapsim/vaultsim.hpp"

using namespace htap;

TEST_CASE("topology defaults and helpers") {
    VaultTopology topo;
    CHECK(topo.n_vaults == 16);
    CHECK(topo.group_size == 4);
    CHECK(topo.n_groups() == 4);
    CHECK(topo.group_of(0) == 0);
    CHECK(topo.group_of(11) == 2);
    CHECK(topo.total_pim_threads() == 64);
    CHECK(topo.hops(3, 3) == 0);
    CHECK(topo.hops(0, 3) == 1);
    CHECK(topo.hops(0, 4) == 2);
    topo.validate();
}

TEST_CASE("validate rejects bad shapes") {
    VaultTopology topo;
    topo.group_size = 5;  // 16 % 5 != 0
    CHECK_THROWS_AS(topo.validate(), Error);
    topo = VaultTopology{};
    topo.per_vault_bw = 0;
    CHECK_THROWS_AS(topo.validate(), Error);
}

TEST_CASE("apply_option round trips through dump") {
    VaultTopology topo;
    topo.apply_option("vaults", "8");
    topo.apply_option("group_size", "2");
    topo.apply_option("per_vault_bw", "8");
    topo.apply_option("segment_rows", "500");
    CHECK(topo.n_vaults == 8);
    CHECK(topo.group_size == 2);
    CHECK(topo.per_vault_bw == 8.0);
    CHECK(topo.segment_rows == 500);
    CHECK_THROWS_AS(topo.apply_option("no_such_key", "1"), Error);

    // dump -> file -> from_config_file reproduces every field
    std::string path = "vaultsim_roundtrip.cfg";
    {
        std::ofstream out(path);
        out << "# comment line\n" << topo.dump();
    }
    auto back = VaultTopology::from_config_file(path);
    CHECK(back.dump() == topo.dump());
    std::remove(path.c_str());
}

TEST_CASE("missing config file raises IoFailure") {
    CHECK_THROWS_AS(VaultTopology::from_config_file("/no/such/file.cfg"), Error);
    try {
        VaultTopology::from_config_file("/no/such/file.cfg");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::IoFailure);
    }
}

TEST_CASE("virtual clock reservations are FIFO and non-overlapping") {
    VirtualClock clock(2);
    auto a = clock.reserve(0, 0, 10);
    CHECK(a.start == 0);
    CHECK(a.end == 10);
    auto b = clock.reserve(0, 5, 10);  // queued behind a
    CHECK(b.start == 10);
    CHECK(b.end == 20);
    auto c = clock.reserve(1, 5, 10);  // other resource, no interference
    CHECK(c.start == 5);
    CHECK(clock.busy_until(0) == 20);
    CHECK_THROWS_AS(clock.reserve(9, 0, 1), Error);
}

TEST_CASE("clock cannot run backwards") {
    VirtualClock clock(1);
    clock.advance_to(5);
    CHECK(clock.now() == 5);
    clock.advance_to(5);
    CHECK_THROWS_AS(clock.advance_to(4), Error);
}

TEST_CASE("charge_access local arithmetic: 64 B at 16 B/ns") {
    VaultTopology topo;
    topo.local_latency = 0;
    VaultModel model(topo);
    double done = model.charge_access(3, 64, 3, false, 0);
    CHECK(done == doctest::Approx(4.0));  // bytes / per_vault_bw

    VaultModel m2{VaultTopology{}};
    double local = m2.charge_access(3, 64, 3, false, 0);
    CHECK(local == doctest::Approx(50 + 4));
    double remote = m2.charge_access(3, 64, 0, false, 0);  // 1 hop
    CHECK(remote == doctest::Approx(50 + 25 + 4));
}

TEST_CASE("charge_access zero bytes costs latency only") {
    VaultModel model{VaultTopology{}};
    CHECK(model.charge_access(0, 0, 0, false, 7) == doctest::Approx(7 + 50));
}

TEST_CASE("charge_copy arithmetic") {
    VaultTopology topo;
    VaultModel model(topo);
    // within one vault, region <= tracking buffer: read then write on one port
    double t = model.charge_copy(2, 2, 1024, 0);
    CHECK(t == doctest::Approx(2 * 1024 / topo.per_vault_bw));
    CHECK(model.charge_copy(2, 2, 0, 5) == 5);

    // cross-group copy adds hop latency per chunk
    VaultModel m2(topo);
    double far = m2.charge_copy(0, 4, 1024, 0);
    CHECK(far == doctest::Approx(2 * 1024 / topo.per_vault_bw +
                                 2 * topo.remote_hop_latency));

    // chunking: the second tracking-buffer chunk starts after the first lands
    VaultModel m3(topo);
    double big = m3.charge_copy(0, 1, 2 * topo.copy_tracking_buffer, 0);
    double chunk = topo.copy_tracking_buffer / topo.per_vault_bw;
    CHECK(big == doctest::Approx(4 * chunk + 2 * topo.remote_hop_latency));
}

TEST_CASE("conservation: bytes charged equal bytes routed") {
    VaultModel model{VaultTopology{}};
    model.charge_access(0, 100, 0, false, 0);
    model.charge_access(0, 50, 5, false, 0);
    model.charge_access(1, 30, 0, true, 0);  // host: offchip then port
    CHECK(model.clock.bytes_served(0) == 150);
    CHECK(model.clock.bytes_served(1) == 30);
    CHECK(model.clock.bytes_served(model.offchip()) == 30);
    model.charge_copy(0, 1, 10, 0);
    CHECK(model.clock.bytes_served(0) == 160);
    CHECK(model.clock.bytes_served(1) == 40);
}

TEST_CASE("bandwidth ceiling: a port serves at most bw x elapsed") {
    VaultTopology topo;
    VaultModel model(topo);
    double last = 0;
    uint64_t bytes = 0;
    for (int i = 0; i < 100; ++i) {
        last = model.charge_access(0, 640, 0, false, 0);
        bytes += 640;
    }
    CHECK(static_cast<double>(bytes) <=
          topo.per_vault_bw * (last - topo.local_latency) + 1e-9);
}
