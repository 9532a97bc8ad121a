#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "htapsim/replica.hpp"

using namespace htap;

namespace {

std::vector<NsmTable> make_tables(uint32_t n_tables, uint64_t rows,
                                  uint16_t cols) {
    std::vector<NsmTable> out;
    for (uint32_t t = 0; t < n_tables; ++t) {
        NsmTable tab;
        tab.table_id = static_cast<uint16_t>(t);
        tab.n_columns = cols;
        for (uint64_t r = 0; r < rows; ++r) {
            std::vector<Value> row;
            for (uint16_t c = 0; c < cols; ++c)
                row.push_back(static_cast<Value>((r * 31 + c * 7) % 64));
            tab.append_row(std::move(row));
        }
        out.push_back(std::move(tab));
    }
    return out;
}

std::vector<ColumnShape> shapes_of(const std::vector<NsmTable>& tables) {
    std::vector<ColumnShape> shapes;
    for (const auto& t : tables)
        for (uint16_t c = 0; c < t.n_columns; ++c)
            shapes.push_back({{t.table_id, c}, t.row_count(), 64});
    return shapes;
}

}  // namespace

TEST_CASE("local placement: column 5 whole in vault 5") {
    VaultTopology topo;
    auto tables = make_tables(1, 100, 8);
    auto plan = place(shapes_of(tables), Placement::Local, topo);
    const auto& cp = plan.columns.at({0, 5});
    REQUIRE(cp.parts.size() == 1);
    CHECK(cp.parts[0].vault == 5);
    CHECK(cp.dict_vaults == std::vector<uint32_t>{5});
    CHECK(cp.home_vault == 5);
}

TEST_CASE("distributed placement: 16000 rows into 16 x 1000") {
    VaultTopology topo;
    auto tables = make_tables(1, 16000, 1);
    auto plan = place(shapes_of(tables), Placement::Distributed, topo);
    const auto& cp = plan.columns.at({0, 0});
    REQUIRE(cp.parts.size() == 16);
    for (uint32_t v = 0; v < 16; ++v) CHECK(cp.parts[v].vault == v);

    AnalyticalReplica rep(tables, plan, topo);
    for (uint32_t p = 0; p < 16; ++p)
        CHECK(rep.partition({0, 0}, p)->codes.size() == 1000);
}

TEST_CASE("hybrid placement: column 2 in group 2 with dict replicas") {
    VaultTopology topo;
    auto tables = make_tables(1, 100, 4);
    std::vector<ColumnShape> shapes;
    for (uint16_t c = 0; c < 4; ++c)
        shapes.push_back({{0, c}, 100, 16});  // under the replication threshold
    auto plan = place(shapes, Placement::Hybrid, topo);
    const auto& cp = plan.columns.at({0, 2});
    REQUIRE(cp.parts.size() == 4);
    for (uint32_t i = 0; i < 4; ++i) CHECK(cp.parts[i].vault == 8 + i);
    CHECK(cp.dict_vaults == std::vector<uint32_t>{8, 9, 10, 11});
}

TEST_CASE("hybrid over-threshold dictionaries stay single-copy") {
    VaultTopology topo;
    auto tables = make_tables(1, 100, 1);
    std::vector<ColumnShape> shapes{{{0, 0}, 100, topo.dict_replication_threshold + 1}};
    auto plan = place(shapes, Placement::Hybrid, topo);
    CHECK(plan.columns.at({0, 0}).dict_vaults.size() == 1);
}

TEST_CASE("replica decodes back to the NSM projection") {
    VaultTopology topo;
    auto tables = make_tables(2, 2500, 3);
    for (Placement pl :
         {Placement::Local, Placement::Distributed, Placement::Hybrid}) {
        auto plan = place(shapes_of(tables), pl, topo);
        AnalyticalReplica rep(tables, plan, topo);
        for (const auto& t : tables)
            for (uint64_t r = 0; r < t.row_count(); ++r)
                for (uint16_t c = 0; c < t.n_columns; ++c) {
                    auto v = rep.cell(t.table_id, r, c);
                    REQUIRE(v.has_value());
                    CHECK(*v == t.cell(r, c));
                }
    }
}

TEST_CASE("index resolves every cell; place_new_row extends a partition") {
    VaultTopology topo;
    auto tables = make_tables(1, 1000, 2);
    auto plan = place(shapes_of(tables), Placement::Hybrid, topo);
    AnalyticalReplica rep(tables, plan, topo);
    auto loc = rep.indexes()[0].lookup(1, 999);
    CHECK(loc.column_id == 1);
    auto part = rep.partition({0, 1}, loc.partition);
    CHECK(part->decode_at(loc.offset) == tables[0].cell(999, 1));

    UpdateLogEntry e;
    e.commit = 1;
    e.kind = UpdateKind::Insert;
    e.data = 42;
    e.key = {0, 1000, 0};
    auto fresh = rep.place_new_row(e);
    CHECK(rep.indexes()[0].lookup(0, 1000) == fresh);
}

TEST_CASE("publish swaps a partition atomically for new readers") {
    VaultTopology topo;
    auto tables = make_tables(1, 100, 1);
    auto plan = place(shapes_of(tables), Placement::Local, topo);
    AnalyticalReplica rep(tables, plan, topo);
    auto before = rep.partition({0, 0}, 0);
    auto next = std::make_shared<EncodedColumn>(*before);
    next->codes[0] = before->codes[1];
    rep.publish({0, 0}, 0, next);
    CHECK(rep.partition({0, 0}, 0) == next);
    CHECK(before->codes[0] != next->codes[0]);  // old version untouched
}

TEST_CASE("placement names round trip") {
    CHECK(placement_from_name("local") == Placement::Local);
    CHECK(placement_from_name("distributed") == Placement::Distributed);
    CHECK(placement_from_name("hybrid") == Placement::Hybrid);
    CHECK(placement_name(Placement::Hybrid) == std::string("hybrid"));
    CHECK_THROWS_AS(placement_from_name("bogus"), Error);
}
