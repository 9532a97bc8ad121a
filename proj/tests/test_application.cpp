#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <optional>

#include "htapsim/application.hpp"
#include "htapsim/harness.hpp"

using namespace htap;

namespace {

EncodedColumn make_column(const std::vector<Value>& values) {
    EncodedColumn col;
    col.dict = std::make_shared<Dictionary>(Dictionary::from_values(values));
    for (Value v : values) col.codes.push_back(col.dict->encode(v));
    return col;
}

ColumnBufferUpdate upd(uint32_t offset, Value v, CommitId c,
                       UpdateKind k = UpdateKind::Modify) {
    ColumnBufferUpdate u;
    u.offset = offset;
    u.kind = k;
    u.value = v;
    u.commit = c;
    u.row_id = offset;
    return u;
}

std::vector<std::optional<Value>> decoded(const EncodedColumn& col) {
    std::vector<std::optional<Value>> out;
    for (size_t r = 0; r < col.codes.size(); ++r) {
        if (col.tombstoned(r)) out.push_back(std::nullopt);
        else out.push_back(col.decode_at(r));
    }
    return out;
}

}  // namespace

TEST_CASE("apply_naive hand example") {
    auto col = make_column({10, 20, 30});
    std::vector<ColumnBufferUpdate> ups = {upd(1, 15, 1)};
    auto out = apply_naive(col, ups);
    CHECK(out.dict->values() == std::vector<Value>{10, 15, 30});
    CHECK(out.codes == std::vector<uint32_t>{0, 1, 2});
}

TEST_CASE("apply_naive with no updates prunes to referenced values") {
    EncodedColumn col;
    col.dict = std::make_shared<Dictionary>(
        Dictionary::from_values({10, 20, 30, 40}));  // 40 unreferenced
    col.codes = {0, 1, 2};
    auto out = apply_naive(col, {});
    CHECK(out.dict->values() == std::vector<Value>{10, 20, 30});
    CHECK(decoded(out) == decoded(col));
}

TEST_CASE("apply_naive modify all rows to one value") {
    auto col = make_column({10, 20, 30});
    std::vector<ColumnBufferUpdate> ups = {upd(0, 7, 1), upd(1, 7, 2), upd(2, 7, 3)};
    auto out = apply_naive(col, ups);
    CHECK(out.dict->values() == std::vector<Value>{7});
    CHECK(out.codes == std::vector<uint32_t>{0, 0, 0});
    CHECK(out.dict->width_bits() == 1);
}

TEST_CASE("build_update_dictionary") {
    std::vector<ColumnBufferUpdate> ups = {upd(0, 15, 1), upd(1, 20, 2),
                                           upd(2, 15, 3)};
    auto d = build_update_dictionary(ups);
    CHECK(d.values() == std::vector<Value>{15, 20});

    CHECK(build_update_dictionary({}).empty());

    std::vector<ColumnBufferUpdate> dels = {upd(0, 99, 1, UpdateKind::Delete)};
    CHECK(build_update_dictionary(dels).empty());  // deletes carry no value

    std::vector<ColumnBufferUpdate> big;
    for (int i = 1023; i >= 0; --i)
        big.push_back(upd(static_cast<uint32_t>(i), i * 3, 1));
    auto bd = build_update_dictionary(big);
    REQUIRE(bd.size() == 1024);
    for (size_t i = 1; i < bd.size(); ++i)
        CHECK(bd.values()[i - 1] < bd.values()[i]);
}

TEST_CASE("merge_dictionaries sorted-union example") {
    auto old_d = Dictionary::from_values({10, 20, 30});
    auto upd_d = Dictionary::from_values({15, 20});
    auto [merged, map] = merge_dictionaries(old_d, upd_d);
    CHECK(merged.values() == std::vector<Value>{10, 15, 20, 30});
    CHECK(map.old_to_new == std::vector<uint32_t>{0, 2, 3});
    CHECK(map.value_to_new.at(15) == 1);
    CHECK(map.value_to_new.at(20) == 2);
}

TEST_CASE("merge_dictionaries degenerate inputs") {
    auto old_d = Dictionary::from_values({10, 20, 30});
    auto [m1, map1] = merge_dictionaries(old_d, Dictionary());
    CHECK(m1.values() == old_d.values());
    CHECK(map1.old_to_new == std::vector<uint32_t>{0, 1, 2});

    auto upd_d = Dictionary::from_values({5, 7});
    auto [m2, map2] = merge_dictionaries(Dictionary(), upd_d);
    CHECK(m2.values() == upd_d.values());
    CHECK(map2.old_to_new.empty());
}

TEST_CASE("merge_dictionaries map is order preserving (randomized)") {
    Rng rng(5);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Value> ov, uv;
        for (size_t i = 0, n = 1 + rng.below(100); i < n; ++i)
            ov.push_back(static_cast<Value>(rng.below(500)));
        for (size_t i = 0, n = rng.below(100); i < n; ++i)
            uv.push_back(static_cast<Value>(rng.below(500)));
        auto old_d = Dictionary::from_values(ov);
        auto upd_d = Dictionary::from_values(uv);
        auto [merged, map] = merge_dictionaries(old_d, upd_d);

        std::vector<Value> uni = old_d.values();
        uni.insert(uni.end(), upd_d.values().begin(), upd_d.values().end());
        std::sort(uni.begin(), uni.end());
        uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
        CHECK(merged.values() == uni);

        REQUIRE(map.old_to_new.size() == old_d.size());
        for (size_t c = 0; c < old_d.size(); ++c)
            CHECK(merged.decode(map.old_to_new[c]) == old_d.decode(static_cast<uint32_t>(c)));
        for (size_t c = 1; c < map.old_to_new.size(); ++c)
            CHECK(map.old_to_new[c - 1] < map.old_to_new[c]);
    }
}

TEST_CASE("apply_optimized hand example keeps superset dictionary") {
    auto col = make_column({10, 20, 30});
    std::vector<ColumnBufferUpdate> ups = {upd(1, 15, 1)};
    auto out = apply_optimized(col, ups);
    CHECK(out.dict->values() == std::vector<Value>{10, 15, 20, 30});
    CHECK(out.codes == std::vector<uint32_t>{0, 1, 3});
    auto naive = apply_naive(col, ups);
    CHECK(decoded(out) == decoded(naive));
}

TEST_CASE("apply_optimized with no updates is an identity recode") {
    auto col = make_column({10, 20, 30});
    auto out = apply_optimized(col, {});
    CHECK(out.codes == col.codes);
    CHECK(out.dict->values() == col.dict->values());
}

TEST_CASE("oracle equivalence on random instances, incl. deletes/inserts") {
    Rng rng(99);
    for (int iter = 0; iter < 60; ++iter) {
        size_t n = 1 + rng.below(2000);
        std::vector<Value> vals;
        uint64_t domain = 1 + rng.below(200);
        for (size_t i = 0; i < n; ++i)
            vals.push_back(static_cast<Value>(rng.below(domain)));
        auto col = make_column(vals);
        size_t m = rng.below(300);
        std::vector<ColumnBufferUpdate> ups;
        for (size_t i = 0; i < m; ++i) {
            auto kind = rng.below(10) == 0 ? UpdateKind::Delete : UpdateKind::Modify;
            ups.push_back(upd(static_cast<uint32_t>(rng.below(n)),
                              static_cast<Value>(rng.below(domain * 2)),
                              static_cast<CommitId>(i + 1), kind));
        }
        auto naive = apply_naive(col, ups);
        auto opt = apply_optimized(col, ups);
        REQUIRE(naive.codes.size() == opt.codes.size());
        CHECK(decoded(naive) == decoded(opt));

        // naive dictionary is a subset of the optimized one; both sorted
        const auto& nv = naive.dict->values();
        const auto& ov = opt.dict->values();
        CHECK(std::includes(ov.begin(), ov.end(), nv.begin(), nv.end()));
        CHECK(std::is_sorted(nv.begin(), nv.end()));
        CHECK(std::is_sorted(ov.begin(), ov.end()));
    }
}

TEST_CASE("more than 1024 distinct update values run in rounds") {
    std::vector<Value> vals(3000, 5);
    auto col = make_column(vals);
    std::vector<ColumnBufferUpdate> ups;
    for (uint32_t i = 0; i < 2500; ++i)
        ups.push_back(upd(i, static_cast<Value>(i * 7 + 1), i + 1));
    auto naive = apply_naive(col, ups);
    auto opt = apply_optimized(col, ups);
    CHECK(decoded(naive) == decoded(opt));
}

TEST_CASE("commit order wins on conflicting updates to one row") {
    auto col = make_column({10, 20, 30});
    std::vector<ColumnBufferUpdate> ups = {upd(1, 100, 1), upd(1, 200, 2),
                                           upd(1, 150, 3)};
    auto naive = apply_naive(col, ups);
    auto opt = apply_optimized(col, ups);
    CHECK(naive.decode_at(1) == 150);
    CHECK(decoded(naive) == decoded(opt));
}

TEST_CASE("cost asymmetry: optimized beats naive for large columns") {
    Rng rng(123);
    std::vector<Value> vals;
    for (size_t i = 0; i < 5000; ++i)
        vals.push_back(static_cast<Value>(rng.below(64)));
    auto col = make_column(vals);
    std::vector<ColumnBufferUpdate> ups = {upd(17, 999, 1)};
    ApplyStats ns, os;
    (void)apply_naive(col, ups, &ns);
    (void)apply_optimized(col, ups, &os);
    CHECK(ns.comparisons > 0);
    CHECK(os.random_accesses > 0);
    CHECK(os.random_accesses < ns.comparisons);
}

TEST_CASE("compaction: bloated dictionary triggers a rebuild") {
    // shrink the referenced set until |dict| > 4x referenced values
    std::vector<Value> vals;
    for (int i = 0; i < 100; ++i) vals.push_back(i);
    auto col = make_column(vals);
    std::vector<ColumnBufferUpdate> ups;
    for (uint32_t r = 0; r < 100; ++r)
        ups.push_back(upd(r, r % 2, r + 1));  // collapse to two values
    auto out = apply_optimized(col, ups);
    CHECK(out.dict->size() <= 8);  // compacted, not the 100-value superset
    CHECK(out.dict->values()[0] == 0);
    for (uint32_t r = 0; r < 100; ++r)
        CHECK(out.decode_at(r) == static_cast<Value>(r % 2));
}
