#include "htapsim/replica.hpp"

#include <algorithm>

namespace htap {

const char* placement_name(Placement p) {
    switch (p) {
        case Placement::Local: return "local";
        case Placement::Distributed: return "distributed";
        case Placement::Hybrid: return "hybrid";
    }
    return "?";
}

Placement placement_from_name(const std::string& name) {
    if (name == "local") return Placement::Local;
    if (name == "distributed") return Placement::Distributed;
    if (name == "hybrid") return Placement::Hybrid;
    raise(Errc::InvalidSpec, "unknown placement: " + name);
}

PlacementPlan place(const std::vector<ColumnShape>& columns, Placement strategy,
                    const VaultTopology& topo) {
    PlacementPlan plan;
    plan.strategy = strategy;
    uint32_t idx = 0;  // registration order; round-robin key
    for (const auto& shape : columns) {
        ColumnPlacement cp;
        cp.col = shape.col;
        switch (strategy) {
            case Placement::Local: {
                uint32_t v = idx % topo.n_vaults;
                cp.parts = {{v}};
                cp.dict_vaults = {v};
                cp.home_vault = v;
                break;
            }
            case Placement::Distributed: {
                for (uint32_t v = 0; v < topo.n_vaults; ++v) cp.parts.push_back({v});
                cp.home_vault = idx % topo.n_vaults;
                cp.dict_vaults = {cp.home_vault};  // single copy
                break;
            }
            case Placement::Hybrid: {
                uint32_t g = idx % topo.n_groups();
                for (uint32_t i = 0; i < topo.group_size; ++i)
                    cp.parts.push_back({g * topo.group_size + i});
                cp.home_vault = g * topo.group_size;
                if (shape.n_distinct <= topo.dict_replication_threshold) {
                    for (const auto& p : cp.parts) cp.dict_vaults.push_back(p.vault);
                } else {
                    cp.dict_vaults = {cp.home_vault};
                }
                break;
            }
        }
        plan.columns.emplace(shape.col, std::move(cp));
        ++idx;
    }
    return plan;
}

namespace {

// contiguous block split of the initial rows; remainder to the front parts
std::vector<std::pair<uint64_t, uint64_t>> block_split(uint64_t n, size_t parts) {
    std::vector<std::pair<uint64_t, uint64_t>> out;
    uint64_t base = n / parts, rem = n % parts, at = 0;
    for (size_t p = 0; p < parts; ++p) {
        uint64_t len = base + (p < rem ? 1 : 0);
        out.emplace_back(at, at + len);
        at += len;
    }
    return out;
}

}  // namespace

AnalyticalReplica::AnalyticalReplica(const std::vector<NsmTable>& tables,
                                     PlacementPlan plan, const VaultTopology&)
    : plan_(std::move(plan)) {
    for (const auto& t : tables) {
        while (indexes_.size() <= t.table_id)
            indexes_.emplace_back(index_bucket_count(t.row_count()));
    }

    for (const auto& t : tables) {
        for (uint16_t c = 0; c < t.n_columns; ++c) {
            ColumnId col{t.table_id, c};
            auto pit = plan_.columns.find(col);
            if (pit == plan_.columns.end())
                raise(Errc::UnplacedColumn, "column has no placement");
            const auto& cp = pit->second;
            auto ranges = block_split(t.row_count(), cp.parts.size());

            std::vector<Value> values;
            values.reserve(t.row_count());
            for (uint64_t r = 0; r < t.row_count(); ++r)
                if (t.live[r]) values.push_back(t.rows[r][c]);
            auto dict = std::make_shared<Dictionary>(
                Dictionary::from_values(std::move(values)));

            auto& col_parts = parts_[col];
            auto& offsets = next_offset_[col];
            for (uint32_t p = 0; p < cp.parts.size(); ++p) {
                auto ec = std::make_shared<EncodedColumn>();
                ec->dict = dict;
                auto [lo, hi] = ranges[p];
                ec->codes.reserve(hi - lo);
                for (uint64_t r = lo; r < hi; ++r) {
                    uint32_t off = static_cast<uint32_t>(ec->codes.size());
                    ec->codes.push_back(t.live[r] ? dict->encode(t.rows[r][c])
                                                  : kTombstone);
                    indexes_[t.table_id].insert(c, r,
                                                {t.table_id, c, p, off});
                }
                offsets.push_back(static_cast<uint32_t>(ec->codes.size()));
                col_parts.push_back(std::move(ec));
            }
        }
    }
}

const ColumnPlacement& AnalyticalReplica::placement(ColumnId col) const {
    auto it = plan_.columns.find(col);
    if (it == plan_.columns.end()) raise(Errc::UnplacedColumn, "unplaced column");
    return it->second;
}

size_t AnalyticalReplica::partition_count(ColumnId col) const {
    auto it = parts_.find(col);
    if (it == parts_.end()) raise(Errc::UnknownColumn, "unknown column");
    return it->second.size();
}

std::shared_ptr<const EncodedColumn> AnalyticalReplica::partition(ColumnId col,
                                                                 uint32_t p) const {
    auto it = parts_.find(col);
    if (it == parts_.end() || p >= it->second.size())
        raise(Errc::UnknownColumn, "unknown column partition");
    return it->second[p];
}

std::vector<std::shared_ptr<const EncodedColumn>> AnalyticalReplica::column_parts(
    ColumnId col) const {
    auto it = parts_.find(col);
    if (it == parts_.end()) raise(Errc::UnknownColumn, "unknown column");
    return it->second;
}

void AnalyticalReplica::publish(ColumnId col, uint32_t p,
                                std::shared_ptr<const EncodedColumn> v) {
    auto it = parts_.find(col);
    if (it == parts_.end() || p >= it->second.size())
        raise(Errc::UnknownColumn, "unknown column partition");
    it->second[p] = std::move(v);
}

ColumnLocation AnalyticalReplica::place_new_row(const UpdateLogEntry& e) {
    ColumnId col{e.key.table_id, e.key.column_id};
    const auto& cp = placement(col);
    uint32_t p = cp.parts.size() == 1
                     ? 0
                     : static_cast<uint32_t>(e.key.row_id % cp.parts.size());
    uint32_t off = next_offset_[col][p]++;
    ColumnLocation loc{e.key.table_id, e.key.column_id, p, off};
    indexes_[e.key.table_id].insert(e.key.column_id, e.key.row_id, loc);
    return loc;
}

std::optional<Value> AnalyticalReplica::cell(uint16_t table, uint64_t row,
                                             uint16_t col) const {
    ColumnLocation loc = indexes_.at(table).lookup(col, row);
    auto part = partition({table, col}, loc.partition);
    if (loc.offset >= part->codes.size())
        raise(Errc::RowOutOfRange, "cell offset not yet applied");
    if (part->codes[loc.offset] == kTombstone) return std::nullopt;
    return part->dict->decode(part->codes[loc.offset]);
}

std::vector<ColumnId> AnalyticalReplica::column_ids() const {
    std::vector<ColumnId> out;
    for (const auto& [col, p] : parts_) out.push_back(col);
    return out;
}

uint64_t AnalyticalReplica::total_bytes() const {
    uint64_t b = 0;
    for (const auto& [col, ps] : parts_)
        for (const auto& p : ps) b += p->payload_bytes();
    return b;
}

}  // namespace htap
