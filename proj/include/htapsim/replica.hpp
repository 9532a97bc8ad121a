#pragma once

#include <map>
#include <optional>

#include "htapsim/consistency.hpp"
#include "htapsim/propagation.hpp"
#include "htapsim/storage.hpp"
#include "htapsim/vaultsim.hpp"

namespace htap {

enum class Placement { Local, Distributed, Hybrid };

const char* placement_name(Placement p);
Placement placement_from_name(const std::string& name);

struct PartitionPlacement {
    uint32_t vault = 0;
};

struct ColumnPlacement {
    ColumnId col;
    std::vector<PartitionPlacement> parts;
    std::vector<uint32_t> dict_vaults;  // replicas; singleton unless Hybrid
    uint32_t home_vault = 0;
};

struct PlacementPlan {
    Placement strategy = Placement::Hybrid;
    std::map<ColumnId, ColumnPlacement> columns;
};

struct ColumnShape {
    ColumnId col;
    uint64_t n_rows = 0;
    uint64_t n_distinct = 0;
};

// Deterministic vault assignment: columns round-robin to vaults (Local),
// block-split across all vaults (Distributed), or block-split across one
// vault group with per-vault dictionary replicas (Hybrid).
PlacementPlan place(const std::vector<ColumnShape>& columns, Placement strategy,
                    const VaultTopology& topo);

// DSM main replica: per column a set of published immutable partitions,
// plus a per-table hash index from (column,row) to partition slots.
class AnalyticalReplica {
public:
    AnalyticalReplica(const std::vector<NsmTable>& tables, PlacementPlan plan,
                      const VaultTopology& topo);

    const PlacementPlan& plan() const { return plan_; }
    const ColumnPlacement& placement(ColumnId col) const;

    std::vector<HashIndex>& indexes() { return indexes_; }

    size_t partition_count(ColumnId col) const;
    std::shared_ptr<const EncodedColumn> partition(ColumnId col, uint32_t p) const;
    std::vector<std::shared_ptr<const EncodedColumn>> column_parts(ColumnId col) const;
    void publish(ColumnId col, uint32_t p, std::shared_ptr<const EncodedColumn> v);

    // Assigns a slot for a freshly inserted row and records it in the index.
    ColumnLocation place_new_row(const UpdateLogEntry& e);

    // Decoded view of one cell (nullopt when tombstoned); used by the
    // freshness checks. Bypasses cost accounting.
    std::optional<Value> cell(uint16_t table, uint64_t row, uint16_t col) const;

    std::vector<ColumnId> column_ids() const;
    uint64_t total_bytes() const;

private:
    PlacementPlan plan_;
    std::map<ColumnId, std::vector<std::shared_ptr<const EncodedColumn>>> parts_;
    std::map<ColumnId, std::vector<uint32_t>> next_offset_;
    std::vector<HashIndex> indexes_;
};

}  // namespace htap
