#pragma once

#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "htapsim/application.hpp"
#include "htapsim/storage.hpp"

namespace htap {

struct ColumnId {
    uint16_t table_id = 0;
    uint16_t column_id = 0;

    friend auto operator<=>(const ColumnId&, const ColumnId&) = default;
};

// One immutable snapshot of a whole column (all partitions).
struct ColumnVersion {
    uint64_t version_id = 0;
    std::vector<std::shared_ptr<const EncodedColumn>> parts;
    uint32_t readers = 0;

    uint64_t payload_bytes() const;
};

// Newest-first chain of column versions plus the dirty flag that defers
// snapshot creation until a query actually needs one.
struct SnapshotChain {
    std::vector<std::shared_ptr<ColumnVersion>> versions;  // [0] == head
    bool dirty = false;

    std::shared_ptr<ColumnVersion> head() const {
        return versions.empty() ? nullptr : versions.front();
    }
};

struct SnapshotStats {
    uint64_t snapshots_created = 0;
    uint64_t snapshots_shared = 0;
    uint64_t copied_bytes = 0;
    uint64_t versions_collected = 0;
};

// Column-granularity lazy snapshot manager over the analytical main replica.
class SnapshotManager {
public:
    // the provider returns the current published partitions of a column
    using ColumnProvider = std::function<
        std::vector<std::shared_ptr<const EncodedColumn>>(ColumnId)>;

    explicit SnapshotManager(ColumnProvider provider)
        : provider_(std::move(provider)) {}

    void register_column(ColumnId col);
    void mark_dirty(ColumnId col);

    std::vector<std::shared_ptr<const ColumnVersion>> acquire_snapshot(
        uint64_t query_id, const std::vector<ColumnId>& cols);
    void release_snapshot(uint64_t query_id);

    const SnapshotChain& chain(ColumnId col) const;
    const SnapshotStats& stats() const { return stats_; }

private:
    ColumnProvider provider_;
    std::map<ColumnId, SnapshotChain> chains_;
    std::map<uint64_t, std::vector<std::pair<ColumnId, std::shared_ptr<ColumnVersion>>>>
        held_;
    uint64_t next_version_ = 1;
    SnapshotStats stats_;
};

// ---- baselines ----

struct TupleVersion {
    uint64_t ts = 0;
    Value value = 0;
    bool live = true;
};

// newest-first; timestamps strictly decreasing
struct TupleVersionChain {
    std::vector<TupleVersion> versions;
};

struct MvccReadResult {
    Value value = 0;
    bool live = true;
    uint64_t nodes_traversed = 0;
};

// Per-cell version chains, GC disabled: chains only grow within a run.
class MvccStore {
public:
    explicit MvccStore(const std::vector<NsmTable>& initial);

    void write(const RecordKey& key, uint64_t ts, Value v, bool live = true);
    MvccReadResult read(const RecordKey& key, uint64_t ts) const;

    // nullopt instead of NoVisibleVersion; the failed traversal still counts
    std::optional<MvccReadResult> try_read(const RecordKey& key,
                                           uint64_t ts) const;

    double mean_chain_length() const;
    uint64_t total_nodes_traversed() const { return traversed_; }
    void reset_traversal_count() { traversed_ = 0; }

    // brute-force visibility oracle over the same chain
    MvccReadResult read_bruteforce(const RecordKey& key, uint64_t ts) const;

private:
    struct KeyHash {
        size_t operator()(const RecordKey& k) const {
            return std::hash<uint64_t>()(
                (uint64_t(k.table_id) << 48) ^ (uint64_t(k.column_id) << 32) ^
                k.row_id * kHashMixConstantLocal);
        }
        static constexpr uint64_t kHashMixConstantLocal = 0x9e3779b97f4a7c15ULL;
    };
    std::unordered_map<RecordKey, TupleVersionChain, KeyHash> chains_;
    mutable uint64_t traversed_ = 0;
};

// whole-replica memcpy snapshot; returns bytes copied for channel charging
std::pair<std::vector<NsmTable>, uint64_t> full_copy_snapshot(
    const std::vector<NsmTable>& replica);

uint64_t replica_bytes(const std::vector<NsmTable>& replica);

}  // namespace htap
