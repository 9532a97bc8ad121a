#pragma once

#include <functional>
#include <span>
#include <vector>

#include "htapsim/txn.hpp"

namespace htap {

inline constexpr size_t kFinalLogCapacity = 1024;
inline constexpr uint64_t kHashMixConstant = 2654435761ULL;
inline constexpr size_t kMergeFanIn = 8;     // FIFO input queues per merge pass
inline constexpr size_t kMergeFifoDepth = 128;
inline constexpr size_t kProbeUnits = 4;

// Accumulated work counts; the vault model turns these into time.
struct PropagationStats {
    uint64_t entries_merged = 0;
    uint64_t merge_comparisons = 0;
    uint64_t merge_passes = 0;
    uint64_t lookups = 0;
    uint64_t chain_nodes = 0;
    uint64_t shipped_entries = 0;
    uint64_t shipped_bytes = 0;
};

struct FinalLog {
    std::vector<UpdateLogEntry> entries;  // ascending by commit
    size_t capacity = kFinalLogCapacity;
};

// Pure form: merge sorted runs, keep the first `capacity` entries by commit.
// consumed[i] reports how many entries of log i made it into the output.
FinalLog merge_sorted_runs(const std::vector<std::span<const UpdateLogEntry>>& logs,
                           size_t capacity, std::vector<size_t>* consumed,
                           PropagationStats* stats);

// Stage 1 against live thread logs: reads [shipped, end), advances the
// shipped watermark of each log by its consumed count.
FinalLog merge_logs(std::vector<ThreadUpdateLog>& logs, size_t capacity,
                    PropagationStats* stats);

uint64_t hash_key(uint64_t column_id, uint64_t row_id, uint64_t n_buckets);

// next power of two >= rows / 4, at least 1
uint64_t index_bucket_count(uint64_t n_rows);

struct ColumnLocation {
    uint16_t table_id = 0;
    uint16_t column_id = 0;
    uint32_t partition = 0;  // partition index within the column's placement
    uint32_t offset = 0;     // slot within the partition

    friend bool operator==(const ColumnLocation&, const ColumnLocation&) = default;
};

// Bucket-chained (column,row) -> column location map for one table.
class HashIndex {
public:
    explicit HashIndex(uint64_t n_buckets = 1);

    void insert(uint16_t column_id, uint64_t row_id, ColumnLocation loc);
    ColumnLocation lookup(uint16_t column_id, uint64_t row_id,
                          PropagationStats* stats = nullptr) const;
    bool contains(uint16_t column_id, uint64_t row_id) const;

    uint64_t bucket_count() const { return buckets_.size(); }
    size_t chain_length(uint16_t column_id, uint64_t row_id) const;

private:
    struct Node {
        uint16_t column_id;
        uint64_t row_id;
        ColumnLocation loc;
    };
    std::vector<std::vector<Node>> buckets_;
};

struct ColumnBufferUpdate {
    uint32_t offset = 0;
    UpdateKind kind = UpdateKind::Modify;
    Value value = 0;
    CommitId commit = 0;
    uint64_t row_id = 0;
};

// Per-(column, partition) slice of one final log, commit-ordered.
struct ColumnBuffer {
    uint16_t table_id = 0;
    uint16_t column_id = 0;
    uint32_t partition = 0;
    std::vector<ColumnBufferUpdate> updates;
};

// Called for Insert entries the index has not seen; returns the assigned
// location (and is expected to record it in the index).
using NewRowPlacer = std::function<ColumnLocation(const UpdateLogEntry&)>;

// Stages 2+3: resolve each entry's location and partition the final log
// into commit-ordered column buffers (first-appearance order).
std::vector<ColumnBuffer> ship(const FinalLog& final_log,
                               std::vector<HashIndex>& indexes,
                               const NewRowPlacer& place_new_row,
                               PropagationStats* stats);

}  // namespace htap
