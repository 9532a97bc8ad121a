#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "htapsim/storage.hpp"

namespace htap {

enum class UpdateKind : uint8_t { Insert, Delete, Modify };

using CommitId = uint64_t;

struct UpdateLogEntry {
    CommitId commit = 0;
    UpdateKind kind = UpdateKind::Modify;
    Value data = 0;
    RecordKey key;
};

inline constexpr uint64_t kLogEntryBytes = 24;  // commit + kind + value + key

// Single-writer append-only; the propagation pipeline reads [shipped, size).
struct ThreadUpdateLog {
    uint32_t thread_id = 0;
    std::vector<UpdateLogEntry> entries;
    size_t shipped = 0;  // watermark: entries before this were consumed

    size_t pending() const { return entries.size() - shipped; }
};

struct TxnOp {
    enum class Action : uint8_t { Read, Insert, Delete, Modify };
    Action action = Action::Read;
    RecordKey key;        // for Insert: table_id only; for Delete: table+row
    Value value = 0;      // Modify payload
    std::vector<Value> row;  // Insert payload (full row)
};

struct TxnResult {
    std::optional<CommitId> commit;   // set iff the batch wrote anything
    std::vector<Value> reads;         // in op order
    size_t log_entries_added = 0;
};

// NSM transactional engine: one commit ID per write batch, one log entry
// per written cell, appended to the executing thread's log in commit order.
class TxnIsland {
public:
    TxnIsland(std::vector<NsmTable> tables, uint32_t n_threads);

    TxnResult execute(uint32_t thread_id, const std::vector<TxnOp>& ops);

    size_t pending_update_count() const;

    const std::vector<NsmTable>& tables() const { return tables_; }
    const NsmTable& table(uint16_t id) const;
    std::vector<ThreadUpdateLog>& logs() { return logs_; }
    const std::vector<ThreadUpdateLog>& logs() const { return logs_; }
    CommitId last_commit() const { return next_commit_ - 1; }

private:
    NsmTable& table_mut(uint16_t id);

    std::vector<NsmTable> tables_;
    std::vector<ThreadUpdateLog> logs_;
    CommitId next_commit_ = 1;
};

}  // namespace htap
