#include "htapsim/txn.hpp"

namespace htap {

TxnIsland::TxnIsland(std::vector<NsmTable> tables, uint32_t n_threads)
    : tables_(std::move(tables)) {
    logs_.resize(n_threads);
    for (uint32_t t = 0; t < n_threads; ++t) logs_[t].thread_id = t;
}

const NsmTable& TxnIsland::table(uint16_t id) const {
    if (id >= tables_.size()) raise(Errc::InvalidKey, "unknown table");
    return tables_[id];
}

NsmTable& TxnIsland::table_mut(uint16_t id) {
    if (id >= tables_.size()) raise(Errc::InvalidKey, "unknown table");
    return tables_[id];
}

TxnResult TxnIsland::execute(uint32_t thread_id, const std::vector<TxnOp>& ops) {
    auto& log = logs_.at(thread_id);

    // Validate before mutating anything so the batch applies atomically.
    for (const auto& op : ops) {
        switch (op.action) {
            case TxnOp::Action::Read:
            case TxnOp::Action::Modify: {
                const auto& t = table(op.key.table_id);
                if (op.key.row_id >= t.row_count() ||
                    op.key.column_id >= t.n_columns)
                    raise(Errc::InvalidKey, "key out of range");
                if (!t.live[op.key.row_id])
                    raise(Errc::InvalidKey, "key addresses deleted row");
                break;
            }
            case TxnOp::Action::Delete: {
                const auto& t = table(op.key.table_id);
                if (op.key.row_id >= t.row_count())
                    raise(Errc::InvalidKey, "delete of unknown row");
                if (!t.live[op.key.row_id])
                    raise(Errc::DeleteOfMissingRow, "row already deleted");
                break;
            }
            case TxnOp::Action::Insert: {
                const auto& t = table(op.key.table_id);
                if (op.row.size() != t.n_columns)
                    raise(Errc::InvalidKey, "insert arity mismatch");
                break;
            }
        }
    }

    TxnResult res;
    bool writes = false;
    for (const auto& op : ops)
        if (op.action != TxnOp::Action::Read) writes = true;

    CommitId cid = 0;
    if (writes) cid = next_commit_++;

    for (const auto& op : ops) {
        switch (op.action) {
            case TxnOp::Action::Read:
                res.reads.push_back(
                    table(op.key.table_id).cell(op.key.row_id, op.key.column_id));
                break;
            case TxnOp::Action::Modify: {
                auto& t = table_mut(op.key.table_id);
                t.rows[op.key.row_id][op.key.column_id] = op.value;
                log.entries.push_back({cid, UpdateKind::Modify, op.value, op.key});
                ++res.log_entries_added;
                break;
            }
            case TxnOp::Action::Delete: {
                auto& t = table_mut(op.key.table_id);
                t.live[op.key.row_id] = false;
                // one tombstone entry per column cell, same commit
                for (uint16_t c = 0; c < t.n_columns; ++c) {
                    log.entries.push_back(
                        {cid, UpdateKind::Delete, 0,
                         {op.key.table_id, op.key.row_id, c}});
                    ++res.log_entries_added;
                }
                break;
            }
            case TxnOp::Action::Insert: {
                auto& t = table_mut(op.key.table_id);
                uint64_t row = t.row_count();
                t.append_row(op.row);
                for (uint16_t c = 0; c < t.n_columns; ++c) {
                    log.entries.push_back({cid, UpdateKind::Insert, op.row[c],
                                           {op.key.table_id, row, c}});
                    ++res.log_entries_added;
                }
                break;
            }
        }
    }

    if (writes) res.commit = cid;
    return res;
}

size_t TxnIsland::pending_update_count() const {
    size_t n = 0;
    for (const auto& log : logs_) n += log.pending();
    return n;
}

}  // namespace htap
