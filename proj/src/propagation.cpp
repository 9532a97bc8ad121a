#include "htapsim/propagation.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>

namespace htap {

namespace {

void check_sorted(std::span<const UpdateLogEntry> log) {
    for (size_t i = 1; i < log.size(); ++i)
        if (log[i].commit < log[i - 1].commit)
            raise(Errc::UnsortedInputLog, "input log not sorted by commit");
}

// one k-way merge pass (k <= kMergeFanIn); charges ceil(log2 k) comparator
// levels per emitted entry
std::vector<UpdateLogEntry> merge_pass(
    const std::vector<std::span<const UpdateLogEntry>>& runs,
    PropagationStats* stats) {
    struct Head {
        CommitId commit;
        size_t run;
    };
    auto cmp = [](const Head& a, const Head& b) {
        return a.commit > b.commit;  // min-heap
    };
    std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);
    std::vector<size_t> pos(runs.size(), 0);
    size_t total = 0;
    for (size_t r = 0; r < runs.size(); ++r) {
        total += runs[r].size();
        if (!runs[r].empty()) heap.push({runs[r][0].commit, r});
    }
    uint64_t levels = runs.size() <= 1
                          ? 0
                          : std::bit_width(runs.size() - 1);  // comparator tree
    std::vector<UpdateLogEntry> out;
    out.reserve(total);
    while (!heap.empty()) {
        auto [commit, r] = heap.top();
        heap.pop();
        out.push_back(runs[r][pos[r]]);
        if (stats) stats->merge_comparisons += levels;
        if (++pos[r] < runs[r].size()) heap.push({runs[r][pos[r]].commit, r});
    }
    return out;
}

}  // namespace

FinalLog merge_sorted_runs(const std::vector<std::span<const UpdateLogEntry>>& logs,
                           size_t capacity, std::vector<size_t>* consumed,
                           PropagationStats* stats) {
    for (const auto& log : logs) check_sorted(log);

    std::vector<std::vector<UpdateLogEntry>> owned;
    std::vector<std::span<const UpdateLogEntry>> runs(logs.begin(), logs.end());

    // multi-pass 8-way merge, mirroring the fixed fan-in of the merge unit
    while (runs.size() > 1) {
        if (stats) stats->merge_passes++;
        std::vector<std::vector<UpdateLogEntry>> next;
        for (size_t i = 0; i < runs.size(); i += kMergeFanIn) {
            std::vector<std::span<const UpdateLogEntry>> group(
                runs.begin() + i,
                runs.begin() + std::min(runs.size(), i + kMergeFanIn));
            next.push_back(merge_pass(group, stats));
        }
        owned = std::move(next);
        runs.assign(owned.begin(), owned.end());
    }

    FinalLog final_log;
    final_log.capacity = capacity;
    if (!runs.empty()) {
        auto& merged = runs[0];
        size_t n = std::min(capacity, merged.size());
        // never split a commit's entries across final logs (multi-cell
        // writes share one commit; the cutoff consumes whole commits)
        if (n < merged.size()) {
            while (n > 0 && merged[n].commit == merged[n - 1].commit) --n;
            if (n == 0) {
                n = 1;
                while (n < merged.size() && merged[n].commit == merged[0].commit)
                    ++n;
            }
        }
        final_log.entries.assign(merged.begin(), merged.begin() + n);
    }
    if (stats) stats->entries_merged += final_log.entries.size();

    if (consumed) {
        consumed->assign(logs.size(), 0);
        if (!final_log.entries.empty()) {
            CommitId cutoff = final_log.entries.back().commit;
            // commit IDs are globally unique, so a cutoff scan per input
            // recovers exactly what the truncated merge consumed
            for (size_t i = 0; i < logs.size(); ++i) {
                auto it = std::upper_bound(
                    logs[i].begin(), logs[i].end(), cutoff,
                    [](CommitId c, const UpdateLogEntry& e) { return c < e.commit; });
                (*consumed)[i] = static_cast<size_t>(it - logs[i].begin());
            }
        }
    }
    return final_log;
}

FinalLog merge_logs(std::vector<ThreadUpdateLog>& logs, size_t capacity,
                    PropagationStats* stats) {
    std::vector<std::span<const UpdateLogEntry>> pending;
    pending.reserve(logs.size());
    for (auto& log : logs)
        pending.emplace_back(log.entries.data() + log.shipped, log.pending());
    std::vector<size_t> consumed;
    FinalLog final_log = merge_sorted_runs(pending, capacity, &consumed, stats);
    for (size_t i = 0; i < logs.size(); ++i) logs[i].shipped += consumed[i];
    return final_log;
}

uint64_t hash_key(uint64_t column_id, uint64_t row_id, uint64_t n_buckets) {
    return (column_id * kHashMixConstant + row_id) % n_buckets;
}

uint64_t index_bucket_count(uint64_t n_rows) {
    uint64_t want = std::max<uint64_t>(1, n_rows / 4);
    return std::bit_ceil(want);
}

HashIndex::HashIndex(uint64_t n_buckets)
    : buckets_(std::max<uint64_t>(1, n_buckets)) {}

void HashIndex::insert(uint16_t column_id, uint64_t row_id, ColumnLocation loc) {
    buckets_[hash_key(column_id, row_id, buckets_.size())].push_back(
        {column_id, row_id, loc});
}

ColumnLocation HashIndex::lookup(uint16_t column_id, uint64_t row_id,
                                 PropagationStats* stats) const {
    const auto& chain = buckets_[hash_key(column_id, row_id, buckets_.size())];
    if (stats) stats->lookups++;
    for (size_t i = 0; i < chain.size(); ++i) {
        if (stats) stats->chain_nodes++;
        if (chain[i].column_id == column_id && chain[i].row_id == row_id)
            return chain[i].loc;
    }
    raise(Errc::KeyNotIndexed, "key (" + std::to_string(column_id) + "," +
                                   std::to_string(row_id) + ") not indexed");
}

bool HashIndex::contains(uint16_t column_id, uint64_t row_id) const {
    const auto& chain = buckets_[hash_key(column_id, row_id, buckets_.size())];
    for (const auto& node : chain)
        if (node.column_id == column_id && node.row_id == row_id) return true;
    return false;
}

size_t HashIndex::chain_length(uint16_t column_id, uint64_t row_id) const {
    return buckets_[hash_key(column_id, row_id, buckets_.size())].size();
}

std::vector<ColumnBuffer> ship(const FinalLog& final_log,
                               std::vector<HashIndex>& indexes,
                               const NewRowPlacer& place_new_row,
                               PropagationStats* stats) {
    std::vector<ColumnBuffer> buffers;
    std::map<std::tuple<uint16_t, uint16_t, uint32_t>, size_t> by_location;

    for (const auto& e : final_log.entries) {
        if (e.key.table_id >= indexes.size())
            raise(Errc::KeyNotIndexed, "no index for table");
        auto& index = indexes[e.key.table_id];

        ColumnLocation loc;
        if (e.kind == UpdateKind::Insert &&
            !index.contains(e.key.column_id, e.key.row_id)) {
            if (!place_new_row)
                raise(Errc::KeyNotIndexed, "insert of unplaced row");
            loc = place_new_row(e);
        } else {
            loc = index.lookup(e.key.column_id, e.key.row_id, stats);
        }

        auto key = std::make_tuple(loc.table_id, loc.column_id, loc.partition);
        auto [it, fresh] = by_location.try_emplace(key, buffers.size());
        if (fresh) {
            ColumnBuffer buf;
            buf.table_id = loc.table_id;
            buf.column_id = loc.column_id;
            buf.partition = loc.partition;
            buffers.push_back(std::move(buf));
        }
        // final log is commit-ordered, so per-buffer order stays commit-ordered
        buffers[it->second].updates.push_back(
            {loc.offset, e.kind, e.data, e.commit, e.key.row_id});
        if (stats) {
            stats->shipped_entries++;
            stats->shipped_bytes += 2 * kLogEntryBytes;  // copy-unit read+write
        }
    }
    return buffers;
}

}  // namespace htap
