#include "htapsim/consistency.hpp"

#include <algorithm>

namespace htap {

uint64_t ColumnVersion::payload_bytes() const {
    uint64_t b = 0;
    for (const auto& p : parts) b += p->payload_bytes();
    return b;
}

void SnapshotManager::register_column(ColumnId col) {
    if (chains_.contains(col)) return;
    auto v = std::make_shared<ColumnVersion>();
    v->version_id = next_version_++;
    v->parts = provider_(col);
    chains_[col].versions = {std::move(v)};
}

void SnapshotManager::mark_dirty(ColumnId col) {
    auto it = chains_.find(col);
    if (it == chains_.end()) raise(Errc::UnknownColumn, "mark_dirty: unknown column");
    it->second.dirty = true;  // no snapshot yet; materialize on next acquire
}

const SnapshotChain& SnapshotManager::chain(ColumnId col) const {
    auto it = chains_.find(col);
    if (it == chains_.end()) raise(Errc::UnknownColumn, "unknown column");
    return it->second;
}

std::vector<std::shared_ptr<const ColumnVersion>> SnapshotManager::acquire_snapshot(
    uint64_t query_id, const std::vector<ColumnId>& cols) {
    auto& held = held_[query_id];
    std::vector<std::shared_ptr<const ColumnVersion>> out;
    for (ColumnId col : cols) {
        auto it = chains_.find(col);
        if (it == chains_.end()) raise(Errc::UnknownColumn, "unknown column");
        auto& chain = it->second;
        if (chain.dirty || chain.versions.empty()) {
            auto v = std::make_shared<ColumnVersion>();
            v->version_id = next_version_++;
            v->parts = provider_(col);  // copy of the current main replica
            chain.versions.insert(chain.versions.begin(), v);
            chain.dirty = false;
            stats_.snapshots_created++;
            stats_.copied_bytes += v->payload_bytes();
        } else {
            stats_.snapshots_shared++;
        }
        auto head = chain.versions.front();
        head->readers++;
        held.emplace_back(col, head);
        out.push_back(head);
    }
    return out;
}

void SnapshotManager::release_snapshot(uint64_t query_id) {
    auto it = held_.find(query_id);
    if (it == held_.end() || it->second.empty())
        raise(Errc::DoubleRelease, "query holds no snapshot");
    for (auto& [col, version] : it->second) {
        version->readers--;
        auto& chain = chains_[col];
        // GC: drop zero-reader versions, head excepted
        auto head = chain.versions.front();
        std::erase_if(chain.versions, [&](const std::shared_ptr<ColumnVersion>& v) {
            return v != head && v->readers == 0;
        });
    }
    held_.erase(it);
}

MvccStore::MvccStore(const std::vector<NsmTable>& initial) {
    for (const auto& t : initial) {
        for (uint64_t r = 0; r < t.row_count(); ++r) {
            for (uint16_t c = 0; c < t.n_columns; ++c) {
                chains_[{t.table_id, r, c}].versions.push_back(
                    {0, t.rows[r][c], t.live[r]});
            }
        }
    }
}

void MvccStore::write(const RecordKey& key, uint64_t ts, Value v, bool live) {
    auto& chain = chains_[key];
    if (!chain.versions.empty() && chain.versions.front().ts >= ts)
        raise(Errc::InvalidKey, "non-increasing version timestamp");
    chain.versions.insert(chain.versions.begin(), {ts, v, live});
}

std::optional<MvccReadResult> MvccStore::try_read(const RecordKey& key,
                                                  uint64_t ts) const {
    auto it = chains_.find(key);
    if (it == chains_.end()) raise(Errc::InvalidKey, "no chain for key");
    MvccReadResult res;
    for (const auto& v : it->second.versions) {
        res.nodes_traversed++;
        if (v.ts <= ts) {
            res.value = v.value;
            res.live = v.live;
            traversed_ += res.nodes_traversed;
            return res;
        }
    }
    traversed_ += res.nodes_traversed;
    return std::nullopt;
}

MvccReadResult MvccStore::read(const RecordKey& key, uint64_t ts) const {
    auto res = try_read(key, ts);
    if (!res) raise(Errc::NoVisibleVersion, "all versions newer than read timestamp");
    return *res;
}

MvccReadResult MvccStore::read_bruteforce(const RecordKey& key, uint64_t ts) const {
    auto it = chains_.find(key);
    if (it == chains_.end()) raise(Errc::InvalidKey, "no chain for key");
    const TupleVersion* best = nullptr;
    for (const auto& v : it->second.versions)
        if (v.ts <= ts && (!best || v.ts > best->ts)) best = &v;
    if (!best) raise(Errc::NoVisibleVersion, "all versions newer than read timestamp");
    return {best->value, best->live, it->second.versions.size()};
}

double MvccStore::mean_chain_length() const {
    if (chains_.empty()) return 0.0;
    uint64_t total = 0;
    for (const auto& [k, c] : chains_) total += c.versions.size();
    return static_cast<double>(total) / static_cast<double>(chains_.size());
}

uint64_t replica_bytes(const std::vector<NsmTable>& replica) {
    uint64_t b = 0;
    for (const auto& t : replica) b += t.row_count() * t.n_columns * sizeof(Value);
    return b;
}

std::pair<std::vector<NsmTable>, uint64_t> full_copy_snapshot(
    const std::vector<NsmTable>& replica) {
    return {replica, replica_bytes(replica)};
}

}  // namespace htap
