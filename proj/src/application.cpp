#include "htapsim/application.hpp"

#include <algorithm>
#include <unordered_set>

namespace htap {

namespace {

uint64_t next_version_id() {
    static uint64_t counter = 0;
    return ++counter;
}

void apply_update_decoded(std::vector<Value>& values, std::vector<bool>& live,
                          const ColumnBufferUpdate& u) {
    switch (u.kind) {
        case UpdateKind::Modify:
            if (u.offset >= values.size())
                raise(Errc::RowOutOfRange, "modify past end of partition");
            values[u.offset] = u.value;
            live[u.offset] = true;
            break;
        case UpdateKind::Delete:
            if (u.offset >= values.size())
                raise(Errc::RowOutOfRange, "delete past end of partition");
            live[u.offset] = false;
            break;
        case UpdateKind::Insert:
            if (u.offset > values.size())
                raise(Errc::RowOutOfRange, "insert leaves a gap");
            if (u.offset == values.size()) {
                values.push_back(u.value);
                live.push_back(true);
            } else {
                values[u.offset] = u.value;
                live[u.offset] = true;
            }
            break;
    }
}

}  // namespace

EncodedColumn apply_naive(const EncodedColumn& col,
                          std::span<const ColumnBufferUpdate> updates,
                          ApplyStats* stats) {
    const size_t n = col.codes.size();

    // Step 1: decompress
    std::vector<Value> values(n, 0);
    std::vector<bool> live(n, true);
    for (size_t i = 0; i < n; ++i) {
        if (col.codes[i] == kTombstone) {
            live[i] = false;
        } else {
            values[i] = col.dict->decode(col.codes[i]);
        }
    }
    if (stats) stats->bytes_read += col.payload_bytes();

    // Step 2: apply updates in commit order
    for (const auto& u : updates) apply_update_decoded(values, live, u);

    // Step 3: sort + dedupe the updated column's values
    std::vector<Value> distinct;
    distinct.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i)
        if (live[i]) distinct.push_back(values[i]);
    uint64_t cmp = 0;
    std::sort(distinct.begin(), distinct.end(), [&](Value a, Value b) {
        ++cmp;
        return a < b;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (stats) stats->comparisons += cmp;
    auto dict = std::make_shared<Dictionary>(
        Dictionary::from_sorted(std::move(distinct)));

    // Step 4: re-encode
    EncodedColumn out;
    out.codes.resize(values.size());
    for (size_t i = 0; i < values.size(); ++i)
        out.codes[i] = live[i] ? dict->encode(values[i]) : kTombstone;
    out.dict = std::move(dict);
    out.version_id = next_version_id();
    if (stats) stats->bytes_written += out.payload_bytes();
    return out;
}

Dictionary build_update_dictionary(std::span<const ColumnBufferUpdate> updates) {
    std::vector<Value> vals;
    vals.reserve(updates.size());
    for (const auto& u : updates)
        if (u.kind != UpdateKind::Delete) vals.push_back(u.value);
    return Dictionary::from_values(std::move(vals));
}

std::pair<Dictionary, RecodeMap> merge_dictionaries(const Dictionary& old_dict,
                                                    const Dictionary& upd_dict,
                                                    ApplyStats* stats) {
    const auto& a = old_dict.values();
    const auto& b = upd_dict.values();
    std::vector<Value> merged;
    merged.reserve(a.size() + b.size());
    RecodeMap map;
    map.old_to_new.resize(a.size());

    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            map.old_to_new[i] = static_cast<uint32_t>(merged.size());
            merged.push_back(a[i]);
            ++i;
        } else if (i == a.size() || b[j] < a[i]) {
            map.value_to_new[b[j]] = static_cast<uint32_t>(merged.size());
            merged.push_back(b[j]);
            ++j;
        } else {  // equal value present in both
            map.old_to_new[i] = static_cast<uint32_t>(merged.size());
            map.value_to_new[b[j]] = static_cast<uint32_t>(merged.size());
            merged.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    if (stats) stats->random_accesses += a.size() + b.size();
    return {Dictionary::from_sorted(std::move(merged)), std::move(map)};
}

EncodedColumn apply_optimized(const EncodedColumn& col,
                              std::span<const ColumnBufferUpdate> updates,
                              ApplyStats* stats) {
    EncodedColumn cur = col;

    size_t done = 0;
    while (done < updates.size() || done == 0) {
        // take the longest commit-ordered prefix within the sorter bound
        std::unordered_set<Value> round_values;
        size_t end = done;
        while (end < updates.size()) {
            const auto& u = updates[end];
            if (u.kind != UpdateKind::Delete &&
                !round_values.contains(u.value)) {
                if (round_values.size() == kUpdateDictCapacity) break;
                round_values.insert(u.value);
            }
            ++end;
        }
        auto round = updates.subspan(done, end - done);

        // Phase 1: private state — merged dictionary, recoded codes
        Dictionary upd_dict = build_update_dictionary(round);
        auto [new_dict, map] = merge_dictionaries(*cur.dict, upd_dict, stats);

        EncodedColumn next;
        next.codes.resize(cur.codes.size());
        for (size_t i = 0; i < cur.codes.size(); ++i)
            next.codes[i] = cur.codes[i] == kTombstone
                                ? kTombstone
                                : map.old_to_new[cur.codes[i]];
        if (stats) stats->random_accesses += cur.codes.size();

        for (const auto& u : round) {
            switch (u.kind) {
                case UpdateKind::Modify:
                    if (u.offset >= next.codes.size())
                        raise(Errc::RowOutOfRange, "modify past end of partition");
                    next.codes[u.offset] = map.value_to_new.at(u.value);
                    break;
                case UpdateKind::Delete:
                    if (u.offset >= next.codes.size())
                        raise(Errc::RowOutOfRange, "delete past end of partition");
                    next.codes[u.offset] = kTombstone;
                    break;
                case UpdateKind::Insert:
                    if (u.offset > next.codes.size())
                        raise(Errc::RowOutOfRange, "insert leaves a gap");
                    if (u.offset == next.codes.size())
                        next.codes.push_back(map.value_to_new.at(u.value));
                    else
                        next.codes[u.offset] = map.value_to_new.at(u.value);
                    break;
            }
        }
        if (stats) stats->random_accesses += round.size();

        next.dict = std::make_shared<Dictionary>(std::move(new_dict));
        // Phase 2: single pointer-pair publication
        next.version_id = next_version_id();
        cur = std::move(next);

        done = end;
        if (done == updates.size()) break;
    }

    // stale-entry growth bound: fall back to a full rebuild past the threshold
    size_t referenced = 0;
    {
        std::vector<bool> seen(cur.dict->size(), false);
        for (uint32_t c : cur.codes) {
            if (c == kTombstone) continue;
            if (!seen[c]) {
                seen[c] = true;
                ++referenced;
            }
        }
    }
    if (referenced > 0 &&
        static_cast<double>(cur.dict->size()) >
            kDictCompactionFactor * static_cast<double>(referenced)) {
        return apply_naive(cur, {}, stats);
    }

    if (stats) {
        stats->bytes_read += col.payload_bytes();
        stats->bytes_written += cur.payload_bytes();
    }
    return cur;
}

}  // namespace htap
