#pragma once

#include <unordered_map>

#include "htapsim/propagation.hpp"
#include "htapsim/storage.hpp"

namespace htap {

inline constexpr size_t kUpdateDictCapacity = 1024;  // sorter bound per round
inline constexpr double kDictCompactionFactor = 4.0;

// Work counts for the naive vs. optimized cost asymmetry.
struct ApplyStats {
    uint64_t comparisons = 0;      // sort comparisons (naive path)
    uint64_t random_accesses = 0;  // per-element touches (optimized path)
    uint64_t bytes_read = 0;
    uint64_t bytes_written = 0;
};

struct RecodeMap {
    std::vector<uint32_t> old_to_new;          // total over all old codes
    std::unordered_map<Value, uint32_t> value_to_new;  // update values
};

// Step 1-4 reference algorithm: decode, apply, rebuild dictionary from the
// updated column, re-encode. Dictionary keeps only referenced values.
EncodedColumn apply_naive(const EncodedColumn& col,
                          std::span<const ColumnBufferUpdate> updates,
                          ApplyStats* stats = nullptr);

// sorted, deduplicated Modify/Insert payloads (Deletes carry no value)
Dictionary build_update_dictionary(std::span<const ColumnBufferUpdate> updates);

// sorted union by linear scan; map is total and order-preserving
std::pair<Dictionary, RecodeMap> merge_dictionaries(const Dictionary& old_dict,
                                                    const Dictionary& upd_dict,
                                                    ApplyStats* stats = nullptr);

// Two-stage path: recode through the merged dictionary without decoding the
// column. The result decodes identically to apply_naive; its dictionary may
// keep stale values until the compaction threshold triggers a rebuild.
// Buffers with more than 1024 distinct values run in successive rounds.
EncodedColumn apply_optimized(const EncodedColumn& col,
                              std::span<const ColumnBufferUpdate> updates,
                              ApplyStats* stats = nullptr);

}  // namespace htap
