#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "htapsim/error.hpp"

namespace htap {

using Value = int64_t;

struct RecordKey {
    uint16_t table_id = 0;
    uint64_t row_id = 0;
    uint16_t column_id = 0;

    friend bool operator==(const RecordKey&, const RecordKey&) = default;
};

// bits needed for fixed-width codes; never below 1 even for a single value
uint32_t code_width(uint64_t n_distinct);

// Order-preserving dictionary: sorted distinct values, code == rank.
class Dictionary {
public:
    Dictionary() = default;

    // sorts and deduplicates
    static Dictionary from_values(std::vector<Value> values);

    // values must already be strictly ascending
    static Dictionary from_sorted(std::vector<Value> values);

    uint32_t encode(Value v) const;             // throws ValueNotInDictionary
    bool try_encode(Value v, uint32_t& code) const;
    Value decode(uint32_t code) const;          // throws CodeOutOfRange

    size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    uint32_t width_bits() const { return width_bits_; }
    const std::vector<Value>& values() const { return values_; }

    // logical storage footprint of n codes at this width
    uint64_t code_bytes(uint64_t n_codes) const {
        return (n_codes * width_bits_ + 7) / 8;
    }
    uint64_t dict_bytes() const { return values_.size() * sizeof(Value); }

private:
    std::vector<Value> values_;
    uint32_t width_bits_ = 1;
};

// row tombstoned by a Delete; never a valid dictionary code
inline constexpr uint32_t kTombstone = UINT32_MAX;

// Immutable once published; snapshot chains share these by pointer.
struct EncodedColumn {
    std::vector<uint32_t> codes;
    std::shared_ptr<const Dictionary> dict;
    uint64_t version_id = 0;

    Value decode_at(size_t row) const;
    bool tombstoned(size_t row) const { return codes.at(row) == kTombstone; }
    uint64_t payload_bytes() const {
        return dict->code_bytes(codes.size()) + dict->dict_bytes();
    }
};

// Row-store replica for the transactional side.
struct NsmTable {
    uint16_t table_id = 0;
    uint16_t n_columns = 0;
    std::vector<std::vector<Value>> rows;
    std::vector<bool> live;  // parallel to rows; false after Delete

    size_t row_count() const { return rows.size(); }
    void append_row(std::vector<Value> row);
    Value cell(uint64_t row, uint16_t col) const;
};

}  // namespace htap
