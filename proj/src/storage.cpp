#include "htapsim/storage.hpp"

#include <algorithm>
#include <bit>

namespace htap {

const char* errc_name(Errc e) {
    switch (e) {
        case Errc::Ok: return "Ok";
        case Errc::ValueNotInDictionary: return "ValueNotInDictionary";
        case Errc::CodeOutOfRange: return "CodeOutOfRange";
        case Errc::EmptyDictionary: return "EmptyDictionary";
        case Errc::InvalidKey: return "InvalidKey";
        case Errc::DeleteOfMissingRow: return "DeleteOfMissingRow";
        case Errc::UnsortedInputLog: return "UnsortedInputLog";
        case Errc::KeyNotIndexed: return "KeyNotIndexed";
        case Errc::RowOutOfRange: return "RowOutOfRange";
        case Errc::UnknownColumn: return "UnknownColumn";
        case Errc::DoubleRelease: return "DoubleRelease";
        case Errc::NoVisibleVersion: return "NoVisibleVersion";
        case Errc::UnplacedColumn: return "UnplacedColumn";
        case Errc::CyclicDependency: return "CyclicDependency";
        case Errc::UnknownVault: return "UnknownVault";
        case Errc::TimeRegression: return "TimeRegression";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::PlanParse: return "PlanParse";
        case Errc::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

uint32_t code_width(uint64_t n_distinct) {
    if (n_distinct == 0)
        raise(Errc::EmptyDictionary, "code_width of empty dictionary");
    uint32_t bits = static_cast<uint32_t>(std::bit_width(n_distinct - 1));
    return bits == 0 ? 1 : bits;
}

Dictionary Dictionary::from_values(std::vector<Value> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return from_sorted(std::move(values));
}

Dictionary Dictionary::from_sorted(std::vector<Value> values) {
    Dictionary d;
    d.values_ = std::move(values);
    d.width_bits_ = d.values_.empty() ? 1 : code_width(d.values_.size());
    return d;
}

bool Dictionary::try_encode(Value v, uint32_t& code) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), v);
    if (it == values_.end() || *it != v) return false;
    code = static_cast<uint32_t>(it - values_.begin());
    return true;
}

uint32_t Dictionary::encode(Value v) const {
    uint32_t code;
    if (!try_encode(v, code))
        raise(Errc::ValueNotInDictionary,
              "value " + std::to_string(v) + " not in dictionary");
    return code;
}

Value Dictionary::decode(uint32_t code) const {
    if (code >= values_.size())
        raise(Errc::CodeOutOfRange, "code " + std::to_string(code) +
                                        " out of range for dictionary of " +
                                        std::to_string(values_.size()));
    return values_[code];
}

Value EncodedColumn::decode_at(size_t row) const {
    return dict->decode(codes.at(row));
}

void NsmTable::append_row(std::vector<Value> row) {
    rows.push_back(std::move(row));
    live.push_back(true);
}

Value NsmTable::cell(uint64_t row, uint16_t col) const {
    if (row >= rows.size() || col >= n_columns)
        raise(Errc::InvalidKey, "cell out of range");
    return rows[row][col];
}

}  // namespace htap
