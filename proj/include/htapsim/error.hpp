#pragma once

#include <stdexcept>
#include <string>

namespace htap {

enum class Errc {
    Ok = 0,
    ValueNotInDictionary,
    CodeOutOfRange,
    EmptyDictionary,
    InvalidKey,
    DeleteOfMissingRow,
    UnsortedInputLog,
    KeyNotIndexed,
    RowOutOfRange,
    UnknownColumn,
    DoubleRelease,
    NoVisibleVersion,
    UnplacedColumn,
    CyclicDependency,
    UnknownVault,
    TimeRegression,
    InvalidSpec,
    PlanParse,
    IoFailure,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace htap
