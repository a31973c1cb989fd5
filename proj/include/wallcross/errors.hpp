#pragma once

#include <iterator>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wallcross {

enum class ErrorKind {
    ZeroClass,
    NuHRankNonzero,
    OutsideU,
    NotRankZeroDim2,
    DegenerateLine,
    RankZeroProjection,
    QTooLarge,
    MissingJValue,
    ParseError,
    DuplicateKey,
    EntryOutsideWindow,
    OutsideWindow,
    NonNilpotent,
    NonIntegralZExponent,
    NonIntegralChi,
    BoundViolated,
    IncompleteInput,
    DegenerateLfLine,
    ChiZero,
    NSufficiencyFailed,
    NoSolution,
    WindowTooSmall,
    NotOnWall,
    InvalidArgument,
    CacheConflict,
    InvalidGeometry,
    ConfigError,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::ZeroClass: return "ZeroClass";
        case ErrorKind::NuHRankNonzero: return "NuHRankNonzero";
        case ErrorKind::OutsideU: return "OutsideU";
        case ErrorKind::NotRankZeroDim2: return "NotRankZeroDim2";
        case ErrorKind::DegenerateLine: return "DegenerateLine";
        case ErrorKind::RankZeroProjection: return "RankZeroProjection";
        case ErrorKind::QTooLarge: return "QTooLarge";
        case ErrorKind::MissingJValue: return "MissingJValue";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DuplicateKey: return "DuplicateKey";
        case ErrorKind::EntryOutsideWindow: return "EntryOutsideWindow";
        case ErrorKind::OutsideWindow: return "OutsideWindow";
        case ErrorKind::NonNilpotent: return "NonNilpotent";
        case ErrorKind::NonIntegralZExponent: return "NonIntegralZExponent";
        case ErrorKind::NonIntegralChi: return "NonIntegralChi";
        case ErrorKind::BoundViolated: return "BoundViolated";
        case ErrorKind::IncompleteInput: return "IncompleteInput";
        case ErrorKind::DegenerateLfLine: return "DegenerateLfLine";
        case ErrorKind::ChiZero: return "ChiZero";
        case ErrorKind::NSufficiencyFailed: return "NSufficiencyFailed";
        case ErrorKind::NoSolution: return "NoSolution";
        case ErrorKind::WindowTooSmall: return "WindowTooSmall";
        case ErrorKind::NotOnWall: return "NotOnWall";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::CacheConflict: return "CacheConflict";
        case ErrorKind::InvalidGeometry: return "InvalidGeometry";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Enumerations stop once this many table keys are missing; the value is undetermined either way.
inline constexpr std::size_t kMissingKeyCap = 64;

// Carries the table keys a computation needed but could not see; truncated when the cap cut the search short.
class IncompleteInputError : public Error {
public:
    explicit IncompleteInputError(std::vector<std::string> keys, bool truncated = false)
        : Error(ErrorKind::IncompleteInput, join(keys, truncated)), keys_(std::move(keys)), truncated_(truncated) {}
    const std::vector<std::string>& missing_keys() const noexcept { return keys_; }
    bool truncated() const noexcept { return truncated_; }

private:
    static std::string join(const std::vector<std::string>& keys, bool truncated) {
        std::string out = "missing table keys:";
        for (const auto& k : keys) out += " " + k;
        if (truncated) out += " (list truncated)";
        return out;
    }
    std::vector<std::string> keys_;
    bool truncated_ = false;
};

// Sorted accumulator that aborts the enumeration once kMissingKeyCap keys are known.
class MissingKeys {
public:
    void add(const std::string& key) {
        keys_.insert(key);
        check();
    }
    template <class Range>
    void add_all(const Range& keys) {
        keys_.insert(std::begin(keys), std::end(keys));
        check();
    }
    void add(const IncompleteInputError& e) {
        truncated_ = truncated_ || e.truncated();
        add_all(e.missing_keys());
    }
    bool empty() const { return keys_.empty(); }
    void throw_if_any() const {
        if (!keys_.empty()) raise();
    }

private:
    void check() const {
        if (truncated_ || keys_.size() >= kMissingKeyCap) raise();
    }
    [[noreturn]] void raise() const {
        std::vector<std::string> out(keys_.begin(), keys_.end());
        const bool cut = truncated_ || out.size() >= kMissingKeyCap;
        if (out.size() > kMissingKeyCap) out.resize(kMissingKeyCap);
        throw IncompleteInputError(std::move(out), cut);
    }
    std::set<std::string> keys_;
    bool truncated_ = false;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wallcross
