#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqforce {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: non-finite entries, wrong shapes, broken invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A requested size exceeds the configured truncation or horizon.
class SizeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// A chain link failed its order check.
class OrderError : public Error {
public:
    OrderError(const std::string& what, std::size_t link) : Error(what), link_(link) {}
    std::size_t link() const noexcept { return link_; }

private:
    std::size_t link_;
};

/// Amalgamation hypotheses are not met.
class IncompatiblePresentation : public Error {
public:
    IncompatiblePresentation(const std::string& clause, const std::string& detail)
        : Error(clause + ": " + detail), clause_(clause) {}
    const std::string& clause() const noexcept { return clause_; }

private:
    std::string clause_;
};

/// No admissible slack left for the named constraint.
class SlackExhausted : public Error {
public:
    SlackExhausted(const std::string& constraint, const std::string& detail)
        : Error("slack exhausted (" + constraint + "): " + detail), constraint_(constraint), detail_(detail) {}
    const std::string& constraint() const noexcept { return constraint_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string constraint_;
    std::string detail_;
};

class UnsupportedPresentation : public Error {
public:
    using Error::Error;
};

class PerturbationTooLarge : public Error {
public:
    PerturbationTooLarge(double distance, double bound)
        : Error("projection distance " + std::to_string(distance) +
                " exceeds admissibility bound " + std::to_string(bound)),
          distance_(distance), bound_(bound) {}
    double distance() const noexcept { return distance_; }
    double bound() const noexcept { return bound_; }

private:
    double distance_;
    double bound_;
};

struct Violation {
    std::string clause;
    std::string detail;
};

/// Outcome of a checker: holds iff no violation was recorded.
struct CheckReport {
    std::vector<Violation> violations;

    bool holds() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return holds(); }

    void fail(std::string clause, std::string detail) {
        violations.push_back({std::move(clause), std::move(detail)});
    }
    bool has(const std::string& clause) const {
        for (const auto& v : violations)
            if (v.clause == clause) return true;
        return false;
    }
    void merge(const CheckReport& other, const std::string& prefix = {}) {
        for (const auto& v : other.violations) violations.push_back({prefix + v.clause, v.detail});
    }
};

/// Numerical slack used when a strict inequality is evaluated in floating point.
struct Tolerances {
    double margin = 9.313225746154785e-10;  // 2^-30
    double inclusion = 1e-9;
};

inline bool strictly_below(double value, double bound, double margin) {
    return value <= bound - margin;
}

}  // namespace cqforce
