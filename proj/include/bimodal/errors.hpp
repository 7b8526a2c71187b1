#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bimodal {

// Raised when a point stream does not contain enough linearly
// independent vectors, or elimination hits a negligible pivot.
class rank_error : public std::runtime_error {
public:
    rank_error(std::size_t achieved, std::size_t required)
        : std::runtime_error("insufficient rank: achieved " + std::to_string(achieved) +
                             " of required " + std::to_string(required)),
          achieved_(achieved), required_(required) {}

    std::size_t achieved_rank() const noexcept { return achieved_; }
    std::size_t required_rank() const noexcept { return required_; }

private:
    std::size_t achieved_;
    std::size_t required_;
};

// The recovered fingerprint column failed the norm gate: the dataset was
// not produced by this construction (or Q is damaged).
class corrupted_fingerprint_error : public std::runtime_error {
public:
    explicit corrupted_fingerprint_error(double norm_deviation)
        : std::runtime_error("corrupted fingerprint: extracted block norm deviates by " +
                             std::to_string(norm_deviation)),
          deviation_(norm_deviation) {}

    double deviation() const noexcept { return deviation_; }

private:
    double deviation_;
};

class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace bimodal
