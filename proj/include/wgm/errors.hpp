#ifndef WGM_ERRORS_HPP
#define WGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wgm
{

// Invalid argument / precondition violation. CLI maps this to exit code 2.
class ArgumentError : public std::runtime_error
{
public:
    explicit ArgumentError(const std::string &msg) : std::runtime_error(msg) {}
};

// Result left the representable range (overflow/underflow of a special function).
class RangeError : public std::runtime_error
{
public:
    explicit RangeError(const std::string &msg) : std::runtime_error(msg) {}
};

// No sign change across a requested root bracket.
class BracketError : public std::runtime_error
{
public:
    explicit BracketError(const std::string &msg) : std::runtime_error(msg) {}
};

// Iteration cap exceeded. Carries the best estimate so far. CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error
{
public:
    ConvergenceError(const std::string &msg, double best_estimate)
        : std::runtime_error(msg), best_estimate_(best_estimate)
    {
    }
    double best_estimate() const { return best_estimate_; }

private:
    double best_estimate_;
};

// Two peak labelings fit the measured spectrum almost equally well.
class AmbiguityError : public std::runtime_error
{
public:
    explicit AmbiguityError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace wgm

#endif
