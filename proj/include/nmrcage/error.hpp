#pragma once

#include <stdexcept>
#include <string>

namespace nmrcage {

/// Thrown when an argument violates a documented precondition or type invariant.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

inline void require(bool condition, const char* message)
{
    if (!condition) {
        throw DomainError(message);
    }
}

} // namespace nmrcage
