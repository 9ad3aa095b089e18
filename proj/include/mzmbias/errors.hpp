#pragma once

#include <stdexcept>
#include <string>

namespace mzmbias {

/// Argument outside the mathematical domain of an operation (log of a
/// nonpositive power, zero probe step, time outside a scenario window).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A configuration value violates its documented invariant. `field` names the
/// offending entry using the dotted scenario-file path when one is known.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, std::string message)
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)),
          message_(std::move(message)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

/// Validate `cfg` and re-throw any ConfigError with `section.` prepended to
/// its field path.
template <typename Config>
void validate_section(const Config& cfg, const std::string& section) {
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(e.field().empty() ? section : section + "." + e.field(), e.message());
    }
}

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mzmbias
