#pragma once

#include <stdexcept>
#include <string>

namespace floorlab {

// Every failure the library reports derives from Error; kind() is the
// machine-readable tag the CLI puts in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define FLOORLAB_ERROR_TYPE(Name, tag)                                  \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& message) : Error(tag, message) {} \
    }

FLOORLAB_ERROR_TYPE(SchemaError, "schema_error");
FLOORLAB_ERROR_TYPE(ConfigError, "config_error");
FLOORLAB_ERROR_TYPE(EmptyPanelError, "empty_panel");
FLOORLAB_ERROR_TYPE(QuantileError, "quantile_error");
FLOORLAB_ERROR_TYPE(ContractError, "contract_error");
FLOORLAB_ERROR_TYPE(UndefinedLiftError, "undefined_lift");
FLOORLAB_ERROR_TYPE(SupportError, "support_error");
FLOORLAB_ERROR_TYPE(OverlapError, "overlap_error");
FLOORLAB_ERROR_TYPE(DomainError, "domain_error");
FLOORLAB_ERROR_TYPE(DesignError, "design_error");
FLOORLAB_ERROR_TYPE(IoError, "io_error");

#undef FLOORLAB_ERROR_TYPE

}  // namespace floorlab
