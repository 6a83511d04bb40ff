#pragma once

#include <stdexcept>
#include <string>

namespace pfl {

enum class Errc {
    division_by_zero,
    incompatible_radicands,
    indeterminate_form,
    negative_radicand,
    pole_at_point,
    out_of_domain,
    identity_map,
    negative_discriminant,
    degenerate_interval,
    pole_inside_domain,
    invalid_base,
    orbit_escaped,
    parameter_out_of_range,
    validation_failed,
    unsupported,
    parse_error,
    config_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::division_by_zero: return "division_by_zero";
        case Errc::incompatible_radicands: return "incompatible_radicands";
        case Errc::indeterminate_form: return "indeterminate_form";
        case Errc::negative_radicand: return "negative_radicand";
        case Errc::pole_at_point: return "pole_at_point";
        case Errc::out_of_domain: return "out_of_domain";
        case Errc::identity_map: return "identity_map";
        case Errc::negative_discriminant: return "negative_discriminant";
        case Errc::degenerate_interval: return "degenerate_interval";
        case Errc::pole_inside_domain: return "pole_inside_domain";
        case Errc::invalid_base: return "invalid_base";
        case Errc::orbit_escaped: return "orbit_escaped";
        case Errc::parameter_out_of_range: return "parameter_out_of_range";
        case Errc::validation_failed: return "validation_failed";
        case Errc::unsupported: return "unsupported";
        case Errc::parse_error: return "parse_error";
        case Errc::config_error: return "config_error";
    }
    return "unknown";
}

} // namespace pfl
