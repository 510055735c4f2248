#pragma once

#include <stdexcept>
#include <string>

namespace shearspec {

struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

struct not_monotone_error : std::runtime_error {
    double x2;
    not_monotone_error(const std::string& what, double where)
        : std::runtime_error(what), x2(where) {}
};

struct not_smooth_error : std::runtime_error {
    explicit not_smooth_error(const std::string& what) : std::runtime_error(what) {}
};

struct out_of_range_error : std::runtime_error {
    explicit out_of_range_error(const std::string& what) : std::runtime_error(what) {}
};

struct step_underflow_error : std::runtime_error {
    explicit step_underflow_error(const std::string& what) : std::runtime_error(what) {}
};

struct y0_vanishes_error : std::runtime_error {
    explicit y0_vanishes_error(const std::string& what) : std::runtime_error(what) {}
};

struct at_u0_error : std::runtime_error {
    explicit at_u0_error(const std::string& what) : std::runtime_error(what) {}
};

struct not_inflection_error : std::runtime_error {
    explicit not_inflection_error(const std::string& what) : std::runtime_error(what) {}
};

struct contour_through_zero_error : std::runtime_error {
    explicit contour_through_zero_error(const std::string& what) : std::runtime_error(what) {}
};

struct seed_diverged_error : std::runtime_error {
    explicit seed_diverged_error(const std::string& what) : std::runtime_error(what) {}
};

struct lost_root_error : std::runtime_error {
    explicit lost_root_error(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_root_error : std::runtime_error {
    explicit degenerate_root_error(const std::string& what) : std::runtime_error(what) {}
};

struct precondition_error : std::runtime_error {
    explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shearspec
