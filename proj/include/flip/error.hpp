#ifndef FLIP_ERROR_HPP
#define FLIP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace flip {

enum class errc {
    invalid_argument,
    not_a_saddle,
    no_convergence,
    converged_to_origin,
    no_sign_change,
    q_not_found,
    odd_crossing_count,
    step_size_underflow,
    divergence,
    no_return,
    newton_diverged,
    section_not_transverse,
    insufficient_returns,
    constant_sequence,
    complex_multipliers,
    eigenstructure_missing,
    orbit_missing,
    never_near_orbit,
    no_close_approach,
    not_on_homoclinic_locus,
    truncation_too_short,
    no_bracket,
    detector_failure,
    empty_trace,
    step_floor_reached,
    io_error,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace flip

#endif
