#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mim {

enum class ErrorCode {
  invalid_mode_number,
  invalid_argument,
  degenerate_equation,
  window_too_narrow,
  out_of_validity_range,
  wrong_regime,
  divergent_coupling,
  antitrapping_configuration,
  divergent_integral,
  integration_failure,
  degenerate_parameters,
  unstable_system,
  step_size,
  statistics,
  fit,
  design_infeasible,
  placement,
  unstable_design,
  config,
};

std::string_view to_string(ErrorCode code);

// Configuration problems map to CLI exit code 2, everything else to 3.
constexpr bool is_config_error(ErrorCode code) {
  return code == ErrorCode::config || code == ErrorCode::invalid_argument ||
         code == ErrorCode::invalid_mode_number;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mim
