#pragma once

#include <stdexcept>
#include <string>

namespace orsep {

enum class Errc {
  syntax_error,
  torsion_required,
  empty_relator,
  rc_not_zero,
  rc_zero,
  search_exhausted,
  budget_exceeded,
  subgroup_too_large,
  alpha_inconsistent,
  incompatible_quotients,
  not_in_subgroup,
  immediate_failure,
  invalid_argument,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace orsep
