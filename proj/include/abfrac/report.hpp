#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace abfrac {

/// Machine-readable verdict of a numerical check.
///
/// `input_ok == false` marks a precondition violation on the inputs; that is
/// distinct from a failed check (`pass == false` with `input_ok == true`).
struct CheckReport {
  std::string check;
  bool pass = false;
  bool input_ok = true;
  double worst_margin = 0.0;  // signed; positive means the inequality was violated
  double worst_time = 0.0;
  double tol = 0.0;
  std::string detail;
};

nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const std::vector<CheckReport>& rs);

}  // namespace abfrac
