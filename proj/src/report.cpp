#include "abfrac/report.hpp"

namespace abfrac {

nlohmann::json to_json(const CheckReport& r) {
  return nlohmann::json{{"check", r.check},
                        {"pass", r.pass},
                        {"input_ok", r.input_ok},
                        {"worst_margin", r.worst_margin},
                        {"worst_time", r.worst_time},
                        {"tol", r.tol},
                        {"detail", r.detail}};
}

nlohmann::json to_json(const std::vector<CheckReport>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back(to_json(r));
  return arr;
}

}  // namespace abfrac
