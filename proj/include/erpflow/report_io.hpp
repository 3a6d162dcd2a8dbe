#pragma once

// EvalReport serialization: JSON mirroring the field names, and an aligned
// Equator/Poles/All text table.

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <string>

#include "erpflow/metrics.hpp"

namespace erpflow {

inline std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["epe_all"] = r.epe_all;
  j["sepe_all"] = r.sepe_all;
  j["epe_poles"] = r.epe_poles;
  j["sepe_poles"] = r.sepe_poles;
  j["epe_equator"] = r.epe_equator;
  j["sepe_equator"] = r.sepe_equator;
  j["n_poles"] = r.n_poles;
  j["n_equator"] = r.n_equator;
  return j.dump(2) + "\n";
}

inline EvalReport report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  EvalReport r;
  r.epe_all = j.at("epe_all").get<double>();
  r.sepe_all = j.at("sepe_all").get<double>();
  r.epe_poles = j.at("epe_poles").get<double>();
  r.sepe_poles = j.at("sepe_poles").get<double>();
  r.epe_equator = j.at("epe_equator").get<double>();
  r.sepe_equator = j.at("sepe_equator").get<double>();
  r.n_poles = j.at("n_poles").get<std::int64_t>();
  r.n_equator = j.at("n_equator").get<std::int64_t>();
  return r;
}

inline std::string report_to_table(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::setw(10) << "" << std::setw(12) << "Equator" << std::setw(12) << "Poles"
      << std::setw(12) << "All" << "\n";
  out << std::setw(10) << "EPE" << std::setw(12) << r.epe_equator << std::setw(12) << r.epe_poles
      << std::setw(12) << r.epe_all << "\n";
  out << std::setw(10) << "SEPE" << std::setw(12) << r.sepe_equator << std::setw(12)
      << r.sepe_poles << std::setw(12) << r.sepe_all << "\n";
  return out.str();
}

}  // namespace erpflow
