#pragma once

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "adaptk/baselines.hpp"
#include "adaptk/core.hpp"
#include "adaptk/fusion.hpp"
#include "adaptk/metrics.hpp"

namespace adaptk {

inline nlohmann::json to_json(const EvaluationReport& r, bool per_image = true) {
  nlohmann::json j;
  j["mf"] = r.mf;
  j["map"] = r.map;
  j["included"] = r.included();
  j["excluded_incomplete"] = r.excluded_incomplete;
  j["excluded_no_relevant"] = r.excluded_no_relevant;
  if (per_image) {
    auto& images = j["images"] = nlohmann::json::array();
    for (const auto& e : r.images)
      images.push_back({{"image", e.image},
                        {"precision", e.precision},
                        {"recall", e.recall},
                        {"f", e.f},
                        {"ap", e.ap}});
  }
  return j;
}

inline nlohmann::json to_json(const Comparison& c) {
  nlohmann::json j;
  j["shared_map"] = c.shared_map;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : c.rows) {
    nlohmann::json row = to_json(r.report, false);
    row["strategy"] = r.name;
    row["mean_selected"] = r.mean_selected;
    rows.push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json to_json(const FusionModel& m) {
  return {{"weights", m.weights},
          {"objective", std::string(to_string(m.objective))},
          {"history", m.history}};
}

inline nlohmann::json to_json(const ValidationReport& report) {
  auto j = nlohmann::json::array();
  for (const auto& v : report)
    j.push_back({{"kind", std::string(to_string(v.kind))},
                 {"image", v.image},
                 {"tag", v.tag},
                 {"message", v.message}});
  return j;
}

namespace detail {

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace detail

inline void print_table(std::ostream& out, const EvaluationReport& r) {
  out << "images  " << r.included() << " (excluded " << r.excluded() << ")\n"
      << "MF      " << detail::fixed(r.mf) << '\n'
      << "MAP     " << detail::fixed(r.map) << '\n';
}

inline void print_table(std::ostream& out, const Comparison& c) {
  std::size_t width = 8;
  for (const auto& r : c.rows) width = std::max(width, r.name.size());
  out << std::left << std::setw(static_cast<int>(width + 2)) << "method"
      << std::right << std::setw(10) << "MF" << std::setw(10) << "MAP"
      << std::setw(12) << "tags/img" << '\n';
  for (const auto& r : c.rows)
    out << std::left << std::setw(static_cast<int>(width + 2)) << r.name
        << std::right << std::setw(10) << detail::fixed(r.report.mf)
        << std::setw(10) << detail::fixed(r.report.map) << std::setw(12)
        << detail::fixed(r.mean_selected, 2) << '\n';
}

}  // namespace adaptk
