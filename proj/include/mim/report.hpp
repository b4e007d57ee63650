#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mim/bichromatic.hpp"
#include "mim/coupling.hpp"
#include "mim/dynamics.hpp"
#include "mim/langevin.hpp"
#include "mim/thermometry.hpp"

namespace mim {

// Shortest decimal that round-trips, so repeated runs are byte-identical.
std::string format_number(double v);

class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;

  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(std::initializer_list<Cell> cells);
  long rows() const { return rows_; }

 private:
  std::ostream& out_;
  std::size_t width_;
  long rows_ = 0;
};

nlohmann::json to_json(const CouplingConstants& c);
nlohmann::json to_json(const SteadyState& s);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const TrapFrequencyReport& r);
nlohmann::json to_json(const ThermalSummary& s);
nlohmann::json to_json(const BichromaticDesign& d);
nlohmann::json to_json(const HybridPerformance& p);
nlohmann::json to_json(const DampingComparison& c);
nlohmann::json to_json(const LorentzianFit& f);

}  // namespace mim
