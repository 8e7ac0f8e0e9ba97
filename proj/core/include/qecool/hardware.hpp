/*
 * Analytical SFQ cost model: cell bill-of-materials aggregation, RSFQ static
 * power, ERSFQ dynamic power, maximum clock from the critical path, and the
 * protectable-logical-qubit capacity under a refrigerator power budget.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qecool {

struct CellSpec {
    std::string name;
    int jj_count = 0;
    double bias_current_ma = 0.0;
    double area_um2 = 0.0;
    double latency_ps = 0.0;
};

struct UnitBudget {
    int64_t total_jjs = 0;
    double total_bias_ma = 0.0;
    double total_area_mm2 = 0.0;
    double critical_path_ps = 0.0;
};

struct PowerParams {
    double supply_mv = 2.5;
    double freq_hz = 2e9;
    double flux_quantum_wb = 2.068e-15;
    double budget_w = 1.0;
};

// The seven library cells: splitter, merger, 1:2 switch, DRO, NDRO, RD, D2.
const std::vector<CellSpec>& default_cell_library();

// Plain-text table, one cell per row: name jjs bias_mA area_um2 latency_ps.
// '#' starts a comment. Throws std::runtime_error on malformed rows.
std::vector<CellSpec> load_cell_library(std::istream& in);
std::vector<CellSpec> load_cell_library_file(const std::string& path);

// Component-wise weighted sums over the BOM. The critical path is taken from
// `critical_path_ps` when given, otherwise as the max latency over the listed
// cells. Unknown cell names throw std::invalid_argument.
UnitBudget aggregate_bom(std::span<const std::pair<std::string, int>> counts,
                         std::span<const CellSpec> library,
                         std::optional<double> critical_path_ps = {});

// Published totals of the designed decoder unit with a 7-bit Reg.
UnitBudget published_unit_budget();

// Static power: bias current times supply voltage.
double rsfq_power_w(const UnitBudget& budget, const PowerParams& params);

// Dynamic power: bias current x frequency x flux quantum x 2.
double ersfq_power_w(const UnitBudget& budget, const PowerParams& params);

// 1 / critical path.
double max_frequency_hz(const UnitBudget& budget);

// floor(budget / (units_per_logical * p_unit)). Zero or negative per-unit
// power or unit count throws std::invalid_argument.
int64_t protectable_qubits_for_units(int64_t units_per_logical, double p_unit_w,
                                     double budget_w);

// Grid decoder capacity: 2 d (d-1) units per logical qubit (both sectors).
int64_t protectable_qubits(int d, double p_unit_w, double budget_w);

}  // namespace qecool
