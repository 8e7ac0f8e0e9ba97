#include "qecool/hardware.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qecool {

const std::vector<CellSpec>& default_cell_library() {
    static const std::vector<CellSpec> cells = {
        {"splitter", 3, 0.300, 900.0, 4.3},
        {"merger", 7, 0.880, 900.0, 8.2},
        {"1:2_switch", 33, 3.464, 8100.0, 10.5},
        {"dro", 6, 0.720, 900.0, 5.1},
        {"ndro", 11, 1.112, 1800.0, 6.4},
        {"rd", 11, 0.900, 1800.0, 6.0},
        {"d2", 12, 0.944, 1800.0, 6.8},
    };
    return cells;
}

std::vector<CellSpec> load_cell_library(std::istream& in) {
    std::vector<CellSpec> cells;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        CellSpec cell;
        if (!(row >> cell.name)) continue;  // blank line
        if (!(row >> cell.jj_count >> cell.bias_current_ma >> cell.area_um2 >> cell.latency_ps))
            throw std::runtime_error("cell library line " + std::to_string(line_no) +
                                     ": expected 'name jjs bias_mA area_um2 latency_ps'");
        if (cell.jj_count <= 0 || cell.bias_current_ma <= 0 || cell.area_um2 <= 0 ||
            cell.latency_ps <= 0)
            throw std::runtime_error("cell library line " + std::to_string(line_no) +
                                     ": all quantities must be positive");
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<CellSpec> load_cell_library_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cell library: " + path);
    return load_cell_library(in);
}

UnitBudget aggregate_bom(std::span<const std::pair<std::string, int>> counts,
                         std::span<const CellSpec> library,
                         std::optional<double> critical_path_ps) {
    UnitBudget budget;
    for (const auto& [name, count] : counts) {
        if (count < 0) throw std::invalid_argument("negative cell count for " + name);
        const CellSpec* cell = nullptr;
        for (const auto& c : library)
            if (c.name == name) {
                cell = &c;
                break;
            }
        if (!cell) throw std::invalid_argument("unknown cell name: " + name);
        budget.total_jjs += int64_t(cell->jj_count) * count;
        budget.total_bias_ma += cell->bias_current_ma * count;
        budget.total_area_mm2 += cell->area_um2 * 1e-6 * count;
        if (count > 0) budget.critical_path_ps = std::max(budget.critical_path_ps, cell->latency_ps);
    }
    if (critical_path_ps) budget.critical_path_ps = *critical_path_ps;
    return budget;
}

UnitBudget published_unit_budget() {
    return UnitBudget{3177, 336.0, 1.274, 215.0};
}

double rsfq_power_w(const UnitBudget& budget, const PowerParams& params) {
    return budget.total_bias_ma * 1e-3 * params.supply_mv * 1e-3;
}

double ersfq_power_w(const UnitBudget& budget, const PowerParams& params) {
    if (params.freq_hz <= 0.0) throw std::invalid_argument("frequency must be positive");
    return budget.total_bias_ma * 1e-3 * params.freq_hz * params.flux_quantum_wb * 2.0;
}

double max_frequency_hz(const UnitBudget& budget) {
    if (budget.critical_path_ps <= 0.0)
        throw std::invalid_argument("critical path must be positive");
    return 1.0 / (budget.critical_path_ps * 1e-12);
}

int64_t protectable_qubits_for_units(int64_t units_per_logical, double p_unit_w,
                                     double budget_w) {
    if (units_per_logical <= 0) throw std::invalid_argument("unit count must be positive");
    if (p_unit_w <= 0.0) throw std::invalid_argument("per-unit power must be positive");
    if (budget_w < 0.0) throw std::invalid_argument("power budget must be non-negative");
    return int64_t(std::floor(budget_w / (double(units_per_logical) * p_unit_w)));
}

int64_t protectable_qubits(int d, double p_unit_w, double budget_w) {
    if (d < 3) throw std::invalid_argument("code distance must be >= 3");
    return protectable_qubits_for_units(int64_t(2) * d * (d - 1), p_unit_w, budget_w);
}

}  // namespace qecool
