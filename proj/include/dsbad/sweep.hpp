#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsbad/pipeline.hpp"

namespace dsbad {

struct StreamInput {
    std::string name;
    std::vector<FrameRecord> frames;
    OracleLabels oracle;
};

struct SweepGrid {
    std::vector<std::size_t> gammas{1, 2, 4, 8, 12};
    std::vector<std::size_t> budgets{32, 64, 128, 256};
    std::vector<Strategy> strategies{Strategy::FarthestFirst};
    // Random is run once per seed; deterministic strategies once with seeds.front().
    std::vector<std::uint64_t> seeds{0};
};

struct SweepOptions {
    GateConfig gate;
    DensityMetric density_metric = DensityMetric::Inner;
    double area_epsilon = 1e-6;
    std::size_t jobs = 1;
};

enum class CellStatus { Ok, Partial, Infeasible };
std::string_view to_string(CellStatus s) noexcept;

struct SweepRow {
    std::string stream;
    std::size_t gamma = 0;
    std::size_t budget = 0;
    Strategy strategy = Strategy::FarthestFirst;
    std::optional<std::uint64_t> seed;
    CellStatus status = CellStatus::Ok;
    std::optional<RoundReport> report;
    std::string note;
};

/// One single-round cell per (stream, gamma, B, strategy[, seed]), each against its own
/// in-process annotation server. Rows come back in a fixed key order regardless of `jobs`.
std::vector<SweepRow> run_sweep(const std::vector<StreamInput>& streams, const SweepGrid& grid,
                                const SweepOptions& options);

/// One line per row; doubles printed with round-trip precision.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Per-(gamma, B, strategy) means across streams of the completed cells.
nlohmann::json sweep_summary(const std::vector<SweepRow>& rows);

}  // namespace dsbad
