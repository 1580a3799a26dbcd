#include "dsbad/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace dsbad {

namespace {

struct Cell {
    std::size_t stream = 0;
    std::size_t gamma = 0;
    std::size_t budget = 0;
    Strategy strategy = Strategy::FarthestFirst;
    std::optional<std::uint64_t> seed;
};

SweepRow run_cell(const StreamInput& input, const Cell& cell, const SweepOptions& options) {
    SweepRow row;
    row.stream = input.name;
    row.gamma = cell.gamma;
    row.budget = cell.budget;
    row.strategy = cell.strategy;
    row.seed = cell.seed;

    RoundConfig cfg;
    cfg.budget = cell.budget;
    cfg.gamma = cell.gamma;
    cfg.gate = options.gate;
    cfg.filter.strategy = cell.strategy;
    cfg.filter.budget = cell.budget;
    cfg.filter.density_metric = options.density_metric;
    cfg.filter.area_epsilon = options.area_epsilon;
    cfg.filter.seed = cell.seed;
    try {
        row.report = run_round(input.frames, cfg, input.oracle);
        row.status = row.report->partial ? CellStatus::Partial : CellStatus::Ok;
        if (row.report->partial) {
            row.note = "buffer reached " + std::to_string(row.report->candidate_count) + " of " +
                       std::to_string(cfg.target_candidates());
        }
    } catch (const StreamExhausted& e) {
        row.status = CellStatus::Infeasible;
        row.note = e.what();
    }
    return row;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(CellStatus s) noexcept {
    switch (s) {
        case CellStatus::Ok: return "ok";
        case CellStatus::Partial: return "partial";
        case CellStatus::Infeasible: return "infeasible";
    }
    return "?";
}

std::vector<SweepRow> run_sweep(const std::vector<StreamInput>& streams, const SweepGrid& grid,
                                const SweepOptions& options) {
    options.gate.validate();
    if (grid.seeds.empty()) {
        throw Error("sweep grid needs at least one seed");
    }
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        for (auto gamma : grid.gammas) {
            for (auto budget : grid.budgets) {
                for (auto strategy : grid.strategies) {
                    if (strategy == Strategy::Random) {
                        for (auto seed : grid.seeds) {
                            cells.push_back({s, gamma, budget, strategy, seed});
                        }
                    } else {
                        cells.push_back({s, gamma, budget, strategy, std::nullopt});
                    }
                }
            }
        }
    }

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            rows[i] = run_cell(streams[cells[i].stream], cells[i], options);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, cells.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "stream,gamma,budget,strategy,seed,status,frames_observed,frames_gated_in,candidate_count,"
           "selected_count,bytes_sent,gate_threshold,min_pairwise_cos_distance,mean_pairwise_cos_similarity\n";
    for (const auto& r : rows) {
        out << r.stream << ',' << r.gamma << ',' << r.budget << ',' << to_string(r.strategy) << ',';
        if (r.seed) out << *r.seed;
        out << ',' << to_string(r.status);
        if (r.report) {
            const auto& rep = *r.report;
            out << ',' << rep.frames_observed << ',' << rep.frames_gated_in << ',' << rep.candidate_count << ','
                << rep.selected_count << ',' << rep.bytes_sent << ',' << fmt_double(rep.gate_threshold) << ',';
            if (rep.diversity) {
                out << fmt_double(rep.diversity->min_pairwise_cos_distance) << ','
                    << fmt_double(rep.diversity->mean_pairwise_cos_similarity);
            } else {
                out << ',';
            }
        } else {
            out << ",,,,,,,,";
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json sweep_summary(const std::vector<SweepRow>& rows) {
    struct Acc {
        std::size_t cells = 0;
        std::size_t completed = 0;
        std::size_t with_diversity = 0;
        double candidate_count = 0;
        double selected_count = 0;
        double bytes_sent = 0;
        double min_dist = 0;
        double mean_sim = 0;
    };
    std::map<std::tuple<std::size_t, std::size_t, std::string>, Acc> groups;
    for (const auto& r : rows) {
        auto& a = groups[{r.gamma, r.budget, std::string(to_string(r.strategy))}];
        ++a.cells;
        if (!r.report) continue;
        ++a.completed;
        a.candidate_count += static_cast<double>(r.report->candidate_count);
        a.selected_count += static_cast<double>(r.report->selected_count);
        a.bytes_sent += static_cast<double>(r.report->bytes_sent);
        if (r.report->diversity) {
            ++a.with_diversity;
            a.min_dist += r.report->diversity->min_pairwise_cos_distance;
            a.mean_sim += r.report->diversity->mean_pairwise_cos_similarity;
        }
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, a] : groups) {
        const auto& [gamma, budget, strategy] = key;
        nlohmann::json j{{"gamma", gamma}, {"budget", budget}, {"strategy", strategy},
                         {"cells", a.cells}, {"completed", a.completed}};
        if (a.completed > 0) {
            const auto n = static_cast<double>(a.completed);
            j["mean_candidate_count"] = a.candidate_count / n;
            j["mean_selected_count"] = a.selected_count / n;
            j["mean_bytes_sent"] = a.bytes_sent / n;
        }
        if (a.with_diversity > 0) {
            const auto n = static_cast<double>(a.with_diversity);
            j["mean_min_pairwise_cos_distance"] = a.min_dist / n;
            j["mean_mean_pairwise_cos_similarity"] = a.mean_sim / n;
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace dsbad
