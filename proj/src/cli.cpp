#include "dsbad/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "dsbad/config.hpp"
#include "dsbad/fixtures.hpp"
#include "dsbad/pipeline.hpp"
#include "dsbad/stream_io.hpp"
#include "dsbad/sweep.hpp"
#include "dsbad/transport.hpp"

namespace dsbad {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_stop_signal(int) {
    g_stop = true;
}

// Flags shared by `run` and `sweep` that override config values.
struct EngineFlags {
    std::optional<std::string> config_file;
    std::optional<double> alpha;
    std::optional<std::size_t> warmup;
    std::optional<std::string> rewarm;
    std::optional<std::string> density_metric;
    std::optional<double> area_epsilon;
    std::optional<std::uint64_t> seed;
    bool print_config = false;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "Config file (JSON or key = value lines)");
        app.add_option("--alpha", alpha, "Gate quantile level alpha (threshold = 1-alpha quantile)");
        app.add_option("--warmup", warmup, "Gate warm-up size w");
        app.add_option("--rewarm", rewarm, "Gate warm-up policy: per-round | once");
        app.add_option("--density-metric", density_metric, "FF density metric: inner | cosine");
        app.add_option("--area-epsilon", area_epsilon, "TFDP minimum box area");
        app.add_option("--seed", seed, "Seed for all randomness in this invocation");
        app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
    }

    void apply(EngineConfig& cfg) const {
        if (config_file) apply_config_file(cfg, *config_file);
        if (alpha) cfg.round.gate.alpha = *alpha;
        if (warmup) cfg.round.gate.warmup = *warmup;
        if (rewarm) cfg.round.rewarm = parse_gate_rewarm(*rewarm);
        if (density_metric) cfg.round.filter.density_metric = parse_density_metric(*density_metric);
        if (area_epsilon) cfg.round.filter.area_epsilon = *area_epsilon;
        if (seed) cfg.seed = *seed;
    }
};

void print_report(std::ostream& out, const RoundReport& r) {
    out << "round " << r.round_id << ": observed=" << r.frames_observed << " warmup=" << r.warmup_frames
        << " gated_in=" << r.frames_gated_in << " candidates=" << r.candidate_count
        << " selected=" << r.selected_count << " bytes_sent=" << r.bytes_sent << " tau=" << r.gate_threshold;
    if (r.diversity) {
        out << " min_cos_dist=" << r.diversity->min_pairwise_cos_distance
            << " mean_cos_sim=" << r.diversity->mean_pairwise_cos_similarity;
    }
    if (r.partial) out << " (partial)";
    out << '\n';
}

OracleLabels load_oracle(const std::optional<std::string>& path, std::span<const FrameRecord> stream) {
    if (!path) return {};
    auto oracle = read_oracle(std::filesystem::path(*path));
    check_oracle_against_stream(oracle, stream);
    return oracle;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dsbad: stream-based active distillation frame selection engine", "dsbad"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run gated collection, filtering and annotation rounds on one stream");
    EngineFlags run_flags;
    run_flags.attach(*run);
    std::string run_stream;
    std::optional<std::string> run_oracle;
    std::optional<std::size_t> run_gamma, run_budget, run_rounds;
    std::optional<std::string> run_strategy, run_connect, run_out;
    bool run_timing = false;
    run->add_option("stream", run_stream, "Frame-record NDJSON file")->required();
    run->add_option("oracle", run_oracle, "Oracle-label NDJSON file (teacher labels)");
    run->add_option("--gamma", run_gamma, "Exploration multiplier: |S| = gamma * B");
    run->add_option("--budget", run_budget, "Frame budget B per round");
    run->add_option("--strategy", run_strategy, "ff | tfdp | moderate | least-confidence | random");
    run->add_option("--rounds", run_rounds, "Number of rounds");
    run->add_option("--connect", run_connect, "host:port of a running `dsbad serve` (default: in-process)");
    run->add_option("--out", run_out, "Directory for round_<id>.json and labeled_<id>.ndjson");
    run->add_flag("--timing", run_timing, "Record wall_time_ms in round reports");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the gamma x B x strategy grid over several streams");
    EngineFlags sweep_flags;
    sweep_flags.attach(*sweep);
    std::vector<std::string> sweep_streams, sweep_oracles;
    std::vector<std::size_t> sweep_gammas{1, 2, 4, 8, 12}, sweep_budgets{32, 64, 128, 256};
    std::vector<std::string> sweep_strategies{"ff"};
    std::size_t sweep_repeats = 1;
    std::optional<std::size_t> sweep_jobs;
    std::string sweep_out = "sweep_out";
    sweep->add_option("streams", sweep_streams, "Frame-record NDJSON files")->required();
    sweep->add_option("--oracle", sweep_oracles, "Oracle files, paired with streams by position");
    sweep->add_option("--gamma", sweep_gammas, "Gamma values")->capture_default_str();
    sweep->add_option("--budget", sweep_budgets, "Budget values")->capture_default_str();
    sweep->add_option("--strategy", sweep_strategies, "Strategies")->capture_default_str();
    sweep->add_option("--repeats", sweep_repeats, "Random-strategy repeats (seeds seed..seed+repeats-1)")
        ->capture_default_str();
    sweep->add_option("--jobs", sweep_jobs, "Worker threads");
    sweep->add_option("--out", sweep_out, "Output directory for sweep.csv and sweep_summary.json")
        ->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the annotation server over TCP");
    std::string serve_listen = "127.0.0.1:7070";
    std::optional<std::string> serve_oracle;
    serve->add_option("--listen", serve_listen, "IPv4 host:port to listen on")->capture_default_str();
    serve->add_option("--oracle", serve_oracle, "Oracle-label NDJSON file");

    // gen-fixtures
    auto* gen = app.add_subcommand("gen-fixtures", "Write seeded synthetic streams and oracle files");
    FixtureSpec fx;
    std::string gen_out = "fixtures";
    gen->add_option("--streams", fx.streams, "Number of streams")->capture_default_str();
    gen->add_option("--frames", fx.frames, "Frames per stream")->capture_default_str();
    gen->add_option("--dim", fx.dim, "Embedding dimension d")->capture_default_str();
    gen->add_option("--clusters", fx.clusters, "Scene clusters per stream")->capture_default_str();
    gen->add_option("--seed", fx.seed, "Generator seed")->capture_default_str();
    gen->add_option("--switch-prob", fx.switch_prob, "Per-frame scene switch probability")->capture_default_str();
    gen->add_option("--image-bytes", fx.image_bytes, "Declared image payload size")->capture_default_str();
    gen->add_option("--image-bytes-jitter", fx.image_bytes_jitter, "Relative payload size jitter")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "Check a frame-record file against all ingestion rules");
    std::string validate_stream;
    std::optional<std::string> validate_oracle;
    validate->add_option("stream", validate_stream, "Frame-record NDJSON file")->required();
    validate->add_option("--oracle", validate_oracle, "Also check an oracle file against the stream");

    std::vector<const char*> argv{"dsbad"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*run) {
            EngineConfig cfg;
            run_flags.apply(cfg);
            if (run_gamma) cfg.round.gamma = *run_gamma;
            if (run_budget) cfg.set("round.budget", std::to_string(*run_budget));
            if (run_strategy) cfg.round.filter.strategy = parse_strategy(*run_strategy);
            if (run_rounds) cfg.round.rounds = *run_rounds;
            cfg.round.filter.seed = cfg.seed;
            cfg.round.validate();
            if (run_flags.print_config) {
                out << cfg.to_json().dump(2) << '\n';
                return kExitOk;
            }

            const auto stream = read_stream(std::filesystem::path(run_stream));
            const auto oracle = load_oracle(run_oracle, stream);
            std::unique_ptr<ByteStream> transport;
            if (run_connect) {
                transport = std::make_unique<TcpStream>(TcpStream::connect(*run_connect));
            } else {
                transport = std::make_unique<LoopbackStream>(oracle);
            }
            AnnotationClient client(*transport);
            client.hello();

            RoundRunner::Options opts;
            opts.record_timing = run_timing;
            if (run_out) {
                std::filesystem::create_directories(*run_out);
                opts.output_dir = *run_out;
            }
            RoundRunner runner(cfg.round, client, opts);
            std::size_t cursor = 0;
            bool partial = false;
            for (std::size_t r = 0; r < cfg.round.rounds; ++r) {
                const auto report = runner.run_round(stream, cursor);
                print_report(out, report);
                if (report.partial) {
                    err << "warning: round " << report.round_id << " ended with |S|=" << report.candidate_count
                        << " < gamma*B=" << cfg.round.target_candidates() << "\n";
                    partial = true;
                }
            }
            out << "total: frames_sent=" << client.ledger().total_frames_sent()
                << " bytes_sent=" << client.ledger().total_bytes_sent() << '\n';
            return partial ? kExitPartial : kExitOk;
        }

        if (*sweep) {
            EngineConfig cfg;
            sweep_flags.apply(cfg);
            if (sweep_jobs) cfg.jobs = *sweep_jobs;
            if (sweep_flags.print_config) {
                auto j = cfg.to_json();
                j["sweep.gamma"] = sweep_gammas;
                j["sweep.budget"] = sweep_budgets;
                j["sweep.strategy"] = sweep_strategies;
                j["sweep.repeats"] = sweep_repeats;
                out << j.dump(2) << '\n';
                return kExitOk;
            }
            if (!sweep_oracles.empty() && sweep_oracles.size() != sweep_streams.size()) {
                throw Error("--oracle must be given once per stream");
            }
            SweepGrid grid;
            grid.gammas = sweep_gammas;
            grid.budgets = sweep_budgets;
            grid.strategies.clear();
            for (const auto& s : sweep_strategies) grid.strategies.push_back(parse_strategy(s));
            grid.seeds.clear();
            for (std::size_t k = 0; k < std::max<std::size_t>(1, sweep_repeats); ++k) grid.seeds.push_back(cfg.seed + k);

            std::vector<StreamInput> inputs;
            for (std::size_t i = 0; i < sweep_streams.size(); ++i) {
                const std::filesystem::path p(sweep_streams[i]);
                StreamInput in{p.stem().string(), read_stream(p), {}};
                if (!sweep_oracles.empty()) in.oracle = load_oracle(sweep_oracles[i], in.frames);
                inputs.push_back(std::move(in));
            }
            SweepOptions opts{cfg.round.gate, cfg.round.filter.density_metric, cfg.round.filter.area_epsilon,
                              cfg.jobs};
            const auto rows = run_sweep(inputs, grid, opts);
            std::filesystem::create_directories(sweep_out);
            write_text(std::filesystem::path(sweep_out) / "sweep.csv", sweep_csv(rows));
            write_text(std::filesystem::path(sweep_out) / "sweep_summary.json", sweep_summary(rows).dump(2) + "\n");
            std::size_t infeasible = 0;
            for (const auto& r : rows) {
                if (r.status == CellStatus::Infeasible) {
                    ++infeasible;
                    err << "infeasible cell: " << r.stream << " gamma=" << r.gamma << " B=" << r.budget << " "
                        << to_string(r.strategy) << ": " << r.note << '\n';
                }
            }
            out << rows.size() << " cells (" << infeasible << " infeasible) -> " << sweep_out << "/sweep.csv\n";
            return kExitOk;
        }

        if (*serve) {
            OracleLabels oracle;
            if (serve_oracle) oracle = read_oracle(std::filesystem::path(*serve_oracle));
            TcpServer server(oracle);
            const auto port = server.start(serve_listen);
            out << "listening on port " << port << " (" << oracle.size() << " oracle frames)" << std::endl;
            g_stop = false;
            std::signal(SIGINT, on_stop_signal);
            std::signal(SIGTERM, on_stop_signal);
            while (!g_stop) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
            server.stop();
            out << "served " << server.sessions_served() << " sessions\n";
            return kExitOk;
        }

        if (*gen) {
            const auto paths = write_fixtures(fx, gen_out);
            out << "wrote " << paths.size() << " streams to " << gen_out << '\n';
            return kExitOk;
        }

        if (*validate) {
            try {
                const auto stream = read_stream(std::filesystem::path(validate_stream));
                if (validate_oracle) {
                    check_oracle_against_stream(read_oracle(std::filesystem::path(*validate_oracle)), stream);
                }
                out << validate_stream << ": ok (" << stream.size() << " frames";
                if (!stream.empty()) out << ", d=" << stream.front().embedding.dim();
                out << ")\n";
                return kExitOk;
            } catch (const Error& e) {
                err << validate_stream << ": " << e.what() << '\n';
                return kExitError;
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace dsbad
