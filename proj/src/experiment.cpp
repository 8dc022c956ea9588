#include "mbgan/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "mbgan/config.hpp"
#include "mbgan/errors.hpp"
#include "mbgan/svgplot.hpp"

namespace fs = std::filesystem;

namespace mbgan {
namespace {

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("MBGAN_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "quiet" || v == "0") return 0;
        if (v == "debug" || v == "2") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[mbgan] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[mbgan] %s\n", msg.c_str());
}

constexpr std::uint64_t kMetricSalt = 0x6d747263; // "mtrc"
constexpr std::uint64_t kPlotSalt = 0x706c6f74;   // "plot"

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

} // namespace

MetricsRecord evaluate_metrics(const TrainerState& st) {
    const TrainConfig& cfg = st.cfg;
    Rng rng(mix_seed(cfg.seed, std::uint64_t(st.iteration), kMetricSalt));

    const Matrix probe_z = sample_latent(cfg.gen.latent_dim, cfg.metric_probe, rng);
    const Matrix fake = mlp_forward(st.g, probe_z).first;
    const Matrix real = sample_real(cfg.data, cfg.metric_probe, rng);

    MetricsRecord rec;
    rec.iteration = st.iteration;
    rec.alpha = alpha_value(st.alpha);
    rec.beta = st.alpha.mode == AlphaSchedule::Mode::Learned ? st.alpha.beta : 0.0;
    rec.intra_fid = intra_fid(fake, cfg.intra_subset, rng);
    rec.fid_to_real = frechet_distance(fit_moments(fake), fit_moments(real));
    const ModeCoverage cov = mode_coverage(fake, cfg.data);
    rec.modes_captured = cov.modes_captured;
    rec.hq_fraction = cov.hq_fraction;
    rec.per_mode_share = cov.per_mode_share;
    rec.d_losses = st.last_d_losses;
    rec.g_loss = st.last_g_loss;
    return rec;
}

void train_to_end(TrainerState& st, std::vector<MetricsRecord>& records,
                  const CheckpointHook& hook) {
    const TrainConfig& cfg = st.cfg;
    while (st.iteration < cfg.iterations) {
        train_step(st);
        if (st.iteration % cfg.checkpoint_every == 0 || st.iteration == cfg.iterations) {
            records.push_back(evaluate_metrics(st));
            if (hook) hook(st, records.back());
            log_debug("iteration " + std::to_string(st.iteration) + ", alpha " +
                      std::to_string(records.back().alpha) + ", modes " +
                      std::to_string(records.back().modes_captured));
        }
    }
}

RunResult run_training(const TrainConfig& cfg, const CheckpointHook& hook) {
    RunResult out{{}, TrainerState::init(cfg)};
    train_to_end(out.state, out.records, hook);
    return out;
}

std::string render_state_plot(const TrainerState& st, std::size_t points) {
    Rng rng(mix_seed(st.cfg.seed, std::uint64_t(st.iteration), kPlotSalt));
    const Matrix real = sample_real(st.cfg.data, points, rng);
    const Matrix z = sample_latent(st.cfg.gen.latent_dim, points, rng);
    const Matrix fake = mlp_forward(st.g, z).first;
    return render_scatter_svg(real, fake);
}

namespace {

// Shared tail of run/resume: stream CSV rows, write scheduled artifacts,
// then the final checkpoint and plot.
void drive_run(TrainerState& st, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_text_file(out_dir + "/config-echo.json", config_to_json(st.cfg));

    std::ofstream csv(out_dir + "/metrics.csv", std::ios::binary);
    if (!csv) throw IoError("cannot open for writing: " + out_dir + "/metrics.csv");
    csv << metrics_csv_header() << "\n";

    std::vector<MetricsRecord> records;
    const auto hook = [&](const TrainerState& s, const MetricsRecord& rec) {
        csv << metrics_csv_row(rec) << "\n";
        csv.flush();
        if (s.cfg.save_state_every > 0 && s.iteration % s.cfg.save_state_every == 0 &&
            s.iteration != s.cfg.iterations)
            save_checkpoint(s, out_dir + "/checkpoint_" + std::to_string(s.iteration) + ".mbgn");
        if (s.cfg.plot_every > 0 && s.iteration % s.cfg.plot_every == 0 &&
            s.iteration != s.cfg.iterations)
            write_text_file(out_dir + "/plot_" + std::to_string(s.iteration) + ".svg",
                            render_state_plot(s));
    };
    train_to_end(st, records, hook);
    if (!csv) throw IoError("metrics.csv write failed");

    save_checkpoint(st, out_dir + "/checkpoint_final.mbgn");
    write_text_file(out_dir + "/plot_final.svg", render_state_plot(st));
    log_info(out_dir + ": done at iteration " + std::to_string(st.iteration));
}

} // namespace

void run_experiment(const TrainConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    log_info(out_dir + ": training " + std::to_string(cfg.iterations) + " iterations, k=" +
             std::to_string(cfg.k) + ", seed=" + std::to_string(cfg.seed));
    TrainerState st = TrainerState::init(cfg);
    drive_run(st, out_dir);
}

void resume_experiment(const std::string& ckpt_path, const TrainConfig& cfg,
                       const std::string& out_dir) {
    cfg.validate();
    TrainerState st = load_checkpoint(ckpt_path, cfg);
    if (st.iteration > cfg.iterations)
        throw ConfigInvalid("iterations: checkpoint is already past the configured end");
    log_info(out_dir + ": resuming from iteration " + std::to_string(st.iteration));
    drive_run(st, out_dir);
}

std::vector<std::string> preset_names() {
    return {"toy", "static-alpha-sweep", "alpha-fn-compare", "beta-sigm-sweep"};
}

std::vector<PresetRun> expand_preset(const std::string& name, std::uint64_t seed) {
    TrainConfig base;
    base.seed = seed;

    std::vector<PresetRun> runs;
    if (name == "toy") {
        runs.push_back({"toy", base});
        return runs;
    }
    if (name == "static-alpha-sweep") {
        for (int i = 0; i <= 10; ++i) {
            TrainConfig cfg = base;
            cfg.alpha_mode = AlphaSchedule::Mode::Static;
            cfg.alpha_static = double(i) / 10.0;
            char buf[32];
            std::snprintf(buf, sizeof buf, "alpha_%.1f", cfg.alpha_static);
            runs.push_back({buf, cfg});
        }
        return runs;
    }
    if (name == "alpha-fn-compare") {
        for (AlphaFn fn : {AlphaFn::Sigm, AlphaFn::Soft, AlphaFn::Tanh}) {
            TrainConfig cfg = base;
            cfg.alpha_mode = AlphaSchedule::Mode::Learned;
            cfg.alpha_fn = fn;
            cfg.beta0 = AlphaSchedule::default_beta0(fn);
            runs.push_back({std::string("alpha_") + alpha_fn_name(fn), cfg});
        }
        return runs;
    }
    if (name == "beta-sigm-sweep") {
        for (double beta0 : {-3.0, -2.5, -2.0, -1.8, -1.5, -1.0, -0.5, 0.0}) {
            TrainConfig cfg = base;
            cfg.alpha_mode = AlphaSchedule::Mode::Learned;
            cfg.alpha_fn = AlphaFn::Sigm;
            cfg.beta0 = beta0;
            char buf[32];
            std::snprintf(buf, sizeof buf, "beta0_%+.1f", beta0);
            runs.push_back({buf, cfg});
        }
        return runs;
    }
    throw ConfigInvalid("unknown preset: " + name);
}

void run_preset(const std::string& name, std::uint64_t seed, const std::string& out_dir,
                std::size_t jobs) {
    const auto runs = expand_preset(name, seed);
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, runs.size());

    fs::create_directories(out_dir);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> failures(runs.size());
    for (std::size_t w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= runs.size()) return;
                try {
                    run_experiment(runs[i].cfg, out_dir + "/" + runs[i].name);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    for (auto& t : workers) t.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    if (name == "alpha-fn-compare") {
        // Combined alpha-evolution table across the three schedule functions.
        std::map<std::int64_t, std::map<std::string, double>> table;
        for (const auto& run : runs) {
            std::ifstream csv(out_dir + "/" + run.name + "/metrics.csv");
            std::string line;
            std::getline(csv, line); // header
            while (std::getline(csv, line)) {
                const auto c1 = line.find(',');
                const auto c2 = line.find(',', c1 + 1);
                table[std::stoll(line.substr(0, c1))][run.name] =
                    std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            }
        }
        std::ofstream out(out_dir + "/alpha_evolution.csv", std::ios::binary);
        out << "iteration";
        for (const auto& run : runs) out << "," << run.name;
        out << "\n";
        for (const auto& [iter, by_run] : table) {
            out << iter;
            for (const auto& run : runs) {
                out << ",";
                const auto it = by_run.find(run.name);
                if (it != by_run.end()) {
                    char buf[40];
                    std::snprintf(buf, sizeof buf, "%.17g", it->second);
                    out << buf;
                }
            }
            out << "\n";
        }
    }
}

} // namespace mbgan
