#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mbgan/checkpoint.hpp"
#include "mbgan/metrics.hpp"
#include "mbgan/trainer.hpp"

namespace mbgan {

// Metric snapshot of the current trainer state. Probes are drawn from a
// dedicated RNG derived from (cfg.seed, iteration), so evaluation never
// advances the training stream and resumed runs reproduce identical rows.
MetricsRecord evaluate_metrics(const TrainerState& st);

using CheckpointHook = std::function<void(const TrainerState&, const MetricsRecord&)>;

// Advances st to cfg.iterations, evaluating metrics every checkpoint_every
// iterations (plus the final iteration). Appends to records; calls hook per
// snapshot.
void train_to_end(TrainerState& st, std::vector<MetricsRecord>& records,
                  const CheckpointHook& hook = {});

struct RunResult {
    std::vector<MetricsRecord> records;
    TrainerState state;
};

RunResult run_training(const TrainConfig& cfg, const CheckpointHook& hook = {});

// Runs one experiment, writing metrics.csv, config-echo.json, the final
// checkpoint and scheduled SVG scatter plots into out_dir.
void run_experiment(const TrainConfig& cfg, const std::string& out_dir);

// Continues a checkpointed run to cfg.iterations. The trajectory is
// bit-identical to an uninterrupted run; metrics.csv covers the resumed span.
void resume_experiment(const std::string& ckpt_path, const TrainConfig& cfg,
                       const std::string& out_dir);

// Scatter plot of the state's generator against fresh real samples.
std::string render_state_plot(const TrainerState& st, std::size_t points = 1024);

struct PresetRun {
    std::string name; // sub-directory name
    TrainConfig cfg;
};

std::vector<std::string> preset_names();

// Expands a named preset into its sub-runs (throws ConfigInvalid for unknown
// names). Every preset is runnable given only a seed.
std::vector<PresetRun> expand_preset(const std::string& name, std::uint64_t seed);

// Runs all sub-runs of a preset (jobs in parallel, each in its own output
// directory); writes preset-level summaries where defined.
void run_preset(const std::string& name, std::uint64_t seed, const std::string& out_dir,
                std::size_t jobs = 0);

} // namespace mbgan
