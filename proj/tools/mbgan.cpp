#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mbgan/config.hpp"
#include "mbgan/errors.hpp"
#include "mbgan/experiment.hpp"
#include "mbgan/kernels.hpp"
#include "mbgan/svgplot.hpp"

namespace {

void print_samples_csv(const mbgan::Matrix& m, std::ostream& out) {
    out << "x,y\n";
    char buf[96];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m(i, 0), m(i, 1));
        out << buf;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-discriminator GAN trainer on a 2D ring of Gaussians"};
    app.require_subcommand(1);

    std::string config_path, out_path, ckpt_path, preset_name;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t jobs = 0;
    std::size_t n_samples = 1024;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "run seed (overrides the config)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* run = app.add_subcommand("run", "train from a JSON config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_path, "output directory")->required();
    add_seed(run);

    auto* preset = app.add_subcommand("preset", "run a named experiment suite");
    preset->add_option("name", preset_name, "preset name")->required();
    preset->add_option("--out", out_path, "output directory")->required();
    preset->add_option("--jobs", jobs, "parallel sub-runs (default: hardware threads)");
    add_seed(preset);
    bool list_presets = false;
    preset->add_flag("--list", list_presets, "list available presets and exit");
    preset->get_option("name")->required(false);
    preset->get_option("--out")->required(false);

    auto* resume = app.add_subcommand("resume", "continue a checkpointed run");
    resume->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
    resume->add_option("config", config_path, "config file")->required();
    resume->add_option("--out", out_path, "output directory")->required();

    auto* dump = app.add_subcommand("dump-data", "write real samples as CSV");
    dump->add_option("config", config_path, "config file")->required();
    dump->add_option("--n", n_samples, "number of samples");
    dump->add_option("--out", out_path, "output file (default: stdout)");
    add_seed(dump);

    auto* plot = app.add_subcommand("plot", "render a checkpoint as an SVG scatter plot");
    plot->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
    plot->add_option("--out", out_path, "output SVG file")->required();
    plot->add_option("--config", config_path, "config file (default: toy preset)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (const char* env = std::getenv("MBGAN_KERNELS")) (void)env; // validated on first use
        if (run->parsed()) {
            mbgan::TrainConfig cfg = mbgan::load_config(config_path);
            if (seed_given) cfg.seed = seed;
            mbgan::run_experiment(cfg, out_path);
        } else if (preset->parsed()) {
            if (list_presets) {
                for (const auto& name : mbgan::preset_names()) std::puts(name.c_str());
                return 0;
            }
            if (preset_name.empty() || out_path.empty())
                throw mbgan::ConfigInvalid("preset: name and --out are required");
            mbgan::run_preset(preset_name, seed_given ? seed : 1, out_path, jobs);
        } else if (resume->parsed()) {
            const mbgan::TrainConfig cfg = mbgan::load_config(config_path);
            mbgan::resume_experiment(ckpt_path, cfg, out_path);
        } else if (dump->parsed()) {
            mbgan::TrainConfig cfg = mbgan::load_config(config_path);
            if (seed_given) cfg.seed = seed;
            mbgan::Rng rng(cfg.seed);
            const mbgan::Matrix samples = mbgan::sample_real(cfg.data, n_samples, rng);
            if (out_path.empty()) {
                print_samples_csv(samples, std::cout);
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw mbgan::IoError("cannot open for writing: " + out_path);
                print_samples_csv(samples, out);
            }
        } else if (plot->parsed()) {
            mbgan::TrainConfig cfg;
            if (!config_path.empty()) cfg = mbgan::load_config(config_path);
            const mbgan::TrainerState st = mbgan::load_checkpoint(ckpt_path, cfg);
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw mbgan::IoError("cannot open for writing: " + out_path);
            out << mbgan::render_state_plot(st);
        }
    } catch (const mbgan::ConfigInvalid& e) {
        std::fprintf(stderr, "error: invalid config: %s\n", e.what());
        return 2;
    } catch (const mbgan::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
