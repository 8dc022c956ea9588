#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mbgan/checkpoint.hpp"
#include "mbgan/config.hpp"
#include "mbgan/errors.hpp"
#include "mbgan/experiment.hpp"
#include "mbgan/svgplot.hpp"
#include "plain_gan_oracle.hpp"

using namespace mbgan;
using mbgan::testing::params_bitwise_equal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mbgan_test_" + std::to_string(std::uintptr_t(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& leaf = "") const {
        return (leaf.empty() ? path : path / leaf).string();
    }
};

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.k = 2;
    cfg.batch_size = 32;
    cfg.iterations = 60;
    cfg.seed = 5;
    cfg.checkpoint_every = 20;
    cfg.metric_probe = 256;
    cfg.intra_subset = 64;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("config: empty object is the toy preset; echo round-trips") {
    const TrainConfig cfg = parse_config_text("{}");
    CHECK(cfg.k == 8);
    CHECK(cfg.batch_size == 512);
    CHECK(cfg.iterations == 25000);
    CHECK(cfg.alpha_mode == AlphaSchedule::Mode::Learned);
    CHECK(cfg.alpha_fn == AlphaFn::Sigm);
    CHECK(cfg.beta0 == -1.8);
    CHECK(cfg.adam.lr == 2e-4);
    CHECK(cfg.adam.beta1 == 0.5);
    CHECK(cfg.gen.latent_dim == 256);
    CHECK(cfg.gen.hidden == std::vector<std::size_t>{128, 128});
    CHECK(cfg.disc.hidden == std::vector<std::size_t>{128});
    CHECK(cfg.data.radius == 2.0);
    CHECK(cfg.data.mode_std == 0.02);

    const std::string echo = config_to_json(cfg);
    CHECK(config_to_json(parse_config_text(echo)) == echo);
}

TEST_CASE("config: errors name the offending key") {
    auto message_of = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const ConfigInvalid& e) {
            return std::string(e.what());
        }
        return std::string("(no error)");
    };
    CHECK(message_of(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(message_of(R"({"k": 3, "batch_size": 10})").find("batch_size") !=
          std::string::npos);
    CHECK(message_of(R"({"alpha": {"mode": "learned", "value": 0.5}})").find("alpha.value") !=
          std::string::npos);
    CHECK(message_of(R"({"alpha": {"mode": "static", "value": 1.5}})").find("alpha.value") !=
          std::string::npos);
    CHECK(message_of(R"({"alpha": {"mode": "maybe"}})").find("alpha.mode") !=
          std::string::npos);
    CHECK(message_of(R"({"head": "sgn"})").find("head") != std::string::npos);
    CHECK(message_of(R"({"metrics": {"probe": 10, "intra_subset": 50}})").find("probe") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_config_text("not json"), ConfigInvalid);
}

TEST_CASE("checkpoint: save/load round-trip is bit-exact, resume trajectory matches") {
    TempDir tmp;
    TrainConfig cfg = tiny_config();
    cfg.iterations = 40;

    TrainerState straight = TrainerState::init(cfg);
    for (int i = 0; i < 40; ++i) train_step(straight);

    TrainerState first_half = TrainerState::init(cfg);
    for (int i = 0; i < 20; ++i) train_step(first_half);
    save_checkpoint(first_half, tmp.str("mid.mbgn"));

    TrainerState resumed = load_checkpoint(tmp.str("mid.mbgn"), cfg);
    CHECK(resumed.iteration == 20);
    CHECK(params_bitwise_equal(resumed.g, first_half.g));
    CHECK(resumed.rng.state().s == first_half.rng.state().s);
    CHECK(resumed.alpha.beta == first_half.alpha.beta);
    for (int i = 0; i < 20; ++i) train_step(resumed);

    CHECK(params_bitwise_equal(resumed.g, straight.g));
    for (std::size_t kk = 0; kk < cfg.k; ++kk)
        CHECK(params_bitwise_equal(resumed.d[kk], straight.d[kk]));
    CHECK(resumed.alpha.beta == straight.alpha.beta);
}

TEST_CASE("checkpoint: corruption and shape mismatches are reported") {
    TempDir tmp;
    const TrainConfig cfg = tiny_config();
    TrainerState st = TrainerState::init(cfg);
    train_step(st);
    save_checkpoint(st, tmp.str("full.mbgn"));

    SUBCASE("truncated file") {
        const std::string bytes = slurp(tmp.str("full.mbgn"));
        std::ofstream out(tmp.str("cut.mbgn"), std::ios::binary);
        out.write(bytes.data(), std::streamsize(bytes.size() / 2));
        out.close();
        CHECK_THROWS_AS(load_checkpoint(tmp.str("cut.mbgn"), cfg), CheckpointCorrupt);
    }

    SUBCASE("bad magic") {
        std::ofstream out(tmp.str("junk.mbgn"), std::ios::binary);
        out << "NOPE1 definitely not a checkpoint";
        out.close();
        CHECK_THROWS_AS(load_checkpoint(tmp.str("junk.mbgn"), cfg), CheckpointCorrupt);
    }

    SUBCASE("discriminator count mismatch") {
        TrainConfig other = cfg;
        other.k = 4;
        other.batch_size = 32;
        try {
            load_checkpoint(tmp.str("full.mbgn"), other);
            FAIL("expected ShapeMismatch");
        } catch (const ShapeMismatch& e) {
            CHECK(std::string(e.what()).find("discriminator count") != std::string::npos);
        }
    }

    SUBCASE("architecture mismatch names the tensor") {
        TrainConfig other = cfg;
        other.gen.hidden = {64, 64};
        try {
            load_checkpoint(tmp.str("full.mbgn"), other);
            FAIL("expected ShapeMismatch");
        } catch (const ShapeMismatch& e) {
            CHECK(std::string(e.what()).find("G.layer0.w") != std::string::npos);
        }
    }

    SUBCASE("trailing bytes") {
        const std::string bytes = slurp(tmp.str("full.mbgn"));
        std::ofstream out(tmp.str("fat.mbgn"), std::ios::binary);
        out.write(bytes.data(), std::streamsize(bytes.size()));
        out << "extra";
        out.close();
        CHECK_THROWS_AS(load_checkpoint(tmp.str("fat.mbgn"), cfg), CheckpointCorrupt);
    }
}

TEST_CASE("svg: deterministic, well-formed, tolerates an empty fake set") {
    Rng rng(3);
    Matrix real(512, 2), fake(512, 2);
    for (std::size_t i = 0; i < real.size(); ++i) real.data()[i] = 4.0 * rng.uniform01() - 2.0;
    for (std::size_t i = 0; i < fake.size(); ++i) fake.data()[i] = 4.0 * rng.uniform01() - 2.0;

    const std::string svg = render_scatter_svg(real, fake);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "<circle") == 1024);
    CHECK(count_occurrences(svg, "/>") >= 1024); // every circle self-closes
    CHECK(render_scatter_svg(real, fake) == svg); // byte-identical

    const std::string only_real = render_scatter_svg(real, Matrix(0, 2));
    CHECK(count_occurrences(only_real, "<circle") == 512);
    CHECK(count_occurrences(only_real, "#1f77b4") == 0);
    CHECK(only_real.find("</svg>") != std::string::npos);
}

TEST_CASE("run_experiment: artifacts, reproducibility from the echoed config") {
    TempDir tmp;
    TrainConfig cfg = tiny_config();
    cfg.plot_every = 20;
    cfg.save_state_every = 20;
    run_experiment(cfg, tmp.str("a"));

    CHECK(fs::exists(tmp.str("a/metrics.csv")));
    CHECK(fs::exists(tmp.str("a/config-echo.json")));
    CHECK(fs::exists(tmp.str("a/checkpoint_final.mbgn")));
    CHECK(fs::exists(tmp.str("a/plot_final.svg")));
    CHECK(fs::exists(tmp.str("a/checkpoint_20.mbgn")));
    CHECK(fs::exists(tmp.str("a/plot_40.svg")));

    const std::string csv = slurp(tmp.str("a/metrics.csv"));
    CHECK(count_occurrences(csv, "\n") == 4); // header + 20/40/60

    // the echoed config reproduces the run byte for byte
    const TrainConfig echoed = parse_config_text(slurp(tmp.str("a/config-echo.json")));
    run_experiment(echoed, tmp.str("b"));
    CHECK(slurp(tmp.str("b/metrics.csv")) == csv);
    CHECK(slurp(tmp.str("b/plot_final.svg")) == slurp(tmp.str("a/plot_final.svg")));
    CHECK(slurp(tmp.str("b/checkpoint_final.mbgn")) == slurp(tmp.str("a/checkpoint_final.mbgn")));
}

TEST_CASE("resume_experiment: continued metrics rows match the straight run") {
    TempDir tmp;
    TrainConfig cfg = tiny_config();
    cfg.save_state_every = 20;
    run_experiment(cfg, tmp.str("full"));

    resume_experiment(tmp.str("full/checkpoint_40.mbgn"), cfg, tmp.str("cont"));
    const std::string full_csv = slurp(tmp.str("full/metrics.csv"));
    const std::string cont_csv = slurp(tmp.str("cont/metrics.csv"));

    // the resumed file holds exactly the rows past the checkpoint, verbatim
    const auto row_60 = full_csv.find("\n60,");
    REQUIRE(row_60 != std::string::npos);
    CHECK(cont_csv == metrics_csv_header() + "\n" + full_csv.substr(row_60 + 1));
    CHECK(slurp(tmp.str("cont/checkpoint_final.mbgn")) ==
          slurp(tmp.str("full/checkpoint_final.mbgn")));
}

TEST_CASE("presets expand to the documented grids") {
    CHECK(expand_preset("toy", 1).size() == 1);

    const auto sweep = expand_preset("static-alpha-sweep", 1);
    CHECK(sweep.size() == 11);
    CHECK(sweep.front().cfg.alpha_mode == AlphaSchedule::Mode::Static);
    CHECK(sweep.front().cfg.alpha_static == 0.0);
    CHECK(sweep.back().cfg.alpha_static == 1.0);

    const auto fns = expand_preset("alpha-fn-compare", 2);
    CHECK(fns.size() == 3);
    CHECK(fns[0].cfg.alpha_fn == AlphaFn::Sigm);
    CHECK(fns[1].cfg.alpha_fn == AlphaFn::Soft);
    CHECK(fns[2].cfg.alpha_fn == AlphaFn::Tanh);
    for (const auto& r : fns) CHECK(r.cfg.seed == 2);

    const auto betas = expand_preset("beta-sigm-sweep", 3);
    bool has_18 = false, has_20 = false;
    for (const auto& r : betas) {
        if (r.cfg.beta0 == -1.8) has_18 = true;
        if (r.cfg.beta0 == -2.0) has_20 = true;
    }
    CHECK(has_18);
    CHECK(has_20);

    CHECK_THROWS_AS(expand_preset("nope", 1), ConfigInvalid);
}
