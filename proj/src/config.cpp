#include "mbgan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mbgan/errors.hpp"

namespace mbgan {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void require_keys(const json& obj, const std::string& scope,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key))
            throw ConfigInvalid("unknown key: " + (scope.empty() ? key : scope + "." + key));
    }
}

template <typename T>
T get_or(const json& obj, const std::string& scope, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigInvalid("bad value for key: " + (scope.empty() ? key : scope + "." + key));
    }
}

AlphaFn parse_alpha_fn(const std::string& name) {
    if (name == "sigm") return AlphaFn::Sigm;
    if (name == "soft") return AlphaFn::Soft;
    if (name == "tanh") return AlphaFn::Tanh;
    if (name == "ident") return AlphaFn::Ident;
    throw ConfigInvalid("alpha.fn: expected sigm|soft|tanh|ident, got \"" + name + "\"");
}

ActivationTag parse_activation(const std::string& scope, const std::string& name) {
    if (name == "relu") return ActivationTag::Relu;
    if (name == "linear") return ActivationTag::Linear;
    if (name == "softplus") return ActivationTag::Softplus;
    if (name == "sigmoid") return ActivationTag::Sigmoid;
    if (name == "tanh") return ActivationTag::Tanh;
    throw ConfigInvalid(scope + ": expected relu|linear|softplus|sigmoid|tanh, got \"" + name +
                        "\"");
}

} // namespace

TrainConfig parse_config_text(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigInvalid("config root must be a JSON object");

    require_keys(root, "",
                 {"k", "batch_size", "iterations", "seed", "alpha", "head", "optimizer",
                  "generator", "discriminator", "dataset", "metrics", "output"});

    TrainConfig cfg;
    cfg.k = get_or<std::size_t>(root, "", "k", cfg.k);
    cfg.batch_size = get_or<std::size_t>(root, "", "batch_size", cfg.batch_size);
    cfg.iterations = get_or<std::int64_t>(root, "", "iterations", cfg.iterations);
    cfg.seed = get_or<std::uint64_t>(root, "", "seed", cfg.seed);

    if (root.contains("alpha")) {
        const json& a = root.at("alpha");
        if (!a.is_object()) throw ConfigInvalid("alpha: must be an object");
        require_keys(a, "alpha", {"mode", "value", "fn", "beta0"});
        const auto mode = get_or<std::string>(a, "alpha", "mode", "learned");
        if (mode == "static") {
            cfg.alpha_mode = AlphaSchedule::Mode::Static;
            cfg.alpha_static = get_or<double>(a, "alpha", "value", 0.0);
            if (a.contains("fn") || a.contains("beta0"))
                throw ConfigInvalid("alpha.fn/alpha.beta0 are not valid in static mode");
        } else if (mode == "learned") {
            cfg.alpha_mode = AlphaSchedule::Mode::Learned;
            if (a.contains("value"))
                throw ConfigInvalid("alpha.value is not valid in learned mode");
            cfg.alpha_fn = parse_alpha_fn(get_or<std::string>(a, "alpha", "fn", "sigm"));
            cfg.beta0 = get_or<double>(a, "alpha", "beta0",
                                       AlphaSchedule::default_beta0(cfg.alpha_fn));
        } else {
            throw ConfigInvalid("alpha.mode: expected static|learned, got \"" + mode + "\"");
        }
    }

    const auto head = get_or<std::string>(root, "", "head", "logit");
    if (head == "logit")
        cfg.head = HeadMode::Logit;
    else if (head == "softplus")
        cfg.head = HeadMode::Softplus;
    else
        throw ConfigInvalid("head: expected logit|softplus, got \"" + head + "\"");

    if (root.contains("optimizer")) {
        const json& o = root.at("optimizer");
        require_keys(o, "optimizer", {"lr", "beta1", "beta2", "eps"});
        cfg.adam.lr = get_or<double>(o, "optimizer", "lr", cfg.adam.lr);
        cfg.adam.beta1 = get_or<double>(o, "optimizer", "beta1", cfg.adam.beta1);
        cfg.adam.beta2 = get_or<double>(o, "optimizer", "beta2", cfg.adam.beta2);
        cfg.adam.eps = get_or<double>(o, "optimizer", "eps", cfg.adam.eps);
    }

    if (root.contains("generator")) {
        const json& g = root.at("generator");
        require_keys(g, "generator", {"latent_dim", "hidden"});
        cfg.gen.latent_dim = get_or<std::size_t>(g, "generator", "latent_dim",
                                                 cfg.gen.latent_dim);
        cfg.gen.hidden = get_or<std::vector<std::size_t>>(g, "generator", "hidden",
                                                          cfg.gen.hidden);
    }
    if (root.contains("discriminator")) {
        const json& d = root.at("discriminator");
        require_keys(d, "discriminator", {"hidden", "output_activation"});
        cfg.disc.hidden = get_or<std::vector<std::size_t>>(d, "discriminator", "hidden",
                                                           cfg.disc.hidden);
        if (d.contains("output_activation"))
            cfg.disc.output_activation = parse_activation(
                "discriminator.output_activation",
                get_or<std::string>(d, "discriminator", "output_activation", "softplus"));
    }

    if (root.contains("dataset")) {
        const json& d = root.at("dataset");
        require_keys(d, "dataset", {"modes", "radius", "std"});
        cfg.data.n_modes = get_or<std::size_t>(d, "dataset", "modes", cfg.data.n_modes);
        cfg.data.radius = get_or<double>(d, "dataset", "radius", cfg.data.radius);
        cfg.data.mode_std = get_or<double>(d, "dataset", "std", cfg.data.mode_std);
    }

    if (root.contains("metrics")) {
        const json& m = root.at("metrics");
        require_keys(m, "metrics", {"checkpoint_every", "probe", "intra_subset"});
        cfg.checkpoint_every = get_or<std::int64_t>(m, "metrics", "checkpoint_every",
                                                    cfg.checkpoint_every);
        cfg.metric_probe = get_or<std::size_t>(m, "metrics", "probe", cfg.metric_probe);
        cfg.intra_subset = get_or<std::size_t>(m, "metrics", "intra_subset", cfg.intra_subset);
    }

    if (root.contains("output")) {
        const json& o = root.at("output");
        require_keys(o, "output", {"plot_every", "checkpoint_every"});
        cfg.plot_every = get_or<std::int64_t>(o, "output", "plot_every", cfg.plot_every);
        cfg.save_state_every = get_or<std::int64_t>(o, "output", "checkpoint_every",
                                                    cfg.save_state_every);
    }

    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_json(const TrainConfig& cfg) {
    ordered_json root;
    root["k"] = cfg.k;
    root["batch_size"] = cfg.batch_size;
    root["iterations"] = cfg.iterations;
    root["seed"] = cfg.seed;
    ordered_json alpha;
    if (cfg.alpha_mode == AlphaSchedule::Mode::Static) {
        alpha["mode"] = "static";
        alpha["value"] = cfg.alpha_static;
    } else {
        alpha["mode"] = "learned";
        alpha["fn"] = alpha_fn_name(cfg.alpha_fn);
        alpha["beta0"] = cfg.beta0;
    }
    root["alpha"] = alpha;
    root["head"] = head_mode_name(cfg.head);
    root["optimizer"] = {{"lr", cfg.adam.lr},
                         {"beta1", cfg.adam.beta1},
                         {"beta2", cfg.adam.beta2},
                         {"eps", cfg.adam.eps}};
    root["generator"] = {{"latent_dim", cfg.gen.latent_dim}, {"hidden", cfg.gen.hidden}};
    root["discriminator"] = {{"hidden", cfg.disc.hidden},
                             {"output_activation",
                              activation_name(cfg.disc.output_activation)}};
    root["dataset"] = {{"modes", cfg.data.n_modes},
                       {"radius", cfg.data.radius},
                       {"std", cfg.data.mode_std}};
    root["metrics"] = {{"checkpoint_every", cfg.checkpoint_every},
                       {"probe", cfg.metric_probe},
                       {"intra_subset", cfg.intra_subset}};
    root["output"] = {{"plot_every", cfg.plot_every},
                      {"checkpoint_every", cfg.save_state_every}};
    return root.dump(2) + "\n";
}

} // namespace mbgan
