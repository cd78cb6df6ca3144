#include "pcp/config.hpp"

#include "pcp/error.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pcp {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::Pcp: return "pcp";
    case Mode::DcBaseline: return "dc-baseline";
    case Mode::IrBaseline: return "ir-baseline";
    }
    return "pcp";
}

Mode parse_mode(const std::string& name) {
    if (name == "pcp") return Mode::Pcp;
    if (name == "dc-baseline") return Mode::DcBaseline;
    if (name == "ir-baseline") return Mode::IrBaseline;
    throw Error(ErrorKind::ConfigError, "unknown mode '" + name + "' (expected pcp, dc-baseline or ir-baseline)");
}

void RunConfig::validate(std::size_t num_samples) const {
    auto bad = [](const std::string& what) { return Error(ErrorKind::ConfigError, what); };
    if (total_epochs < 1) throw bad("total_epochs must be >= 1");
    if (floor_clusters < 1) throw bad("floor_clusters must be >= 1");
    if (num_samples > 0 && floor_clusters > num_samples)
        throw bad("floor_clusters (" + std::to_string(floor_clusters) + ") exceeds sample count " + std::to_string(num_samples));
    if (encoder.output_dim < 1) throw bad("encoder.output_dim must be >= 1");
    for (auto h : encoder.hidden_dims)
        if (h < 1) throw bad("hidden layer widths must be >= 1");
    purify.validate();
    loss.validate();
    if (optim.batch_size < 1) throw bad("batch_size must be >= 1");
    if (!(optim.lr0 > 0.0)) throw bad("lr0 must be positive");
    if (!(optim.momentum >= 0.0 && optim.momentum < 1.0)) throw bad("momentum must lie in [0, 1)");
    if (!(optim.weight_decay >= 0.0)) throw bad("weight_decay must be nonnegative");
    if (optim.lr_milestones.size() != optim.lr_factors.size()) throw bad("lr_milestones and lr_factors differ in length");
    if (!(bank_momentum >= 0.0 && bank_momentum <= 1.0)) throw bad("bank_momentum must lie in [0, 1]");
    if (eval.knn.k < 1) throw bad("eval.knn_k must be >= 1");
    if (!(eval.knn.tau > 0.0)) throw bad("eval.knn_tau must be positive");
    if (eval.every < 1) throw bad("eval.every must be >= 1");
    if (rounds < 1) throw bad("rounds must be >= 1");
    if (kmeans.max_iterations < 1) throw bad("kmeans.max_iterations must be >= 1");
}

void RunConfig::scale_milestones(double factor) {
    auto scale = [&](double e) { return std::round(e * factor); };
    purify.activation_epoch = static_cast<std::size_t>(scale(static_cast<double>(purify.activation_epoch)));
    loss.warm_end_epoch = scale(loss.warm_end_epoch);
    for (auto& m : optim.lr_milestones) m = scale(m);
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["data"] = {{"path", c.data.path}, {"format", c.data.format}, {"test_path", c.data.test_path},
                 {"test_format", c.data.test_format}};
    j["encoder"] = {{"hidden_dims", c.encoder.hidden_dims}, {"output_dim", c.encoder.output_dim}};
    j["schedule"] = {{"total_epochs", c.total_epochs}, {"floor_clusters", c.floor_clusters}};
    j["purify"] = {{"gamma", c.purify.gamma},
                   {"alpha", c.purify.alpha},
                   {"theta_low", c.purify.theta_low},
                   {"theta_high", c.purify.theta_high},
                   {"activation_epoch", c.purify.activation_epoch},
                   {"window", c.purify.window},
                   {"cps_enabled", c.purify.cps_enabled}};
    j["loss"] = {{"tau", c.loss.tau},
                 {"normalization", c.loss.normalization == LossNormalization::Joint ? "joint" : "separate"},
                 {"cluster_pair_cap", c.loss.cluster_pair_cap ? ordered_json(*c.loss.cluster_pair_cap) : ordered_json()},
                 {"warmup", c.loss.warmup},
                 {"warm_start_weight", c.loss.warm_start_weight},
                 {"warm_end_weight", c.loss.warm_end_weight},
                 {"warm_end_epoch", c.loss.warm_end_epoch}};
    j["optim"] = {{"lr0", c.optim.lr0},
                  {"momentum", c.optim.momentum},
                  {"weight_decay", c.optim.weight_decay},
                  {"lr_milestones", c.optim.lr_milestones},
                  {"lr_factors", c.optim.lr_factors},
                  {"batch_size", c.optim.batch_size}};
    j["bank"] = {{"momentum", c.bank_momentum}};
    j["kmeans"] = {{"max_iterations", c.kmeans.max_iterations}, {"relative_tolerance", c.kmeans.relative_tolerance}};
    j["eval"] = {{"knn_k", c.eval.knn.k}, {"knn_tau", c.eval.knn.tau}, {"every", c.eval.every}, {"clusters", c.eval.clusters}};
    j["rounds"] = c.rounds;
    j["mode"] = to_string(c.mode);
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["log_wall_time"] = c.log_wall_time;
    return j;
}

namespace {

// Reads `key` from object `j` into `out` if present; records the key as known.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw Error(ErrorKind::ConfigError, where_ + " must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        known_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ConfigError, where_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        known_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!known_.count(it.key())) throw Error(ErrorKind::ConfigError, "unknown key " + where_ + "." + it.key());
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> known_;
};

} // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader root(j, "config");
    if (const json* d = root.child("data")) {
        Reader r(*d, "data");
        r.get("path", c.data.path);
        r.get("format", c.data.format);
        r.get("test_path", c.data.test_path);
        r.get("test_format", c.data.test_format);
        r.finish();
    }
    if (const json* e = root.child("encoder")) {
        Reader r(*e, "encoder");
        r.get("hidden_dims", c.encoder.hidden_dims);
        r.get("output_dim", c.encoder.output_dim);
        r.finish();
    }
    if (const json* s = root.child("schedule")) {
        Reader r(*s, "schedule");
        r.get("total_epochs", c.total_epochs);
        r.get("floor_clusters", c.floor_clusters);
        r.finish();
    }
    if (const json* p = root.child("purify")) {
        Reader r(*p, "purify");
        r.get("gamma", c.purify.gamma);
        r.get("alpha", c.purify.alpha);
        r.get("theta_low", c.purify.theta_low);
        r.get("theta_high", c.purify.theta_high);
        r.get("activation_epoch", c.purify.activation_epoch);
        r.get("window", c.purify.window);
        r.get("cps_enabled", c.purify.cps_enabled);
        r.finish();
    }
    if (const json* l = root.child("loss")) {
        Reader r(*l, "loss");
        r.get("tau", c.loss.tau);
        std::string norm = c.loss.normalization == LossNormalization::Joint ? "joint" : "separate";
        r.get("normalization", norm);
        if (norm == "joint")
            c.loss.normalization = LossNormalization::Joint;
        else if (norm == "separate")
            c.loss.normalization = LossNormalization::Separate;
        else
            throw Error(ErrorKind::ConfigError, "loss.normalization must be 'separate' or 'joint'");
        if (const json* cap = r.child("cluster_pair_cap"); cap && !cap->is_null()) {
            if (!cap->is_number_unsigned()) throw Error(ErrorKind::ConfigError, "loss.cluster_pair_cap must be a positive integer or null");
            c.loss.cluster_pair_cap = cap->get<std::size_t>();
        }
        r.get("warmup", c.loss.warmup);
        r.get("warm_start_weight", c.loss.warm_start_weight);
        r.get("warm_end_weight", c.loss.warm_end_weight);
        r.get("warm_end_epoch", c.loss.warm_end_epoch);
        r.finish();
    }
    if (const json* o = root.child("optim")) {
        Reader r(*o, "optim");
        r.get("lr0", c.optim.lr0);
        r.get("momentum", c.optim.momentum);
        r.get("weight_decay", c.optim.weight_decay);
        r.get("lr_milestones", c.optim.lr_milestones);
        r.get("lr_factors", c.optim.lr_factors);
        r.get("batch_size", c.optim.batch_size);
        r.finish();
    }
    if (const json* b = root.child("bank")) {
        Reader r(*b, "bank");
        r.get("momentum", c.bank_momentum);
        r.finish();
    }
    if (const json* k = root.child("kmeans")) {
        Reader r(*k, "kmeans");
        r.get("max_iterations", c.kmeans.max_iterations);
        r.get("relative_tolerance", c.kmeans.relative_tolerance);
        r.finish();
    }
    if (const json* e = root.child("eval")) {
        Reader r(*e, "eval");
        r.get("knn_k", c.eval.knn.k);
        r.get("knn_tau", c.eval.knn.tau);
        r.get("every", c.eval.every);
        r.get("clusters", c.eval.clusters);
        r.finish();
    }
    root.get("rounds", c.rounds);
    std::string mode = to_string(c.mode);
    root.get("mode", mode);
    c.mode = parse_mode(mode);
    root.get("seed", c.seed);
    root.get("output_dir", c.output_dir);
    root.get("log_wall_time", c.log_wall_time);
    root.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes{"gamma", "floor_clusters", "alpha", "k", "tau"};
    return axes;
}

void set_axis(RunConfig& config, const std::string& axis, double value) {
    auto as_count = [&](const char* name) {
        if (!(value >= 1.0) || value != std::floor(value))
            throw Error(ErrorKind::ConfigError, std::string(name) + " must be a positive integer");
        return static_cast<std::size_t>(value);
    };
    if (axis == "gamma")
        config.purify.gamma = value;
    else if (axis == "floor_clusters")
        config.floor_clusters = as_count("floor_clusters");
    else if (axis == "alpha")
        config.purify.alpha = value;
    else if (axis == "k")
        config.eval.knn.k = as_count("k");
    else if (axis == "tau")
        config.loss.tau = value;
    else
        throw Error(ErrorKind::ConfigError, "unknown sweep axis '" + axis + "'");
}

} // namespace pcp
