// Command-line front end: train, eval, sweep, export, gen-data.

#include "pcp/config.hpp"
#include "pcp/dataset.hpp"
#include "pcp/error.hpp"
#include "pcp/evaluation.hpp"
#include "pcp/rng.hpp"
#include "pcp/sweep.hpp"
#include "pcp/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pcp;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ConfigError: return kExitConfig;
    case ErrorKind::IngestError: return kExitIngest;
    case ErrorKind::NumericError:
    case ErrorKind::DegenerateVector: return kExitNumeric;
    default: return kExitOther;
    }
}

// CLI overrides layered over the JSON config.
struct Overrides {
    std::string config_path;
    std::optional<std::string> data, data_format, test_data, test_format, mode, out, normalization;
    std::optional<std::size_t> epochs, floor_clusters, rounds, batch_size, output_dim, eval_every, knn_k, activation_epoch;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma, alpha, tau, lr, bank_momentum;
    std::vector<std::size_t> hidden;
    bool no_warmup = false;
    bool no_cps = false;
    bool scale_milestones = false;
    bool wall_time = false;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        app->add_option("--data", data, "training data (.csv or PCPD binary)");
        app->add_option("--data-format", data_format, "csv | bin | auto");
        app->add_option("--test-data", test_data, "held-out labeled split for kNN accuracy");
        app->add_option("--test-format", test_format, "csv | bin | auto");
        app->add_option("--mode", mode, "pcp | dc-baseline | ir-baseline");
        app->add_option("-o,--out", out, "output directory");
        app->add_option("--epochs", epochs, "epochs per round (T)");
        app->add_option("--floor-clusters", floor_clusters, "cluster count floor");
        app->add_option("--rounds", rounds, "training rounds");
        app->add_option("--batch-size", batch_size);
        app->add_option("--output-dim", output_dim, "embedding dimension D");
        app->add_option("--hidden", hidden, "hidden layer widths");
        app->add_option("--eval-every", eval_every);
        app->add_option("--knn-k", knn_k);
        app->add_option("--activation-epoch", activation_epoch, "first epoch of vote refinement");
        app->add_option("--seed", seed);
        app->add_option("--gamma", gamma, "distance filtering ratio");
        app->add_option("--alpha", alpha, "voting decay");
        app->add_option("--tau", tau, "softmax temperature");
        app->add_option("--loss-normalization", normalization, "separate | joint");
        app->add_option("--lr", lr, "initial learning rate");
        app->add_option("--bank-momentum", bank_momentum);
        app->add_flag("--no-warmup", no_warmup, "disable the auxiliary instance loss");
        app->add_flag("--no-cps", no_cps, "disable vote refinement");
        app->add_flag("--scale-milestones", scale_milestones,
                      "rescale epoch milestones (defaults are for 200 epochs) to --epochs");
        app->add_flag("--wall-time", wall_time, "record wall time per epoch (breaks byte-identical logs)");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        const std::size_t epochs_before = c.total_epochs;
        if (data) c.data.path = *data;
        if (data_format) c.data.format = *data_format;
        if (test_data) c.data.test_path = *test_data;
        if (test_format) c.data.test_format = *test_format;
        if (mode) c.mode = parse_mode(*mode);
        if (out) c.output_dir = *out;
        if (epochs) c.total_epochs = *epochs;
        if (floor_clusters) c.floor_clusters = *floor_clusters;
        if (rounds) c.rounds = *rounds;
        if (batch_size) c.optim.batch_size = *batch_size;
        if (output_dim) c.encoder.output_dim = *output_dim;
        if (!hidden.empty()) c.encoder.hidden_dims = hidden;
        if (eval_every) c.eval.every = *eval_every;
        if (knn_k) c.eval.knn.k = *knn_k;
        if (seed) c.seed = *seed;
        if (gamma) c.purify.gamma = *gamma;
        if (alpha) c.purify.alpha = *alpha;
        if (tau) c.loss.tau = *tau;
        if (normalization) {
            if (*normalization == "joint")
                c.loss.normalization = LossNormalization::Joint;
            else if (*normalization == "separate")
                c.loss.normalization = LossNormalization::Separate;
            else
                throw Error(ErrorKind::ConfigError, "--loss-normalization must be 'separate' or 'joint'");
        }
        if (lr) c.optim.lr0 = *lr;
        if (bank_momentum) c.bank_momentum = *bank_momentum;
        if (no_warmup) c.loss.warmup = false;
        if (no_cps) c.purify.cps_enabled = false;
        if (wall_time) c.log_wall_time = true;
        if (scale_milestones)
            c.scale_milestones(static_cast<double>(c.total_epochs) / static_cast<double>(epochs_before));
        if (activation_epoch) c.purify.activation_epoch = *activation_epoch;
        c.validate();
        return c;
    }
};

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ConfigError, "sweep value '" + item + "' is not a number");
        }
    }
    return values;
}

void print_record(const EpochRecord& r) {
    std::cerr << "round " << r.round << " epoch " << r.epoch << "  clusters " << r.num_clusters << "  loss "
              << r.loss_total << "  kept " << r.kept_fraction;
    if (r.knn_accuracy) std::cerr << "  knn " << *r.knn_accuracy;
    if (r.purity) std::cerr << "  purity " << *r.purity;
    std::cerr << '\n';
}

int cmd_train(const Overrides& o) {
    const RunConfig cfg = o.resolve();
    const auto result = run_training_to_disk(cfg);
    for (const auto& r : result.records) print_record(r);
    std::cout << (std::filesystem::path(cfg.output_dir) / "metrics.jsonl").string() << '\n';
    return kExitOk;
}

int cmd_sweep(const Overrides& o, const std::string& axis, const std::string& values_text) {
    const RunConfig cfg = o.resolve();
    const auto values = parse_values(values_text);
    if (cfg.data.path.empty()) throw Error(ErrorKind::ConfigError, "data.path is required");
    const Dataset train = load_dataset(cfg.data.path, parse_data_format(cfg.data.format));
    std::optional<Dataset> test;
    if (!cfg.data.test_path.empty()) test = load_dataset(cfg.data.test_path, parse_data_format(cfg.data.test_format));
    const auto rows = run_sweep(cfg, axis, values, train, test ? &*test : nullptr, cfg.output_dir);
    for (const auto& row : rows) {
        std::cerr << axis << "=" << row.value << ": ";
        print_record(row.final_record);
    }
    std::cout << (std::filesystem::path(cfg.output_dir) / "summary.csv").string() << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string checkpoint, data, data_format = "auto", test_data, test_format = "auto";
    KnnParams knn;
    ProbeParams probe;
    std::size_t clusters = 0;
    std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
    const Encoder encoder = load_checkpoint(a.checkpoint);
    const Dataset train = load_dataset(a.data, parse_data_format(a.data_format));
    if (!train.labels) throw Error(ErrorKind::IngestError, a.data + ": evaluation needs a label column");
    auto embed = [&](const Dataset& d) {
        Matrix out(d.size(), encoder.output_dim());
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto y = encoder.embed(d.features.row(i));
            for (std::size_t k = 0; k < y.size(); ++k) out.row(i)[k] = static_cast<float>(y[k]);
        }
        return out;
    };
    LabeledSplit split;
    split.train = embed(train);
    split.train_labels = *train.labels;
    split.num_classes = train.num_classes();
    nlohmann::ordered_json report;
    if (!a.test_data.empty()) {
        const Dataset test = load_dataset(a.test_data, parse_data_format(a.test_format));
        if (!test.labels) throw Error(ErrorKind::IngestError, a.test_data + ": evaluation needs a label column");
        split.test = embed(test);
        split.test_labels = *test.labels;
        split.num_classes = std::max(split.num_classes, test.num_classes());
        report["knn_accuracy"] = knn_accuracy(split.train, split.train_labels, split.test, split.test_labels, a.knn,
                                              split.num_classes);
    } else {
        split.test = Matrix(0, split.train.cols);
        report["knn_accuracy_loo"] = knn_accuracy(split.train, split.train_labels, split.train, split.train_labels,
                                                  a.knn, split.num_classes, true);
    }
    const auto probe = linear_probe(split, a.probe);
    report["probe_train_accuracy"] = probe.train_accuracy;
    if (split.test.rows > 0) report["probe_test_accuracy"] = probe.test_accuracy;
    const std::size_t k = a.clusters ? a.clusters : train.num_classes();
    const auto state = kmeans_fit(split.train, std::min(k, train.size()), derive_seed(a.seed, Stream::EvalKMeans));
    report["purity"] = cluster_purity(state.assignment, split.train_labels);
    report["nmi"] = nmi(state.assignment, split.train_labels);
    std::cout << report.dump(2) << '\n';
    return kExitOk;
}

int cmd_export(const std::string& checkpoint, const std::string& data, const std::string& format,
               const std::string& out) {
    const Encoder encoder = load_checkpoint(checkpoint);
    const Dataset d = load_dataset(data, parse_data_format(format));
    Matrix emb(d.size(), encoder.output_dim());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto y = encoder.embed(d.features.row(i));
        for (std::size_t k = 0; k < y.size(); ++k) emb.row(i)[k] = static_cast<float>(y[k]);
    }
    write_embeddings(emb, out);
    std::cout << out << '\n';
    return kExitOk;
}

int cmd_gen_data(const SyntheticSpec& spec, const std::string& train_path, const std::string& test_path,
                 const std::string& format) {
    const auto [train, test] = generate_synthetic(spec);
    save_dataset(train, train_path, parse_data_format(format));
    if (!test_path.empty()) save_dataset(test, test_path, parse_data_format(format));
    std::cout << train_path << '\n';
    if (!test_path.empty()) std::cout << test_path << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Progressive cluster purification for unsupervised feature learning"};
    app.require_subcommand(1);

    Overrides train_opts;
    auto* train = app.add_subcommand("train", "train an encoder");
    train_opts.attach(train);

    Overrides sweep_opts;
    std::string axis, values;
    auto* sweep = app.add_subcommand("sweep", "train once per value of one scalar");
    sweep_opts.attach(sweep);
    sweep->add_option("--axis", axis, "gamma | floor_clusters | alpha | k | tau")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on labeled data");
    eval->add_option("--checkpoint", eval_args.checkpoint)->required()->check(CLI::ExistingFile);
    eval->add_option("--data", eval_args.data)->required();
    eval->add_option("--data-format", eval_args.data_format);
    eval->add_option("--test-data", eval_args.test_data);
    eval->add_option("--test-format", eval_args.test_format);
    eval->add_option("--knn-k", eval_args.knn.k);
    eval->add_option("--knn-tau", eval_args.knn.tau);
    eval->add_option("--probe-epochs", eval_args.probe.epochs);
    eval->add_option("--probe-lr", eval_args.probe.lr);
    eval->add_option("--clusters", eval_args.clusters, "k for purity/NMI (default: number of classes)");
    eval->add_option("--seed", eval_args.seed);

    std::string exp_checkpoint, exp_data, exp_format = "auto", exp_out;
    auto* exp = app.add_subcommand("export", "write PCPE embeddings of a dataset");
    exp->add_option("--checkpoint", exp_checkpoint)->required()->check(CLI::ExistingFile);
    exp->add_option("--data", exp_data)->required();
    exp->add_option("--data-format", exp_format);
    exp->add_option("-o,--out", exp_out)->required();

    SyntheticSpec spec;
    std::string gen_train, gen_test, gen_format = "auto";
    auto* gen = app.add_subcommand("gen-data", "write the synthetic Gaussian benchmark");
    gen->add_option("--classes", spec.classes);
    gen->add_option("--train-per-class", spec.train_per_class);
    gen->add_option("--test-per-class", spec.test_per_class);
    gen->add_option("--dim", spec.dim);
    gen->add_option("--overlap", spec.overlap, "isotropic noise scale");
    gen->add_option("--elongation", spec.elongation, "per-class stretch along a random axis");
    gen->add_option("--seed", spec.seed);
    gen->add_option("--train-out", gen_train)->required();
    gen->add_option("--test-out", gen_test);
    gen->add_option("--format", gen_format, "csv | bin | auto");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train) return cmd_train(train_opts);
        if (*sweep) return cmd_sweep(sweep_opts, axis, values);
        if (*eval) return cmd_eval(eval_args);
        if (*exp) return cmd_export(exp_checkpoint, exp_data, exp_format, exp_out);
        if (*gen) return cmd_gen_data(spec, gen_train, gen_test, gen_format);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOther;
}
