#include "pcp/trainer.hpp"

#include "pcp/error.hpp"
#include "pcp/objective.hpp"
#include "pcp/purification.hpp"
#include "pcp/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace pcp {

using nlohmann::ordered_json;

const char* to_string(Stage stage) {
    switch (stage) {
    case Stage::Schedule: return "schedule";
    case Stage::Snapshot: return "snapshot";
    case Stage::KMeans: return "kmeans";
    case Stage::PushHistory: return "push_history";
    case Stage::FilterUnreliable: return "filter_unreliable";
    case Stage::VoteRefine: return "vote_refine";
    case Stage::Learn: return "learn";
    case Stage::Evaluate: return "evaluate";
    }
    return "unknown";
}

ordered_json to_json(const EpochRecord& r) {
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
    ordered_json j;
    j["round"] = r.round;
    j["epoch"] = r.epoch;
    j["num_clusters"] = r.num_clusters;
    j["loss_instance"] = r.loss_instance;
    j["loss_cluster"] = r.loss_cluster;
    j["loss_total"] = r.loss_total;
    j["warmup_weight"] = r.warmup_weight;
    j["kept_fraction"] = r.kept_fraction;
    j["demoted_count"] = r.demoted_count;
    j["pulled_back_count"] = r.pulled_back_count;
    j["cluster_pairs"] = r.cluster_pairs;
    j["knn_accuracy"] = opt(r.knn_accuracy);
    j["purity"] = opt(r.purity);
    j["nmi"] = opt(r.nmi);
    j["filter_precision"] = opt(r.filter_precision);
    j["filter_recall"] = opt(r.filter_recall);
    j["wall_time"] = opt(r.wall_time);
    return j;
}

void write_metrics(const std::vector<EpochRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

namespace {

constexpr std::uint32_t kInstance = std::numeric_limits<std::uint32_t>::max();

Matrix embed_all(const Encoder& encoder, const Matrix& x) {
    Matrix out(x.rows, encoder.output_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto y = encoder.embed(x.row(i));
        auto dst = out.row(i);
        for (std::size_t k = 0; k < y.size(); ++k) dst[k] = static_cast<float>(y[k]);
    }
    return out;
}

struct EpochLosses {
    double instance_sum = 0.0;
    std::size_t instance_terms = 0;
    double cluster_sum = 0.0;
    std::size_t cluster_terms = 0;
};

// Everything the per-batch learning step needs for one epoch.
struct LearnPlan {
    Mode mode = Mode::Pcp;
    double aux_weight = 0.0;                 // weight of the all-sample instance term
    std::vector<std::uint32_t> role;         // cluster index or kInstance per sample
    const std::vector<std::vector<SampleId>>* clusters = nullptr;
    std::optional<std::size_t> pair_cap;
};

class Trainer {
public:
    Trainer(const RunConfig& config, const Dataset& train, const Dataset* test, TrainObserver* observer)
        : cfg_(config),
          train_(train),
          test_(test),
          observer_(observer),
          encoder_(make_spec(config, train), derive_seed(config.seed, Stream::Encoder)),
          bank_(train.size(), config.encoder.output_dim, derive_seed(config.seed, Stream::Bank)),
          history_(config.purify.window, train.size()) {
        opt_.lr0 = cfg_.optim.lr0;
        opt_.momentum = cfg_.optim.momentum;
        opt_.weight_decay = cfg_.optim.weight_decay;
        if (test_ && test_->dim() != train_.dim())
            throw Error(ErrorKind::IngestError, "test split has dimension " + std::to_string(test_->dim()) +
                                                    ", train has " + std::to_string(train_.dim()));
    }

    TrainResult run() {
        std::vector<EpochRecord> records;
        const std::size_t T = cfg_.total_epochs;
        for (std::size_t round = 0; round < cfg_.rounds; ++round)
            for (std::size_t epoch = 0; epoch < T; ++epoch) {
                const bool last = round + 1 == cfg_.rounds && epoch + 1 == T;
                try {
                    records.push_back(run_epoch(round, epoch, last));
                } catch (const Error& e) {
                    throw Error(e.kind(), "round " + std::to_string(round) + " epoch " + std::to_string(epoch) + ": " +
                                              e.what());
                }
                if (observer_) observer_->on_epoch(records.back());
            }
        return {std::move(encoder_), std::move(bank_), std::move(records)};
    }

private:
    static EncoderSpec make_spec(const RunConfig& config, const Dataset& train) {
        config.validate(train.size());
        EncoderSpec spec = config.encoder;
        spec.input_dim = train.dim();
        return spec;
    }

    void stage(Stage s, std::size_t round, std::size_t epoch) {
        if (observer_) observer_->on_stage(s, round, epoch);
    }

    std::size_t cluster_count(std::size_t round, std::size_t epoch) const {
        if (cfg_.mode == Mode::DcBaseline || round > 0) return cfg_.floor_clusters;
        ScheduleParams params{train_.size(), cfg_.total_epochs, cfg_.floor_clusters};
        return schedule_cluster_count(params, epoch);
    }

    EpochRecord run_epoch(std::size_t round, std::size_t epoch, bool last) {
        const auto started = std::chrono::steady_clock::now();
        const std::size_t N = train_.size();
        const std::size_t global_epoch = round * cfg_.total_epochs + epoch;
        EpochRecord rec;
        rec.round = round;
        rec.epoch = epoch;

        LearnPlan plan;
        plan.mode = cfg_.mode;
        plan.pair_cap = cfg_.loss.cluster_pair_cap;
        PseudoLabelSet pseudo;
        std::optional<ClusterState> state;

        if (cfg_.mode == Mode::IrBaseline) {
            rec.num_clusters = N;
            plan.role.assign(N, kInstance);
            rec.kept_fraction = 0.0;
        } else {
            stage(Stage::Schedule, round, epoch);
            const std::size_t k = std::min(cluster_count(round, epoch), N);
            rec.num_clusters = k;

            // The bank is the feature snapshot; it trails the encoder by one momentum step.
            stage(Stage::Snapshot, round, epoch);
            const Matrix& snapshot = bank_.vectors();

            stage(Stage::KMeans, round, epoch);
            state = kmeans_fit(snapshot, k, derive_seed(cfg_.seed, Stream::KMeans, global_epoch), cfg_.kmeans);
            state->epoch = global_epoch;

            stage(Stage::PushHistory, round, epoch);
            history_.push(state->assignment);

            stage(Stage::FilterUnreliable, round, epoch);
            const double gamma = cfg_.mode == Mode::Pcp ? cfg_.purify.gamma : 0.0;
            const ReliableSplit split = filter_unreliable(*state, gamma);

            stage(Stage::VoteRefine, round, epoch);
            PurifyParams purify = cfg_.purify;
            purify.cps_enabled = cfg_.mode == Mode::Pcp && cfg_.purify.cps_enabled;
            pseudo = refine_with_votes(split, *state, history_, purify);

            plan.role.assign(N, kInstance);
            for (std::size_t c = 0; c < pseudo.cluster_members.size(); ++c)
                for (SampleId i : pseudo.cluster_members[c]) plan.role[i] = static_cast<std::uint32_t>(c);
            plan.clusters = &pseudo.cluster_members;
            rec.kept_fraction = static_cast<double>(pseudo.clustered_count()) / static_cast<double>(N);
            rec.demoted_count = pseudo.demoted;
            rec.pulled_back_count = pseudo.pulled_back;
            rec.cluster_pairs = pseudo.cluster_pair_count();
        }

        if (cfg_.mode != Mode::IrBaseline && round == 0 && cfg_.loss.warmup)
            plan.aux_weight = warmup_weight(static_cast<double>(epoch), cfg_.loss);
        rec.warmup_weight = plan.aux_weight;

        stage(Stage::Learn, round, epoch);
        const double lr = lr_at_epoch(static_cast<double>(epoch), cfg_.optim.schedule());
        const EpochLosses losses = learn(plan, lr, global_epoch);
        rec.loss_instance = losses.instance_terms ? losses.instance_sum / losses.instance_terms : 0.0;
        rec.loss_cluster = losses.cluster_terms ? losses.cluster_sum / losses.cluster_terms : 0.0;
        rec.loss_total = loss_total(rec.loss_instance, rec.loss_cluster);

        if (last || (epoch + 1) % cfg_.eval.every == 0) {
            stage(Stage::Evaluate, round, epoch);
            evaluate(rec, global_epoch);
            if (state && train_.labels) {
                const auto q = filter_pr(pseudo, *state, *train_.labels);
                rec.filter_precision = q.precision;
                rec.filter_recall = q.recall;
            }
        }
        if (cfg_.log_wall_time)
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return rec;
    }

    EpochLosses learn(const LearnPlan& plan, double lr, std::size_t global_epoch) {
        const std::size_t N = train_.size();
        const std::size_t D = bank_.dim();
        const double tau = cfg_.loss.tau;
        std::vector<SampleId> order(N);
        std::iota(order.begin(), order.end(), SampleId{0});
        std::mt19937_64 shuffle_rng(derive_seed(cfg_.seed, Stream::Shuffle, global_epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        std::mt19937_64 pair_rng(derive_seed(cfg_.seed, Stream::PairSampling, global_epoch));

        EpochLosses losses;
        EncoderGrads grads = encoder_.make_grads();
        std::vector<std::vector<double>> fresh;
        std::vector<SampleId> targets;
        const double pcp_weight = 1.0 - plan.aux_weight;

        for (std::size_t start = 0; start < N; start += cfg_.optim.batch_size) {
            const std::size_t stop = std::min(N, start + cfg_.optim.batch_size);
            const std::size_t B = stop - start;

            // Term counts for this batch fix the per-term weights of the batch mean.
            std::size_t n_instance = 0, n_pairs = 0;
            std::vector<std::vector<SampleId>> batch_targets(B);
            for (std::size_t b = 0; b < B; ++b) {
                const SampleId j = order[start + b];
                if (plan.mode == Mode::IrBaseline || plan.role[j] == kInstance) {
                    ++n_instance;
                    continue;
                }
                const auto& members = (*plan.clusters)[plan.role[j]];
                auto& t = batch_targets[b];
                const std::size_t m = members.size();
                if (plan.pair_cap && m * m > *plan.pair_cap) {
                    // Each query keeps about cap / m targets so the cluster contributes ~cap pairs.
                    const std::size_t per_query = std::max<std::size_t>(1, *plan.pair_cap / m);
                    t = members;
                    for (std::size_t s = 0; s < per_query; ++s) {
                        std::uniform_int_distribution<std::size_t> pick(s, m - 1);
                        std::swap(t[s], t[pick(pair_rng)]);
                    }
                    t.resize(per_query);
                } else {
                    t = members;
                }
                n_pairs += t.size();
            }

            grads.zero();
            fresh.assign(B, {});
            for (std::size_t b = 0; b < B; ++b) {
                const SampleId j = order[start + b];
                const auto cache = encoder_.forward(train_.features.row(j));
                const QuerySoftmax softmax(bank_, cache.output, tau);
                std::vector<double> g(D, 0.0);
                auto add = [&](std::span<const SampleId> ids, double weight) {
                    if (weight == 0.0) return;
                    const auto gq = grad_wrt_query(bank_, ids, softmax);
                    for (std::size_t k = 0; k < D; ++k) g[k] += weight * gq[k];
                };
                const SampleId self[1] = {j};
                const double self_nll = softmax.neg_log_prob(j);

                if (plan.aux_weight > 0.0) add(self, plan.aux_weight / static_cast<double>(B));
                const bool joint = cfg_.loss.normalization == LossNormalization::Joint;
                const double joint_weight = pcp_weight / static_cast<double>(n_instance + n_pairs);
                if (plan.mode == Mode::IrBaseline || plan.role[j] == kInstance) {
                    add(self, joint ? joint_weight : pcp_weight / static_cast<double>(n_instance));
                    losses.instance_sum += self_nll;
                    ++losses.instance_terms;
                } else {
                    const auto& t = batch_targets[b];
                    add(t, joint ? joint_weight : pcp_weight / static_cast<double>(n_pairs));
                    for (SampleId i : t) losses.cluster_sum += softmax.neg_log_prob(i);
                    losses.cluster_terms += t.size();
                }
                encoder_.backward(cache, g, grads);
                fresh[b] = cache.output;
            }
            sgd_step(encoder_, grads, opt_, lr);
            for (std::size_t b = 0; b < B; ++b) bank_.update(order[start + b], fresh[b], cfg_.bank_momentum);

            if (!std::isfinite(losses.instance_sum) || !std::isfinite(losses.cluster_sum))
                throw Error(ErrorKind::NumericError, "non-finite loss during learning");
        }
        return losses;
    }

    void evaluate(EpochRecord& rec, std::size_t global_epoch) const {
        if (!train_.labels) return;
        const auto& labels = *train_.labels;
        const Matrix train_emb = embed_all(encoder_, train_.features);
        std::size_t classes = train_.num_classes();
        if (test_ && test_->labels) classes = std::max(classes, test_->num_classes());

        if (test_ && test_->labels) {
            const Matrix test_emb = embed_all(encoder_, test_->features);
            rec.knn_accuracy = knn_accuracy(train_emb, labels, test_emb, *test_->labels, cfg_.eval.knn, classes);
        } else {
            rec.knn_accuracy = knn_accuracy(train_emb, labels, train_emb, labels, cfg_.eval.knn, classes, true);
        }

        const std::size_t k = std::min(cfg_.eval.clusters ? cfg_.eval.clusters : train_.num_classes(), train_.size());
        if (k >= 1) {
            const auto s = kmeans_fit(train_emb, k, derive_seed(cfg_.seed, Stream::EvalKMeans, global_epoch), cfg_.kmeans);
            rec.purity = cluster_purity(s.assignment, labels);
            rec.nmi = nmi(s.assignment, labels);
        }
    }

    const RunConfig& cfg_;
    const Dataset& train_;
    const Dataset* test_;
    TrainObserver* observer_;
    Encoder encoder_;
    EmbeddingBank bank_;
    AssignmentHistory history_;
    OptimState opt_;
};

} // namespace

TrainResult run_training(const RunConfig& config, const Dataset& train, const Dataset* test, TrainObserver* observer) {
    return Trainer(config, train, test, observer).run();
}

TrainResult run_training_to_disk(const RunConfig& config) {
    if (config.data.path.empty()) throw Error(ErrorKind::ConfigError, "data.path is required");
    const Dataset train = load_dataset(config.data.path, parse_data_format(config.data.format));
    std::optional<Dataset> test;
    if (!config.data.test_path.empty()) test = load_dataset(config.data.test_path, parse_data_format(config.data.test_format));

    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

    ordered_json header;
    header["config"] = to_json(config);
    header["num_samples"] = train.size();
    header["input_dim"] = train.dim();
    header["labels"] = train.labels.has_value();
    header["bank_carried_across_rounds"] = true;
    header["kmeans_reseeded_each_epoch"] = true;
    {
        std::ofstream out(dir / "run.json", std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "run.json").string());
        out << header.dump(2) << '\n';
    }

    TrainResult result = run_training(config, train, test ? &*test : nullptr);
    write_metrics(result.records, dir / "metrics.jsonl");
    save_checkpoint(result.encoder, dir / "checkpoint.pcpw");
    export_embeddings(result.bank, dir / "embeddings.pcpe");
    return result;
}

} // namespace pcp
