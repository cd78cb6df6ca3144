#pragma once

#include "pcp/config.hpp"
#include "pcp/dataset.hpp"
#include "pcp/embedding.hpp"
#include "pcp/encoder.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace pcp {

struct EpochRecord {
    std::size_t round = 0;
    std::size_t epoch = 0;  // within the round
    std::size_t num_clusters = 0;
    double loss_instance = 0.0;
    double loss_cluster = 0.0;
    double loss_total = 0.0;
    double warmup_weight = 0.0;
    double kept_fraction = 0.0;
    std::size_t demoted_count = 0;
    std::size_t pulled_back_count = 0;
    std::size_t cluster_pairs = 0;
    std::optional<double> knn_accuracy;
    std::optional<double> purity;
    std::optional<double> nmi;
    std::optional<double> filter_precision;
    std::optional<double> filter_recall;
    std::optional<double> wall_time;
};

nlohmann::ordered_json to_json(const EpochRecord& record);

// Steps of one epoch, in execution order.
enum class Stage { Schedule, Snapshot, KMeans, PushHistory, FilterUnreliable, VoteRefine, Learn, Evaluate };

const char* to_string(Stage stage);

class TrainObserver {
public:
    virtual ~TrainObserver() = default;
    virtual void on_stage(Stage, std::size_t /*round*/, std::size_t /*epoch*/) {}
    virtual void on_epoch(const EpochRecord&) {}
};

struct TrainResult {
    Encoder encoder;
    EmbeddingBank bank;
    std::vector<EpochRecord> records;
};

/// Runs every round of cluster -> purify -> learn epochs.
///
/// Labels on `train` and the optional `test` split feed evaluation only. kNN
/// accuracy uses `test` when given, otherwise leave-one-out on `train`.
TrainResult run_training(const RunConfig& config, const Dataset& train, const Dataset* test = nullptr,
                         TrainObserver* observer = nullptr);

/// Loads the configured data, trains, and writes metrics.jsonl, run.json,
/// checkpoint.pcpw and embeddings.pcpe under config.output_dir.
TrainResult run_training_to_disk(const RunConfig& config);

void write_metrics(const std::vector<EpochRecord>& records, const std::filesystem::path& path);

} // namespace pcp
