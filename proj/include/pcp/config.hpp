#pragma once

#include "pcp/clustering.hpp"
#include "pcp/encoder.hpp"
#include "pcp/evaluation.hpp"
#include "pcp/objective.hpp"
#include "pcp/purification.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcp {

enum class Mode {
    Pcp,         // progressive clustering + purification
    DcBaseline,  // fixed cluster count, no purification
    IrBaseline,  // instance discrimination over every sample
};

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct DataConfig {
    std::string path;
    std::string format = "auto";
    std::string test_path;  // optional held-out split for kNN accuracy
    std::string test_format = "auto";
};

struct OptimConfig {
    double lr0 = 0.03;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    std::vector<double> lr_milestones{120, 160};
    std::vector<double> lr_factors{0.1, 0.01};
    std::size_t batch_size = 128;

    LrSchedule schedule() const { return {lr0, lr_milestones, lr_factors}; }
};

struct EvalConfig {
    KnnParams knn;
    std::size_t every = 1;     // evaluate on every n-th epoch and on the last one
    std::size_t clusters = 0;  // k for the purity/NMI clustering; 0 = number of classes
};

struct RunConfig {
    DataConfig data;
    EncoderSpec encoder;  // input_dim comes from the dataset
    std::size_t total_epochs = 200;
    std::size_t floor_clusters = 1000;
    PurifyParams purify;
    LossParams loss;
    OptimConfig optim;
    double bank_momentum = 0.5;
    KMeansOptions kmeans;
    EvalConfig eval;
    std::size_t rounds = 1;
    Mode mode = Mode::Pcp;
    std::uint64_t seed = 0;
    std::string output_dir = "runs/default";
    bool log_wall_time = false;  // off keeps metrics logs byte-reproducible

    /// Throws ConfigError. `num_samples` is checked when nonzero.
    void validate(std::size_t num_samples = 0) const;

    /// Multiplies every epoch-valued milestone (voting activation, warm-up
    /// end, learning-rate steps) by `factor`, rounding to whole epochs.
    void scale_milestones(double factor);
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Scalar axes a sweep may vary.
const std::vector<std::string>& sweep_axes();
/// Sets a named scalar; throws ConfigError for unknown names.
void set_axis(RunConfig& config, const std::string& axis, double value);

} // namespace pcp
