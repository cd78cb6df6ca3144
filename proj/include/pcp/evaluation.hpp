#pragma once

#include "pcp/clustering.hpp"
#include "pcp/matrix.hpp"
#include "pcp/purification.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcp {

using Label = std::int32_t;

struct LabeledSplit {
    Matrix train;
    std::vector<Label> train_labels;
    Matrix test;
    std::vector<Label> test_labels;
    std::size_t num_classes = 0;

    void validate() const;
};

struct KnnParams {
    std::size_t k = 200;
    double tau = 0.1;
};

/// Weighted kNN: the k most similar training rows (ties -> lower row id) vote
/// for their label with weight exp(sim / tau); the heaviest class wins and
/// ties go to the lower class id. k is clamped to the training set size.
Label knn_predict(const Matrix& train, std::span<const Label> labels, std::span<const double> query,
                  const KnnParams& params, std::size_t num_classes);

/// Fraction of `queries` whose kNN prediction equals the true label. With
/// `exclude_self`, query row i never votes for itself (leave-one-out on the
/// training set; requires queries == train).
double knn_accuracy(const Matrix& train, std::span<const Label> train_labels, const Matrix& queries,
                    std::span<const Label> query_labels, const KnnParams& params, std::size_t num_classes,
                    bool exclude_self = false);

struct ProbeParams {
    std::size_t epochs = 100;
    double lr = 0.5;
    std::uint64_t seed = 0;
};

struct ProbeResult {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Softmax regression on frozen embeddings trained by full-batch gradient
/// descent. Throws DegenerateLabels when the training labels take one value.
ProbeResult linear_probe(const LabeledSplit& split, const ProbeParams& params);

double cluster_purity(std::span<const ClusterId> assignment, std::span<const Label> labels);

/// Mutual information over the arithmetic mean of the two entropies.
/// Zero when either partition is constant.
double nmi(std::span<const ClusterId> assignment, std::span<const Label> labels);

struct FilterQuality {
    std::optional<double> precision;  // absent when nothing was sent to the instance set
    double recall = 1.0;
    std::size_t truly_noisy = 0;
    std::size_t flagged = 0;
};

/// Ground-truth audit of purification. A sample is noise when its label
/// differs from the majority label (lowest label on ties) of its k-means
/// cluster; flagged samples are the instance set.
FilterQuality filter_pr(const PseudoLabelSet& pseudo, const ClusterState& state, std::span<const Label> labels);

} // namespace pcp
