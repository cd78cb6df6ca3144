#pragma once

#include "pcp/clustering.hpp"
#include "pcp/embedding.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcp {

// How the training step weighs the instance and cluster terms.
//   Separate: mean of instance terms + mean of pair terms.
//   Joint:    (sum of instance terms + sum of pair terms) / term count, which
//             keeps the summed objective's ratio between the two parts.
enum class LossNormalization { Separate, Joint };

struct LossParams {
    double tau = 0.1;
    LossNormalization normalization = LossNormalization::Joint;
    std::optional<std::size_t> cluster_pair_cap;  // max sampled ordered pairs per cluster
    bool warmup = true;
    double warm_start_weight = 0.8;
    double warm_end_weight = 0.5;
    double warm_end_epoch = 180;

    void validate() const;
};

/// Non-parametric softmax over the bank rows for one query,
/// P(i|v) = exp(<v_i, v>/tau) / sum_j exp(<v_j, v>/tau).
///
/// Evaluated once per query and reused by every loss term and gradient that
/// shares the query. Uses max-subtraction so large 1/tau never overflows.
class QuerySoftmax {
public:
    QuerySoftmax(const EmbeddingBank& bank, std::span<const double> v, double tau);

    double prob(std::size_t i) const;
    /// -log P(i|v)
    double neg_log_prob(std::size_t i) const;
    /// sum_j P(j|v) v_j
    const std::vector<double>& expected_row() const { return expected_; }
    double log_partition() const { return log_z_; }
    std::span<const double> sims() const { return sims_; }
    double tau() const { return tau_; }

private:
    double tau_;
    double log_z_ = 0.0;
    std::vector<double> sims_;
    std::vector<double> expected_;
};

double prob_instance(const EmbeddingBank& bank, std::size_t i, std::span<const double> v, double tau);

/// Mean over ids of -log P(id | fresh[k]); fresh has one row per id. Empty -> 0.
double loss_instance(const EmbeddingBank& bank, std::span<const SampleId> instance_ids,
                     const std::vector<std::vector<double>>& fresh, double tau);

/// Cluster members with their current encoder outputs, aligned by position.
struct ClusterBatch {
    std::vector<SampleId> members;
    std::vector<std::vector<double>> fresh;
};

/// Mean over every ordered pair (i, j) within each cluster, i == j included,
/// of -log P(i | fresh_j). With a pair cap, each cluster with more than `cap`
/// ordered pairs contributes `cap` pairs drawn uniformly without replacement.
double loss_cluster(const EmbeddingBank& bank, const std::vector<ClusterBatch>& clusters, double tau,
                    std::optional<std::size_t> pair_cap = std::nullopt, std::uint64_t seed = 0);

/// L_instance + L_cluster. Throws NumericError on non-finite parts.
double loss_total(double instance_part, double cluster_part);

/// Weight of the auxiliary instance loss: linear from warm_start_weight at
/// epoch 0 to warm_end_weight at warm_end_epoch, constant afterwards.
/// The training loss is w * L_aux + (1 - w) * L_pcp.
double warmup_weight(double epoch, const LossParams& params);

/// d(-log P(i|v))/dv = (sum_j P(j|v) v_j - v_i) / tau, bank rows held constant.
std::vector<double> grad_wrt_query(const EmbeddingBank& bank, std::size_t i, std::span<const double> v, double tau);

/// Gradient of sum_{i in targets} -log P(i|v) given a prepared softmax.
std::vector<double> grad_wrt_query(const EmbeddingBank& bank, std::span<const SampleId> targets,
                                   const QuerySoftmax& softmax);

} // namespace pcp
