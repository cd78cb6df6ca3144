#pragma once

#include "pcp/clustering.hpp"

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace pcp {

/// Sliding window over past per-sample cluster assignments, newest first.
/// Holds at most window + 1 entries (epochs t, t-1, ..., t-window).
class AssignmentHistory {
public:
    AssignmentHistory(std::size_t window, std::size_t num_samples);

    std::size_t window() const { return window_; }
    std::size_t num_samples() const { return num_samples_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Entry pushed `k` steps ago (k = 0 is the newest).
    const std::vector<ClusterId>& at(std::size_t k) const;

    /// Throws DimensionMismatch when the length differs from num_samples.
    void push(std::vector<ClusterId> assignment);

private:
    std::size_t window_;
    std::size_t num_samples_;
    std::deque<std::vector<ClusterId>> entries_;
};

inline void push_history(AssignmentHistory& history, std::vector<ClusterId> assignment) {
    history.push(std::move(assignment));
}

struct PurifyParams {
    double gamma = 0.5;
    double alpha = 0.9;
    double theta_low = 0.0;
    double theta_high = 3.0;
    std::size_t activation_epoch = 100;
    std::size_t window = 15;
    bool cps_enabled = true;

    void validate() const;
};

/// Per-cluster outcome of distance-based filtering.
struct ReliableSplit {
    std::vector<std::vector<SampleId>> retained;   // S_c^r, nearest first
    std::vector<std::vector<SampleId>> discarded;  // N_c^r
};

/// Mixed pseudo labels: retained clusters (ids compacted, all nonempty) and
/// the samples supervised as their own instance.
struct PseudoLabelSet {
    std::size_t epoch = 0;
    std::vector<std::vector<SampleId>> cluster_members;
    std::vector<ClusterId> source_cluster;  // k-means id each retained cluster came from
    std::vector<SampleId> instance_ids;
    std::size_t demoted = 0;      // moved S^r -> instance set by voting
    std::size_t pulled_back = 0;  // moved N^r -> cluster by voting

    std::size_t clustered_count() const;
    std::size_t cluster_pair_count() const;
};

/// In each cluster of size m the floor(gamma * m) members farthest from the
/// centroid are discarded, never the medoid. Ties in distance keep the lower
/// sample id.
ReliableSplit filter_unreliable(const ClusterState& state, double gamma);

/// Decayed agreement of sample i with reference sample ref over the history:
/// sum_k alpha^k * (+1 if same cluster at step k else -1).
double voting_score(const AssignmentHistory& history, SampleId i, SampleId ref, double alpha);

/// Applies the voting thresholds to a reliable split when voting is active
/// for state.epoch; otherwise passes the split through. history.at(0) must be
/// the current epoch's assignment.
PseudoLabelSet refine_with_votes(const ReliableSplit& split, const ClusterState& state,
                                 const AssignmentHistory& history, const PurifyParams& params);

/// Converts a split into pseudo labels without voting.
PseudoLabelSet pseudo_labels_from_split(const ReliableSplit& split, std::size_t epoch);

} // namespace pcp
