#pragma once

#include "pcp/embedding.hpp"
#include "pcp/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace pcp {

using ClusterId = std::uint32_t;
using SampleId = std::uint32_t;

inline constexpr SampleId kNoSample = std::numeric_limits<SampleId>::max();

struct ScheduleParams {
    std::size_t total_samples = 0;   // N
    std::size_t total_epochs = 200;  // T
    std::size_t floor_clusters = 1000;

    void validate() const;
};

// Unclamped cluster count round(10^((1 - t/T) lg N)), rounding half up.
std::size_t unclamped_cluster_count(std::size_t total_samples, std::size_t total_epochs, std::size_t epoch);

// Log-linear decline from N at t = 0, clamped below at floor_clusters.
// Throws ScheduleRange when epoch > total_epochs.
std::size_t schedule_cluster_count(const ScheduleParams& params, std::size_t epoch);

struct ClusterState {
    std::size_t epoch = 0;
    std::size_t num_clusters = 0;
    std::vector<ClusterId> assignment;  // per sample
    Matrix centroids;                   // num_clusters x D
    std::vector<double> distance;       // per sample, Euclidean to own centroid
    std::vector<SampleId> medoid;       // per cluster; kNoSample when empty
    std::vector<double> objective_trace;  // sum of squared distances after each assignment pass
    std::size_t iterations = 0;

    std::vector<std::vector<SampleId>> members() const;
};

struct KMeansOptions {
    std::size_t max_iterations = 100;
    double relative_tolerance = 1e-6;
};

/// Lloyd's algorithm with k-means++ seeding on the bank rows.
///
/// Euclidean distances on the unit-norm rows. Empty clusters are re-seeded at
/// the sample farthest from its current centroid. Stops when assignments are
/// unchanged, the objective improves by less than `relative_tolerance`
/// (relative), or after `max_iterations` passes. k == N bypasses the
/// iterations and emits singleton clusters.
ClusterState kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts = {});
ClusterState kmeans_fit(const EmbeddingBank& bank, std::size_t k, std::uint64_t seed, const KMeansOptions& opts = {});

/// Member of `c` closest to its centroid; lowest sample id wins ties.
SampleId medoid_of(const ClusterState& state, ClusterId c);

} // namespace pcp
