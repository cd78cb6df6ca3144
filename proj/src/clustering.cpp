#include "pcp/clustering.hpp"

#include "pcp/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace pcp {

void ScheduleParams::validate() const {
    if (total_epochs < 1) throw Error(ErrorKind::ConfigError, "total_epochs must be >= 1");
    if (floor_clusters < 1 || floor_clusters > total_samples)
        throw Error(ErrorKind::ConfigError, "floor_clusters must lie in [1, N] (got " + std::to_string(floor_clusters) +
                                                ", N=" + std::to_string(total_samples) + ")");
}

std::size_t unclamped_cluster_count(std::size_t total_samples, std::size_t total_epochs, std::size_t epoch) {
    if (epoch > total_epochs)
        throw Error(ErrorKind::ScheduleRange,
                    "epoch " + std::to_string(epoch) + " beyond total_epochs " + std::to_string(total_epochs));
    if (epoch == 0) return total_samples;
    // 10^((1 - t/T) lg N) == N^((T - t)/T); the power form avoids a log/exp round trip.
    const double exponent = static_cast<double>(total_epochs - epoch) / static_cast<double>(total_epochs);
    const double value = std::pow(static_cast<double>(total_samples), exponent);
    return static_cast<std::size_t>(std::floor(value + 0.5));
}

std::size_t schedule_cluster_count(const ScheduleParams& params, std::size_t epoch) {
    const std::size_t raw = unclamped_cluster_count(params.total_samples, params.total_epochs, epoch);
    return std::max(raw, params.floor_clusters);
}

std::vector<std::vector<SampleId>> ClusterState::members() const {
    std::vector<std::vector<SampleId>> out(num_clusters);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(static_cast<SampleId>(i));
    return out;
}

namespace {

struct AssignResult {
    double objective = 0.0;
    bool changed = false;
};

// Nearest centroid per sample; the lowest centroid id wins ties.
AssignResult assign_nearest(const Matrix& points, const Matrix& centroids, std::vector<ClusterId>& assignment,
                            std::vector<double>& sq_dist) {
    AssignResult r;
    const std::size_t n = points.rows;
    const std::size_t k = centroids.rows;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = points.row(i);
        double best = squared_distance(p, centroids.row(0));
        ClusterId best_c = 0;
        for (std::size_t c = 1; c < k; ++c) {
            const double d = squared_distance(p, centroids.row(c));
            if (d < best) {
                best = d;
                best_c = static_cast<ClusterId>(c);
            }
        }
        if (assignment[i] != best_c) r.changed = true;
        assignment[i] = best_c;
        sq_dist[i] = best;
        r.objective += best;
    }
    return r;
}

void seed_plus_plus(const Matrix& points, std::size_t k, std::mt19937_64& rng, Matrix& centroids) {
    const std::size_t n = points.rows;
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(n, 0);
    std::uniform_int_distribution<std::size_t> pick_any(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::size_t next = pick_any(rng);
    for (std::size_t c = 0; c < k; ++c) {
        chosen[next] = 1;
        auto dst = centroids.row(c);
        const auto src = points.row(next);
        std::copy(src.begin(), src.end(), dst.begin());
        if (c + 1 == k) break;

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c)));
            if (!chosen[i]) total += nearest[i];
        }
        if (total > 0.0) {
            double target = unit(rng) * total;
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || nearest[i] <= 0.0) continue;
                pick = i;
                target -= nearest[i];
                if (target < 0.0) break;
            }
            next = pick;
        } else {
            // Every remaining point duplicates a chosen centroid: take the
            // first unchosen one in a random rotation.
            const std::size_t start = pick_any(rng);
            next = n;
            for (std::size_t s = 0; s < n; ++s) {
                const std::size_t i = (start + s) % n;
                if (!chosen[i]) {
                    next = i;
                    break;
                }
            }
        }
    }
}

void update_centroids(const Matrix& points, const std::vector<ClusterId>& assignment, const std::vector<double>& sq_dist,
                      Matrix& centroids) {
    const std::size_t k = centroids.rows;
    const std::size_t d = centroids.cols;
    std::vector<double> sums(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        const ClusterId c = assignment[i];
        const auto p = points.row(i);
        for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += p[j];
        ++counts[c];
    }

    std::vector<std::size_t> empties;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            empties.push_back(c);
            continue;
        }
        auto dst = centroids.row(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<float>(sums[c * d + j] / counts[c]);
    }
    if (empties.empty()) return;

    // Farthest samples first; each re-seeded cluster takes a distinct sample.
    std::vector<SampleId> order(points.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<SampleId>(i);
    std::stable_sort(order.begin(), order.end(), [&](SampleId a, SampleId b) { return sq_dist[a] > sq_dist[b]; });
    for (std::size_t e = 0; e < empties.size() && e < order.size(); ++e) {
        const auto src = points.row(order[e]);
        auto dst = centroids.row(empties[e]);
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

void finish_state(const Matrix& points, ClusterState& s, const std::vector<double>& sq_dist) {
    s.distance.resize(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i) s.distance[i] = std::sqrt(sq_dist[i]);
    s.medoid.assign(s.num_clusters, kNoSample);
    for (std::size_t i = 0; i < points.rows; ++i) {
        const ClusterId c = s.assignment[i];
        const SampleId cur = s.medoid[c];
        if (cur == kNoSample || s.distance[i] < s.distance[cur]) s.medoid[c] = static_cast<SampleId>(i);
    }
}

} // namespace

ClusterState kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
    const std::size_t n = points.rows;
    if (k < 1) throw Error(ErrorKind::InvalidK, "k must be >= 1");
    if (k > n)
        throw Error(ErrorKind::TooManyClusters, "k=" + std::to_string(k) + " exceeds N=" + std::to_string(n));

    ClusterState s;
    s.num_clusters = k;
    s.assignment.assign(n, 0);
    std::vector<double> sq_dist(n, 0.0);

    if (k == n) {
        s.centroids = points;
        for (std::size_t i = 0; i < n; ++i) s.assignment[i] = static_cast<ClusterId>(i);
        s.objective_trace.push_back(0.0);
        finish_state(points, s, sq_dist);
        return s;
    }

    std::mt19937_64 rng(seed);
    s.centroids = Matrix(k, points.cols);
    seed_plus_plus(points, k, rng, s.centroids);

    auto r = assign_nearest(points, s.centroids, s.assignment, sq_dist);
    s.objective_trace.push_back(r.objective);
    double objective = r.objective;
    while (s.iterations < opts.max_iterations) {
        ++s.iterations;
        update_centroids(points, s.assignment, sq_dist, s.centroids);
        r = assign_nearest(points, s.centroids, s.assignment, sq_dist);
        s.objective_trace.push_back(r.objective);
        const bool small_gain = objective - r.objective <= opts.relative_tolerance * objective;
        objective = r.objective;
        if (!r.changed || small_gain) break;
    }
    finish_state(points, s, sq_dist);
    return s;
}

ClusterState kmeans_fit(const EmbeddingBank& bank, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
    return kmeans_fit(bank.vectors(), k, seed, opts);
}

SampleId medoid_of(const ClusterState& state, ClusterId c) {
    if (c >= state.num_clusters) throw Error(ErrorKind::IndexError, "cluster id " + std::to_string(c) + " out of range");
    SampleId best = kNoSample;
    for (std::size_t i = 0; i < state.assignment.size(); ++i) {
        if (state.assignment[i] != c) continue;
        if (best == kNoSample || state.distance[i] < state.distance[best]) best = static_cast<SampleId>(i);
    }
    if (best == kNoSample) throw Error(ErrorKind::EmptyCluster, "cluster " + std::to_string(c) + " has no members");
    return best;
}

} // namespace pcp
