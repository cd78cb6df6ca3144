#include "support.hpp"

#include "pcp/clustering.hpp"

#include <cmath>
#include <set>

using namespace pcp;

namespace {

// Sum of squared distances to the member mean, for every 2-partition.
std::vector<int> best_two_partition(const Matrix& x) {
    const std::size_t n = x.rows;
    double best = 1e300;
    std::vector<int> best_labels;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        double cost = 0.0;
        for (int side = 0; side < 2; ++side) {
            std::vector<double> mean(x.cols, 0.0);
            int count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (static_cast<int>((mask >> i) & 1u) != side) continue;
                for (std::size_t k = 0; k < x.cols; ++k) mean[k] += x.row(i)[k];
                ++count;
            }
            for (auto& m : mean) m /= count;
            for (std::size_t i = 0; i < n; ++i)
                if (static_cast<int>((mask >> i) & 1u) == side) cost += squared_distance(x.row(i), mean);
        }
        if (cost < best) {
            best = cost;
            best_labels.assign(n, 0);
            for (std::size_t i = 0; i < n; ++i) best_labels[i] = (mask >> i) & 1u;
        }
    }
    return best_labels;
}

} // namespace

TEST_SUITE("clustering") {

TEST_CASE("schedule examples") {
    ScheduleParams p{50000, 200, 1000};
    CHECK(schedule_cluster_count(p, 0) == 50000);
    CHECK(schedule_cluster_count(p, 190) == 1000);
    p.floor_clusters = 100;
    // sqrt(50000) = 223.607 rounds to 224
    CHECK(schedule_cluster_count(p, 100) == 224);
    CHECK(unclamped_cluster_count(50000, 200, 100) == static_cast<std::size_t>(std::floor(std::sqrt(50000.0) + 0.5)));
    CHECK_KIND(schedule_cluster_count(p, 201), ErrorKind::ScheduleRange);
}

TEST_CASE("schedule properties") {
    for (std::size_t n : {2u, 7u, 100u, 999u, 5000u, 50000u}) {
        for (std::size_t t_total : {1u, 3u, 60u, 200u}) {
            const std::size_t floor = std::max<std::size_t>(1, n / 10);
            ScheduleParams p{n, t_total, floor};
            CHECK(schedule_cluster_count(p, 0) == n);
            std::size_t prev = n;
            for (std::size_t t = 0; t <= t_total; ++t) {
                const std::size_t c = schedule_cluster_count(p, t);
                CHECK(c <= prev);
                CHECK(c >= floor);
                CHECK(c <= n);
                prev = c;
            }
            CHECK(unclamped_cluster_count(n, t_total, t_total) == 1);
        }
    }
    CHECK_KIND((ScheduleParams{100, 200, 0}.validate()), ErrorKind::ConfigError);
    CHECK_KIND((ScheduleParams{100, 200, 101}.validate()), ErrorKind::ConfigError);
}

TEST_CASE("two separated pairs match the exhaustive partition") {
    const Matrix x = testing::rows_of({{1.0f, 0.0f}, {0.0f, 1.0f}, {0.995f, 0.0998f}, {0.0998f, 0.995f}});
    const auto oracle = best_two_partition(x);
    const auto st = kmeans_fit(x, 2, 1);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK((st.assignment[i] == st.assignment[j]) == (oracle[i] == oracle[j]));
    CHECK(st.assignment[0] == st.assignment[2]);
    const ClusterId c = st.assignment[0];
    CHECK(st.centroids.row(c)[0] == doctest::Approx((1.0 + 0.995) / 2).epsilon(1e-6));
    CHECK(st.centroids.row(c)[1] == doctest::Approx(0.0998 / 2).epsilon(1e-6));
}

TEST_CASE("degenerate cluster counts") {
    std::mt19937_64 rng(3);
    const Matrix x = testing::random_rows(12, 4, rng);

    const auto single = kmeans_fit(x, 12, 0);
    CHECK(single.num_clusters == 12);
    std::set<ClusterId> ids(single.assignment.begin(), single.assignment.end());
    CHECK(ids.size() == 12);
    for (double d : single.distance) CHECK(d == 0.0);
    CHECK(single.objective_trace.back() == 0.0);

    const auto one = kmeans_fit(x, 1, 0);
    for (std::size_t k = 0; k < 4; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 12; ++i) mean += x.row(i)[k];
        CHECK(one.centroids.row(0)[k] == doctest::Approx(mean / 12).epsilon(1e-6));
    }

    CHECK_KIND(kmeans_fit(x, 0, 0), ErrorKind::InvalidK);
    CHECK_KIND(kmeans_fit(x, 13, 0), ErrorKind::TooManyClusters);
}

TEST_CASE("k-means invariants on random banks") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 20 + trial * 7;
        const std::size_t k = 1 + trial % 9;
        const Matrix x = testing::random_rows(n, 5, rng);
        const auto st = kmeans_fit(x, k, trial);

        REQUIRE(st.assignment.size() == n);
        CHECK(st.centroids.rows == k);
        for (std::size_t t = 1; t < st.objective_trace.size(); ++t)
            CHECK(st.objective_trace[t] <= st.objective_trace[t - 1] * (1 + 1e-12));
        CHECK(st.iterations <= 100);

        for (std::size_t i = 0; i < n; ++i) {
            const double own = std::sqrt(squared_distance(x.row(i), st.centroids.row(st.assignment[i])));
            CHECK(st.distance[i] == doctest::Approx(own).epsilon(1e-9));
        }

        // Every cluster is nonempty and its medoid is a member.
        const auto members = st.members();
        for (ClusterId c = 0; c < k; ++c) {
            REQUIRE_FALSE(members[c].empty());
            CHECK(st.assignment[st.medoid[c]] == c);
            CHECK(medoid_of(st, c) == st.medoid[c]);
        }

        // Determinism.
        const auto again = kmeans_fit(x, k, trial);
        CHECK(again.assignment == st.assignment);
        CHECK(again.centroids == st.centroids);
    }
}

TEST_CASE("assignments are nearest-centroid after convergence") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = testing::random_rows(150, 6, rng);
        const auto st = kmeans_fit(x, 8, trial);
        if (st.iterations >= 100) continue;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double own = squared_distance(x.row(i), st.centroids.row(st.assignment[i]));
            for (ClusterId c = 0; c < 8; ++c) CHECK(own <= squared_distance(x.row(i), st.centroids.row(c)) + 1e-9);
        }
    }
}

TEST_CASE("identical points keep the state invariants") {
    Matrix x(10, 2);
    for (std::size_t i = 0; i < 10; ++i) x.row(i)[0] = 1.0f;
    const auto st = kmeans_fit(x, 3, 4);
    const auto members = st.members();
    std::size_t total = 0;
    for (ClusterId c = 0; c < 3; ++c) {
        total += members[c].size();
        if (members[c].empty()) CHECK(st.medoid[c] == kNoSample);
        else CHECK(st.assignment[st.medoid[c]] == c);
    }
    CHECK(total == 10);
    for (double d : st.distance) CHECK(d == 0.0);
}

TEST_CASE("medoid examples") {
    ClusterState st;
    st.num_clusters = 2;
    st.assignment = {0, 1, 1, 0};
    st.distance = {0.3, 0.2, 0.2, 0.1};
    st.centroids = Matrix(2, 2);
    st.medoid = {kNoSample, kNoSample};
    CHECK(medoid_of(st, 0) == 3);
    CHECK(medoid_of(st, 1) == 1);  // tie goes to the lower id

    const Matrix pair = testing::rows_of({{1.0f, 0.0f}, {0.99f, 0.141f}});
    const auto fit = kmeans_fit(pair, 1, 0);
    const std::vector<double> centroid{fit.centroids.row(0)[0], fit.centroids.row(0)[1]};
    const SampleId expected = squared_distance(pair.row(0), centroid) <= squared_distance(pair.row(1), centroid) ? 0 : 1;
    CHECK(medoid_of(fit, 0) == expected);

    ClusterState lone;
    lone.num_clusters = 2;
    lone.assignment = {0, 0};
    lone.distance = {0.0, 0.0};
    CHECK(medoid_of(lone, 0) == 0);
    CHECK_KIND(medoid_of(lone, 1), ErrorKind::EmptyCluster);
    CHECK_KIND(medoid_of(lone, 2), ErrorKind::IndexError);
}

}
