#include "pcp/evaluation.hpp"

#include "pcp/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

namespace pcp {

void LabeledSplit::validate() const {
    if (train.rows != train_labels.size() || test.rows != test_labels.size())
        throw Error(ErrorKind::DimensionMismatch, "split: one label per row required");
    if (train.cols != test.cols && test.rows > 0) throw Error(ErrorKind::DimensionMismatch, "split: train/test dims differ");
    auto check = [&](const std::vector<Label>& ls) {
        for (Label l : ls)
            if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
                throw Error(ErrorKind::DimensionMismatch, "label " + std::to_string(l) + " outside [0, num_classes)");
    };
    check(train_labels);
    check(test_labels);
}

namespace {

Label knn_vote(const Matrix& train, std::span<const Label> labels, std::span<const double> query,
               const KnnParams& params, std::size_t num_classes, std::size_t skip) {
    if (query.size() != train.cols) throw Error(ErrorKind::DimensionMismatch, "knn query has wrong dimension");
    if (labels.size() != train.rows) throw Error(ErrorKind::DimensionMismatch, "knn: one label per training row");
    if (params.k < 1) throw Error(ErrorKind::ConfigError, "knn k must be >= 1");
    if (!(params.tau > 0.0)) throw Error(ErrorKind::InvalidTemperature, "knn tau must be positive");

    std::vector<std::pair<double, std::uint32_t>> sims;
    sims.reserve(train.rows);
    for (std::size_t i = 0; i < train.rows; ++i)
        if (i != skip) sims.emplace_back(dot(train.row(i), query), static_cast<std::uint32_t>(i));
    if (sims.empty()) throw Error(ErrorKind::DimensionMismatch, "knn needs at least one training row");
    const std::size_t k = std::min(params.k, sims.size());
    auto closer = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(), closer);

    std::vector<double> omega(num_classes, 0.0);
    for (std::size_t n = 0; n < k; ++n) {
        const Label c = labels[sims[n].second];
        if (c < 0 || static_cast<std::size_t>(c) >= num_classes) throw Error(ErrorKind::IndexError, "knn label out of range");
        omega[static_cast<std::size_t>(c)] += std::exp(sims[n].first / params.tau);
    }
    return static_cast<Label>(std::max_element(omega.begin(), omega.end()) - omega.begin());
}

} // namespace

Label knn_predict(const Matrix& train, std::span<const Label> labels, std::span<const double> query,
                  const KnnParams& params, std::size_t num_classes) {
    return knn_vote(train, labels, query, params, num_classes, train.rows);
}

double knn_accuracy(const Matrix& train, std::span<const Label> train_labels, const Matrix& queries,
                    std::span<const Label> query_labels, const KnnParams& params, std::size_t num_classes,
                    bool exclude_self) {
    if (queries.rows != query_labels.size()) throw Error(ErrorKind::DimensionMismatch, "knn: one label per query");
    if (queries.rows == 0) return 0.0;
    std::size_t hits = 0;
    std::vector<double> q(queries.cols);
    for (std::size_t r = 0; r < queries.rows; ++r) {
        const auto row = queries.row(r);
        std::copy(row.begin(), row.end(), q.begin());
        const Label p = knn_vote(train, train_labels, q, params, num_classes, exclude_self ? r : train.rows);
        if (p == query_labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(queries.rows);
}

namespace {

struct Affine {
    std::size_t classes, dim;
    std::vector<double> w;  // classes x dim
    std::vector<double> b;

    void logits(std::span<const float> x, std::vector<double>& out) const {
        for (std::size_t c = 0; c < classes; ++c) {
            double s = b[c];
            for (std::size_t j = 0; j < dim; ++j) s += w[c * dim + j] * x[j];
            out[c] = s;
        }
    }

    double accuracy(const Matrix& x, std::span<const Label> y) const {
        if (x.rows == 0) return 0.0;
        std::vector<double> z(classes);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            logits(x.row(i), z);
            const auto pred = static_cast<Label>(std::max_element(z.begin(), z.end()) - z.begin());
            if (pred == y[i]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(x.rows);
    }
};

} // namespace

ProbeResult linear_probe(const LabeledSplit& split, const ProbeParams& params) {
    split.validate();
    if (split.train.rows == 0) throw Error(ErrorKind::DegenerateLabels, "linear probe needs training rows");
    const bool single = std::all_of(split.train_labels.begin(), split.train_labels.end(),
                                    [&](Label l) { return l == split.train_labels.front(); });
    if (single) throw Error(ErrorKind::DegenerateLabels, "training labels take a single value");

    const std::size_t C = split.num_classes, D = split.train.cols, N = split.train.rows;
    Affine fc{C, D, std::vector<double>(C * D), std::vector<double>(C, 0.0)};
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    for (auto& w : fc.w) w = init(rng);

    std::vector<double> z(C), gw(C * D), gb(C);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const auto x = split.train.row(i);
            fc.logits(x, z);
            const double top = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (auto& v : z) {
                v = std::exp(v - top);
                sum += v;
            }
            for (std::size_t c = 0; c < C; ++c) {
                const double g = z[c] / sum - (static_cast<Label>(c) == split.train_labels[i] ? 1.0 : 0.0);
                gb[c] += g;
                for (std::size_t j = 0; j < D; ++j) gw[c * D + j] += g * x[j];
            }
        }
        const double step = params.lr / static_cast<double>(N);
        for (std::size_t k = 0; k < gw.size(); ++k) fc.w[k] -= step * gw[k];
        for (std::size_t c = 0; c < C; ++c) fc.b[c] -= step * gb[c];
    }
    return {fc.accuracy(split.train, split.train_labels), fc.accuracy(split.test, split.test_labels)};
}

namespace {

// Contingency counts between two labelings, keyed by (a, b).
struct Contingency {
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> joint;
    std::map<std::int64_t, std::size_t> left, right;
    std::size_t n = 0;
};

template <typename A, typename B>
Contingency contingency(std::span<const A> a, std::span<const B> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::DimensionMismatch,
                    "labelings differ in length: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    Contingency t;
    t.n = a.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto x = static_cast<std::int64_t>(a[i]);
        const auto y = static_cast<std::int64_t>(b[i]);
        ++t.joint[{x, y}];
        ++t.left[x];
        ++t.right[y];
    }
    return t;
}

double entropy(const std::map<std::int64_t, std::size_t>& counts, std::size_t n) {
    double h = 0.0;
    for (const auto& [key, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

} // namespace

double cluster_purity(std::span<const ClusterId> assignment, std::span<const Label> labels) {
    const auto t = contingency(assignment, labels);
    if (t.n == 0) return 0.0;
    std::map<std::int64_t, std::size_t> best;
    for (const auto& [key, c] : t.joint) best[key.first] = std::max(best[key.first], c);
    std::size_t sum = 0;
    for (const auto& [key, c] : best) sum += c;
    return static_cast<double>(sum) / static_cast<double>(t.n);
}

double nmi(std::span<const ClusterId> assignment, std::span<const Label> labels) {
    const auto t = contingency(assignment, labels);
    if (t.n == 0) return 0.0;
    const double ha = entropy(t.left, t.n), hb = entropy(t.right, t.n);
    if (ha <= 0.0 || hb <= 0.0) return 0.0;
    const double n = static_cast<double>(t.n);
    double mi = 0.0;
    for (const auto& [key, c] : t.joint) {
        const double pxy = static_cast<double>(c) / n;
        const double px = static_cast<double>(t.left.at(key.first)) / n;
        const double py = static_cast<double>(t.right.at(key.second)) / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

FilterQuality filter_pr(const PseudoLabelSet& pseudo, const ClusterState& state, std::span<const Label> labels) {
    if (labels.size() != state.assignment.size())
        throw Error(ErrorKind::DimensionMismatch, "filter_pr: one label per sample required");
    std::vector<std::map<Label, std::size_t>> votes(state.num_clusters);
    for (std::size_t i = 0; i < labels.size(); ++i) ++votes[state.assignment[i]][labels[i]];
    std::vector<Label> majority(state.num_clusters, 0);
    for (std::size_t c = 0; c < votes.size(); ++c) {
        std::size_t top = 0;
        for (const auto& [label, count] : votes[c])
            if (count > top) {
                top = count;
                majority[c] = label;
            }
    }
    std::vector<char> flagged(labels.size(), 0);
    for (SampleId i : pseudo.instance_ids) flagged.at(i) = 1;

    FilterQuality q;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool noisy = labels[i] != majority[state.assignment[i]];
        q.truly_noisy += noisy;
        q.flagged += flagged[i];
        hit += noisy && flagged[i];
    }
    if (q.flagged > 0) q.precision = static_cast<double>(hit) / static_cast<double>(q.flagged);
    q.recall = q.truly_noisy == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(q.truly_noisy);
    return q;
}

} // namespace pcp
