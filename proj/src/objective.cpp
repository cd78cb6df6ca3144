#include "pcp/objective.hpp"

#include "pcp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace pcp {

void LossParams::validate() const {
    if (!(tau > 0.0)) throw Error(ErrorKind::ConfigError, "tau must be positive");
    if (!(warm_end_weight >= 0.0 && warm_end_weight <= warm_start_weight && warm_start_weight <= 1.0))
        throw Error(ErrorKind::ConfigError, "warm-up weights must satisfy 0 <= end <= start <= 1");
    if (cluster_pair_cap && *cluster_pair_cap == 0) throw Error(ErrorKind::ConfigError, "cluster_pair_cap must be >= 1");
}

QuerySoftmax::QuerySoftmax(const EmbeddingBank& bank, std::span<const double> v, double tau)
    : tau_(tau), sims_(bank.count()), expected_(bank.dim(), 0.0) {
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidTemperature, "tau must be positive, got " + std::to_string(tau));
    bank.all_sims(v, sims_);
    const double top = *std::max_element(sims_.begin(), sims_.end());
    double z = 0.0;
    std::vector<double> w(sims_.size());
    for (std::size_t j = 0; j < sims_.size(); ++j) {
        w[j] = std::exp((sims_[j] - top) / tau);
        z += w[j];
    }
    log_z_ = top / tau + std::log(z);
    const std::size_t d = bank.dim();
    const auto& rows = bank.vectors();
    for (std::size_t j = 0; j < sims_.size(); ++j) {
        const double p = w[j] / z;
        const float* r = rows.data.data() + j * d;
        for (std::size_t k = 0; k < d; ++k) expected_[k] += p * r[k];
    }
}

double QuerySoftmax::prob(std::size_t i) const { return std::exp(-neg_log_prob(i)); }

double QuerySoftmax::neg_log_prob(std::size_t i) const {
    if (i >= sims_.size()) throw Error(ErrorKind::IndexError, "softmax index " + std::to_string(i) + " out of range");
    return log_z_ - sims_[i] / tau_;
}

double prob_instance(const EmbeddingBank& bank, std::size_t i, std::span<const double> v, double tau) {
    if (i >= bank.count()) throw Error(ErrorKind::IndexError, "sample id " + std::to_string(i) + " out of range");
    return QuerySoftmax(bank, v, tau).prob(i);
}

double loss_instance(const EmbeddingBank& bank, std::span<const SampleId> instance_ids,
                     const std::vector<std::vector<double>>& fresh, double tau) {
    if (instance_ids.empty()) return 0.0;
    if (fresh.size() != instance_ids.size())
        throw Error(ErrorKind::DimensionMismatch, "loss_instance: one fresh embedding per id required");
    double sum = 0.0;
    for (std::size_t k = 0; k < instance_ids.size(); ++k)
        sum += QuerySoftmax(bank, fresh[k], tau).neg_log_prob(instance_ids[k]);
    return sum / static_cast<double>(instance_ids.size());
}

double loss_cluster(const EmbeddingBank& bank, const std::vector<ClusterBatch>& clusters, double tau,
                    std::optional<std::size_t> pair_cap, std::uint64_t seed) {
    double sum = 0.0;
    std::size_t pairs = 0;
    std::mt19937_64 rng(seed);
    for (const auto& cluster : clusters) {
        const std::size_t m = cluster.members.size();
        if (cluster.fresh.size() != m)
            throw Error(ErrorKind::DimensionMismatch, "loss_cluster: one fresh embedding per member required");
        if (m == 0) continue;
        std::vector<QuerySoftmax> queries;
        queries.reserve(m);
        for (std::size_t j = 0; j < m; ++j) queries.emplace_back(bank, cluster.fresh[j], tau);

        const std::size_t total = m * m;
        if (pair_cap && *pair_cap < total) {
            std::vector<std::size_t> flat(total);
            std::iota(flat.begin(), flat.end(), std::size_t{0});
            // Partial Fisher-Yates: the first `cap` slots are a uniform sample.
            for (std::size_t s = 0; s < *pair_cap; ++s) {
                std::uniform_int_distribution<std::size_t> pick(s, total - 1);
                std::swap(flat[s], flat[pick(rng)]);
                const std::size_t i = flat[s] / m, j = flat[s] % m;
                sum += queries[j].neg_log_prob(cluster.members[i]);
            }
            pairs += *pair_cap;
        } else {
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t i = 0; i < m; ++i) sum += queries[j].neg_log_prob(cluster.members[i]);
            pairs += total;
        }
    }
    return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

double loss_total(double instance_part, double cluster_part) {
    if (!std::isfinite(instance_part) || !std::isfinite(cluster_part))
        throw Error(ErrorKind::NumericError, "non-finite loss component");
    return instance_part + cluster_part;
}

double warmup_weight(double epoch, const LossParams& params) {
    if (epoch <= 0.0) return params.warm_start_weight;
    if (params.warm_end_epoch <= 0.0 || epoch >= params.warm_end_epoch) return params.warm_end_weight;
    const double f = epoch / params.warm_end_epoch;
    return params.warm_start_weight + f * (params.warm_end_weight - params.warm_start_weight);
}

std::vector<double> grad_wrt_query(const EmbeddingBank& bank, std::size_t i, std::span<const double> v, double tau) {
    if (i >= bank.count()) throw Error(ErrorKind::IndexError, "sample id " + std::to_string(i) + " out of range");
    const QuerySoftmax softmax(bank, v, tau);
    const SampleId target = static_cast<SampleId>(i);
    return grad_wrt_query(bank, std::span<const SampleId>(&target, 1), softmax);
}

std::vector<double> grad_wrt_query(const EmbeddingBank& bank, std::span<const SampleId> targets,
                                   const QuerySoftmax& softmax) {
    const std::size_t d = bank.dim();
    std::vector<double> g(d, 0.0);
    const double m = static_cast<double>(targets.size());
    const auto& expected = softmax.expected_row();
    for (std::size_t k = 0; k < d; ++k) g[k] = m * expected[k];
    for (SampleId t : targets) {
        const auto r = bank.row(t);
        for (std::size_t k = 0; k < d; ++k) g[k] -= r[k];
    }
    for (auto& x : g) x /= softmax.tau();
    return g;
}

} // namespace pcp
