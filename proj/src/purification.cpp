#include "pcp/purification.hpp"

#include "pcp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcp {

AssignmentHistory::AssignmentHistory(std::size_t window, std::size_t num_samples)
    : window_(window), num_samples_(num_samples) {}

const std::vector<ClusterId>& AssignmentHistory::at(std::size_t k) const {
    if (k >= entries_.size())
        throw Error(ErrorKind::IndexError,
                    "history index " + std::to_string(k) + " beyond " + std::to_string(entries_.size()) + " entries");
    return entries_[k];
}

void AssignmentHistory::push(std::vector<ClusterId> assignment) {
    if (assignment.size() != num_samples_)
        throw Error(ErrorKind::DimensionMismatch, "history entry has " + std::to_string(assignment.size()) +
                                                      " samples, expected " + std::to_string(num_samples_));
    entries_.push_front(std::move(assignment));
    while (entries_.size() > window_ + 1) entries_.pop_back();
}

void PurifyParams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::ConfigError, "gamma must lie in [0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::ConfigError, "alpha must lie in (0, 1)");
    if (theta_low > theta_high) throw Error(ErrorKind::ConfigError, "theta_low must not exceed theta_high");
}

std::size_t PseudoLabelSet::clustered_count() const {
    std::size_t n = 0;
    for (const auto& c : cluster_members) n += c.size();
    return n;
}

std::size_t PseudoLabelSet::cluster_pair_count() const {
    std::size_t n = 0;
    for (const auto& c : cluster_members) n += c.size() * c.size();
    return n;
}

ReliableSplit filter_unreliable(const ClusterState& state, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::ConfigError, "gamma must lie in [0, 1)");
    ReliableSplit split;
    auto members = state.members();
    split.retained.resize(members.size());
    split.discarded.resize(members.size());
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        std::sort(m.begin(), m.end(), [&](SampleId a, SampleId b) {
            if (state.distance[a] != state.distance[b]) return state.distance[a] < state.distance[b];
            return a < b;
        });
        const std::size_t size = m.size();
        const auto drop = std::min(static_cast<std::size_t>(std::floor(gamma * static_cast<double>(size))), size - 1);
        const std::size_t keep = size - drop;
        split.retained[c].assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(keep));
        split.discarded[c].assign(m.begin() + static_cast<std::ptrdiff_t>(keep), m.end());
    }
    return split;
}

double voting_score(const AssignmentHistory& history, SampleId i, SampleId ref, double alpha) {
    if (history.empty()) throw Error(ErrorKind::NoHistory, "voting needs at least one assignment");
    if (i >= history.num_samples() || ref >= history.num_samples())
        throw Error(ErrorKind::IndexError, "voting sample id out of range");
    const std::size_t terms = std::min(history.window() + 1, history.size());
    double score = 0.0;
    double weight = 1.0;
    for (std::size_t k = 0; k < terms; ++k) {
        const auto& a = history.at(k);
        score += a[i] == a[ref] ? weight : -weight;
        weight *= alpha;
    }
    return score;
}

PseudoLabelSet pseudo_labels_from_split(const ReliableSplit& split, std::size_t epoch) {
    PseudoLabelSet out;
    out.epoch = epoch;
    for (std::size_t c = 0; c < split.retained.size(); ++c) {
        if (!split.retained[c].empty()) {
            auto members = split.retained[c];
            std::sort(members.begin(), members.end());
            out.cluster_members.push_back(std::move(members));
            out.source_cluster.push_back(static_cast<ClusterId>(c));
        }
        out.instance_ids.insert(out.instance_ids.end(), split.discarded[c].begin(), split.discarded[c].end());
    }
    std::sort(out.instance_ids.begin(), out.instance_ids.end());
    return out;
}

PseudoLabelSet refine_with_votes(const ReliableSplit& split, const ClusterState& state,
                                 const AssignmentHistory& history, const PurifyParams& params) {
    if (!params.cps_enabled || state.epoch < params.activation_epoch) return pseudo_labels_from_split(split, state.epoch);
    if (history.empty()) throw Error(ErrorKind::NoHistory, "voting needs at least one assignment");

    PseudoLabelSet out;
    out.epoch = state.epoch;
    for (std::size_t c = 0; c < split.retained.size(); ++c) {
        if (split.retained[c].empty()) continue;
        // Retained members are sorted nearest first, so the front is the medoid.
        const SampleId ref = c < state.medoid.size() && state.medoid[c] != kNoSample ? state.medoid[c]
                                                                                      : split.retained[c].front();
        std::vector<SampleId> kept;
        for (SampleId i : split.retained[c]) {
            if (voting_score(history, i, ref, params.alpha) < params.theta_low) {
                out.instance_ids.push_back(i);
                ++out.demoted;
            } else {
                kept.push_back(i);
            }
        }
        for (SampleId i : split.discarded[c]) {
            if (voting_score(history, i, ref, params.alpha) > params.theta_high) {
                kept.push_back(i);
                ++out.pulled_back;
            } else {
                out.instance_ids.push_back(i);
            }
        }
        if (!kept.empty()) {
            std::sort(kept.begin(), kept.end());
            out.cluster_members.push_back(std::move(kept));
            out.source_cluster.push_back(static_cast<ClusterId>(c));
        }
    }
    std::sort(out.instance_ids.begin(), out.instance_ids.end());
    return out;
}

} // namespace pcp
