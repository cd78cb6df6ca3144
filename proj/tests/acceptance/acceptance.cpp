// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   pcp_acceptance                 run every criterion
//   pcp_acceptance --criterion N   run one

#include "pcp/clustering.hpp"
#include "pcp/config.hpp"
#include "pcp/dataset.hpp"
#include "pcp/embedding.hpp"
#include "pcp/encoder.hpp"
#include "pcp/error.hpp"
#include "pcp/evaluation.hpp"
#include "pcp/objective.hpp"
#include "pcp/purification.hpp"
#include "pcp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pcp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

Matrix random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, d);
    std::vector<double> v(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : v) x = g(rng);
        const auto u = normalize(std::span<const double>(v));
        for (std::size_t k = 0; k < d; ++k) m.row(i)[k] = static_cast<float>(u[k]);
    }
    return m;
}

std::vector<double> random_unit(std::size_t d, std::mt19937_64& rng) {
    const auto m = random_rows(1, d, rng);
    return {m.data.begin(), m.data.end()};
}

// ---------------------------------------------------------------- 1

Outcome schedule_law() {
    Outcome out;
    const std::size_t T = 200;
    for (auto [n, floor] : std::vector<std::pair<std::size_t, std::size_t>>{{100, 10}, {5000, 100}, {50000, 1000}}) {
        const ScheduleParams p{n, T, floor};
        std::size_t prev = n;
        bool ok = schedule_cluster_count(p, 0) == n;
        for (std::size_t t = 0; t <= T; ++t) {
            const std::size_t c = schedule_cluster_count(p, t);
            const std::size_t raw = unclamped_cluster_count(n, T, t);
            ok &= c <= prev && c == std::max(raw, floor);
            prev = c;
        }
        ok &= schedule_cluster_count(p, T) == floor;
        // round(sqrt(n)) with halves up, in exact integer arithmetic: r + 1 when (2r + 1)^2 <= 4n.
        std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
        while (r * r > n) --r;
        while ((r + 1) * (r + 1) <= n) ++r;
        const std::size_t expected = (2 * r + 1) * (2 * r + 1) <= 4 * n ? r + 1 : r;
        const std::size_t half = unclamped_cluster_count(n, T, T / 2);
        ok &= half == expected;
        out.pass &= ok;
        out.detail += fmt("N=%zu mid=%zu(expect %zu) ", n, half, expected);
    }
    return out;
}

// ---------------------------------------------------------------- 2

Outcome voting_oracle() {
    Outcome out;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    std::size_t bound_violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng() % 16;
        const double alpha = trial % 2 ? 0.9 : 0.5;
        const std::size_t samples = 2 + rng() % 10;
        const std::size_t entries = 1 + rng() % (n + 6);
        const ClusterId labels = 1 + static_cast<ClusterId>(rng() % 4);
        std::vector<std::vector<ClusterId>> newest_first(entries, std::vector<ClusterId>(samples));
        for (auto& e : newest_first)
            for (auto& c : e) c = static_cast<ClusterId>(rng() % labels);
        AssignmentHistory h(n, samples);
        for (auto it = newest_first.rbegin(); it != newest_first.rend(); ++it) h.push(*it);

        const SampleId i = static_cast<SampleId>(rng() % samples), ref = static_cast<SampleId>(rng() % samples);
        double direct = 0.0;
        for (std::size_t k = 0; k <= n && k < entries; ++k)
            direct += std::pow(alpha, static_cast<double>(k)) * (newest_first[k][i] == newest_first[k][ref] ? 1 : -1);
        const double v = voting_score(h, i, ref, alpha);
        worst = std::max(worst, std::abs(v - direct));
        if (std::abs(v) > (1.0 - std::pow(alpha, static_cast<double>(n + 1))) / (1.0 - alpha) + 1e-12) ++bound_violations;
    }
    out.pass = worst < 1e-9 && bound_violations == 0;
    out.detail = fmt("max abs error %.3g, bound violations %zu", worst, bound_violations);
    return out;
}

// ---------------------------------------------------------------- 3

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nb));
    return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

double nll(const EmbeddingBank& bank, std::size_t i, std::span<const double> v, double tau) {
    return QuerySoftmax(bank, v, tau).neg_log_prob(i);
}

// ReLU sign pattern of a forward pass; finite differences across a kink are not derivatives.
std::vector<bool> relu_pattern(const ForwardCache& c) {
    std::vector<bool> p;
    for (std::size_t l = 0; l + 1 < c.pre.size(); ++l)
        for (double z : c.pre[l]) p.push_back(z > 0.0);
    return p;
}

Outcome softmax_and_gradients() {
    Outcome out;
    std::mt19937_64 rng(3);

    double worst_sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 1000;
        const std::size_t d = 2 + rng() % 31;
        EmbeddingBank bank(random_rows(n, d, rng));
        const auto v = random_unit(d, rng);
        QuerySoftmax sm(bank, v, 0.1);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += sm.prob(i);
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }

    double worst_query = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t n = 2 + rng() % 50, d = 2 + rng() % 16;
        const double tau = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
        EmbeddingBank bank(random_rows(n, d, rng));
        const auto v = random_unit(d, rng);
        const std::size_t i = rng() % n;
        const auto g = grad_wrt_query(bank, i, v, tau);
        std::vector<double> fd(d);
        for (std::size_t k = 0; k < d; ++k) {
            const double h = 1e-6;
            auto vp = v, vm = v;
            vp[k] += h;
            vm[k] -= h;
            fd[k] = (nll(bank, i, vp, tau) - nll(bank, i, vm, tau)) / (2 * h);
        }
        worst_query = std::max(worst_query, rel_error(g, fd));
    }

    double worst_encoder = 0.0;
    std::size_t encoder_draws = 0;
    for (int draw = 0; draw < 1000 && encoder_draws < 100; ++draw) {
        const std::size_t in = 4 + rng() % 12;
        EncoderSpec spec{in, {8 + rng() % 16, 8 + rng() % 16}, 4 + rng() % 8};
        Encoder enc(spec, rng());
        EmbeddingBank bank(random_rows(20, spec.output_dim, rng));
        std::vector<double> x(in);
        for (auto& e : x) e = std::normal_distribution<double>(0.0, 1.0)(rng);
        const std::size_t target = rng() % 20;
        const double tau = 0.1;

        ForwardCache cache;
        try {
            cache = enc.forward(std::span<const double>(x));
        } catch (const Error&) {
            continue;  // every unit dead: the output has no direction
        }
        const auto base_pattern = relu_pattern(cache);
        const auto g_out = grad_wrt_query(bank, target, cache.output, tau);
        auto grads = enc.make_grads();
        enc.backward(cache, g_out, grads);

        std::vector<double> analytic, numeric;
        int attempts = 0;
        while (analytic.size() < 20 && attempts++ < 200) {
            const std::size_t l = rng() % enc.layers().size();
            const bool bias = rng() % 4 == 0;
            const std::size_t size = bias ? enc.layers()[l].bias.size() : enc.layers()[l].weight.size();
            const std::size_t p = rng() % size;
            Encoder plus = enc, minus = enc;
            float& wp = bias ? plus.mutable_layers()[l].bias[p] : plus.mutable_layers()[l].weight[p];
            float& wm = bias ? minus.mutable_layers()[l].bias[p] : minus.mutable_layers()[l].weight[p];
            const float w0 = wp;
            wp = w0 + 1e-3f;
            wm = w0 - 1e-3f;
            ForwardCache cp, cm;
            try {
                cp = plus.forward(std::span<const double>(x));
                cm = minus.forward(std::span<const double>(x));
            } catch (const Error&) {
                continue;
            }
            if (relu_pattern(cp) != base_pattern || relu_pattern(cm) != base_pattern) continue;
            const double step = static_cast<double>(wp) - static_cast<double>(wm);
            numeric.push_back((nll(bank, target, cp.output, tau) - nll(bank, target, cm.output, tau)) / step);
            analytic.push_back(bias ? grads.layers[l].bias[p] : grads.layers[l].weight[p]);
        }
        if (analytic.size() < 20) continue;
        ++encoder_draws;
        worst_encoder = std::max(worst_encoder, rel_error(analytic, numeric));
    }

    out.pass = worst_sum < 1e-6 && worst_query < 1e-4 && worst_encoder < 1e-3 && encoder_draws >= 100;
    out.detail = fmt("|sum P - 1| max %.2g; query grad rel err max %.2g; encoder rel err max %.2g over %zu draws",
                     worst_sum, worst_query, worst_encoder, encoder_draws);
    return out;
}

// ---------------------------------------------------------------- 4

Outcome purification_partition() {
    Outcome out;
    std::mt19937_64 rng(4);
    std::size_t bad_partition = 0, bad_keep = 0, bad_moves = 0, moves = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 1 + rng() % 12;
        ClusterState st;
        st.epoch = 100 + trial;
        st.num_clusters = k;
        std::vector<std::size_t> sizes(k);
        for (auto& m : sizes) m = 1 + rng() % 25;
        for (ClusterId c = 0; c < k; ++c)
            for (std::size_t j = 0; j < sizes[c]; ++j) st.assignment.push_back(c);
        std::shuffle(st.assignment.begin(), st.assignment.end(), rng);
        const std::size_t n = st.assignment.size();
        std::uniform_real_distribution<double> dist(0.0, 2.0);
        for (std::size_t i = 0; i < n; ++i) st.distance.push_back(dist(rng));
        st.medoid.resize(k);
        for (ClusterId c = 0; c < k; ++c) st.medoid[c] = medoid_of(st, c);

        PurifyParams params;
        params.gamma = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
        params.alpha = trial % 2 ? 0.9 : 0.5;
        params.activation_epoch = 0;

        AssignmentHistory history(params.window, n);
        const std::size_t past = rng() % 16;
        for (std::size_t e = 0; e < past; ++e) {
            std::vector<ClusterId> a(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = rng() % 3 ? st.assignment[i] : static_cast<ClusterId>(rng() % k);
            history.push(std::move(a));
        }
        history.push(st.assignment);

        const auto split = filter_unreliable(st, params.gamma);
        for (ClusterId c = 0; c < k; ++c) {
            const std::size_t m = sizes[c];
            const std::size_t keep = m - static_cast<std::size_t>(std::floor(params.gamma * static_cast<double>(m)));
            if (split.retained[c].size() != std::max<std::size_t>(keep, 1) ||
                split.retained[c].size() + split.discarded[c].size() != m)
                ++bad_keep;
        }

        const auto pseudo = refine_with_votes(split, st, history, params);
        std::vector<int> seen(n, 0);
        std::vector<bool> clustered(n, false);
        for (const auto& c : pseudo.cluster_members)
            for (auto i : c) {
                ++seen[i];
                clustered[i] = true;
            }
        for (auto i : pseudo.instance_ids) ++seen[i];
        if (pseudo.clustered_count() + pseudo.instance_ids.size() != n ||
            std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
            ++bad_partition;

        for (ClusterId c = 0; c < k; ++c) {
            for (auto i : split.retained[c]) {
                const double score = voting_score(history, i, st.medoid[c], params.alpha);
                if (!clustered[i]) {
                    ++moves;
                    if (!(score < params.theta_low)) ++bad_moves;
                } else if (score < params.theta_low) {
                    ++bad_moves;
                }
            }
            for (auto i : split.discarded[c]) {
                const double score = voting_score(history, i, st.medoid[c], params.alpha);
                if (clustered[i]) {
                    ++moves;
                    if (!(score > params.theta_high)) ++bad_moves;
                } else if (score > params.theta_high) {
                    ++bad_moves;
                }
            }
        }
    }
    out.pass = bad_partition == 0 && bad_keep == 0 && bad_moves == 0 && moves > 0;
    out.detail = fmt("partition errors %zu, CP_r size errors %zu, threshold errors %zu over %zu moves", bad_partition,
                     bad_keep, bad_moves, moves);
    return out;
}

// ---------------------------------------------------------------- 5

Label brute_knn(const Matrix& train, const std::vector<Label>& labels, const std::vector<double>& q, std::size_t k,
                double tau, std::size_t classes) {
    std::vector<std::pair<double, std::size_t>> sims(train.rows);
    for (std::size_t i = 0; i < train.rows; ++i) sims[i] = {dot(train.row(i), q), i};
    std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<double> votes(classes, 0.0);
    for (std::size_t r = 0; r < std::min(k, sims.size()); ++r) votes[labels[sims[r].second]] += std::exp(sims[r].first / tau);
    return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Outcome knn_oracle() {
    Outcome out;
    std::mt19937_64 rng(5);
    std::size_t queries = 0, mismatches = 0;
    while (queries < 1000) {
        const std::size_t n = 1 + rng() % 2000;
        const std::size_t d = 2 + rng() % 31;
        const std::size_t classes = 2 + rng() % 9;
        Matrix train = random_rows(n, d, rng);
        if (rng() % 4 == 0)  // duplicated rows exercise the tie rule
            for (std::size_t i = 1; i < n; i += 2) std::copy(train.row(i - 1).begin(), train.row(i - 1).end(), train.row(i).begin());
        std::vector<Label> labels(n);
        for (auto& l : labels) l = static_cast<Label>(rng() % classes);
        for (int q = 0; q < 25 && queries < 1000; ++q, ++queries) {
            const auto v = random_unit(d, rng);
            for (std::size_t k : {1u, 50u, 200u})
                if (knn_predict(train, labels, v, {k, 0.1}, classes) != brute_knn(train, labels, v, k, 0.1, classes))
                    ++mismatches;
        }
    }
    out.pass = mismatches == 0;
    out.detail = fmt("%zu queries x 3 k values, %zu mismatches", queries, mismatches);
    return out;
}

// ---------------------------------------------------------------- 6-8

// The desk-scale benchmark: 10 classes, 2000 training samples, encoder 32 -> 64 -> 16, T = 60.
// The ablation and cluster-count comparisons being reproduced were trained without the warm-up branch.
RunConfig benchmark_config(std::uint64_t seed) {
    RunConfig c;
    c.loss.warmup = false;
    c.encoder.hidden_dims = {64};
    c.encoder.output_dim = 16;
    c.total_epochs = 60;
    c.scale_milestones(60.0 / 200.0);
    c.floor_clusters = 10;
    c.eval.every = c.total_epochs;
    c.seed = seed;
    return c;
}

struct Final {
    double knn = 0.0;
    double purity = 0.0;
    double nmi = 0.0;
};

struct RunSummary {
    Final last;
    std::size_t max_pairs = 0;
    std::size_t samples = 0;
};

RunSummary benchmark_run(std::uint64_t seed, const std::function<void(RunConfig&)>& adjust) {
    SyntheticSpec spec;
    spec.seed = seed;
    const auto [train, test] = generate_synthetic(spec);
    RunConfig c = benchmark_config(seed);
    adjust(c);
    const auto result = run_training(c, train, &test);
    RunSummary s;
    s.samples = train.size();
    const auto& r = result.records.back();
    s.last = {r.knn_accuracy.value_or(0.0), r.purity.value_or(0.0), r.nmi.value_or(0.0)};
    for (const auto& rec : result.records) s.max_pairs = std::max(s.max_pairs, rec.cluster_pairs);
    return s;
}

Final mean_over_seeds(const std::function<void(RunConfig&)>& adjust, std::size_t seeds = 5) {
    Final m;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto r = benchmark_run(s, adjust).last;
        m.knn += r.knn / seeds;
        m.purity += r.purity / seeds;
        m.nmi += r.nmi / seeds;
    }
    return m;
}

void use_pcp(RunConfig& c) { c.mode = Mode::Pcp; }
void use_pc_only(RunConfig& c) {
    c.mode = Mode::Pcp;
    c.purify.gamma = 0.0;
    c.purify.cps_enabled = false;
}
void use_dc(RunConfig& c) { c.mode = Mode::DcBaseline; }

Outcome ablation_direction() {
    Outcome out;
    const Final pcp = mean_over_seeds(use_pcp);
    const Final pc = mean_over_seeds(use_pc_only);
    const Final dc = mean_over_seeds(use_dc);
    const bool purity_order = pcp.purity >= pc.purity && pc.purity >= dc.purity;
    const bool knn_order = pcp.knn >= pc.knn && pc.knn >= dc.knn;
    const bool margin = pcp.purity - dc.purity >= 0.03;
    out.pass = purity_order && knn_order && margin;
    out.detail = fmt("purity PCP %.4f PC-only %.4f DC %.4f; kNN PCP %.4f PC-only %.4f DC %.4f; "
                     "purity order %s, kNN order %s, PCP-DC %+.1f pts",
                     pcp.purity, pc.purity, dc.purity, pcp.knn, pc.knn, dc.knn, purity_order ? "ok" : "violated",
                     knn_order ? "ok" : "violated", 100 * (pcp.purity - dc.purity));
    return out;
}

Outcome cluster_count_insensitivity() {
    Outcome out;
    std::vector<double> pcp_knn, dc_knn;
    for (std::size_t floor : {5u, 10u, 100u}) {
        pcp_knn.push_back(mean_over_seeds([&](RunConfig& c) {
            use_pcp(c);
            c.floor_clusters = floor;
        }).knn);
        dc_knn.push_back(mean_over_seeds([&](RunConfig& c) {
            use_dc(c);
            c.floor_clusters = floor;
        }).knn);
    }
    auto range = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()); };
    const double pcp_range = 100 * range(pcp_knn), dc_range = 100 * range(dc_knn);
    out.pass = pcp_range < 5.0 && dc_range > 10.0;
    out.detail = fmt("kNN at floor 5/10/100: PCP %.3f/%.3f/%.3f (range %.1f pts), DC %.3f/%.3f/%.3f (range %.1f pts)",
                     pcp_knn[0], pcp_knn[1], pcp_knn[2], pcp_range, dc_knn[0], dc_knn[1], dc_knn[2], dc_range);
    return out;
}

Outcome gamma_degeneracy() {
    Outcome out;
    Final near_ir, ir;
    std::size_t worst_pairs = 0, samples = 0;
    const std::size_t seeds = 5;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto a = benchmark_run(s, [](RunConfig& c) {
            c.purify.gamma = 0.99;
            c.purify.cps_enabled = false;
        });
        const auto b = benchmark_run(s, [](RunConfig& c) { c.mode = Mode::IrBaseline; });
        worst_pairs = std::max(worst_pairs, a.max_pairs);
        samples = a.samples;
        near_ir.knn += a.last.knn / seeds;
        near_ir.purity += a.last.purity / seeds;
        ir.knn += b.last.knn / seeds;
        ir.purity += b.last.purity / seeds;
    }
    const double dk = 100 * std::abs(near_ir.knn - ir.knn), dp = 100 * std::abs(near_ir.purity - ir.purity);
    out.pass = worst_pairs <= samples && dk <= 2.0 && dp <= 2.0;
    out.detail = fmt("max pairs per epoch %zu (N=%zu); kNN %.4f vs IR %.4f (%.2f pts); purity %.4f vs IR %.4f (%.2f pts)",
                     worst_pairs, samples, near_ir.knn, ir.knn, dk, near_ir.purity, ir.purity, dp);
    return out;
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome out;
    const fs::path root = fs::temp_directory_path() / "pcp_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    SyntheticSpec spec;
    spec.seed = 9;
    const auto [train, test] = generate_synthetic(spec);
    save_dataset(train, root / "train.bin");
    save_dataset(test, root / "test.csv");

    std::size_t identical = 0, runs = 0;
    for (Mode mode : {Mode::Pcp, Mode::DcBaseline, Mode::IrBaseline}) {
        RunConfig c = benchmark_config(31);
        c.total_epochs = 8;
        c.purify.activation_epoch = 3;
        c.loss.warm_end_epoch = 6;
        c.optim.lr_milestones = {5, 7};
        c.eval.every = 2;
        c.rounds = 2;
        c.mode = mode;
        c.data.path = (root / "train.bin").string();
        c.data.test_path = (root / "test.csv").string();
        std::string first_metrics, first_ckpt;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / (to_string(mode) + std::to_string(rep));
            c.output_dir = dir.string();
            run_training_to_disk(c);
            const auto metrics = slurp(dir / "metrics.jsonl");
            const auto ckpt = slurp(dir / "checkpoint.pcpw");
            if (rep == 0) {
                first_metrics = metrics;
                first_ckpt = ckpt;
            } else {
                ++runs;
                if (metrics == first_metrics && ckpt == first_ckpt && !metrics.empty()) ++identical;
            }
        }
    }
    fs::remove_all(root);
    out.pass = identical == runs;
    out.detail = fmt("%zu of %zu repeated runs byte-identical (metrics and checkpoint)", identical, runs);
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no stated budget
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "schedule law", 1, schedule_law},
    {2, "voting oracle", 0, voting_oracle},
    {3, "softmax and gradients", 30, softmax_and_gradients},
    {4, "purification partition", 10, purification_partition},
    {5, "kNN oracle", 30, knn_oracle},
    {6, "ablation direction", 600, ablation_direction},
    {7, "cluster-count insensitivity", 900, cluster_count_insensitivity},
    {8, "gamma degeneracy", 300, gamma_degeneracy},
    {9, "determinism", 0, determinism},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    int failures = 0, ran = 0;
    for (const auto& c : kCriteria) {
        if (only && c.id != only) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_seconds == 0 || secs < c.budget_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s criterion %d (%s): %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : fmt(" exceeds %.0f s budget", c.budget_seconds).c_str());
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    return failures ? 1 : 0;
}
