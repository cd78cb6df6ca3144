#include "pcp/sweep.hpp"

#include "pcp/error.hpp"

#include <cstdio>
#include <fstream>

namespace pcp {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? format_value(*v) : std::string(); }

} // namespace

void write_summary_csv(const std::string& axis, const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << axis
        << ",num_clusters,loss_instance,loss_cluster,loss_total,kept_fraction,demoted_count,pulled_back_count,"
           "knn_accuracy,purity,nmi,filter_precision,filter_recall\n";
    for (const auto& row : rows) {
        const auto& r = row.final_record;
        out << format_value(row.value) << ',' << r.num_clusters << ',' << format_value(r.loss_instance) << ','
            << format_value(r.loss_cluster) << ',' << format_value(r.loss_total) << ',' << format_value(r.kept_fraction)
            << ',' << r.demoted_count << ',' << r.pulled_back_count << ',' << cell(r.knn_accuracy) << ','
            << cell(r.purity) << ',' << cell(r.nmi) << ',' << cell(r.filter_precision) << ',' << cell(r.filter_recall)
            << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                                const Dataset& train, const Dataset* test, const std::filesystem::path& out_dir) {
    if (values.empty()) throw Error(ErrorKind::ConfigError, "sweep over '" + axis + "' has no values");
    {
        RunConfig probe = base;
        set_axis(probe, axis, values.front());  // rejects unknown axes before any run starts
    }
    std::vector<SweepRow> rows;
    for (double v : values) {
        RunConfig cfg = base;
        set_axis(cfg, axis, v);
        cfg.validate(train.size());
        auto result = run_training(cfg, train, test);
        if (!out_dir.empty()) {
            const auto dir = out_dir / (axis + "=" + format_value(v));
            std::filesystem::create_directories(dir);
            write_metrics(result.records, dir / "metrics.jsonl");
        }
        rows.push_back({v, result.records.back()});
    }
    if (!out_dir.empty()) write_summary_csv(axis, rows, out_dir / "summary.csv");
    return rows;
}

} // namespace pcp
