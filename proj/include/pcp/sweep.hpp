#pragma once

#include "pcp/config.hpp"
#include "pcp/dataset.hpp"
#include "pcp/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pcp {

struct SweepRow {
    double value = 0.0;
    EpochRecord final_record;
};

/// One training run per value of `axis`, all sharing the template's seed.
/// When `out_dir` is non-empty each run's metrics land in
/// out_dir/<axis>=<value>/metrics.jsonl and the final records in
/// out_dir/summary.csv. Throws ConfigError on an unknown axis or an empty
/// value list.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                                const Dataset& train, const Dataset* test, const std::filesystem::path& out_dir = {});

void write_summary_csv(const std::string& axis, const std::vector<SweepRow>& rows, const std::filesystem::path& path);

} // namespace pcp
