#pragma once

#include "pcp/evaluation.hpp"
#include "pcp/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pcp {

struct Dataset {
    Matrix features;
    std::optional<std::vector<Label>> labels;

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    /// 1 + largest label, or 0 when unlabeled.
    std::size_t num_classes() const;
};

enum class DataFormat { Auto, Csv, Binary };

DataFormat parse_data_format(const std::string& name);

/// CSV: header f0..f{d-1}[,label], one sample per line.
/// Binary: "PCPD", u32 N, u32 D, u8 has_labels, N*D f32, then N i32 labels.
/// Auto picks by extension (.csv -> CSV, anything else -> binary).
/// Throws IngestError with the line or byte offset of the first problem, or
/// when N < 2.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format = DataFormat::Auto);
void save_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format = DataFormat::Auto);

/// Gaussian classes on the unit sphere. Every class has a random unit mean m
/// and a random unit axis a; samples are
///   normalize(m + elongation * s * a + overlap * e),  s ~ N(0, 1), e ~ N(0, I / dim).
/// The stretch along a is what spherical k-means in the raw space gets wrong;
/// the defaults put raw 10-means purity near 0.7.
struct SyntheticSpec {
    std::size_t classes = 10;
    std::size_t train_per_class = 200;
    std::size_t test_per_class = 100;
    std::size_t dim = 32;
    double overlap = 0.7;
    double elongation = 1.09;
    std::uint64_t seed = 0;
};

/// Returns (train, test), each in shuffled order.
std::pair<Dataset, Dataset> generate_synthetic(const SyntheticSpec& spec);

} // namespace pcp
