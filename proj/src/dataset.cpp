#include "pcp/dataset.hpp"

#include "pcp/binary_io.hpp"
#include "pcp/error.hpp"
#include "pcp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace pcp {

std::size_t Dataset::num_classes() const {
    if (!labels || labels->empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

DataFormat parse_data_format(const std::string& name) {
    if (name == "auto" || name.empty()) return DataFormat::Auto;
    if (name == "csv") return DataFormat::Csv;
    if (name == "bin" || name == "binary") return DataFormat::Binary;
    throw Error(ErrorKind::ConfigError, "unknown data format '" + name + "' (expected csv, bin or auto)");
}

namespace {

constexpr char kMagic[4] = {'P', 'C', 'P', 'D'};

DataFormat resolve(const std::filesystem::path& path, DataFormat format) {
    if (format != DataFormat::Auto) return format;
    return path.extension() == ".csv" ? DataFormat::Csv : DataFormat::Binary;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IngestError, "cannot open " + path.string());
    auto fail = [&](std::size_t line, const std::string& what) {
        return Error(ErrorKind::IngestError, path.string() + ":" + std::to_string(line) + ": " + what);
    };

    std::string line;
    if (!std::getline(in, line)) throw fail(1, "missing header");
    const auto header = split_cells(line);
    bool has_labels = !header.empty() && header.back() == "label";
    const std::size_t dim = header.size() - (has_labels ? 1 : 0);
    if (dim == 0) throw fail(1, "header names no feature columns");
    for (std::size_t k = 0; k < dim; ++k)
        if (header[k] != "f" + std::to_string(k)) throw fail(1, "expected column 'f" + std::to_string(k) + "', got '" + header[k] + "'");

    Dataset data;
    std::vector<float> values;
    std::vector<Label> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_cells(line);
        if (cells.size() != header.size())
            throw fail(lineno, "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        for (std::size_t k = 0; k < dim; ++k) {
            double v = 0.0;
            const auto& c = cells[k];
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
                throw fail(lineno, "cell " + std::to_string(k) + " is not a finite real: '" + c + "'");
            values.push_back(static_cast<float>(v));
        }
        if (has_labels) {
            long long v = 0;
            const auto& c = cells.back();
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size() || v < 0 || v > INT32_MAX)
                throw fail(lineno, "label is not a nonnegative integer: '" + c + "'");
            labels.push_back(static_cast<Label>(v));
        }
    }
    const std::size_t n = values.size() / dim;
    data.features.rows = n;
    data.features.cols = dim;
    data.features.data = std::move(values);
    if (has_labels) data.labels = std::move(labels);
    return data;
}

Dataset load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IngestError, "cannot open " + path.string());
    auto fail = [&](std::size_t offset, const std::string& what) {
        return Error(ErrorKind::IngestError, path.string() + ": offset " + std::to_string(offset) + ": " + what);
    };
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) throw fail(0, "bad magic (expected PCPD)");
    std::uint32_t n = 0, d = 0;
    std::uint8_t has_labels = 0;
    if (!binary::get(in, n) || !binary::get(in, d) || !binary::get(in, has_labels)) throw fail(4, "truncated header");
    if (d == 0) throw fail(8, "dimension is zero");
    if (has_labels > 1) throw fail(12, "has_labels must be 0 or 1");

    Dataset data;
    data.features = Matrix(n, d);
    std::size_t offset = 13;
    for (auto& v : data.features.data) {
        if (!binary::get(in, v)) throw fail(offset, "truncated feature payload");
        offset += 4;
    }
    if (has_labels) {
        std::vector<Label> labels(n);
        for (auto& l : labels) {
            if (!binary::get(in, l)) throw fail(offset, "truncated label payload");
            if (l < 0) throw fail(offset, "negative label");
            offset += 4;
        }
        data.labels = std::move(labels);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw fail(offset, "trailing bytes after payload");
    return data;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
    Dataset data = resolve(path, format) == DataFormat::Csv ? load_csv(path) : load_binary(path);
    if (data.size() < 2)
        throw Error(ErrorKind::IngestError, path.string() + ": need at least 2 samples, found " + std::to_string(data.size()));
    return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format) {
    if (data.labels && data.labels->size() != data.size())
        throw Error(ErrorKind::DimensionMismatch, "dataset has " + std::to_string(data.labels->size()) + " labels for " +
                                                      std::to_string(data.size()) + " rows");
    if (resolve(path, format) == DataFormat::Csv) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
        for (std::size_t k = 0; k < data.dim(); ++k) out << (k ? "," : "") << 'f' << k;
        if (data.labels) out << ",label";
        out << '\n';
        char buf[32];
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto row = data.features.row(i);
            for (std::size_t k = 0; k < row.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(row[k]));
                out << (k ? "," : "") << buf;
            }
            if (data.labels) out << ',' << (*data.labels)[i];
            out << '\n';
        }
        if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out.write(kMagic, 4);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(data.dim()));
    binary::put<std::uint8_t>(out, data.labels ? 1 : 0);
    for (float v : data.features.data) binary::put<float>(out, v);
    if (data.labels)
        for (Label l : *data.labels) binary::put<std::int32_t>(out, l);
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

std::pair<Dataset, Dataset> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes < 1 || spec.dim < 1 || spec.train_per_class < 1)
        throw Error(ErrorKind::ConfigError, "synthetic benchmark needs classes, dim and train_per_class >= 1");
    if (!(spec.overlap >= 0.0) || !(spec.elongation >= 0.0))
        throw Error(ErrorKind::ConfigError, "overlap and elongation must be nonnegative");
    std::mt19937_64 rng(derive_seed(spec.seed, Stream::Data));
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto random_unit = [&](std::vector<double>& m) {
        double sq = 0.0;
        for (auto& v : m) {
            v = gauss(rng);
            sq += v * v;
        }
        for (auto& v : m) v /= std::sqrt(sq);
    };
    std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.dim));
    std::vector<std::vector<double>> axes(spec.classes, std::vector<double>(spec.dim));
    for (auto& m : means) random_unit(m);
    for (auto& a : axes) random_unit(a);

    const double noise_scale = spec.overlap / std::sqrt(static_cast<double>(spec.dim));
    auto draw = [&](std::size_t per_class) {
        Dataset d;
        const std::size_t n = per_class * spec.classes;
        d.features = Matrix(n, spec.dim);
        d.labels = std::vector<Label>(n);
        std::vector<double> x(spec.dim);
        std::vector<std::size_t> slot(n);
        for (std::size_t i = 0; i < n; ++i) slot[i] = i;
        std::shuffle(slot.begin(), slot.end(), rng);
        for (std::size_t r = 0; r < per_class; ++r)
            for (std::size_t c = 0; c < spec.classes; ++c) {
                const std::size_t i = slot[r * spec.classes + c];
                double sq = 0.0;
                do {
                    sq = 0.0;
                    const double along = spec.elongation * gauss(rng);
                    for (std::size_t k = 0; k < spec.dim; ++k) {
                        x[k] = means[c][k] + along * axes[c][k] + noise_scale * gauss(rng);
                        sq += x[k] * x[k];
                    }
                } while (sq == 0.0);
                auto row = d.features.row(i);
                for (std::size_t k = 0; k < spec.dim; ++k) row[k] = static_cast<float>(x[k] / std::sqrt(sq));
                (*d.labels)[i] = static_cast<Label>(c);
            }
        return d;
    };
    Dataset train = draw(spec.train_per_class);
    Dataset test = draw(spec.test_per_class);
    return {std::move(train), std::move(test)};
}

} // namespace pcp
