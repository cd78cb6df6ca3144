#include "pcp/embedding.hpp"

#include "pcp/binary_io.hpp"
#include "pcp/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

namespace pcp {

namespace {

template <typename T>
std::vector<double> normalize_impl(std::span<const T> v) {
    double sq = 0.0;
    for (T x : v) sq += static_cast<double>(x) * static_cast<double>(x);
    if (!(sq > 0.0) || !std::isfinite(sq))
        throw Error(ErrorKind::DegenerateVector, "cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<double>(v[k]) * inv;
    return out;
}

template <typename A, typename B>
double cosine_impl(std::span<const A> a, std::span<const B> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::DimensionMismatch,
                    "cosine_sim: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    return dot(a, b);
}

constexpr char kMagic[4] = {'P', 'C', 'P', 'E'};

} // namespace

std::vector<double> normalize(std::span<const double> v) { return normalize_impl(v); }
std::vector<double> normalize(std::span<const float> v) { return normalize_impl(v); }

double cosine_sim(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine_sim(std::span<const float> a, std::span<const double> b) { return cosine_impl(a, b); }
double cosine_sim(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

EmbeddingBank::EmbeddingBank(std::size_t count, std::size_t dim, std::uint64_t seed) : vectors_(count, dim) {
    if (count == 0 || dim == 0) throw Error(ErrorKind::DimensionMismatch, "bank needs N >= 1 and D >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> draw(dim);
    for (std::size_t i = 0; i < count; ++i) {
        double sq = 0.0;
        do {
            sq = 0.0;
            for (auto& x : draw) {
                x = gauss(rng);
                sq += x * x;
            }
        } while (sq == 0.0);
        assign(i, draw);
    }
}

EmbeddingBank::EmbeddingBank(const Matrix& rows) : vectors_(rows.rows, rows.cols) {
    if (rows.rows == 0 || rows.cols == 0) throw Error(ErrorKind::DimensionMismatch, "bank needs N >= 1 and D >= 1");
    for (std::size_t i = 0; i < rows.rows; ++i) {
        const auto unit = normalize(rows.row(i));
        assign(i, unit);
    }
}

void EmbeddingBank::check_index(std::size_t index) const {
    if (index >= count())
        throw Error(ErrorKind::IndexError,
                    "bank row " + std::to_string(index) + " out of range (N=" + std::to_string(count()) + ")");
}

std::span<const float> EmbeddingBank::row(std::size_t i) const {
    check_index(i);
    return vectors_.row(i);
}

void EmbeddingBank::assign(std::size_t index, std::span<const double> v) {
    check_index(index);
    if (v.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "bank row write has wrong dimension");
    const auto unit = normalize(v);
    auto dst = vectors_.row(index);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(unit[k]);
}

std::span<const float> EmbeddingBank::update(std::size_t index, std::span<const double> fresh, double momentum) {
    check_index(index);
    if (fresh.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "bank update has wrong dimension");
    auto dst = vectors_.row(index);
    if (momentum >= 1.0) return dst;
    std::vector<double> mixed(dim());
    for (std::size_t k = 0; k < mixed.size(); ++k)
        mixed[k] = momentum * static_cast<double>(dst[k]) + (1.0 - momentum) * fresh[k];
    assign(index, mixed);
    return vectors_.row(index);
}

void EmbeddingBank::all_sims(std::span<const double> v, std::span<double> out) const {
    if (v.size() != dim())
        throw Error(ErrorKind::DimensionMismatch,
                    "all_sims: query dim " + std::to_string(v.size()) + " vs bank dim " + std::to_string(dim()));
    if (out.size() != count()) throw Error(ErrorKind::DimensionMismatch, "all_sims: output size mismatch");
    for (std::size_t i = 0; i < count(); ++i) out[i] = dot(vectors_.row(i), v);
}

std::vector<double> EmbeddingBank::all_sims(std::span<const double> v) const {
    std::vector<double> out(count());
    all_sims(v, out);
    return out;
}

std::span<const float> bank_update(EmbeddingBank& bank, std::size_t index, std::span<const double> fresh,
                                   double momentum) {
    return bank.update(index, fresh, momentum);
}

std::vector<double> all_sims(const EmbeddingBank& bank, std::span<const double> v) { return bank.all_sims(v); }

void write_embeddings(const Matrix& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out.write(kMagic, 4);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(rows.rows));
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(rows.cols));
    for (float x : rows.data) binary::put<float>(out, x);
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

Matrix read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
        throw Error(ErrorKind::IngestError, path.string() + ": bad magic at offset 0 (expected PCPE)");
    std::uint32_t n = 0, d = 0;
    if (!binary::get(in, n) || !binary::get(in, d))
        throw Error(ErrorKind::IngestError, path.string() + ": truncated header at offset 4");
    Matrix m(n, d);
    for (std::size_t k = 0; k < m.data.size(); ++k)
        if (!binary::get(in, m.data[k]))
            throw Error(ErrorKind::IngestError, path.string() + ": truncated payload at offset " +
                                                    std::to_string(12 + 4 * k));
    return m;
}

} // namespace pcp
