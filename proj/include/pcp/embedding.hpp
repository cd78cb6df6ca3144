#pragma once

#include "pcp/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pcp {

/// Returns v / |v|. Throws DegenerateVector for the zero vector.
std::vector<double> normalize(std::span<const double> v);
std::vector<double> normalize(std::span<const float> v);

/// Inner product of two unit vectors. Throws DimensionMismatch.
double cosine_sim(std::span<const float> a, std::span<const float> b);
double cosine_sim(std::span<const float> a, std::span<const double> b);
double cosine_sim(std::span<const double> a, std::span<const double> b);

/// Memory bank: one unit-norm row per training sample.
///
/// Rows are stored in single precision; every reduction over a row runs in
/// double. Shape is fixed at construction and every write renormalizes, so
/// the unit-norm invariant holds after any sequence of updates.
class EmbeddingBank {
public:
    /// Rows drawn from an isotropic Gaussian and normalized.
    EmbeddingBank(std::size_t count, std::size_t dim, std::uint64_t seed);

    /// Adopts the given rows after normalizing each of them.
    explicit EmbeddingBank(const Matrix& rows);

    std::size_t count() const { return vectors_.rows; }
    std::size_t dim() const { return vectors_.cols; }

    std::span<const float> row(std::size_t i) const;
    const Matrix& vectors() const { return vectors_; }

    /// row := normalize(m * row + (1 - m) * fresh). Returns the new row.
    std::span<const float> update(std::size_t index, std::span<const double> fresh, double momentum);

    /// Overwrites a row with normalize(v).
    void assign(std::size_t index, std::span<const double> v);

    /// sims[i] = <row_i, v>.
    std::vector<double> all_sims(std::span<const double> v) const;
    void all_sims(std::span<const double> v, std::span<double> out) const;

private:
    void check_index(std::size_t index) const;

    Matrix vectors_;
};

/// Free-function form of EmbeddingBank::update.
std::span<const float> bank_update(EmbeddingBank& bank, std::size_t index, std::span<const double> fresh,
                                   double momentum);

/// Free-function form of EmbeddingBank::all_sims.
std::vector<double> all_sims(const EmbeddingBank& bank, std::span<const double> v);

// "PCPE" embedding file: magic, u32 N, u32 D, N*D little-endian f32 row-major.
void write_embeddings(const Matrix& rows, const std::filesystem::path& path);
Matrix read_embeddings(const std::filesystem::path& path);

inline void export_embeddings(const EmbeddingBank& bank, const std::filesystem::path& path) {
    write_embeddings(bank.vectors(), path);
}

} // namespace pcp
