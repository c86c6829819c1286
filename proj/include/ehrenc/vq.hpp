#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ehrenc/common.hpp"

namespace ehrenc {

/// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

inline constexpr std::size_t kPiecesPerFiber = 4;

/// K code vectors plus the EMA accumulators (cluster sizes N_k, sums m_k).
class Codebook {
public:
    /// Accumulators start at N_k = 1, m_k = e_k.
    Codebook(Matrix entries, double decay);
    Codebook(Matrix entries, std::vector<double> counts, Matrix sums, double decay);

    /// Entries drawn uniformly from [-scale, scale).
    static Codebook random(std::size_t k, std::size_t width, double decay, Rng& rng, double scale = 1.0);

    std::size_t size() const { return entries_.rows; }
    std::size_t width() const { return entries_.cols; }
    double decay() const { return decay_; }
    const Matrix& entries() const { return entries_; }
    const std::vector<double>& counts() const { return counts_; }
    const Matrix& sums() const { return sums_; }
    std::span<const double> entry(std::size_t k) const { return entries_.row(k); }

    bool operator==(const Codebook&) const = default;

private:
    Matrix entries_;
    std::vector<double> counts_;
    Matrix sums_;
    double decay_ = 0.99;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// argmin_k ||v - e_k||^2, lowest index on ties.
std::size_t nearest_code(std::span<const double> v, const Codebook& codebook);

struct QuantizationResult {
    std::vector<std::size_t> indices;  ///< t x 4, row-major
    Matrix z_q;
    double commitment_distance = 0.0;  ///< ||z - z_q||^2
};

/// Splits every fiber (row) of z into four pieces of width c/4 and replaces
/// each with its nearest code.
QuantizationResult quantize(const Matrix& z, const Codebook& codebook);

/// z_q rebuilt from code indices.
Matrix assemble(const std::vector<std::size_t>& indices, std::size_t t, const Codebook& codebook);

struct VqLoss {
    double total = 0.0;
    double reconstruction = 0.0;
    double commitment = 0.0;
};

/// ||x - x~||^2 + beta * ||z - z_q||^2. The codebook term is handled by the
/// EMA update instead of the loss.
VqLoss vq_loss(std::span<const double> x, std::span<const double> x_tilde, std::span<const double> z,
               std::span<const double> z_q, double beta);

using Assignment = std::pair<std::size_t, std::vector<double>>;

/// N_k <- decay*N_k + (1-decay)*count_k, m_k <- decay*m_k + (1-decay)*sum_k,
/// e_k <- m_k / N_k. Codes with no assignment are left untouched.
Codebook ema_update(const Codebook& codebook, const std::vector<Assignment>& assignments);

/// Pieces of a quantization result paired with their codes, ready for ema_update.
std::vector<Assignment> assignments_from(const Matrix& z, const QuantizationResult& result);

}  // namespace ehrenc
