#include "ehrenc/vq.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ehrenc {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values))
{
    if (data.size() != r * c) {
        throw Error("matrix data has " + std::to_string(data.size()) + " values, expected " + std::to_string(r * c));
    }
}

Codebook::Codebook(Matrix entries, double decay)
    : Codebook(entries, std::vector<double>(entries.rows, 1.0), entries, decay)
{
}

Codebook::Codebook(Matrix entries, std::vector<double> counts, Matrix sums, double decay)
    : entries_(std::move(entries)), counts_(std::move(counts)), sums_(std::move(sums)), decay_(decay)
{
    if (entries_.rows == 0 || entries_.cols == 0) throw Error("codebook needs at least one non-empty entry");
    if (!(decay_ > 0.0 && decay_ <= 1.0)) throw Error("codebook decay must be in (0, 1]");
    if (counts_.size() != entries_.rows || sums_.rows != entries_.rows || sums_.cols != entries_.cols) {
        throw Error("codebook accumulators do not match the entries");
    }
}

Codebook Codebook::random(std::size_t k, std::size_t width, double decay, Rng& rng, double scale)
{
    Matrix m(k, width);
    for (auto& v : m.data) v = (2.0 * rng.unit() - 1.0) * scale;
    return Codebook(std::move(m), decay);
}

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw Error("distance between vectors of width " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

std::size_t nearest_code(std::span<const double> v, const Codebook& codebook)
{
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < codebook.size(); ++k) {
        const double dist = squared_distance(v, codebook.entry(k));
        if (dist < best_dist) {
            best_dist = dist;
            best = k;
        }
    }
    return best;
}

QuantizationResult quantize(const Matrix& z, const Codebook& codebook)
{
    if (z.cols % kPiecesPerFiber != 0) {
        throw Error("latent channel dim " + std::to_string(z.cols) + " is not divisible by 4");
    }
    const std::size_t piece = z.cols / kPiecesPerFiber;
    if (piece != codebook.width()) {
        throw Error("fiber piece width " + std::to_string(piece) + " does not match codebook width " +
                    std::to_string(codebook.width()));
    }
    QuantizationResult r;
    r.indices.reserve(z.rows * kPiecesPerFiber);
    r.z_q = Matrix(z.rows, z.cols);
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t j = 0; j < kPiecesPerFiber; ++j) {
            const auto v = z.row(i).subspan(j * piece, piece);
            const auto k = nearest_code(v, codebook);
            r.indices.push_back(k);
            const auto e = codebook.entry(k);
            for (std::size_t c = 0; c < piece; ++c) {
                r.z_q(i, j * piece + c) = e[c];
                const double diff = v[c] - e[c];
                r.commitment_distance += diff * diff;
            }
        }
    }
    return r;
}

Matrix assemble(const std::vector<std::size_t>& indices, std::size_t t, const Codebook& codebook)
{
    if (indices.size() != t * kPiecesPerFiber) throw Error("expected " + std::to_string(t * kPiecesPerFiber) + " code indices");
    const std::size_t piece = codebook.width();
    Matrix out(t, piece * kPiecesPerFiber);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < kPiecesPerFiber; ++j) {
            const auto k = indices[i * kPiecesPerFiber + j];
            if (k >= codebook.size()) throw Error("code index " + std::to_string(k) + " out of range");
            const auto e = codebook.entry(k);
            for (std::size_t c = 0; c < piece; ++c) out(i, j * piece + c) = e[c];
        }
    }
    return out;
}

VqLoss vq_loss(std::span<const double> x, std::span<const double> x_tilde, std::span<const double> z,
               std::span<const double> z_q, double beta)
{
    if (x.size() != x_tilde.size()) throw Error("x and reconstruction differ in size");
    if (z.size() != z_q.size()) throw Error("z and z_q differ in size");
    VqLoss l;
    l.reconstruction = squared_distance(x, x_tilde);
    l.commitment = beta * squared_distance(z, z_q);
    l.total = l.reconstruction + l.commitment;
    return l;
}

Codebook ema_update(const Codebook& codebook, const std::vector<Assignment>& assignments)
{
    const std::size_t k_count = codebook.size();
    const std::size_t width = codebook.width();
    std::vector<double> batch_counts(k_count, 0.0);
    Matrix batch_sums(k_count, width);
    for (const auto& [k, v] : assignments) {
        if (k >= k_count) throw Error("assignment to code " + std::to_string(k) + " outside codebook");
        if (v.size() != width) {
            throw Error("assigned vector width " + std::to_string(v.size()) + " != codebook width " + std::to_string(width));
        }
        batch_counts[k] += 1.0;
        for (std::size_t c = 0; c < width; ++c) batch_sums(k, c) += v[c];
    }

    const double decay = codebook.decay();
    Matrix entries = codebook.entries();
    std::vector<double> counts = codebook.counts();
    Matrix sums = codebook.sums();
    for (std::size_t k = 0; k < k_count; ++k) {
        if (batch_counts[k] == 0.0) continue;
        counts[k] = decay * counts[k] + (1.0 - decay) * batch_counts[k];
        for (std::size_t c = 0; c < width; ++c) {
            sums(k, c) = decay * sums(k, c) + (1.0 - decay) * batch_sums(k, c);
            if (counts[k] > 0.0) entries(k, c) = sums(k, c) / counts[k];
        }
    }
    return Codebook(std::move(entries), std::move(counts), std::move(sums), decay);
}

std::vector<Assignment> assignments_from(const Matrix& z, const QuantizationResult& result)
{
    const std::size_t piece = z.cols / kPiecesPerFiber;
    std::vector<Assignment> out;
    out.reserve(result.indices.size());
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t j = 0; j < kPiecesPerFiber; ++j) {
            const auto v = z.row(i).subspan(j * piece, piece);
            out.emplace_back(result.indices[i * kPiecesPerFiber + j], std::vector<double>(v.begin(), v.end()));
        }
    }
    return out;
}

}  // namespace ehrenc
