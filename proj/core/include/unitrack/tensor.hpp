#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "unitrack/errors.hpp"

namespace unitrack {

/// Dense row-major matrix of doubles. The workhorse value type: token
/// sequences are [tokens, channels], maps are [cells, channels], vectors
/// are [1, n] rows or [n, 1] columns.
struct Tensor2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2D() = default;
    Tensor2D(int r, int c, double fill = 0.0);

    static Tensor2D zeros(int r, int c) { return Tensor2D(r, c, 0.0); }
    static Tensor2D full(int r, int c, double v) { return Tensor2D(r, c, v); }
    static Tensor2D from_row(std::span<const double> values);

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    int size() const { return rows * cols; }
    bool same_shape(const Tensor2D& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    void fill(double v);
    void add_inplace(const Tensor2D& o);

    std::string shape_str() const;
};

/// Throws ShapeError unless both tensors share a shape. `what` names the
/// operation for the message.
void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* what);
void require_finite(const Tensor2D& t, const char* what);

// ---------------------------------------------------------------------------
// Raw dense kernels. The autograd tape and its adjoints are built on these;
// they are also what the microbenchmarks measure.
// ---------------------------------------------------------------------------

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);     // a[m,k] * b[k,n]
Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b);  // a[m,k] * b[n,k]^T
Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b);  // a[k,m]^T * b[k,n]

void add_matmul(Tensor2D& out, const Tensor2D& a, const Tensor2D& b);
void add_matmul_nt(Tensor2D& out, const Tensor2D& a, const Tensor2D& b);
void add_matmul_tn(Tensor2D& out, const Tensor2D& a, const Tensor2D& b);

/// Additive attention mask over (query, key) pairs. Entries take exactly two
/// values, 0 (allow) and -inf (block); stored as a byte per pair.
struct AdditiveMask {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> blocked;  // 1 = blocked (-inf), 0 = allowed

    AdditiveMask() = default;
    AdditiveMask(int r, int c, bool block_all = false);

    static AdditiveMask allow_all(int r, int c) { return AdditiveMask(r, c, false); }
    static AdditiveMask block_all(int r, int c) { return AdditiveMask(r, c, true); }

    void block(int q, int k) { blocked[static_cast<size_t>(q) * cols + k] = 1; }
    void allow(int q, int k) { blocked[static_cast<size_t>(q) * cols + k] = 0; }
    bool is_blocked(int q, int k) const { return blocked[static_cast<size_t>(q) * cols + k] != 0; }

    /// Additive value at (q, k): 0 when allowed, -inf when blocked.
    double value(int q, int k) const {
        return is_blocked(q, k) ? -std::numeric_limits<double>::infinity() : 0.0;
    }

    std::span<const uint8_t> row(int q) const {
        return {blocked.data() + static_cast<size_t>(q) * cols, static_cast<size_t>(cols)};
    }
};

/// Numerically stable softmax over the unblocked entries of one row.
/// Blocked positions come out exactly 0 and never enter the max/sum, so the
/// result is bitwise independent of the logit values stored there. A fully
/// blocked row yields the all-zero vector.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const uint8_t> blocked);

/// Row layer normalization: (x - mean) / sqrt(var + eps) * scale + shift,
/// with the population variance over the row.
std::vector<double> layer_norm(std::span<const double> x, std::span<const double> scale,
                               std::span<const double> shift, double eps);

/// A learned tensor plus its gradient accumulator (same shape, zeroed at the
/// start of each optimization step).
struct Parameter {
    std::string name;
    Tensor2D value;
    Tensor2D grad;

    Parameter() = default;
    Parameter(std::string n, Tensor2D v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor2D::zeros(value.rows, value.cols)) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Deterministic random source. Wraps mt19937_64 with explicit uniform and
/// Box-Muller normal draws so streams are reproducible bit-for-bit from the
/// seed alone, independent of the standard library's distribution choices.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);  // inclusive bounds
    double normal(double mean = 0.0, double stddev = 1.0);

    /// Order-independent substream derivation: mix(seed, k) gives the same
    /// child seed no matter how much the parent has been consumed.
    static uint64_t mix(uint64_t seed, uint64_t stream);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace unitrack
