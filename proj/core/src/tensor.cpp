#include "unitrack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace unitrack {

Tensor2D::Tensor2D(int r, int c, double fill) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw ShapeError("Tensor2D: negative dimension");
    data.assign(static_cast<size_t>(r) * c, fill);
}

Tensor2D Tensor2D::from_row(std::span<const double> values) {
    Tensor2D t(1, static_cast<int>(values.size()));
    std::copy(values.begin(), values.end(), t.data.begin());
    return t;
}

bool Tensor2D::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor2D::fill(double v) { std::fill(data.begin(), data.end(), v); }

void Tensor2D::add_inplace(const Tensor2D& o) {
    require_same_shape(*this, o, "add_inplace");
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
}

std::string Tensor2D::shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

void require_finite(const Tensor2D& t, const char* what) {
    if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite values");
}

// ---------------------------------------------------------------------------
// Dense kernels. Loop orders keep the innermost stride unit-length so the
// compiler vectorizes them; these three shapes cover every product the tape
// and its adjoints need.
// ---------------------------------------------------------------------------

static void check_inner(int a, int b, const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": inner dimensions " + std::to_string(a) +
                         " vs " + std::to_string(b));
    }
}

void add_matmul(Tensor2D& out, const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.cols, b.rows, "matmul");
    check_inner(out.rows, a.rows, "matmul out");
    check_inner(out.cols, b.cols, "matmul out");
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.row(p);
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

void add_matmul_nt(Tensor2D& out, const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.cols, b.cols, "matmul_nt");
    check_inner(out.rows, a.rows, "matmul_nt out");
    check_inner(out.cols, b.rows, "matmul_nt out");
    const int m = a.rows, k = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int j = 0; j < n; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            orow[j] += acc;
        }
    }
}

void add_matmul_tn(Tensor2D& out, const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.rows, b.rows, "matmul_tn");
    check_inner(out.rows, a.cols, "matmul_tn out");
    check_inner(out.cols, b.cols, "matmul_tn out");
    const int k = a.rows, m = a.cols, n = b.cols;
    for (int p = 0; p < k; ++p) {
        const double* arow = a.row(p);
        const double* brow = b.row(p);
        for (int i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.row(i);
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    Tensor2D out(a.rows, b.cols);
    add_matmul(out, a, b);
    return out;
}

Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b) {
    Tensor2D out(a.rows, b.rows);
    add_matmul_nt(out, a, b);
    return out;
}

Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b) {
    Tensor2D out(a.cols, b.cols);
    add_matmul_tn(out, a, b);
    return out;
}

AdditiveMask::AdditiveMask(int r, int c, bool block_all) : rows(r), cols(c) {
    blocked.assign(static_cast<size_t>(r) * c, block_all ? 1 : 0);
}

std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const uint8_t> blocked) {
    if (logits.size() != blocked.size()) {
        throw ShapeError("masked_softmax: logits length " + std::to_string(logits.size()) +
                         " vs mask length " + std::to_string(blocked.size()));
    }
    const size_t n = logits.size();
    std::vector<double> out(n, 0.0);
    double maxv = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        if (!blocked[i] && logits[i] > maxv) maxv = logits[i];
    }
    if (maxv == -std::numeric_limits<double>::infinity()) return out;  // fully blocked row
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (!blocked[i]) {
            out[i] = std::exp(logits[i] - maxv);
            sum += out[i];
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (!blocked[i]) out[i] /= sum;
    }
    return out;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> scale,
                               std::span<const double> shift, double eps) {
    const size_t n = x.size();
    if (n == 0) throw ShapeError("layer_norm: zero-width row");
    if (scale.size() != n || shift.size() != n) {
        throw ShapeError("layer_norm: scale/shift length mismatch");
    }
    if (!(eps > 0.0)) throw NumericError("layer_norm: eps must be positive");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) * inv * scale[i] + shift[i];
    return out;
}

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw ContractError("uniform_int: empty range");
    const uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
    return lo + static_cast<int>(engine_() % span);
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

uint64_t Rng::mix(uint64_t seed, uint64_t stream) {
    // splitmix64 finalizer over the pair
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace unitrack
