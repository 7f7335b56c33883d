#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace betanas {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration request exceeds the configured cap.
struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownGenotypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpaceMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A loss went non-finite or blew past the abort threshold mid-run.
struct DivergenceError : std::runtime_error {
    int epoch;
    int step;
    DivergenceError(const std::string& msg, int epoch_, int step_)
        : std::runtime_error(msg), epoch(epoch_), step(step_) {}
};

namespace grad {

// ---------------------------------------------------------------------------
// Array: dense row-major real tensor
// ---------------------------------------------------------------------------

struct Array {
    std::vector<int> shape;    // all entries positive
    std::vector<double> data;  // row-major, size == product(shape)

    Array() = default;
    Array(std::vector<int> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (static_cast<size_t>(numel(shape)) != data.size())
            throw ShapeError("array data length does not match shape");
    }

    static int numel(const std::vector<int>& shape) {
        int n = 1;
        for (int d : shape) {
            if (d <= 0) throw ShapeError("array dimensions must be positive");
            n *= d;
        }
        return n;
    }

    static Array zeros(std::vector<int> shape) {
        int n = numel(shape);
        return Array(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
    }

    static Array full(std::vector<int> shape, double v) {
        int n = numel(shape);
        return Array(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
    }

    static Array scalar(double v) { return Array({1}, {v}); }

    int size() const { return static_cast<int>(data.size()); }
    bool is_scalar() const { return data.size() == 1; }
    double scalar_value() const {
        if (!is_scalar()) throw ShapeError("array is not a scalar");
        return data[0];
    }

    int rows() const { return shape.empty() ? 1 : shape[0]; }
    int cols() const { return shape.size() < 2 ? size() / rows() : shape[1]; }

    // Size of the last axis; reductions and row-wise ops run over it.
    int last_dim() const { return shape.empty() ? 1 : shape.back(); }
    int outer_size() const { return size() / last_dim(); }

    double& at(int i) { return data[static_cast<size_t>(i)]; }
    double at(int i) const { return data[static_cast<size_t>(i)]; }
    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

    bool same_shape(const Array& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// ---------------------------------------------------------------------------
// Rng: explicit seeded generator (splitmix64 core)
//
// All randomness in the library flows through instances of this type; there
// is no ambient RNG. The raw stream is platform-stable so that identical
// seeds give byte-identical outputs everywhere.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the spare is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    // Independent child stream; used to decouple consumers from draw order.
    Rng fork(uint64_t salt) {
        uint64_t s = next_u64();
        return Rng(s ^ (salt * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_u64() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Deterministic 64-bit string hash (FNV-1a); used to derive per-entry seeds.
inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace grad
}  // namespace betanas
