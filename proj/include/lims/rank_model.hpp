#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lims/serial.hpp"

namespace lims {

/// Rank of `x` in a sorted multiset: the number of elements strictly smaller,
/// i.e. the index of the first element >= x. Serves as the reference locator
/// the learned path is checked against.
template <typename Key>
std::size_t exact_rank(std::span<const Key> keys, Key x) {
    return static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), x) - keys.begin());
}

/// Polynomial rank predictor over a sorted key array. Input is normalized to
/// [key_min, key_max] and evaluated on a Chebyshev basis; predictions clamp
/// to the trained rank range. Model error never affects lookup results, only
/// the exponential-search probe count.
struct RankModel {
    std::uint32_t degree = 1;
    double key_min = 0.0;
    double key_max = 0.0;
    std::uint64_t train_count = 0;
    std::vector<double> coeffs; // degree + 1 Chebyshev coefficients

    double predict(double x) const {
        if (train_count == 0)
            return 0.0;
        const double span = key_max - key_min;
        double u = 0.0;
        if (span > 0.0) {
            const double t = (x - key_min) / span; // not clamped: extrapolation is fine
            u = 2.0 * t - 1.0;
        }
        // Clenshaw recurrence.
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;) {
            const double b0 = coeffs[k] + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        const double raw = coeffs.empty() ? 0.0 : coeffs[0] + u * b1 - b2;
        return std::clamp(raw, 0.0, static_cast<double>(train_count - 1));
    }
};

namespace detail {

// Solves (A + ridge*I) x = b in place by Gaussian elimination with partial
// pivoting. A is a dense symmetric (degree+1)^2 normal-equation matrix.
inline std::vector<double> solve_ridge(std::vector<std::vector<double>> a, std::vector<double> b,
                                       double ridge) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i)
        a[i][i] += ridge;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        const double diag = a[col][col];
        if (diag == 0.0)
            continue; // fully degenerate direction; ridge keeps this rare
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / diag;
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c)
            s -= a[i][c] * x[c];
        x[i] = a[i][i] != 0.0 ? s / a[i][i] : 0.0;
    }
    return x;
}

inline void chebyshev_row(double u, std::span<double> row) {
    row[0] = 1.0;
    if (row.size() > 1)
        row[1] = u;
    for (std::size_t k = 2; k < row.size(); ++k)
        row[k] = 2.0 * u * row[k - 1] - row[k - 2];
}

} // namespace detail

/// Fits the squared-error-minimizing polynomial to {(key, rank(key))} over a
/// sorted multiset. Closed form (normal equations + ridge 1e-9); duplicates
/// weight the fit with their multiplicity, each carrying the rank of the
/// first occurrence. An all-equal array yields the constant-0 model.
template <typename Key>
RankModel train_rank_model(std::span<const Key> keys, std::uint32_t degree) {
    if (keys.empty())
        throw std::invalid_argument("train_rank_model: empty key array");
    RankModel model;
    model.degree = degree;
    model.key_min = static_cast<double>(keys.front());
    model.key_max = static_cast<double>(keys.back());
    model.train_count = keys.size();
    model.coeffs.assign(degree + 1, 0.0);
    if (model.key_max <= model.key_min)
        return model; // degenerate: rank of the unique key is 0

    const std::size_t terms = degree + 1;
    std::vector<std::vector<double>> ata(terms, std::vector<double>(terms, 0.0));
    std::vector<double> aty(terms, 0.0);
    std::vector<double> row(terms);
    const double span = model.key_max - model.key_min;

    std::size_t first_occurrence = 0;
    for (std::size_t t = 0; t < keys.size(); ++t) {
        if (t > 0 && keys[t] != keys[t - 1])
            first_occurrence = t;
        const double u = 2.0 * ((static_cast<double>(keys[t]) - model.key_min) / span) - 1.0;
        detail::chebyshev_row(u, row);
        const auto rank = static_cast<double>(first_occurrence);
        for (std::size_t i = 0; i < terms; ++i) {
            aty[i] += row[i] * rank;
            for (std::size_t j = i; j < terms; ++j)
                ata[i][j] += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < terms; ++i)
        for (std::size_t j = 0; j < i; ++j)
            ata[i][j] = ata[j][i];

    model.coeffs = detail::solve_ridge(std::move(ata), std::move(aty), 1e-9);
    return model;
}

struct LocateResult {
    std::size_t index = 0;
    std::uint32_t probes = 0; // array accesses spent correcting the estimate
};

/// Exponential search around a (possibly wrong) predicted rank. Returns
/// exact_rank(keys, x) regardless of the start value; the probe count is
/// O(log err) in the prediction error.
template <typename Key>
LocateResult search_first_geq(std::span<const Key> keys, double start, Key x) {
    LocateResult res;
    const std::size_t n = keys.size();
    if (n == 0)
        return res;
    const double clamped = std::clamp(start, 0.0, static_cast<double>(n - 1));
    const auto pos = static_cast<std::size_t>(std::llround(clamped));

    std::size_t lo, hi; // invariant once set: keys[lo-1] < x (lo==0 ok), keys[hi] >= x or hi==n
    ++res.probes;
    if (keys[pos] >= x) {
        // Answer is at or left of pos: gallop left until keys[pos - step] < x.
        hi = pos;
        std::size_t step = 1;
        while (step <= pos) {
            ++res.probes;
            if (keys[pos - step] < x)
                break;
            hi = pos - step;
            step *= 2;
        }
        lo = step <= pos ? pos - step + 1 : 0;
    } else {
        // Answer is right of pos: gallop right until keys[pos + step] >= x.
        lo = pos + 1;
        std::size_t step = 1;
        while (pos + step < n) {
            ++res.probes;
            if (keys[pos + step] >= x) {
                break;
            }
            lo = pos + step + 1;
            step *= 2;
        }
        hi = pos + step < n ? pos + step : n;
    }
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ++res.probes;
        if (keys[mid] < x)
            lo = mid + 1;
        else
            hi = mid;
    }
    res.index = lo;
    return res;
}

/// Index of the last element equal to `x`, galloping up from a predicted
/// start; empty when x is absent.
template <typename Key>
std::optional<std::size_t> search_last_occurrence(std::span<const Key> keys, double start, Key x) {
    const std::size_t n = keys.size();
    if (n == 0)
        return std::nullopt;
    const double clamped = std::clamp(start, 0.0, static_cast<double>(n - 1));
    auto pos = static_cast<std::size_t>(std::llround(clamped));

    // Locate the window that brackets the first element > x, then binary
    // search inside it.
    std::size_t lo, hi;
    if (keys[pos] > x) {
        hi = pos;
        std::size_t step = 1;
        while (step <= pos && keys[pos - step] > x) {
            hi = pos - step;
            step *= 2;
        }
        lo = step <= pos ? pos - step + 1 : 0;
    } else {
        lo = pos + 1;
        std::size_t step = 1;
        while (pos + step < n && keys[pos + step] <= x) {
            lo = pos + step + 1;
            step *= 2;
        }
        hi = pos + step < n ? pos + step : n;
    }
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (keys[mid] <= x)
            lo = mid + 1;
        else
            hi = mid;
    }
    // lo is now the index of the first element > x.
    if (lo == 0 || keys[lo - 1] != x)
        return std::nullopt;
    return lo - 1;
}

inline void serialize_model(const RankModel& m, std::vector<std::byte>& out) {
    put_u32(out, m.degree);
    put_f64(out, m.key_min);
    put_f64(out, m.key_max);
    put_u64(out, m.train_count);
    put_u64(out, m.coeffs.size());
    for (double c : m.coeffs)
        put_f64(out, c);
}

inline RankModel deserialize_model(std::span<const std::byte> in, std::size_t& off) {
    RankModel m;
    m.degree = get_u32(in, off);
    m.key_min = get_f64(in, off);
    m.key_max = get_f64(in, off);
    m.train_count = get_u64(in, off);
    const std::uint64_t n = get_u64(in, off);
    m.coeffs.resize(n);
    for (auto& c : m.coeffs)
        c = get_f64(in, off);
    return m;
}

} // namespace lims
