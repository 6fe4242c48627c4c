#pragma once

// Test-only helpers: a small self-contained generator and direct evaluations of
// the published formulas, written without touching the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace testkit {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}

    std::uint64_t bits() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
    double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(bits() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool chance(double p) { return unit() < p; }

private:
    std::uint64_t state_;
};

inline constexpr int kCases = 1000;

// w(a) = (e^{k a / T} - 1) / (e^k - 1)
inline double weight(double age, double timeout, double kappa) {
    const double a = std::clamp(age, 0.0, timeout);
    return (std::exp(kappa * a / timeout) - 1.0) / (std::exp(kappa) - 1.0);
}

inline double lerp_at(double t0, double v0, double t1, double v1, double t) {
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

// Imputation table: rows are instances, columns ticks, nullopt = not reported.
using Column = std::map<std::string, std::optional<double>>;

struct ImputeRow {
    double total = 0.0;
    std::map<std::string, double> values;
};

// The six steps spelled out literally, one tick at a time.
inline std::vector<ImputeRow> impute_oracle(const std::vector<Column>& columns) {
    std::vector<ImputeRow> rows;
    for (std::size_t t = 0; t < columns.size(); ++t) {
        ImputeRow row;
        double known = 0.0;
        double previous_known = 0.0;
        int unknown = 0;
        for (const auto& [id, v] : columns[t]) {
            if (v) {
                known += *v;
                if (t > 0 && rows[t - 1].values.count(id)) {
                    previous_known += rows[t - 1].values.at(id);
                }
            } else {
                ++unknown;
            }
        }
        if (t > 0) {
            // Instances that left since the previous tick no longer contribute.
            for (const auto& [id, v] : rows[t - 1].values) {
                if (!columns[t].count(id)) {
                    previous_known += v;
                }
            }
        }
        double share = t == 0 ? 0.0 : std::max(0.0, rows[t - 1].total - previous_known);
        row.total = known + share;
        for (const auto& [id, v] : columns[t]) {
            row.values[id] = v ? *v : (unknown > 0 ? share / unknown : 0.0);
        }
        rows.push_back(row);
    }
    return rows;
}

struct DecisionOracle {
    double rho = 0.0;
    double omega = 1.0;
    double dampened = 0.0;
    double need = 0.0;
    int target = 0;
};

// Scale-up arithmetic for the default model, straight from the formulas.
inline DecisionOracle scale_up_oracle(double level, double delta_h, double k, double tau, double p_now, int n_target,
                                      int n_step, int n_max, double cutoff = 0.1) {
    DecisionOracle o;
    if (delta_h > 0.0 && level > 1e-9) {
        o.rho = delta_h / level;
        o.omega = k / (k + o.rho);
    }
    o.dampened = level + o.omega * delta_h;
    o.need = o.dampened / tau;
    int n = static_cast<int>(std::ceil(o.need));
    const double spill = o.need - (n - 1);
    if (p_now <= tau && spill <= cutoff) {
        n -= 1;
    }
    o.target = std::clamp(n, n_target, std::min(n_target + n_step, n_max));
    return o;
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace testkit
