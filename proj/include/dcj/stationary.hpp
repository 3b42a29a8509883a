#pragma once

#include <limits>
#include <unordered_map>

#include "dcj/model.hpp"

namespace dcj {

/// Running products λ̄_i(n;y) = Π_{0<=m<n} λ_i(m;y), μ̄_i(n;y) = Π_{1<=m<=n} μ_i(m;y)
/// and γ̄_i(n) = Π_{0<=m<n} γ_i(m), all equal to 1 at n = 0. Linear values are
/// the exact running products; log values carry the same information without
/// overflow and are what the weight machinery consumes.
class CumulativeCache {
public:
    explicit CumulativeCache(const ModelSpec& spec) : spec_(&spec) {}

    double lam_bar(int site, Count n, const CountVec& y);
    double mu_bar(int site, Count n, const CountVec& y);
    double gam_bar(int site, Count n);

    double log_lam_bar(int site, Count n, const CountVec& y);
    double log_mu_bar(int site, Count n, const CountVec& y);
    double log_gam_bar(int site, Count n);

    /// log(λ̄_i(n;y)/μ̄_i(n;y))
    double log_task_ratio(int site, Count n, const CountVec& y);

private:
    struct Row {
        std::vector<double> lin_lam{1.0}, lin_mu{1.0};
        std::vector<double> log_lam{0.0}, log_mu{0.0};
    };
    struct GaugeRow {
        std::vector<double> lin{1.0};
        std::vector<double> log{0.0};
    };
    struct YKey {
        int site;
        CountVec y;
        bool operator==(const YKey& o) const { return site == o.site && y == o.y; }
    };
    struct YKeyHash {
        std::size_t operator()(const YKey& k) const;
    };

    Row& row(int site, const CountVec& y, Count upto);
    GaugeRow& gauge_row(int site, Count upto);

    const ModelSpec* spec_;
    std::unordered_map<YKey, Row, YKeyHash> rows_;
    std::vector<GaugeRow> gauge_rows_;
};

struct WeightValue {
    double log_weight = -std::numeric_limits<double>::infinity();
    bool is_zero() const { return !(log_weight > -std::numeric_limits<double>::infinity()); }
};

struct SeriesValue {
    double value = 0;
    long truncation_index = -1;
    double tail_bound = 0;
    bool converged = false;
};

/// Unnormalized stationary weight; conserved-sum indicators give weight 0
/// off the manifold. Throws InadmissibleState only for structural
/// violations (negative counts, exclusion bounds, walker count shape).
WeightValue weight(const ModelSpec& spec, const NetworkState& state);
WeightValue weight(const ModelSpec& spec, const NetworkState& state, CumulativeCache& cache);

/// Σ_n λ̄_l(n;y)/μ̄_l(n;y)
SeriesValue series_U(const ModelSpec& spec, int site, const CountVec& y);
/// Σ_n λ̄_r(n;y)·γ̄_r(n)/μ̄_r(n;y)
SeriesValue series_L(const ModelSpec& spec, int site, const CountVec& y);
/// Σ_n λ̄_r(n;y)/μ̄_r(n;y)·[γ̄_r(n)]^{y_r}
SeriesValue series_C(const ModelSpec& spec, int site, const CountVec& y);

/// The normalization constant, assembled per variant: closed manifolds are
/// summed exactly; open coordinates use certified per-site series. value is
/// the computed lower bracket and value+tail_bound the upper.
SeriesValue partition_function(const ModelSpec& spec);

/// Same assembly with every per-site series cut at the truncation caps —
/// the exact sum of weights over the truncated box for open variants.
SeriesValue partition_function_boxed(const ModelSpec& spec);

/// exp(log w - log Ξ).
double probability(const ModelSpec& spec, const NetworkState& state);

struct SubcriticalityEntry {
    std::string series;  // which sum, at which site / occupancy
    bool converged = false;
    double value = 0;
    double last_ratio = 0; // term ratio observed when divergence was declared
    std::string detail;
};

struct SubcriticalityReport {
    std::vector<SubcriticalityEntry> entries;
    bool pass = true;
};

/// Convergence verdict for every series the variant's normalization needs.
SubcriticalityReport check_subcriticality(const ModelSpec& spec);

} // namespace dcj
