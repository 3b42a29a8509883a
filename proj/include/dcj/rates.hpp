#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dcj/model.hpp"

namespace dcj {

using SiteRateFn = std::function<double(int, Count, const CountVec&)>;
using GaugeFn = std::function<double(int, Count)>;
using PairRateFn = std::function<double(int, int, Count, Count, const CountVec&)>;
using LeapRateFn = std::function<double(int, int, const CountVec&, const CountVec&)>;
using Matrix = std::vector<std::vector<double>>;

// ---- built-in site-rate families ----

/// λ or μ equal to a per-site constant.
SiteRateFn constant_rate(double rate);
SiteRateFn constant_rate(std::vector<double> rates);

/// Arrivals blocked once the queue holds `cap` tasks: rate·1(n < cap).
SiteRateFn blocked_arrival(double rate, Count cap);

/// K-server service: rate·min(n, servers).
SiteRateFn kserver_service(double rate, Count servers);

/// Multiplies `base` by scale[i] whenever site i is occupied. Applying the
/// same scaling to λ and μ leaves every λ̄/μ̄ ratio unchanged.
SiteRateFn occupancy_scaled(SiteRateFn base, std::vector<double> scale);

// ---- built-in gauge families ----

GaugeFn gauge_one();

/// γ_j(n) = e^{φ_j} for every n, including n = 0. This is the family that
/// turns the constant-rate walker model into an instance of the general
/// one: the leap rate becomes e^{-φ_j n_j}·τ.
GaugeFn gauge_const_exp(std::vector<double> phi);

/// γ_j(0) = 1, γ_j(n) = e^{φ_j}/n for n >= 1.
GaugeFn gauge_inv_linear(std::vector<double> phi);

/// γ_j(0) = 1, γ_j(n) = n·e^{φ_j} for n >= 1.
GaugeFn gauge_linear(std::vector<double> phi);

// ---- built-in jump-array families ----

/// Entry-wise constant array; diagonal forced to zero.
PairRateFn constant_matrix(Matrix c);

/// c_ik·μ_i(a; y)/λ_i(a-1; y). With symmetric c this satisfies the
/// rate-weighted jump balance for any λ, μ with matching support.
PairRateFn rate_balanced_matrix(Matrix c, SiteRateFn lambda, SiteRateFn mu);

/// c_ij·[γ_j(b)]^p with p = y_j for zero-range gauges and p = 1 otherwise.
/// With symmetric c and constant λ, μ this satisfies the loaded-loaded
/// jump balance in both its plain and exponent-weighted forms.
PairRateFn dest_gauge_matrix(Matrix c, GaugeFn gamma, bool occupancy_exponent);

// ---- built-in leap families ----

LeapRateFn constant_leap(Matrix c);

/// c_jj'·η_j/ξ_j — balances walker leaps against the walker fugacities.
LeapRateFn fugacity_leap(Matrix c, std::vector<double> xi, std::vector<double> eta);

/// c_jj' / Π_q λ̄_q(n_q; y)/μ̄_q(n_q; y) — balances leaps whose endpoints
/// see different arrival/service environments.
LeapRateFn weight_balanced_leap(Matrix c, SiteRateFn lambda, SiteRateFn mu);

/// Scales one directed entry of an already-built array by `factor`.
PairRateFn perturb_entry(PairRateFn base, int from, int to, double factor);
LeapRateFn perturb_entry(LeapRateFn base, int from, int to, double factor);

// ---- validators ----

struct Violation {
    std::string where;
    double lhs = 0;
    double rhs = 0;
    double rel_err = 0;
};

struct ValidationReport {
    std::string condition;
    std::size_t checked = 0;
    double max_rel_err = 0;
    std::vector<Violation> violations; // worst retained first, capped
    bool pass() const { return violations.empty(); }
};

/// |L-R| <= tol·max(|L|,|R|,1) — scale-aware with an absolute floor.
double relative_error(double lhs, double rhs);

/// All occupancy vectors the variant can realize, within the truncation
/// caps, capped at `budget` contexts.
std::vector<CountVec> occupancy_contexts(const ModelSpec& spec, std::size_t budget);

/// Jump balance for task jumps between unloaded sites.
ValidationReport validate_beta(const ModelSpec& spec);

/// Jump balance across a loaded/unloaded site pair.
ValidationReport validate_theta(const ModelSpec& spec);

/// Gauge-weighted jump balance between two loaded sites.
ValidationReport validate_epsilon(const ModelSpec& spec);

/// Leap balance in the variant-appropriate form (environment-product
/// weighted, fugacity weighted, or plain exchange symmetry).
ValidationReport validate_tau(const ModelSpec& spec);

/// Checks that Π_q λ̄_q(n_q; y)/μ̄_q(n_q; y) does not depend on y.
ValidationReport validate_environment_independence(const ModelSpec& spec);

/// Every validator the variant requires, in dependency order.
std::vector<ValidationReport> validate_all(const ModelSpec& spec);

} // namespace dcj
