#pragma once

#include <vector>

#include "dcj/generator.hpp"
#include "dcj/model.hpp"

namespace dcj {

struct BalanceReport {
    std::size_t transitions_checked = 0;
    double max_residual = 0;
    double tolerance = 1e-12;
    bool pass = true;
    // worst offender
    NetworkState worst_state;
    NetworkState worst_target;
    TransitionKind worst_kind = TransitionKind::TaskArrival;
    double worst_lhs = 0;
    double worst_rhs = 0;
};

/// Checks w(s)·r(s→s') = w(s')·r(s'→s) for every transition out of the
/// given states whose target stays inside the truncation box. Throws
/// MissingReverse when a forward rate has no positive reverse.
BalanceReport check_detailed_balance(const ModelSpec& spec,
                                     const std::vector<NetworkState>& states, double tol);

struct IrreducibilityVerdict {
    bool irreducible = true;
    std::size_t states = 0;
    // on failure: `unreachable` cannot reach `seed` inside the explored set
    NetworkState seed;
    NetworkState unreachable;
};

IrreducibilityVerdict check_irreducibility(const ModelSpec& spec, const ReachableSet& set);
IrreducibilityVerdict check_irreducibility(const ModelSpec& spec);

struct Oracle {
    ReachableSet space;
    std::vector<double> probs; // indexed like space.states
};

/// Stationary law of the (truncated) chain by a direct linear solve of the
/// global balance equations; exact for fully closed variants.
Oracle oracle_stationary(const ModelSpec& spec, std::size_t budget = 20000);

/// (1/2)·Σ|p - q| over a common index set.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

} // namespace dcj
