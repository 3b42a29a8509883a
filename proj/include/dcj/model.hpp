#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcj/error.hpp"

namespace dcj {

using Count = std::int32_t;
using CountVec = std::vector<Count>;

/// The finite site set: sites are indexed 0..site_count-1; labels are
/// display names only and never enter any computation.
struct SiteGraph {
    int site_count = 0;
    std::vector<std::string> labels;

    static SiteGraph of_size(int n);
    void validate() const;
};

/// A network state: per-site task counts n and per-site walker counts y.
/// Both vectors always have length site_count even when a variant does
/// not use walkers (then occupancy is all zeros).
struct NetworkState {
    CountVec tasks;     // n
    CountVec occupancy; // y

    long total_tasks() const; // |n|
    long total_dcs() const;   // |y|

    bool operator==(const NetworkState& o) const {
        return tasks == o.tasks && occupancy == o.occupancy;
    }
};

struct StateHash {
    std::size_t operator()(const NetworkState& s) const;
};

std::string to_string(const NetworkState& s);

// The twelve models. Numbering follows the order in which the families
// appear: plain network, single walker (basic / general / task-closed),
// the exclusion four, the zero-range four.
enum class Variant {
    V1,  // plain open network, no walker
    V2,  // single walker, constant rates, open tasks
    V3,  // single walker, general rates, open tasks
    V4,  // single walker, closed tasks
    V5,  // exclusion, closed walkers, open tasks
    V6,  // exclusion, open walkers, open tasks
    V7,  // exclusion, closed walkers, closed tasks
    V8,  // exclusion, open walkers, closed tasks
    V9,  // zero-range, closed walkers, open tasks
    V10, // zero-range, open walkers, open tasks
    V11, // zero-range, closed walkers, closed tasks
    V12, // zero-range, open walkers, closed tasks
};

enum class ParticleKind { None, SingleDc, Exclusion, ZeroRange };

/// Structural facts derived from the variant tag.
struct VariantTraits {
    ParticleKind kind = ParticleKind::None;
    bool tasks_open = true; // exogenous task arrivals/exits present
    bool dcs_open = false;  // walker arrivals/exits present (xi/eta)
    bool needs_m = false;   // conserved walker count M required
    bool needs_n = false;   // conserved task count N required
    bool uses_epsilon = false;
    bool uses_tau = false;
    bool uses_theta = false;
};

VariantTraits variant_traits(Variant v);
const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

/// Rate families. All arguments are 0-based site indices; `y` is the full
/// occupancy vector so single-walker models pass y = e^j.
struct RateFamilies {
    // λ_i(n; y), μ_i(n; y)
    std::function<double(int site, Count n, const CountVec& y)> lambda;
    std::function<double(int site, Count n, const CountVec& y)> mu;
    // γ_i(n)
    std::function<double(int site, Count n)> gamma;
    // β_kl(n_k, n_l; y), θ, ε — (from, to, n_from, n_to, y)
    std::function<double(int from, int to, Count n_from, Count n_to, const CountVec& y)> beta;
    std::function<double(int from, int to, Count n_from, Count n_to, const CountVec& y)> theta;
    std::function<double(int from, int to, Count n_from, Count n_to, const CountVec& y)> epsilon;
    // τ_jj'(n; y)
    std::function<double(int from, int to, const CountVec& n, const CountVec& y)> tau;
    // walker boundary rates and the per-site gauge parameter
    std::vector<double> xi;
    std::vector<double> eta;
    std::vector<double> phi;
};

struct Truncation {
    std::optional<Count> n_max; // per-site task cap for open-task variants
    std::optional<Count> y_max; // per-site walker cap for open-walker zero-range
};

struct Tolerances {
    double validation = 1e-12;      // symmetry-condition relative tolerance
    double series = 1e-13;          // series tail, relative
    double dbe = 1e-12;             // detailed-balance relative tolerance
    double oracle = 1e-10;          // oracle-vs-product absolute tolerance
    std::size_t series_window = 10000; // consecutive ratios >= 1 before Diverged
    std::size_t state_budget = 200000; // reachable-set cap
};

struct ModelSpec {
    SiteGraph graph;
    Variant variant = Variant::V1;
    VariantTraits traits;
    RateFamilies rates;
    std::optional<long> conserved_m;
    std::optional<long> conserved_n;
    Truncation truncation;
    Tolerances tol;

    int sites() const { return graph.site_count; }

    /// Checks structural invariants (caps present where needed, xi/eta
    /// present for open-walker variants, mu positive on sampled domain).
    void validate() const;

    bool admissible(const NetworkState& s) const;
    void require_admissible(const NetworkState& s) const;

    /// Canonical start state: walkers on the first sites, tasks packed
    /// into site 0 (closed) or the empty network (open).
    NetworkState canonical_state() const;
};

/// Exact size of the constrained state space for fully closed variants,
/// or of the truncated box otherwise; nullopt when a needed cap is unset.
std::optional<std::uint64_t> state_dimension(const ModelSpec& spec);

enum class EditKind { TaskAdd, TaskRemove, TaskMove, DcMove, DcAdd, DcRemove };

struct StateEdit {
    EditKind kind;
    int a = 0; // site (or source site for moves)
    int b = 0; // destination site for moves
};

/// Returns the edited copy; the source state is never modified.
/// Throws NegativeCount / ExclusionViolated when the edit is illegal.
NetworkState apply_edit(const NetworkState& s, const StateEdit& edit,
                        ParticleKind kind = ParticleKind::ZeroRange);

std::uint64_t binomial(unsigned n, unsigned k);
std::uint64_t compositions(unsigned total, unsigned parts);

/// Enumerates all n >= 0 vectors of length `parts` with sum `total`.
void for_each_composition(long total, int parts,
                          const std::function<void(const CountVec&)>& fn);

/// Enumerates all 0/1 vectors of length `parts` with sum `total`.
void for_each_subset(int total, int parts,
                     const std::function<void(const CountVec&)>& fn);

} // namespace dcj
