#pragma once

#include <unordered_map>
#include <vector>

#include "dcj/model.hpp"

namespace dcj {

enum class TransitionKind {
    TaskArrival,
    TaskExit,
    TaskJumpUnloaded,
    TaskJumpFromLoaded,
    TaskJumpToLoaded,
    TaskJumpLoadedLoaded,
    DcLeap,
    DcArrival,
    DcExit,
};

const char* kind_name(TransitionKind k);

struct Transition {
    NetworkState target;
    double rate = 0; // always > 0; zero-rate transitions are never emitted
    TransitionKind kind = TransitionKind::TaskArrival;
};

struct TransitionView {
    std::vector<Transition> list;
    bool clipped = false; // a positive-rate transition was censored by the caps
};

/// All outgoing transitions of `state`, in a deterministic order (by kind,
/// then site indices). With `truncated` set, transitions that would leave
/// the truncation box are censored (reflecting truncation); the exact model
/// is the default.
TransitionView transitions_view(const ModelSpec& spec, const NetworkState& state,
                                bool truncated = false);
std::vector<Transition> transitions(const ModelSpec& spec, const NetworkState& state,
                                    bool truncated = false);

double total_rate(const ModelSpec& spec, const NetworkState& state);

struct ReachableSet {
    std::vector<NetworkState> states; // BFS order from the seed
    std::unordered_map<NetworkState, std::size_t, StateHash> index;
    bool clipped = false; // truncation censored at least one transition
};

/// Breadth-first closure of the seed under truncated transitions.
ReachableSet reachable_states(const ModelSpec& spec, const NetworkState& seed,
                              std::size_t budget = 200000);

/// States whose every exact-model transition stays inside the truncation
/// box; on these the truncated and exact dynamics coincide.
std::vector<NetworkState> interior_states(const ModelSpec& spec, const ReachableSet& set);

} // namespace dcj
