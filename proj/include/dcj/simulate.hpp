#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "dcj/generator.hpp"
#include "dcj/model.hpp"

namespace dcj {

/// Deterministic 64-bit generator (splitmix64). Replica streams are derived
/// from (seed, replica index), so parallel runs are reproducible regardless
/// of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    static std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica);
    static Rng for_replica(std::uint64_t seed, std::uint64_t replica) {
        return Rng(replica_seed(seed, replica));
    }

    std::uint64_t next_u64();
    double uniform01(); // strictly inside (0, 1)

private:
    std::uint64_t state_;
};

struct StepResult {
    double holding = 0;
    NetworkState next;
    TransitionKind kind = TransitionKind::TaskArrival;
};

/// One exact-clock event: exponential holding time at the state's total
/// rate, next state proportional to the transition rates.
StepResult step(const ModelSpec& spec, const NetworkState& state, Rng& rng);

struct SimBudget {
    std::uint64_t max_events = 0;
    double max_time = std::numeric_limits<double>::infinity();
};

using OccupationMap = std::unordered_map<NetworkState, double, StateHash>;

struct Trajectory {
    NetworkState initial;
    OccupationMap occupation; // state -> residence time, states inside the caps
    double overflow_time = 0; // residence beyond the truncation caps
    double total_time = 0;
    std::uint64_t event_count = 0;
    std::uint64_t seed = 0;
    std::array<std::uint64_t, 9> kind_counts{}; // indexed by TransitionKind
};

struct Snapshot {
    std::uint64_t events = 0;
    OccupationMap occupation;
    double overflow_time = 0;
    double total_time = 0;
};

struct ReplicaRun {
    Trajectory traj;
    std::vector<Snapshot> snapshots;
};

/// Simulates the exact model (no truncation); states that wander beyond the
/// caps are accounted in overflow_time. Snapshots are taken when the event
/// count reaches each entry of `checkpoints` (ascending).
ReplicaRun run_one(const ModelSpec& spec, const NetworkState& init, SimBudget budget,
                   std::uint64_t seed, const std::vector<std::uint64_t>& checkpoints = {});

Trajectory run(const ModelSpec& spec, const NetworkState& init, SimBudget budget,
               std::uint64_t seed);

/// Independent replicas, stream k derived from (seed, k); runs at most
/// `max_threads` in parallel (0 = hardware default, capped by DCJ_THREADS).
std::vector<ReplicaRun> run_replicas(const ModelSpec& spec, const NetworkState& init,
                                     SimBudget budget, std::uint64_t seed, int replicas,
                                     int max_threads = 0,
                                     const std::vector<std::uint64_t>& checkpoints = {});

struct EmpiricalDistribution {
    OccupationMap probs;
    double overflow_mass = 0;
};

/// Time-weighted occupation frequencies — the stationary-law estimator for
/// a continuous-time chain.
EmpiricalDistribution empirical_distribution(const Trajectory& traj);

/// Merges residence times across replicas before normalizing.
EmpiricalDistribution merged_empirical(const std::vector<Trajectory>& trajs);

/// TV distance between an empirical law and a reference law on `space`;
/// empirical mass outside `space` (including overflow) counts in full.
double tv_against(const EmpiricalDistribution& emp, const ReachableSet& space,
                  const std::vector<double>& probs);

} // namespace dcj
