#include "dcj/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace dcj {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t Rng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

std::uint64_t Rng::replica_seed(std::uint64_t seed, std::uint64_t replica) {
    return mix64(seed ^ mix64(replica + 0x517cc1b727220a95ULL));
}

StepResult step(const ModelSpec& spec, const NetworkState& state, Rng& rng) {
    const auto ts = transitions(spec, state);
    double total = 0;
    for (const auto& t : ts) total += t.rate;
    if (!(total > 0))
        fail(Errc::AbsorbingState, "state " + to_string(state) + " has no outgoing clocks");
    StepResult r;
    r.holding = -std::log(rng.uniform01()) / total;
    const double x = rng.uniform01() * total;
    double cum = 0;
    std::size_t pick = ts.size() - 1;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cum += ts[i].rate;
        if (x <= cum) {
            pick = i;
            break;
        }
    }
    r.next = ts[pick].target;
    r.kind = ts[pick].kind;
    return r;
}

namespace {

bool within_caps(const ModelSpec& spec, const NetworkState& s) {
    if (spec.traits.tasks_open) {
        const Count cap = *spec.truncation.n_max;
        for (Count c : s.tasks)
            if (c > cap) return false;
    }
    if (spec.traits.dcs_open && spec.traits.kind == ParticleKind::ZeroRange) {
        const Count cap = *spec.truncation.y_max;
        for (Count c : s.occupancy)
            if (c > cap) return false;
    }
    return true;
}

} // namespace

ReplicaRun run_one(const ModelSpec& spec, const NetworkState& init, SimBudget budget,
                   std::uint64_t seed, const std::vector<std::uint64_t>& checkpoints) {
    spec.require_admissible(init);
    Rng rng(seed);
    ReplicaRun out;
    Trajectory& traj = out.traj;
    traj.initial = init;
    traj.seed = seed;

    NetworkState cur = init;
    std::size_t next_cp = 0;
    auto maybe_snapshot = [&]() {
        while (next_cp < checkpoints.size() && traj.event_count >= checkpoints[next_cp]) {
            out.snapshots.push_back(
                {checkpoints[next_cp], traj.occupation, traj.overflow_time, traj.total_time});
            ++next_cp;
        }
    };
    maybe_snapshot();

    while (traj.event_count < budget.max_events && traj.total_time < budget.max_time) {
        const StepResult st = step(spec, cur, rng);
        double hold = st.holding;
        bool cut = false;
        if (traj.total_time + hold >= budget.max_time) {
            hold = budget.max_time - traj.total_time;
            cut = true;
        }
        if (within_caps(spec, cur))
            traj.occupation[cur] += hold;
        else
            traj.overflow_time += hold;
        traj.total_time += hold;
        if (cut) break;
        cur = st.next;
        ++traj.event_count;
        ++traj.kind_counts[static_cast<std::size_t>(st.kind)];
        maybe_snapshot();
    }
    return out;
}

Trajectory run(const ModelSpec& spec, const NetworkState& init, SimBudget budget,
               std::uint64_t seed) {
    return run_one(spec, init, budget, seed).traj;
}

namespace {

int thread_cap(int requested) {
    int cap = requested > 0 ? requested
                            : static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("DCJ_THREADS")) {
        const int e = std::atoi(env);
        if (e >= 1) cap = std::min(cap, e);
    }
    return cap;
}

} // namespace

std::vector<ReplicaRun> run_replicas(const ModelSpec& spec, const NetworkState& init,
                                     SimBudget budget, std::uint64_t seed, int replicas,
                                     int max_threads,
                                     const std::vector<std::uint64_t>& checkpoints) {
    std::vector<ReplicaRun> out(static_cast<std::size_t>(std::max(replicas, 0)));
    const int threads = std::min(thread_cap(max_threads), std::max(replicas, 1));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= replicas) return;
            // stream derived from (seed, k); thread scheduling is irrelevant
            out[static_cast<std::size_t>(k)] =
                run_one(spec, init, budget,
                        Rng::replica_seed(seed, static_cast<std::uint64_t>(k)), checkpoints);
        }
    };
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

EmpiricalDistribution empirical_distribution(const Trajectory& traj) {
    if (!(traj.total_time > 0))
        fail(Errc::EmptyTrajectory, "trajectory has zero simulated time");
    EmpiricalDistribution d;
    for (const auto& [s, t] : traj.occupation) d.probs[s] = t / traj.total_time;
    d.overflow_mass = traj.overflow_time / traj.total_time;
    return d;
}

EmpiricalDistribution merged_empirical(const std::vector<Trajectory>& trajs) {
    Trajectory merged;
    for (const auto& t : trajs) {
        for (const auto& [s, r] : t.occupation) merged.occupation[s] += r;
        merged.overflow_time += t.overflow_time;
        merged.total_time += t.total_time;
    }
    return empirical_distribution(merged);
}

double tv_against(const EmpiricalDistribution& emp, const ReachableSet& space,
                  const std::vector<double>& probs) {
    if (space.states.size() != probs.size())
        fail(Errc::DomainMismatch, "reference law does not match the state set");
    double sum = 0;
    double seen_extra = emp.overflow_mass;
    for (const auto& [s, p] : emp.probs) {
        auto it = space.index.find(s);
        if (it == space.index.end()) seen_extra += p;
    }
    for (std::size_t i = 0; i < space.states.size(); ++i) {
        auto it = emp.probs.find(space.states[i]);
        const double e = it == emp.probs.end() ? 0.0 : it->second;
        sum += std::abs(e - probs[i]);
    }
    return 0.5 * (sum + seen_extra);
}

} // namespace dcj
