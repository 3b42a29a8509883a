#include "dcj/generator.hpp"

#include <cmath>
#include <deque>

namespace dcj {

const char* kind_name(TransitionKind k) {
    switch (k) {
    case TransitionKind::TaskArrival: return "task-arrival";
    case TransitionKind::TaskExit: return "task-exit";
    case TransitionKind::TaskJumpUnloaded: return "task-jump-unloaded";
    case TransitionKind::TaskJumpFromLoaded: return "task-jump-from-loaded";
    case TransitionKind::TaskJumpToLoaded: return "task-jump-to-loaded";
    case TransitionKind::TaskJumpLoadedLoaded: return "task-jump-loaded-loaded";
    case TransitionKind::DcLeap: return "dc-leap";
    case TransitionKind::DcArrival: return "dc-arrival";
    case TransitionKind::DcExit: return "dc-exit";
    }
    return "?";
}

namespace {

double gam_bar(const ModelSpec& spec, int site, Count n) {
    double p = 1.0;
    for (Count m = 0; m < n; ++m) p *= spec.rates.gamma(site, m);
    return p;
}

double ipow(double x, Count p) {
    double r = 1.0;
    for (Count i = 0; i < p; ++i) r *= x;
    return r;
}

} // namespace

TransitionView transitions_view(const ModelSpec& spec, const NetworkState& state,
                                bool truncated) {
    spec.require_admissible(state);
    TransitionView out;
    const auto& t = spec.traits;
    const auto& R = spec.rates;
    const int ns = spec.sites();
    const CountVec& n = state.tasks;
    const CountVec& y = state.occupancy;
    const Count n_cap = spec.truncation.n_max.value_or(0);
    const Count y_cap = spec.truncation.y_max.value_or(0);

    auto emit = [&](NetworkState target, double rate, TransitionKind kind) {
        if (rate > 0) out.list.push_back({std::move(target), rate, kind});
    };
    auto at = [](const CountVec& v, int i) { return v[static_cast<std::size_t>(i)]; };

    if (t.tasks_open) {
        // exogenous task arrivals, gauge-modified at loaded sites
        for (int p = 0; p < ns; ++p) {
            const double rate = R.lambda(p, at(n, p), y) * ipow(R.gamma(p, at(n, p)), at(y, p));
            if (rate <= 0) continue;
            if (truncated && at(n, p) >= n_cap) {
                out.clipped = true;
                continue;
            }
            NetworkState s = state;
            ++s.tasks[static_cast<std::size_t>(p)];
            emit(std::move(s), rate, TransitionKind::TaskArrival);
        }
        // task exits out of the network
        for (int p = 0; p < ns; ++p) {
            if (at(n, p) < 1) continue;
            NetworkState s = state;
            --s.tasks[static_cast<std::size_t>(p)];
            emit(std::move(s), R.mu(p, at(n, p), y), TransitionKind::TaskExit);
        }
    }

    // task jumps
    for (int p = 0; p < ns; ++p) {
        if (at(n, p) < 1) continue;
        const bool p_loaded = at(y, p) >= 1;
        for (int q = 0; q < ns; ++q) {
            if (q == p) continue;
            const bool q_loaded = at(y, q) >= 1;
            double rate = 0;
            TransitionKind kind = TransitionKind::TaskJumpUnloaded;
            if (!p_loaded && !q_loaded) {
                if (!R.beta) continue;
                rate = R.beta(p, q, at(n, p), at(n, q), y);
                kind = TransitionKind::TaskJumpUnloaded;
            } else if (p_loaded && !q_loaded) {
                if (!R.theta) continue;
                rate = R.theta(p, q, at(n, p), at(n, q), y);
                kind = TransitionKind::TaskJumpFromLoaded;
            } else if (!p_loaded && q_loaded) {
                if (!R.theta) continue;
                rate = R.theta(p, q, at(n, p), at(n, q), y) *
                       ipow(R.gamma(q, at(n, q)), at(y, q));
                kind = TransitionKind::TaskJumpToLoaded;
            } else {
                if (!R.epsilon) continue;
                rate = R.epsilon(p, q, at(n, p), at(n, q), y);
                kind = TransitionKind::TaskJumpLoadedLoaded;
            }
            if (rate <= 0) continue;
            if (truncated && t.tasks_open && at(n, q) >= n_cap) {
                out.clipped = true;
                continue;
            }
            NetworkState s = state;
            --s.tasks[static_cast<std::size_t>(p)];
            ++s.tasks[static_cast<std::size_t>(q)];
            emit(std::move(s), rate, kind);
        }
    }

    // walker leaps
    if (t.uses_tau && R.tau) {
        const bool exclusive =
            t.kind == ParticleKind::SingleDc || t.kind == ParticleKind::Exclusion;
        for (int j = 0; j < ns; ++j) {
            if (at(y, j) < 1) continue;
            const double out_factor = ipow(1.0 / gam_bar(spec, j, at(n, j)), at(y, j));
            for (int jp = 0; jp < ns; ++jp) {
                if (jp == j) continue;
                if (exclusive && at(y, jp) >= 1) continue;
                double rate = out_factor * R.tau(j, jp, n, y);
                if (!exclusive) // destination gauge factor, taken at the pre-leap occupancy
                    rate *= ipow(1.0 / gam_bar(spec, jp, at(n, jp)), at(y, jp));
                if (rate <= 0) continue;
                if (truncated && t.dcs_open && t.kind == ParticleKind::ZeroRange &&
                    at(y, jp) >= y_cap) {
                    out.clipped = true;
                    continue;
                }
                NetworkState s = state;
                --s.occupancy[static_cast<std::size_t>(j)];
                ++s.occupancy[static_cast<std::size_t>(jp)];
                emit(std::move(s), rate, TransitionKind::DcLeap);
            }
        }
    }

    if (t.dcs_open) {
        // walker arrivals
        for (int k = 0; k < ns; ++k) {
            if (t.kind == ParticleKind::Exclusion && at(y, k) >= 1) continue;
            const double rate = R.xi[static_cast<std::size_t>(k)] * gam_bar(spec, k, at(n, k));
            if (rate <= 0) continue;
            if (truncated && t.kind == ParticleKind::ZeroRange && at(y, k) >= y_cap) {
                out.clipped = true;
                continue;
            }
            NetworkState s = state;
            ++s.occupancy[static_cast<std::size_t>(k)];
            emit(std::move(s), rate, TransitionKind::DcArrival);
        }
        // walker exits
        for (int i = 0; i < ns; ++i) {
            if (at(y, i) < 1) continue;
            NetworkState s = state;
            --s.occupancy[static_cast<std::size_t>(i)];
            emit(std::move(s), R.eta[static_cast<std::size_t>(i)], TransitionKind::DcExit);
        }
    }

    return out;
}

std::vector<Transition> transitions(const ModelSpec& spec, const NetworkState& state,
                                    bool truncated) {
    return transitions_view(spec, state, truncated).list;
}

double total_rate(const ModelSpec& spec, const NetworkState& state) {
    double sum = 0;
    for (const auto& tr : transitions(spec, state)) sum += tr.rate;
    return sum;
}

ReachableSet reachable_states(const ModelSpec& spec, const NetworkState& seed,
                              std::size_t budget) {
    spec.require_admissible(seed);
    ReachableSet out;
    std::deque<std::size_t> frontier;
    out.states.push_back(seed);
    out.index.emplace(seed, 0);
    frontier.push_back(0);
    while (!frontier.empty()) {
        const std::size_t idx = frontier.front();
        frontier.pop_front();
        const NetworkState cur = out.states[idx];
        auto view = transitions_view(spec, cur, true);
        out.clipped = out.clipped || view.clipped;
        for (auto& tr : view.list) {
            auto it = out.index.find(tr.target);
            if (it != out.index.end()) continue;
            if (out.states.size() >= budget)
                fail(Errc::BudgetExceeded, "reachable set exceeds " + std::to_string(budget) +
                                               " states");
            out.index.emplace(tr.target, out.states.size());
            frontier.push_back(out.states.size());
            out.states.push_back(std::move(tr.target));
        }
    }
    return out;
}

std::vector<NetworkState> interior_states(const ModelSpec& spec, const ReachableSet& set) {
    std::vector<NetworkState> out;
    const auto& t = spec.traits;
    const Count n_cap = spec.truncation.n_max.value_or(0);
    const Count y_cap = spec.truncation.y_max.value_or(0);
    for (const auto& s : set.states) {
        bool ok = true;
        if (t.tasks_open) {
            for (Count c : s.tasks)
                if (c >= n_cap) {
                    ok = false;
                    break;
                }
        }
        if (ok && t.dcs_open && t.kind == ParticleKind::ZeroRange) {
            for (Count c : s.occupancy)
                if (c >= y_cap) {
                    ok = false;
                    break;
                }
        }
        if (ok) out.push_back(s);
    }
    return out;
}

} // namespace dcj
