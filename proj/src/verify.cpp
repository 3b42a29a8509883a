#include "dcj/verify.hpp"

#include <cmath>
#include <deque>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "dcj/stationary.hpp"

namespace dcj {

namespace {

bool inside_box(const ModelSpec& spec, const NetworkState& s) {
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

BalanceReport check_detailed_balance(const ModelSpec& spec,
                                     const std::vector<NetworkState>& states, double tol) {
    BalanceReport rep;
    rep.tolerance = tol;
    CumulativeCache cache(spec);
    for (const auto& s : states) {
        const double log_ws = weight(spec, s, cache).log_weight;
        for (const auto& tr : transitions(spec, s)) {
            if (!inside_box(spec, tr.target)) continue;
            double reverse = 0;
            for (const auto& back : transitions(spec, tr.target)) {
                if (back.target == s) {
                    reverse = back.rate;
                    break;
                }
            }
            if (!(reverse > 0))
                fail(Errc::MissingReverse,
                     "no reverse transition for " + to_string(s) + " -> " +
                         to_string(tr.target) + " (" + kind_name(tr.kind) + ")");
            const double log_wt = weight(spec, tr.target, cache).log_weight;
            const double log_lhs = log_ws + std::log(tr.rate);
            const double log_rhs = log_wt + std::log(reverse);
            // relative residual |L-R|/max(L,R), computed in log space
            const double residual = 1.0 - std::exp(-std::abs(log_lhs - log_rhs));
            ++rep.transitions_checked;
            if (residual > rep.max_residual) {
                rep.max_residual = residual;
                rep.worst_state = s;
                rep.worst_target = tr.target;
                rep.worst_kind = tr.kind;
                rep.worst_lhs = std::exp(log_lhs);
                rep.worst_rhs = std::exp(log_rhs);
            }
        }
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

IrreducibilityVerdict check_irreducibility(const ModelSpec& spec, const ReachableSet& set) {
    IrreducibilityVerdict v;
    v.states = set.states.size();
    v.seed = set.states.empty() ? NetworkState{} : set.states.front();
    if (set.states.size() <= 1) return v;

    // reverse adjacency within the explored set
    std::vector<std::vector<std::size_t>> rev(set.states.size());
    for (std::size_t i = 0; i < set.states.size(); ++i) {
        for (const auto& tr : transitions(spec, set.states[i], true)) {
            auto it = set.index.find(tr.target);
            if (it != set.index.end()) rev[it->second].push_back(i);
        }
    }
    // every state must reach the seed: BFS on reversed edges from the seed
    std::vector<char> reaches(set.states.size(), 0);
    std::deque<std::size_t> q{0};
    reaches[0] = 1;
    while (!q.empty()) {
        const std::size_t i = q.front();
        q.pop_front();
        for (std::size_t p : rev[i]) {
            if (!reaches[p]) {
                reaches[p] = 1;
                q.push_back(p);
            }
        }
    }
    for (std::size_t i = 0; i < set.states.size(); ++i) {
        if (!reaches[i]) {
            v.irreducible = false;
            v.unreachable = set.states[i];
            break;
        }
    }
    return v;
}

IrreducibilityVerdict check_irreducibility(const ModelSpec& spec) {
    const auto set = reachable_states(spec, spec.canonical_state(), spec.tol.state_budget);
    return check_irreducibility(spec, set);
}

namespace {

std::vector<double> power_iteration(const ModelSpec& spec, const ReachableSet& set) {
    const std::size_t n = set.states.size();
    // uniformized jump kernel P = I + Q/c with c slightly above the peak rate
    std::vector<std::vector<std::pair<std::size_t, double>>> out_edges(n);
    std::vector<double> total(n, 0.0);
    double max_rate = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& tr : transitions(spec, set.states[i], true)) {
            auto it = set.index.find(tr.target);
            if (it == set.index.end()) continue;
            out_edges[i].push_back({it->second, tr.rate});
            total[i] += tr.rate;
        }
        max_rate = std::max(max_rate, total[i]);
    }
    const double c = 1.01 * std::max(max_rate, 1e-300);
    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    for (int iter = 0; iter < 200000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double stay = 1.0 - total[i] / c;
            next[i] += pi[i] * stay;
            for (const auto& [j, r] : out_edges[i]) next[j] += pi[i] * r / c;
        }
        double diff = 0, sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            diff += std::abs(next[i] - pi[i]);
            sum += next[i];
        }
        for (std::size_t i = 0; i < n; ++i) pi[i] = next[i] / sum;
        if (diff < 1e-15) break;
    }
    return pi;
}

double balance_residual(const ModelSpec& spec, const ReachableSet& set,
                        const std::vector<double>& pi, double* max_rate_out) {
    const std::size_t n = set.states.size();
    std::vector<double> flow(n, 0.0);
    double max_rate = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0;
        for (const auto& tr : transitions(spec, set.states[i], true)) {
            auto it = set.index.find(tr.target);
            if (it == set.index.end()) continue;
            flow[it->second] += pi[i] * tr.rate;
            total += tr.rate;
            max_rate = std::max(max_rate, tr.rate);
        }
        flow[i] -= pi[i] * total;
    }
    double resid = 0;
    for (double f : flow) resid = std::max(resid, std::abs(f));
    if (max_rate_out) *max_rate_out = max_rate;
    return resid;
}

} // namespace

Oracle oracle_stationary(const ModelSpec& spec, std::size_t budget) {
    Oracle oracle;
    oracle.space = reachable_states(spec, spec.canonical_state(), budget);
    const std::size_t n = oracle.space.states.size();
    if (n == 0) fail(Errc::BudgetExceeded, "empty state space");
    if (n == 1) {
        oracle.probs = {1.0};
        return oracle;
    }
    const auto verdict = check_irreducibility(spec, oracle.space);
    if (!verdict.irreducible)
        fail(Errc::Reducible, "state " + to_string(verdict.unreachable) +
                                  " cannot reach " + to_string(verdict.seed));

    // A = Q^T with the last row replaced by the normalization Σπ = 1
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0;
        for (const auto& tr : transitions(spec, oracle.space.states[i], true)) {
            auto it = oracle.space.index.find(tr.target);
            if (it == oracle.space.index.end()) continue;
            const std::size_t j = it->second;
            total += tr.rate;
            if (j != n - 1)
                trips.emplace_back(static_cast<int>(j), static_cast<int>(i), tr.rate);
        }
        if (i != n - 1)
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -total);
        trips.emplace_back(static_cast<int>(n - 1), static_cast<int>(i), 1.0);
    }

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(n));
    rhs[static_cast<long>(n - 1)] = 1.0;

    Eigen::VectorXd sol;
    bool solved = false;
    if (n <= 1500) {
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
        for (const auto& t : trips) dense(t.row(), t.col()) += t.value();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
        sol = lu.solve(rhs);
        solved = sol.allFinite();
    } else {
        Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
        A.setFromTriplets(trips.begin(), trips.end());
        A.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() == Eigen::Success) {
            sol = lu.solve(rhs);
            solved = lu.info() == Eigen::Success && sol.allFinite();
        }
    }

    std::vector<double> pi(n, 0.0);
    if (solved) {
        double sum = 0;
        double min_v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pi[i] = sol[static_cast<long>(i)];
            min_v = std::min(min_v, pi[i]);
            sum += pi[i];
        }
        if (min_v < -1e-9 * std::abs(sum)) solved = false;
        if (solved) {
            for (auto& v : pi) v = std::max(v, 0.0) / sum;
        }
    }
    if (solved) {
        double max_rate = 0;
        const double resid = balance_residual(spec, oracle.space, pi, &max_rate);
        if (resid > 1e-10 * std::max(max_rate, 1.0)) solved = false;
    }
    if (!solved) {
        // conditioning fallback
        pi = power_iteration(spec, oracle.space);
    }
    oracle.probs = std::move(pi);
    return oracle;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        fail(Errc::DomainMismatch, "distributions live on different index sets");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

} // namespace dcj
