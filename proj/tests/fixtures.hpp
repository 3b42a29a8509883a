#pragma once

// Spec builders shared across the test suites. Every builder returns a
// configuration whose arrays satisfy the variant's balance conditions by
// construction, so the product-form law is exact for it.

#include <cstdint>
#include <vector>

#include "dcj/model.hpp"
#include "dcj/rates.hpp"

namespace fixtures {

using namespace dcj;

inline Matrix sym_const(int ns, double v) {
    Matrix m(static_cast<std::size_t>(ns), std::vector<double>(static_cast<std::size_t>(ns), v));
    for (int i = 0; i < ns; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
    return m;
}

/// Deterministic positive symmetric matrix with distinct entries.
inline Matrix sym_random(int ns, std::uint64_t seed) {
    Matrix m = sym_const(ns, 0);
    std::uint64_t s = seed;
    auto next = [&s]() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    for (int i = 0; i < ns; ++i) {
        for (int k = i + 1; k < ns; ++k) {
            const double v = 0.25 + static_cast<double>(next() % 1000) / 400.0;
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = v;
            m[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = v;
        }
    }
    return m;
}

inline std::vector<double> phis(int ns, double base, double step) {
    std::vector<double> v;
    for (int i = 0; i < ns; ++i) v.push_back(base + step * i);
    return v;
}

inline ModelSpec base_spec(Variant var, int sites) {
    ModelSpec spec;
    spec.variant = var;
    spec.traits = variant_traits(var);
    spec.graph = SiteGraph::of_size(sites);
    spec.rates.lambda = constant_rate(1.0);
    spec.rates.mu = constant_rate(1.0);
    spec.rates.gamma = gauge_one();
    return spec;
}

inline ModelSpec v1(int sites = 2, double lam = 1.0, double mu = 2.0, double b = 1.0,
                    Count n_max = 4) {
    ModelSpec spec = base_spec(Variant::V1, sites);
    spec.rates.lambda = constant_rate(lam);
    spec.rates.mu = constant_rate(mu);
    spec.rates.beta = constant_matrix(sym_const(sites, b));
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

inline ModelSpec v2(int sites = 3, double lam = 1.0, double mu = 2.0, double phi = 0.5,
                    Count n_max = 4, std::uint64_t arrays_seed = 7) {
    ModelSpec spec = base_spec(Variant::V2, sites);
    spec.conserved_m = 1;
    spec.rates.lambda = constant_rate(lam);
    spec.rates.mu = constant_rate(mu);
    spec.rates.phi = std::vector<double>(static_cast<std::size_t>(sites), phi);
    spec.rates.gamma = gauge_const_exp(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, arrays_seed));
    spec.rates.theta = constant_matrix(sym_random(sites, arrays_seed + 1));
    spec.rates.tau = constant_leap(sym_random(sites, arrays_seed + 2));
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

/// General single-walker model: blocked arrivals, multi-server exits,
/// per-site gauge e^phi/n, arrays balanced against the rates.
inline ModelSpec v3(int sites = 3, Count n_max = 4) {
    ModelSpec spec = base_spec(Variant::V3, sites);
    spec.conserved_m = 1;
    spec.rates.lambda = blocked_arrival(1.2, n_max + 2);
    spec.rates.mu = kserver_service(1.0, 2);
    spec.rates.phi = phis(sites, 0.3, -0.25);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.beta = rate_balanced_matrix(sym_random(sites, 11), spec.rates.lambda, spec.rates.mu);
    spec.rates.theta =
        rate_balanced_matrix(sym_random(sites, 12), spec.rates.lambda, spec.rates.mu);
    spec.rates.tau = weight_balanced_leap(sym_random(sites, 13), spec.rates.lambda, spec.rates.mu);
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

inline ModelSpec v4(int sites = 3, long n_total = 3) {
    ModelSpec spec = base_spec(Variant::V4, sites);
    spec.conserved_m = 1;
    spec.conserved_n = n_total;
    spec.rates.phi = phis(sites, 0.2, 0.3);
    spec.rates.gamma = gauge_linear(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, 21));
    spec.rates.theta = constant_matrix(sym_random(sites, 22));
    spec.rates.tau = constant_leap(sym_random(sites, 23));
    spec.validate();
    return spec;
}

inline ModelSpec v5(int sites = 3, long m = 2, Count n_max = 4) {
    ModelSpec spec = base_spec(Variant::V5, sites);
    spec.conserved_m = m;
    spec.rates.lambda = constant_rate(1.0);
    spec.rates.mu = constant_rate(2.0);
    spec.rates.phi = phis(sites, 0.1, -0.2);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, 31));
    spec.rates.theta = constant_matrix(sym_random(sites, 32));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 33), spec.rates.gamma, false);
    spec.rates.tau = constant_leap(sym_random(sites, 34));
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

inline ModelSpec v6(int sites = 3, Count n_max = 4) {
    ModelSpec spec = base_spec(Variant::V6, sites);
    spec.rates.lambda = constant_rate(1.0);
    spec.rates.mu = constant_rate(2.0);
    spec.rates.phi = phis(sites, -0.1, -0.15);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.xi = {0.3, 0.4, 0.5};
    spec.rates.eta = {1.0, 1.2, 0.9};
    spec.rates.xi.resize(static_cast<std::size_t>(sites), 0.4);
    spec.rates.eta.resize(static_cast<std::size_t>(sites), 1.0);
    spec.rates.beta = constant_matrix(sym_random(sites, 41));
    spec.rates.theta = constant_matrix(sym_random(sites, 42));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 43), spec.rates.gamma, false);
    spec.rates.tau = fugacity_leap(sym_random(sites, 44), spec.rates.xi, spec.rates.eta);
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

inline ModelSpec v7(int sites = 3, long m = 2, long n_total = 3) {
    ModelSpec spec = base_spec(Variant::V7, sites);
    spec.conserved_m = m;
    spec.conserved_n = n_total;
    spec.rates.phi = phis(sites, 0.4, -0.35);
    spec.rates.gamma = gauge_linear(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, 51));
    spec.rates.theta = constant_matrix(sym_random(sites, 52));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 53), spec.rates.gamma, false);
    spec.rates.tau = constant_leap(sym_random(sites, 54));
    spec.validate();
    return spec;
}

inline ModelSpec v8(int sites = 3, long n_total = 3) {
    ModelSpec spec = base_spec(Variant::V8, sites);
    spec.conserved_n = n_total;
    spec.rates.phi = phis(sites, -0.3, 0.12);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.xi = std::vector<double>(static_cast<std::size_t>(sites), 0.5);
    spec.rates.eta = std::vector<double>(static_cast<std::size_t>(sites), 1.1);
    spec.rates.xi[0] = 0.35;
    spec.rates.eta[0] = 1.4;
    spec.rates.beta = constant_matrix(sym_random(sites, 61));
    spec.rates.theta = constant_matrix(sym_random(sites, 62));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 63), spec.rates.gamma, false);
    spec.rates.tau = fugacity_leap(sym_random(sites, 64), spec.rates.xi, spec.rates.eta);
    spec.validate();
    return spec;
}

inline ModelSpec v9(int sites = 3, long m = 2, Count n_max = 4) {
    ModelSpec spec = base_spec(Variant::V9, sites);
    spec.conserved_m = m;
    spec.rates.lambda = constant_rate(1.0);
    spec.rates.mu = constant_rate(2.0);
    spec.rates.phi = phis(sites, -0.2, -0.1);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, 71));
    spec.rates.theta = constant_matrix(sym_random(sites, 72));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 73), spec.rates.gamma, true);
    spec.rates.tau = constant_leap(sym_random(sites, 74));
    spec.truncation.n_max = n_max;
    spec.validate();
    return spec;
}

inline ModelSpec v10(int sites = 3, Count n_max = 4, Count y_max = 3) {
    ModelSpec spec = base_spec(Variant::V10, sites);
    spec.rates.lambda = constant_rate(1.0);
    spec.rates.mu = constant_rate(2.0);
    spec.rates.phi = phis(sites, -0.25, -0.05);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.xi = std::vector<double>(static_cast<std::size_t>(sites), 0.3);
    spec.rates.eta = std::vector<double>(static_cast<std::size_t>(sites), 1.0);
    spec.rates.xi[1] = 0.25;
    spec.rates.beta = constant_matrix(sym_random(sites, 81));
    spec.rates.theta = constant_matrix(sym_random(sites, 82));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 83), spec.rates.gamma, true);
    spec.rates.tau = fugacity_leap(sym_random(sites, 84), spec.rates.xi, spec.rates.eta);
    spec.truncation.n_max = n_max;
    spec.truncation.y_max = y_max;
    spec.validate();
    return spec;
}

inline ModelSpec v11(int sites = 3, long m = 2, long n_total = 2) {
    ModelSpec spec = base_spec(Variant::V11, sites);
    spec.conserved_m = m;
    spec.conserved_n = n_total;
    spec.rates.phi = phis(sites, 0.3, -0.2);
    spec.rates.gamma = gauge_linear(spec.rates.phi);
    spec.rates.beta = constant_matrix(sym_random(sites, 91));
    spec.rates.theta = constant_matrix(sym_random(sites, 92));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 93), spec.rates.gamma, true);
    spec.rates.tau = constant_leap(sym_random(sites, 94));
    spec.validate();
    return spec;
}

inline ModelSpec v12(int sites = 3, long n_total = 3, Count y_max = 3) {
    ModelSpec spec = base_spec(Variant::V12, sites);
    spec.conserved_n = n_total;
    spec.rates.phi = phis(sites, -0.4, -0.1);
    spec.rates.gamma = gauge_inv_linear(spec.rates.phi);
    spec.rates.xi = std::vector<double>(static_cast<std::size_t>(sites), 0.2);
    spec.rates.eta = std::vector<double>(static_cast<std::size_t>(sites), 1.0);
    spec.rates.eta[2] = 1.3;
    spec.rates.beta = constant_matrix(sym_random(sites, 101));
    spec.rates.theta = constant_matrix(sym_random(sites, 102));
    spec.rates.epsilon = dest_gauge_matrix(sym_random(sites, 103), spec.rates.gamma, true);
    spec.rates.tau = fugacity_leap(sym_random(sites, 104), spec.rates.xi, spec.rates.eta);
    spec.truncation.y_max = y_max;
    spec.validate();
    return spec;
}

inline ModelSpec golden(Variant var) {
    switch (var) {
    case Variant::V1: return v1(3);
    case Variant::V2: return v2();
    case Variant::V3: return v3();
    case Variant::V4: return v4();
    case Variant::V5: return v5();
    case Variant::V6: return v6();
    case Variant::V7: return v7();
    case Variant::V8: return v8();
    case Variant::V9: return v9();
    case Variant::V10: return v10();
    case Variant::V11: return v11();
    case Variant::V12: return v12();
    }
    return v1();
}

inline NetworkState make_state(CountVec y, CountVec n) {
    NetworkState s;
    s.occupancy = std::move(y);
    s.tasks = std::move(n);
    return s;
}

} // namespace fixtures
