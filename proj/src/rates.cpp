#include "dcj/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcj/stationary.hpp"

namespace dcj {

namespace {

void check_matrix(const Matrix& c) {
    for (const auto& r : c) {
        if (r.size() != c.size()) fail(Errc::BadParameter, "array must be square");
        for (double v : r)
            if (!(v >= 0) || !std::isfinite(v))
                fail(Errc::BadParameter, "array entries must be finite and >= 0");
    }
}

std::vector<double> check_phi(std::vector<double> phi) {
    for (double p : phi)
        if (!std::isfinite(p)) fail(Errc::BadParameter, "phi must be finite");
    return phi;
}

double matrix_at(const Matrix& c, int from, int to) {
    if (from == to) return 0.0; // diagonal vanishes by convention
    return c[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

} // namespace

SiteRateFn constant_rate(double rate) {
    if (!(rate > 0) || !std::isfinite(rate))
        fail(Errc::BadParameter, "constant rate must be > 0");
    return [rate](int, Count, const CountVec&) { return rate; };
}

SiteRateFn constant_rate(std::vector<double> rates) {
    for (double r : rates)
        if (!(r > 0) || !std::isfinite(r))
            fail(Errc::BadParameter, "constant rates must be > 0");
    return [rates = std::move(rates)](int site, Count, const CountVec&) {
        return rates[static_cast<std::size_t>(site)];
    };
}

SiteRateFn blocked_arrival(double rate, Count cap) {
    if (!(rate > 0)) fail(Errc::BadParameter, "arrival rate must be > 0");
    if (cap < 1) fail(Errc::BadParameter, "blocking cap must be >= 1");
    return [rate, cap](int, Count n, const CountVec&) { return n < cap ? rate : 0.0; };
}

SiteRateFn kserver_service(double rate, Count servers) {
    if (!(rate > 0)) fail(Errc::BadParameter, "service rate must be > 0");
    if (servers < 1) fail(Errc::BadParameter, "server count must be >= 1");
    return [rate, servers](int, Count n, const CountVec&) {
        return rate * static_cast<double>(std::min(n, servers));
    };
}

SiteRateFn occupancy_scaled(SiteRateFn base, std::vector<double> scale) {
    for (double s : scale)
        if (!(s > 0)) fail(Errc::BadParameter, "occupancy scale must be > 0");
    return [base = std::move(base), scale = std::move(scale)](int site, Count n,
                                                              const CountVec& y) {
        double v = base(site, n, y);
        if (y[static_cast<std::size_t>(site)] >= 1) v *= scale[static_cast<std::size_t>(site)];
        return v;
    };
}

GaugeFn gauge_one() {
    return [](int, Count) { return 1.0; };
}

GaugeFn gauge_const_exp(std::vector<double> phi) {
    return [phi = check_phi(std::move(phi))](int site, Count) {
        return std::exp(phi[static_cast<std::size_t>(site)]);
    };
}

GaugeFn gauge_inv_linear(std::vector<double> phi) {
    return [phi = check_phi(std::move(phi))](int site, Count n) {
        if (n == 0) return 1.0;
        return std::exp(phi[static_cast<std::size_t>(site)]) / static_cast<double>(n);
    };
}

GaugeFn gauge_linear(std::vector<double> phi) {
    return [phi = check_phi(std::move(phi))](int site, Count n) {
        if (n == 0) return 1.0;
        return static_cast<double>(n) * std::exp(phi[static_cast<std::size_t>(site)]);
    };
}

PairRateFn constant_matrix(Matrix c) {
    check_matrix(c);
    return [c = std::move(c)](int from, int to, Count, Count, const CountVec&) {
        return matrix_at(c, from, to);
    };
}

PairRateFn rate_balanced_matrix(Matrix c, SiteRateFn lambda, SiteRateFn mu) {
    check_matrix(c);
    return [c = std::move(c), lambda = std::move(lambda),
            mu = std::move(mu)](int from, int to, Count n_from, Count, const CountVec& y) {
        if (n_from < 1) return 0.0;
        const double lam = lambda(from, n_from - 1, y);
        if (!(lam > 0)) return 0.0;
        return matrix_at(c, from, to) * mu(from, n_from, y) / lam;
    };
}

PairRateFn dest_gauge_matrix(Matrix c, GaugeFn gamma, bool occupancy_exponent) {
    check_matrix(c);
    return [c = std::move(c), gamma = std::move(gamma),
            occupancy_exponent](int from, int to, Count, Count n_to, const CountVec& y) {
        double g = gamma(to, n_to);
        if (occupancy_exponent) {
            const Count p = y[static_cast<std::size_t>(to)];
            g = std::pow(g, static_cast<double>(p));
        }
        return matrix_at(c, from, to) * g;
    };
}

LeapRateFn constant_leap(Matrix c) {
    check_matrix(c);
    return [c = std::move(c)](int from, int to, const CountVec&, const CountVec&) {
        return matrix_at(c, from, to);
    };
}

LeapRateFn fugacity_leap(Matrix c, std::vector<double> xi, std::vector<double> eta) {
    check_matrix(c);
    if (xi.size() != eta.size() || xi.empty())
        fail(Errc::MissingXiEta, "fugacity-balanced leaps need per-site xi and eta");
    return [c = std::move(c), xi = std::move(xi),
            eta = std::move(eta)](int from, int to, const CountVec&, const CountVec&) {
        return matrix_at(c, from, to) * eta[static_cast<std::size_t>(from)] /
               xi[static_cast<std::size_t>(from)];
    };
}

LeapRateFn weight_balanced_leap(Matrix c, SiteRateFn lambda, SiteRateFn mu) {
    check_matrix(c);
    return [c = std::move(c), lambda = std::move(lambda),
            mu = std::move(mu)](int from, int to, const CountVec& n, const CountVec& y) {
        const double base = matrix_at(c, from, to);
        if (!(base > 0)) return 0.0;
        double log_w = 0.0;
        for (int q = 0; q < static_cast<int>(n.size()); ++q) {
            for (Count m = 0; m < n[static_cast<std::size_t>(q)]; ++m)
                log_w += std::log(lambda(q, m, y)) - std::log(mu(q, m + 1, y));
        }
        return base * std::exp(-log_w);
    };
}

PairRateFn perturb_entry(PairRateFn base, int from, int to, double factor) {
    return [base = std::move(base), from, to, factor](int f, int t, Count a, Count b,
                                                      const CountVec& y) {
        const double v = base(f, t, a, b, y);
        return (f == from && t == to) ? v * factor : v;
    };
}

LeapRateFn perturb_entry(LeapRateFn base, int from, int to, double factor) {
    return [base = std::move(base), from, to, factor](int f, int t, const CountVec& n,
                                                      const CountVec& y) {
        const double v = base(f, t, n, y);
        return (f == from && t == to) ? v * factor : v;
    };
}

// ---- validators ----

double relative_error(double lhs, double rhs) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
    return std::abs(lhs - rhs) / scale;
}

namespace {

constexpr std::size_t kMaxViolationsKept = 16;

void record(ValidationReport& rep, double lhs, double rhs, double tol, std::string where) {
    ++rep.checked;
    const double err = relative_error(lhs, rhs);
    rep.max_rel_err = std::max(rep.max_rel_err, err);
    if (err > tol) {
        Violation v{std::move(where), lhs, rhs, err};
        rep.violations.push_back(std::move(v));
        std::sort(rep.violations.begin(), rep.violations.end(),
                  [](const Violation& a, const Violation& b) { return a.rel_err > b.rel_err; });
        if (rep.violations.size() > kMaxViolationsKept) rep.violations.resize(kMaxViolationsKept);
    }
}

std::string describe(const char* array, int i, int k, Count a, Count b, const CountVec& y) {
    std::ostringstream os;
    os << array << "[" << i << "->" << k << "] at n=(" << a << "," << b << ") y=";
    for (std::size_t q = 0; q < y.size(); ++q) {
        if (q) os << ';';
        os << y[q];
    }
    return os.str();
}

Count count_cap(const ModelSpec& spec) {
    if (spec.traits.tasks_open) return *spec.truncation.n_max;
    return static_cast<Count>(*spec.conserved_n);
}

void enumerate_task_vectors(const ModelSpec& spec,
                            const std::function<void(const CountVec&)>& fn) {
    if (spec.traits.tasks_open) {
        const Count cap = *spec.truncation.n_max;
        CountVec n(static_cast<std::size_t>(spec.sites()), 0);
        std::function<void(int)> rec = [&](int idx) {
            if (idx == spec.sites()) {
                fn(n);
                return;
            }
            for (Count c = 0; c <= cap; ++c) {
                n[static_cast<std::size_t>(idx)] = c;
                rec(idx + 1);
            }
        };
        rec(0);
    } else {
        for_each_composition(*spec.conserved_n, spec.sites(), fn);
    }
}

} // namespace

std::vector<CountVec> occupancy_contexts(const ModelSpec& spec, std::size_t budget) {
    std::vector<CountVec> out;
    const int ns = spec.sites();
    auto push = [&](const CountVec& y) {
        if (out.size() < budget) out.push_back(y);
    };
    switch (spec.traits.kind) {
    case ParticleKind::None:
        out.emplace_back(static_cast<std::size_t>(ns), 0);
        break;
    case ParticleKind::SingleDc:
        for (int j = 0; j < ns; ++j) {
            CountVec y(static_cast<std::size_t>(ns), 0);
            y[static_cast<std::size_t>(j)] = 1;
            out.push_back(y);
        }
        break;
    case ParticleKind::Exclusion:
        if (spec.traits.dcs_open) {
            for (int m = 0; m <= ns; ++m) for_each_subset(m, ns, push);
        } else {
            for_each_subset(static_cast<int>(*spec.conserved_m), ns, push);
        }
        break;
    case ParticleKind::ZeroRange:
        if (spec.traits.dcs_open) {
            const Count cap = *spec.truncation.y_max;
            CountVec y(static_cast<std::size_t>(ns), 0);
            std::function<void(int)> rec = [&](int idx) {
                if (out.size() >= budget) return;
                if (idx == ns) {
                    push(y);
                    return;
                }
                for (Count c = 0; c <= cap; ++c) {
                    y[static_cast<std::size_t>(idx)] = c;
                    rec(idx + 1);
                }
                y[static_cast<std::size_t>(idx)] = 0;
            };
            rec(0);
        } else {
            for_each_composition(*spec.conserved_m, ns, push);
        }
        break;
    }
    return out;
}

ValidationReport validate_beta(const ModelSpec& spec) {
    ValidationReport rep;
    rep.condition = "beta-balance";
    if (!spec.rates.beta) return rep;
    const double tol = spec.tol.validation;
    const Count cap = count_cap(spec);
    const bool weighted = spec.traits.tasks_open;
    const auto& R = spec.rates;
    for (const auto& y : occupancy_contexts(spec, spec.tol.state_budget)) {
        for (int i = 0; i < spec.sites(); ++i) {
            if (y[static_cast<std::size_t>(i)] >= 1) continue;
            for (int k = 0; k < spec.sites(); ++k) {
                if (k == i || y[static_cast<std::size_t>(k)] >= 1) continue;
                for (Count a = 1; a <= cap; ++a) {
                    for (Count b = 0; b + 1 <= cap; ++b) {
                        double lhs = R.beta(i, k, a, b, y);
                        double rhs = R.beta(k, i, b + 1, a - 1, y);
                        if (weighted) {
                            lhs *= R.lambda(i, a - 1, y) / R.mu(i, a, y);
                            rhs *= R.lambda(k, b, y) / R.mu(k, b + 1, y);
                        }
                        record(rep, lhs, rhs, tol, describe("beta", i, k, a, b, y));
                    }
                }
            }
        }
    }
    return rep;
}

ValidationReport validate_theta(const ModelSpec& spec) {
    ValidationReport rep;
    rep.condition = "theta-balance";
    if (!spec.traits.uses_theta || !spec.rates.theta) return rep;
    const double tol = spec.tol.validation;
    const Count cap = count_cap(spec);
    const bool weighted = spec.traits.tasks_open;
    const auto& R = spec.rates;
    for (const auto& y : occupancy_contexts(spec, spec.tol.state_budget)) {
        for (int i = 0; i < spec.sites(); ++i) {
            for (int k = 0; k < spec.sites(); ++k) {
                if (k == i) continue;
                const bool li = y[static_cast<std::size_t>(i)] >= 1;
                const bool lk = y[static_cast<std::size_t>(k)] >= 1;
                if (li == lk) continue; // theta couples a loaded site with an unloaded one
                for (Count a = 1; a <= cap; ++a) {
                    for (Count b = 0; b + 1 <= cap; ++b) {
                        double lhs = R.theta(i, k, a, b, y);
                        double rhs = R.theta(k, i, b + 1, a - 1, y);
                        if (weighted) {
                            lhs *= R.lambda(i, a - 1, y) / R.mu(i, a, y);
                            rhs *= R.lambda(k, b, y) / R.mu(k, b + 1, y);
                        }
                        record(rep, lhs, rhs, tol, describe("theta", i, k, a, b, y));
                    }
                }
            }
        }
    }
    return rep;
}

ValidationReport validate_epsilon(const ModelSpec& spec) {
    ValidationReport rep;
    rep.condition = "epsilon-balance";
    if (!spec.traits.uses_epsilon || !spec.rates.epsilon) return rep;
    const double tol = spec.tol.validation;
    const Count cap = count_cap(spec);
    const bool weighted = spec.traits.tasks_open;
    const bool zr = spec.traits.kind == ParticleKind::ZeroRange;
    const auto& R = spec.rates;
    for (const auto& y : occupancy_contexts(spec, spec.tol.state_budget)) {
        for (int i = 0; i < spec.sites(); ++i) {
            const Count yi = y[static_cast<std::size_t>(i)];
            if (yi < 1) continue;
            for (int k = 0; k < spec.sites(); ++k) {
                const Count yk = y[static_cast<std::size_t>(k)];
                if (k == i || yk < 1) continue;
                const double pi = zr ? static_cast<double>(yi) : 1.0;
                const double pk = zr ? static_cast<double>(yk) : 1.0;
                for (Count a = 1; a <= cap; ++a) {
                    for (Count b = 0; b + 1 <= cap; ++b) {
                        double lhs =
                            R.epsilon(i, k, a, b, y) * std::pow(R.gamma(i, a - 1), pi);
                        double rhs =
                            R.epsilon(k, i, b + 1, a - 1, y) * std::pow(R.gamma(k, b), pk);
                        if (weighted) {
                            lhs *= R.lambda(i, a - 1, y) / R.mu(i, a, y);
                            rhs *= R.lambda(k, b, y) / R.mu(k, b + 1, y);
                        }
                        record(rep, lhs, rhs, tol, describe("epsilon", i, k, a, b, y));
                    }
                }
            }
        }
    }
    return rep;
}

ValidationReport validate_tau(const ModelSpec& spec) {
    ValidationReport rep;
    rep.condition = "tau-balance";
    if (!spec.traits.uses_tau || !spec.rates.tau) return rep;
    const double tol = spec.tol.validation;
    const auto& R = spec.rates;
    const bool exclusive = spec.traits.kind == ParticleKind::SingleDc ||
                           spec.traits.kind == ParticleKind::Exclusion;

    // The leap balance comes in three shapes: weighted by the full
    // arrival/service environment product (closed-walker, open-task),
    // weighted by walker fugacities (open-walker), or plain (all closed).
    enum class Form { EnvWeighted, Fugacity, Plain };
    Form form = Form::Plain;
    if (spec.traits.dcs_open) {
        form = Form::Fugacity;
        if (R.xi.empty() || R.eta.empty())
            fail(Errc::MissingXiEta, "tau balance with open walkers needs xi and eta");
    } else if (spec.traits.tasks_open) {
        form = Form::EnvWeighted;
    }

    CumulativeCache cache(spec);
    auto log_env = [&](const CountVec& n, const CountVec& y) {
        double s = 0;
        for (int q = 0; q < spec.sites(); ++q)
            s += cache.log_task_ratio(q, n[static_cast<std::size_t>(q)], y);
        return s;
    };

    std::size_t budget = spec.tol.state_budget;
    for (const auto& y : occupancy_contexts(spec, 256)) {
        for (int j = 0; j < spec.sites(); ++j) {
            if (y[static_cast<std::size_t>(j)] < 1) continue;
            for (int jp = 0; jp < spec.sites(); ++jp) {
                if (jp == j) continue;
                if (exclusive && y[static_cast<std::size_t>(jp)] >= 1) continue;
                CountVec y2 = y;
                --y2[static_cast<std::size_t>(j)];
                ++y2[static_cast<std::size_t>(jp)];
                enumerate_task_vectors(spec, [&](const CountVec& n) {
                    if (budget == 0) return;
                    --budget;
                    double lhs = R.tau(j, jp, n, y);
                    double rhs = R.tau(jp, j, n, y2);
                    switch (form) {
                    case Form::EnvWeighted:
                        lhs *= std::exp(log_env(n, y));
                        rhs *= std::exp(log_env(n, y2));
                        break;
                    case Form::Fugacity:
                        lhs *= R.xi[static_cast<std::size_t>(j)] /
                               R.eta[static_cast<std::size_t>(j)];
                        rhs *= R.xi[static_cast<std::size_t>(jp)] /
                               R.eta[static_cast<std::size_t>(jp)];
                        break;
                    case Form::Plain:
                        break;
                    }
                    std::ostringstream os;
                    os << "tau[" << j << "->" << jp << "] at " << to_string({n, y});
                    record(rep, lhs, rhs, tol, os.str());
                });
            }
        }
    }
    return rep;
}

ValidationReport validate_environment_independence(const ModelSpec& spec) {
    ValidationReport rep;
    rep.condition = "environment-independence";
    if (!spec.traits.dcs_open || !spec.traits.tasks_open) return rep; // nothing to vary
    const double tol = spec.tol.validation;
    auto contexts = occupancy_contexts(spec, 256);
    CumulativeCache cache(spec);
    std::size_t budget = spec.tol.state_budget;
    enumerate_task_vectors(spec, [&](const CountVec& n) {
        if (budget == 0) return;
        --budget;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        const CountVec *arg_lo = nullptr, *arg_hi = nullptr;
        for (const auto& y : contexts) {
            double s = 0;
            for (int q = 0; q < spec.sites(); ++q)
                s += cache.log_task_ratio(q, n[static_cast<std::size_t>(q)], y);
            if (s < lo) { lo = s; arg_lo = &y; }
            if (s > hi) { hi = s; arg_hi = &y; }
        }
        // spread of V(n) over occupancies, relative to its maximum
        const double spread = 1.0 - std::exp(lo - hi);
        ++rep.checked;
        rep.max_rel_err = std::max(rep.max_rel_err, spread);
        if (spread > tol) {
            std::ostringstream os;
            os << "V(n) varies across occupancies at " << to_string({n, *arg_hi}) << " vs "
               << to_string({n, *arg_lo});
            rep.violations.push_back({os.str(), std::exp(hi), std::exp(lo), spread});
            if (rep.violations.size() > kMaxViolationsKept)
                rep.violations.resize(kMaxViolationsKept);
        }
    });
    return rep;
}

std::vector<ValidationReport> validate_all(const ModelSpec& spec) {
    std::vector<ValidationReport> out;
    out.push_back(validate_beta(spec));
    if (spec.traits.uses_theta) out.push_back(validate_theta(spec));
    if (spec.traits.uses_epsilon) out.push_back(validate_epsilon(spec));
    if (spec.traits.dcs_open && spec.traits.tasks_open)
        out.push_back(validate_environment_independence(spec));
    if (spec.traits.uses_tau) out.push_back(validate_tau(spec));
    return out;
}

} // namespace dcj
