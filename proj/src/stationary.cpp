#include "dcj/stationary.hpp"

#include <cmath>
#include <sstream>

#include "dcj/rates.hpp"

namespace dcj {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::size_t CumulativeCache::YKeyHash::operator()(const YKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(k.site));
    for (Count c : k.y) mix(static_cast<std::uint64_t>(c) + 1);
    return static_cast<std::size_t>(h);
}

CumulativeCache::Row& CumulativeCache::row(int site, const CountVec& y, Count upto) {
    auto& r = rows_[YKey{site, y}];
    while (static_cast<Count>(r.lin_lam.size()) <= upto) {
        const Count n = static_cast<Count>(r.lin_lam.size()); // extending to index n
        const double lam = spec_->rates.lambda(site, n - 1, y);
        const double mu = spec_->rates.mu(site, n, y);
        r.lin_lam.push_back(r.lin_lam.back() * lam);
        r.lin_mu.push_back(r.lin_mu.back() * mu);
        r.log_lam.push_back(r.log_lam.back() + (lam > 0 ? std::log(lam) : kNegInf));
        r.log_mu.push_back(r.log_mu.back() + (mu > 0 ? std::log(mu) : kNegInf));
    }
    return r;
}

CumulativeCache::GaugeRow& CumulativeCache::gauge_row(int site, Count upto) {
    if (static_cast<std::size_t>(site) >= gauge_rows_.size())
        gauge_rows_.resize(static_cast<std::size_t>(spec_->sites()));
    auto& r = gauge_rows_[static_cast<std::size_t>(site)];
    while (static_cast<Count>(r.lin.size()) <= upto) {
        const Count n = static_cast<Count>(r.lin.size());
        const double g = spec_->rates.gamma(site, n - 1);
        r.lin.push_back(r.lin.back() * g);
        r.log.push_back(r.log.back() + (g > 0 ? std::log(g) : kNegInf));
    }
    return r;
}

double CumulativeCache::lam_bar(int site, Count n, const CountVec& y) {
    return row(site, y, n).lin_lam[static_cast<std::size_t>(n)];
}
double CumulativeCache::mu_bar(int site, Count n, const CountVec& y) {
    return row(site, y, n).lin_mu[static_cast<std::size_t>(n)];
}
double CumulativeCache::gam_bar(int site, Count n) {
    return gauge_row(site, n).lin[static_cast<std::size_t>(n)];
}
double CumulativeCache::log_lam_bar(int site, Count n, const CountVec& y) {
    return row(site, y, n).log_lam[static_cast<std::size_t>(n)];
}
double CumulativeCache::log_mu_bar(int site, Count n, const CountVec& y) {
    return row(site, y, n).log_mu[static_cast<std::size_t>(n)];
}
double CumulativeCache::log_gam_bar(int site, Count n) {
    return gauge_row(site, n).log[static_cast<std::size_t>(n)];
}
double CumulativeCache::log_task_ratio(int site, Count n, const CountVec& y) {
    const auto& r = row(site, y, n);
    return r.log_lam[static_cast<std::size_t>(n)] - r.log_mu[static_cast<std::size_t>(n)];
}

// ---- weights ----

namespace {

void require_structural(const ModelSpec& spec, const NetworkState& s) {
    const int ns = spec.sites();
    if (static_cast<int>(s.tasks.size()) != ns || static_cast<int>(s.occupancy.size()) != ns)
        fail(Errc::InadmissibleState, "state has wrong dimension");
    for (Count c : s.tasks)
        if (c < 0) fail(Errc::InadmissibleState, "negative task count");
    for (Count c : s.occupancy)
        if (c < 0) fail(Errc::InadmissibleState, "negative occupancy");
    switch (spec.traits.kind) {
    case ParticleKind::None:
        if (s.total_dcs() != 0)
            fail(Errc::InadmissibleState, "variant has no walkers but occupancy is nonzero");
        break;
    case ParticleKind::SingleDc:
        if (s.total_dcs() != 1)
            fail(Errc::InadmissibleState, "single-walker variant requires exactly one walker");
        break;
    case ParticleKind::Exclusion:
        for (Count c : s.occupancy)
            if (c > 1) fail(Errc::InadmissibleState, "exclusion occupancy exceeds 1");
        break;
    case ParticleKind::ZeroRange:
        break;
    }
}

} // namespace

WeightValue weight(const ModelSpec& spec, const NetworkState& state, CumulativeCache& cache) {
    require_structural(spec, state);
    const auto& t = spec.traits;
    // conserved-quantity indicators
    if (t.needs_n && state.total_tasks() != *spec.conserved_n) return WeightValue{kNegInf};
    if (t.needs_m && t.kind != ParticleKind::SingleDc &&
        state.total_dcs() != *spec.conserved_m)
        return WeightValue{kNegInf};

    double lw = 0.0;
    for (int q = 0; q < spec.sites(); ++q) {
        const Count n = state.tasks[static_cast<std::size_t>(q)];
        const Count yq = state.occupancy[static_cast<std::size_t>(q)];
        if (t.tasks_open) lw += cache.log_task_ratio(q, n, state.occupancy);
        if (yq > 0) {
            lw += static_cast<double>(yq) * cache.log_gam_bar(q, n);
            if (t.dcs_open)
                lw += static_cast<double>(yq) *
                      (std::log(spec.rates.xi[static_cast<std::size_t>(q)]) -
                       std::log(spec.rates.eta[static_cast<std::size_t>(q)]));
        }
    }
    return WeightValue{lw};
}

WeightValue weight(const ModelSpec& spec, const NetworkState& state) {
    CumulativeCache cache(spec);
    return weight(spec, state, cache);
}

// ---- series engine ----

namespace {

struct SeriesOpts {
    double rel_tol = 1e-13;
    std::size_t window = 10000;
    std::size_t max_terms = 2000000;
    long min_terms = 0;
    long hard_cap = -1; // >= 0: sum exactly terms 0..hard_cap, tail 0 (boxed view)
};

SeriesValue sum_log_terms(const std::function<double(long)>& log_term, const SeriesOpts& opt,
                          const std::string& what) {
    SeriesValue out;
    double sum = 0;
    double prev_log = kNegInf;
    double prev_ratio = std::numeric_limits<double>::infinity();
    std::size_t ge1_streak = 0;
    std::size_t mono_streak = 0;
    for (long n = 0; n < static_cast<long>(opt.max_terms); ++n) {
        if (opt.hard_cap >= 0 && n > opt.hard_cap) {
            out.value = sum;
            out.truncation_index = opt.hard_cap;
            out.tail_bound = 0;
            out.converged = true;
            return out;
        }
        const double lt = log_term(n);
        if (!(lt > kNegInf)) {
            // monotone support: a vanished term never comes back
            out.value = sum;
            out.truncation_index = n - 1;
            out.tail_bound = 0;
            out.converged = true;
            return out;
        }
        if (lt > 700.0)
            fail(Errc::Diverged, what + ": terms grow without bound (log term " +
                                     std::to_string(lt) + " at n=" + std::to_string(n) + ")");
        const double t = std::exp(lt);
        sum += t;
        if (n >= 1) {
            const double ratio = std::exp(lt - prev_log);
            if (ratio >= 1.0) {
                mono_streak = 0;
                if (++ge1_streak >= opt.window)
                    fail(Errc::Diverged, what + ": term ratio " + std::to_string(ratio) +
                                             " >= 1 sustained for " +
                                             std::to_string(opt.window) + " terms");
            } else {
                ge1_streak = 0;
                if (ratio <= prev_ratio * (1 + 1e-12))
                    ++mono_streak;
                else
                    mono_streak = 0;
                if (mono_streak >= 3 && n >= opt.min_terms && opt.hard_cap < 0) {
                    const double tail = t * ratio / (1.0 - ratio);
                    if (tail <= opt.rel_tol * sum) {
                        out.value = sum;
                        out.truncation_index = n;
                        out.tail_bound = tail;
                        out.converged = true;
                        return out;
                    }
                }
                prev_ratio = ratio;
            }
        }
        prev_log = lt;
    }
    out.value = sum;
    out.truncation_index = static_cast<long>(opt.max_terms) - 1;
    out.tail_bound = std::numeric_limits<double>::infinity();
    out.converged = false;
    return out;
}

std::string series_name(const char* kind, int site, const CountVec& y) {
    std::ostringstream os;
    os << kind << "[site=" << site << "] y=";
    for (std::size_t q = 0; q < y.size(); ++q) {
        if (q) os << ';';
        os << y[q];
    }
    return os.str();
}

SeriesValue site_series(const ModelSpec&, CumulativeCache& cache, int site,
                        const CountVec& y, double gauge_exponent, const SeriesOpts& opt,
                        const char* kind) {
    auto log_term = [&](long n) {
        double lt = cache.log_task_ratio(site, static_cast<Count>(n), y);
        if (gauge_exponent != 0.0)
            lt += gauge_exponent * cache.log_gam_bar(site, static_cast<Count>(n));
        return lt;
    };
    return sum_log_terms(log_term, opt, series_name(kind, site, y));
}

SeriesOpts opts_for(const ModelSpec& spec) {
    SeriesOpts o;
    o.rel_tol = spec.tol.series;
    o.window = spec.tol.series_window;
    return o;
}

} // namespace

SeriesValue series_U(const ModelSpec& spec, int site, const CountVec& y) {
    CumulativeCache cache(spec);
    return site_series(spec, cache, site, y, 0.0, opts_for(spec), "U");
}

SeriesValue series_L(const ModelSpec& spec, int site, const CountVec& y) {
    CumulativeCache cache(spec);
    return site_series(spec, cache, site, y, 1.0, opts_for(spec), "L");
}

SeriesValue series_C(const ModelSpec& spec, int site, const CountVec& y) {
    CumulativeCache cache(spec);
    const double p = static_cast<double>(y[static_cast<std::size_t>(site)]);
    return site_series(spec, cache, site, y, p, opts_for(spec), "C");
}

// ---- partition function ----

namespace {

struct Bracket {
    double lo = 0;
    double hi = 0;
    long index = -1;
    bool converged = true;

    void add(const Bracket& o) {
        lo += o.lo;
        hi += o.hi;
        index = std::max(index, o.index);
        converged = converged && o.converged;
    }
};

/// Product over site series for one occupancy configuration, including the
/// walker fugacities when walkers are open.
Bracket context_product(const ModelSpec& spec, CumulativeCache& cache, const CountVec& y,
                        const SeriesOpts& opt) {
    Bracket b{1.0, 1.0, -1, true};
    for (int q = 0; q < spec.sites(); ++q) {
        const Count yq = y[static_cast<std::size_t>(q)];
        double expnt = 0.0;
        const char* kind = "U";
        if (yq > 0) {
            if (spec.traits.kind == ParticleKind::ZeroRange) {
                expnt = static_cast<double>(yq);
                kind = "C";
            } else {
                expnt = 1.0;
                kind = "L";
            }
        }
        const SeriesValue s = site_series(spec, cache, q, y, expnt, opt, kind);
        double fug = 1.0;
        if (spec.traits.dcs_open && yq > 0)
            fug = std::pow(spec.rates.xi[static_cast<std::size_t>(q)] /
                               spec.rates.eta[static_cast<std::size_t>(q)],
                           static_cast<double>(yq));
        b.lo *= fug * s.value;
        b.hi *= fug * (s.value + s.tail_bound);
        b.index = std::max(b.index, s.truncation_index);
        b.converged = b.converged && s.converged;
    }
    return b;
}

/// Exact sum of weights over every task configuration (closed: the |n|=N
/// manifold, open/boxed: the truncated box) for one fixed occupancy.
double exact_task_sum(const ModelSpec& spec, CumulativeCache& cache, const CountVec& y) {
    double sum = 0;
    NetworkState s;
    s.occupancy = y;
    auto acc = [&](const CountVec& n) {
        s.tasks = n;
        const WeightValue w = weight(spec, s, cache);
        if (!w.is_zero()) sum += std::exp(w.log_weight);
    };
    if (spec.traits.tasks_open) {
        const Count cap = *spec.truncation.n_max;
        CountVec n(static_cast<std::size_t>(spec.sites()), 0);
        std::function<void(int)> rec = [&](int idx) {
            if (idx == spec.sites()) {
                acc(n);
                return;
            }
            for (Count c = 0; c <= cap; ++c) {
                n[static_cast<std::size_t>(idx)] = c;
                rec(idx + 1);
            }
        };
        rec(0);
    } else {
        for_each_composition(*spec.conserved_n, spec.sites(), acc);
    }
    return sum;
}

SeriesValue assemble_partition(const ModelSpec& spec, bool boxed) {
    CumulativeCache cache(spec);
    SeriesOpts opt = opts_for(spec);
    if (boxed && spec.traits.tasks_open) opt.hard_cap = *spec.truncation.n_max;
    const auto& t = spec.traits;

    Bracket total;

    const bool closed_tasks = !t.tasks_open;
    if (closed_tasks) {
        // finite in n; walker side is finite (closed / exclusion) or geometric (zero-range open)
        if (t.kind == ParticleKind::ZeroRange && t.dcs_open) {
            // per task configuration the walker sum factorizes into geometric series
            double sum = 0;
            for_each_composition(*spec.conserved_n, spec.sites(), [&](const CountVec& n) {
                double term = 1.0;
                for (int l = 0; l < spec.sites(); ++l) {
                    const double rho = spec.rates.xi[static_cast<std::size_t>(l)] /
                                       spec.rates.eta[static_cast<std::size_t>(l)] *
                                       cache.gam_bar(l, n[static_cast<std::size_t>(l)]);
                    if (rho >= 1.0)
                        fail(Errc::Diverged,
                             "walker fugacity-gauge product " + std::to_string(rho) +
                                 " >= 1 at site " + std::to_string(l) +
                                 ", n=" + std::to_string(n[static_cast<std::size_t>(l)]));
                    term *= 1.0 / (1.0 - rho);
                }
                sum += term;
            });
            total = Bracket{sum, sum, -1, true};
        } else {
            // enumerate occupancies exactly
            double sum = 0;
            auto add_context = [&](const CountVec& y) { sum += exact_task_sum(spec, cache, y); };
            switch (t.kind) {
            case ParticleKind::SingleDc:
                for (int j = 0; j < spec.sites(); ++j) {
                    CountVec y(static_cast<std::size_t>(spec.sites()), 0);
                    y[static_cast<std::size_t>(j)] = 1;
                    add_context(y);
                }
                break;
            case ParticleKind::Exclusion:
                if (t.dcs_open) {
                    for (int m = 0; m <= spec.sites(); ++m)
                        for_each_subset(m, spec.sites(), add_context);
                } else {
                    for_each_subset(static_cast<int>(*spec.conserved_m), spec.sites(),
                                    add_context);
                }
                break;
            case ParticleKind::ZeroRange:
                for_each_composition(*spec.conserved_m, spec.sites(), add_context);
                break;
            case ParticleKind::None:
                add_context(CountVec(static_cast<std::size_t>(spec.sites()), 0));
                break;
            }
            total = Bracket{sum, sum, -1, true};
        }
        SeriesValue out;
        out.value = total.lo;
        out.tail_bound = 0;
        out.converged = true;
        out.truncation_index = -1;
        return out;
    }

    // open tasks: per-context products of certified series
    if (t.kind == ParticleKind::ZeroRange && t.dcs_open) {
        // walker count unbounded per site; the environment-independence
        // condition makes the occupancy sum factorize per site
        const Count ycap = *spec.truncation.y_max;
        total = Bracket{1.0, 1.0, -1, true};
        for (int q = 0; q < spec.sites(); ++q) {
            double lo = 0, hi = 0;
            double prev_lo = 0, prev_ratio = std::numeric_limits<double>::infinity();
            std::size_t mono = 0;
            bool converged = false;
            long m = 0;
            const long max_outer =
                boxed ? static_cast<long>(ycap)
                      : std::max<long>(static_cast<long>(ycap) + 64, 256);
            const double fug = spec.rates.xi[static_cast<std::size_t>(q)] /
                               spec.rates.eta[static_cast<std::size_t>(q)];
            double tail = std::numeric_limits<double>::infinity();
            for (; m <= max_outer; ++m) {
                CountVec y(static_cast<std::size_t>(spec.sites()), 0);
                y[static_cast<std::size_t>(q)] = static_cast<Count>(m);
                const SeriesValue inner = site_series(
                    spec, cache, q, y, static_cast<double>(m), opt, m == 0 ? "U" : "C");
                const double t_lo = std::pow(fug, static_cast<double>(m)) * inner.value;
                const double t_hi = std::pow(fug, static_cast<double>(m)) *
                                    (inner.value + inner.tail_bound);
                lo += t_lo;
                hi += t_hi;
                if (m >= 1) {
                    const double ratio = t_lo / prev_lo;
                    if (ratio < 1.0 && ratio <= prev_ratio * (1 + 1e-12)) {
                        ++mono;
                        tail = t_hi * ratio / (1.0 - ratio);
                        if (mono >= 3 && m >= ycap && tail <= opt.rel_tol * lo && !boxed) {
                            converged = true;
                            break;
                        }
                    } else {
                        mono = 0;
                        if (ratio >= 1.0 && m >= max_outer)
                            fail(Errc::Diverged,
                                 "walker-count series at site " + std::to_string(q) +
                                     ": term ratio " + std::to_string(ratio) + " >= 1");
                    }
                    prev_ratio = ratio;
                }
                prev_lo = t_lo;
            }
            if (boxed) {
                converged = true;
                tail = 0;
            }
            if (!converged && !boxed)
                fail(Errc::Diverged, "walker-count series at site " + std::to_string(q) +
                                         " did not certify convergence");
            Bracket site_b{lo, hi + (boxed ? 0.0 : tail), m, converged};
            total.lo *= site_b.lo;
            total.hi *= site_b.hi;
            total.index = std::max(total.index, site_b.index);
            total.converged = total.converged && site_b.converged;
        }
    } else {
        total = Bracket{};
        auto add_context = [&](const CountVec& y) {
            total.add(context_product(spec, cache, y, opt));
        };
        switch (t.kind) {
        case ParticleKind::None:
            add_context(CountVec(static_cast<std::size_t>(spec.sites()), 0));
            break;
        case ParticleKind::SingleDc:
            for (int j = 0; j < spec.sites(); ++j) {
                CountVec y(static_cast<std::size_t>(spec.sites()), 0);
                y[static_cast<std::size_t>(j)] = 1;
                add_context(y);
            }
            break;
        case ParticleKind::Exclusion:
            if (t.dcs_open) {
                for (int m = 0; m <= spec.sites(); ++m)
                    for_each_subset(m, spec.sites(), add_context);
            } else {
                for_each_subset(static_cast<int>(*spec.conserved_m), spec.sites(), add_context);
            }
            break;
        case ParticleKind::ZeroRange:
            for_each_composition(*spec.conserved_m, spec.sites(), add_context);
            break;
        }
    }

    SeriesValue out;
    out.value = total.lo;
    out.tail_bound = total.hi - total.lo;
    out.converged = total.converged;
    out.truncation_index = total.index;
    if (!out.converged)
        fail(Errc::Diverged, "partition function did not certify convergence");
    return out;
}

} // namespace

SeriesValue partition_function(const ModelSpec& spec) { return assemble_partition(spec, false); }

SeriesValue partition_function_boxed(const ModelSpec& spec) {
    return assemble_partition(spec, true);
}

double probability(const ModelSpec& spec, const NetworkState& state) {
    const WeightValue w = weight(spec, state);
    if (w.is_zero()) return 0.0;
    const SeriesValue xi = partition_function(spec);
    return std::exp(w.log_weight - std::log(xi.value));
}

// ---- sub-criticality ----

SubcriticalityReport check_subcriticality(const ModelSpec& spec) {
    SubcriticalityReport rep;
    CumulativeCache cache(spec);
    const SeriesOpts opt = opts_for(spec);

    auto try_series = [&](int site, const CountVec& y, double expnt, const char* kind) {
        SubcriticalityEntry e;
        e.series = series_name(kind, site, y);
        try {
            const SeriesValue s = site_series(spec, cache, site, y, expnt, opt, kind);
            e.converged = s.converged;
            e.value = s.value;
            if (!s.converged) {
                e.detail = "series did not certify convergence";
                rep.pass = false;
            }
        } catch (const Error& err) {
            if (err.code() != Errc::Diverged) throw;
            e.converged = false;
            e.detail = err.what();
            // extract the offending ratio for reporting
            const std::string what = err.what();
            const auto pos = what.find("term ratio ");
            if (pos != std::string::npos)
                e.last_ratio = std::strtod(what.c_str() + pos + 11, nullptr);
            rep.pass = false;
        }
        rep.entries.push_back(std::move(e));
    };

    const auto& t = spec.traits;
    if (!t.tasks_open) {
        if (t.kind == ParticleKind::ZeroRange && t.dcs_open) {
            // finiteness of the per-site walker geometric sums
            for (int l = 0; l < spec.sites(); ++l) {
                for (Count n = 0; n <= static_cast<Count>(*spec.conserved_n); ++n) {
                    const double rho = spec.rates.xi[static_cast<std::size_t>(l)] /
                                       spec.rates.eta[static_cast<std::size_t>(l)] *
                                       cache.gam_bar(l, n);
                    SubcriticalityEntry e;
                    std::ostringstream os;
                    os << "fugacity-gauge[site=" << l << "] n=" << n;
                    e.series = os.str();
                    e.value = rho;
                    e.last_ratio = rho;
                    e.converged = rho < 1.0;
                    if (!e.converged) {
                        e.detail = "xi/eta * gauge product >= 1";
                        rep.pass = false;
                    }
                    rep.entries.push_back(std::move(e));
                }
            }
        }
        return rep; // closed task space needs no task series
    }

    if (t.kind == ParticleKind::ZeroRange && t.dcs_open) {
        // inner series plus the per-site walker-count sums
        try {
            partition_function(spec);
        } catch (const Error& err) {
            if (err.code() != Errc::Diverged) throw;
            SubcriticalityEntry e;
            e.series = "walker-count sum";
            e.converged = false;
            e.detail = err.what();
            rep.pass = false;
            rep.entries.push_back(std::move(e));
        }
        const Count ycap = *spec.truncation.y_max;
        for (int q = 0; q < spec.sites(); ++q) {
            for (Count m = 0; m <= ycap; ++m) {
                CountVec y(static_cast<std::size_t>(spec.sites()), 0);
                y[static_cast<std::size_t>(q)] = m;
                try_series(q, y, static_cast<double>(m), m == 0 ? "U" : "C");
            }
        }
        return rep;
    }

    for (const auto& y : occupancy_contexts(spec, 256)) {
        for (int site = 0; site < spec.sites(); ++site) {
            const Count ys = y[static_cast<std::size_t>(site)];
            if (ys == 0) {
                try_series(site, y, 0.0, "U");
            } else if (t.kind == ParticleKind::ZeroRange) {
                try_series(site, y, static_cast<double>(ys), "C");
            } else {
                try_series(site, y, 1.0, "L");
            }
        }
    }
    return rep;
}

} // namespace dcj
