#include "dcj/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace dcj {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::NegativeCount: return "NegativeCount";
    case Errc::ExclusionViolated: return "ExclusionViolated";
    case Errc::BadParameter: return "BadParameter";
    case Errc::InadmissibleState: return "InadmissibleState";
    case Errc::MissingXiEta: return "MissingXiEta";
    case Errc::Diverged: return "Diverged";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::Reducible: return "Reducible";
    case Errc::MissingReverse: return "MissingReverse";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::AbsorbingState: return "AbsorbingState";
    case Errc::EmptyTrajectory: return "EmptyTrajectory";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    }
    return "Error";
}

SiteGraph SiteGraph::of_size(int n) {
    SiteGraph g;
    g.site_count = n;
    g.labels.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) g.labels.push_back("s" + std::to_string(i));
    return g;
}

void SiteGraph::validate() const {
    if (site_count < 1) fail(Errc::BadParameter, "site_count must be >= 1");
    if (!labels.empty()) {
        if (static_cast<int>(labels.size()) != site_count)
            fail(Errc::BadParameter, "label count does not match site_count");
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail(Errc::BadParameter, "site labels must be unique");
    }
}

long NetworkState::total_tasks() const {
    return std::accumulate(tasks.begin(), tasks.end(), 0L);
}

long NetworkState::total_dcs() const {
    return std::accumulate(occupancy.begin(), occupancy.end(), 0L);
}

std::size_t StateHash::operator()(const NetworkState& s) const {
    // FNV-1a over both vectors
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (Count c : s.tasks) mix(static_cast<std::uint64_t>(c) + 1);
    mix(0xabcdULL);
    for (Count c : s.occupancy) mix(static_cast<std::uint64_t>(c) + 1);
    return static_cast<std::size_t>(h);
}

std::string to_string(const NetworkState& s) {
    std::ostringstream os;
    os << "y=";
    for (std::size_t i = 0; i < s.occupancy.size(); ++i) {
        if (i) os << ';';
        os << s.occupancy[i];
    }
    os << "|n=";
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
        if (i) os << ';';
        os << s.tasks[i];
    }
    return os.str();
}

VariantTraits variant_traits(Variant v) {
    VariantTraits t;
    switch (v) {
    case Variant::V1:
        t.kind = ParticleKind::None;
        t.tasks_open = true;
        break;
    case Variant::V2:
    case Variant::V3:
        t.kind = ParticleKind::SingleDc;
        t.tasks_open = true;
        t.needs_m = true;
        break;
    case Variant::V4:
        t.kind = ParticleKind::SingleDc;
        t.tasks_open = false;
        t.needs_m = true;
        t.needs_n = true;
        break;
    case Variant::V5:
        t.kind = ParticleKind::Exclusion;
        t.tasks_open = true;
        t.needs_m = true;
        break;
    case Variant::V6:
        t.kind = ParticleKind::Exclusion;
        t.tasks_open = true;
        t.dcs_open = true;
        break;
    case Variant::V7:
        t.kind = ParticleKind::Exclusion;
        t.tasks_open = false;
        t.needs_m = true;
        t.needs_n = true;
        break;
    case Variant::V8:
        t.kind = ParticleKind::Exclusion;
        t.tasks_open = false;
        t.dcs_open = true;
        t.needs_n = true;
        break;
    case Variant::V9:
        t.kind = ParticleKind::ZeroRange;
        t.tasks_open = true;
        t.needs_m = true;
        break;
    case Variant::V10:
        t.kind = ParticleKind::ZeroRange;
        t.tasks_open = true;
        t.dcs_open = true;
        break;
    case Variant::V11:
        t.kind = ParticleKind::ZeroRange;
        t.tasks_open = false;
        t.needs_m = true;
        t.needs_n = true;
        break;
    case Variant::V12:
        t.kind = ParticleKind::ZeroRange;
        t.tasks_open = false;
        t.dcs_open = true;
        t.needs_n = true;
        break;
    }
    t.uses_tau = t.kind != ParticleKind::None;
    t.uses_theta = t.kind != ParticleKind::None;
    t.uses_epsilon =
        t.kind == ParticleKind::Exclusion || t.kind == ParticleKind::ZeroRange;
    return t;
}

const char* variant_name(Variant v) {
    static const char* names[] = {"V1", "V2", "V3", "V4",  "V5",  "V6",
                                  "V7", "V8", "V9", "V10", "V11", "V12"};
    return names[static_cast<int>(v)];
}

std::optional<Variant> variant_from_name(const std::string& name) {
    for (int i = 0; i < 12; ++i) {
        auto v = static_cast<Variant>(i);
        if (name == variant_name(v)) return v;
    }
    return std::nullopt;
}

void ModelSpec::validate() const {
    graph.validate();
    const auto t = variant_traits(variant);
    if (t.needs_m) {
        if (!conserved_m) fail(Errc::SchemaError, "variant requires conserved walker count M");
        if (t.kind == ParticleKind::SingleDc && *conserved_m != 1)
            fail(Errc::BadParameter, "single-walker variants require M = 1");
        if (*conserved_m < 0) fail(Errc::BadParameter, "M must be >= 0");
        if (t.kind == ParticleKind::Exclusion && *conserved_m > sites())
            fail(Errc::BadParameter, "exclusion requires M <= site count");
    } else if (conserved_m && t.kind == ParticleKind::None) {
        fail(Errc::BadParameter, "variant V1 has no walkers; M is not allowed");
    }
    if (t.needs_n) {
        if (!conserved_n) fail(Errc::SchemaError, "variant requires conserved task count N");
        if (*conserved_n < 0) fail(Errc::BadParameter, "N must be >= 0");
    }
    if (t.tasks_open && (!truncation.n_max || *truncation.n_max < 1))
        fail(Errc::BadParameter, "open-task variants require n_max >= 1");
    if (t.dcs_open && t.kind == ParticleKind::ZeroRange &&
        (!truncation.y_max || *truncation.y_max < 1))
        fail(Errc::BadParameter, "open-walker zero-range variants require y_max >= 1");
    if (t.dcs_open) {
        if (rates.xi.size() != static_cast<std::size_t>(sites()) ||
            rates.eta.size() != static_cast<std::size_t>(sites()))
            fail(Errc::MissingXiEta, "open-walker variants require per-site xi and eta");
        for (int i = 0; i < sites(); ++i) {
            if (!(rates.xi[i] > 0) || !(rates.eta[i] > 0))
                fail(Errc::BadParameter, "xi and eta must be strictly positive");
        }
    }
    if (!rates.lambda || !rates.mu || !rates.gamma)
        fail(Errc::SchemaError, "lambda, mu and gamma must be set");

    // Service intensities must be bounded away from zero for occupied
    // queues; checked over the sampled domain of the truncated box.
    const Count nm = truncation.n_max.value_or(
        static_cast<Count>(conserved_n.value_or(1)));
    CountVec y0(static_cast<std::size_t>(sites()), 0);
    for (int i = 0; i < sites(); ++i) {
        for (Count n = 1; n <= nm + 1; ++n) {
            if (!(rates.mu(i, n, y0) > 0.0))
                fail(Errc::BadParameter,
                     "service intensity must be strictly positive for n >= 1 (site " +
                         std::to_string(i) + ", n=" + std::to_string(n) + ")");
        }
    }
}

bool ModelSpec::admissible(const NetworkState& s) const {
    const int ns = sites();
    if (static_cast<int>(s.tasks.size()) != ns ||
        static_cast<int>(s.occupancy.size()) != ns)
        return false;
    for (Count c : s.tasks)
        if (c < 0) return false;
    for (Count c : s.occupancy)
        if (c < 0) return false;
    const auto& t = traits;
    if (t.kind == ParticleKind::None) {
        if (s.total_dcs() != 0) return false;
    } else if (t.kind != ParticleKind::ZeroRange) {
        for (Count c : s.occupancy)
            if (c > 1) return false;
    }
    if (t.needs_m && s.total_dcs() != *conserved_m) return false;
    if (t.kind == ParticleKind::SingleDc && s.total_dcs() != 1) return false;
    if (t.needs_n && s.total_tasks() != *conserved_n) return false;
    return true;
}

void ModelSpec::require_admissible(const NetworkState& s) const {
    if (!admissible(s))
        fail(Errc::InadmissibleState,
             "state " + to_string(s) + " is not admissible for " + variant_name(variant));
}

NetworkState ModelSpec::canonical_state() const {
    NetworkState s;
    s.tasks.assign(static_cast<std::size_t>(sites()), 0);
    s.occupancy.assign(static_cast<std::size_t>(sites()), 0);
    if (traits.needs_n) s.tasks[0] = static_cast<Count>(*conserved_n);
    if (traits.needs_m) {
        long m = *conserved_m;
        if (traits.kind == ParticleKind::ZeroRange) {
            s.occupancy[0] = static_cast<Count>(m);
        } else {
            for (int i = 0; i < sites() && m > 0; ++i, --m) s.occupancy[i] = 1;
        }
    }
    return s;
}

std::uint64_t binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

std::uint64_t compositions(unsigned total, unsigned parts) {
    if (parts == 0) return total == 0 ? 1 : 0;
    return binomial(total + parts - 1, parts - 1);
}

std::optional<std::uint64_t> state_dimension(const ModelSpec& spec) {
    const auto& t = spec.traits;
    const unsigned ns = static_cast<unsigned>(spec.sites());

    std::uint64_t task_dim;
    if (!t.tasks_open) {
        task_dim = compositions(static_cast<unsigned>(*spec.conserved_n), ns);
    } else {
        if (!spec.truncation.n_max) return std::nullopt;
        task_dim = 1;
        for (unsigned i = 0; i < ns; ++i)
            task_dim *= static_cast<std::uint64_t>(*spec.truncation.n_max) + 1;
    }

    std::uint64_t dc_dim = 1;
    switch (t.kind) {
    case ParticleKind::None:
        break;
    case ParticleKind::SingleDc:
        dc_dim = ns;
        break;
    case ParticleKind::Exclusion:
        if (t.dcs_open) {
            dc_dim = 1ULL << ns;
        } else {
            dc_dim = binomial(ns, static_cast<unsigned>(*spec.conserved_m));
        }
        break;
    case ParticleKind::ZeroRange:
        if (t.dcs_open) {
            if (!spec.truncation.y_max) return std::nullopt;
            dc_dim = 1;
            for (unsigned i = 0; i < ns; ++i)
                dc_dim *= static_cast<std::uint64_t>(*spec.truncation.y_max) + 1;
        } else {
            dc_dim = compositions(static_cast<unsigned>(*spec.conserved_m), ns);
        }
        break;
    }
    return task_dim * dc_dim;
}

NetworkState apply_edit(const NetworkState& s, const StateEdit& edit, ParticleKind kind) {
    NetworkState out = s;
    const bool exclusive =
        kind == ParticleKind::SingleDc || kind == ParticleKind::Exclusion;
    auto dec = [](Count& c, const char* what) {
        if (c <= 0) fail(Errc::NegativeCount, std::string(what) + " would drop below 0");
        --c;
    };
    auto inc_dc = [&](Count& c) {
        if (exclusive && c >= 1)
            fail(Errc::ExclusionViolated, "occupancy already 1 at destination");
        ++c;
    };
    switch (edit.kind) {
    case EditKind::TaskAdd:
        ++out.tasks[edit.a];
        break;
    case EditKind::TaskRemove:
        dec(out.tasks[edit.a], "task count");
        break;
    case EditKind::TaskMove:
        dec(out.tasks[edit.a], "task count");
        ++out.tasks[edit.b];
        break;
    case EditKind::DcMove:
        dec(out.occupancy[edit.a], "occupancy");
        inc_dc(out.occupancy[edit.b]);
        break;
    case EditKind::DcAdd:
        inc_dc(out.occupancy[edit.a]);
        break;
    case EditKind::DcRemove:
        dec(out.occupancy[edit.a], "occupancy");
        break;
    }
    return out;
}

void for_each_composition(long total, int parts,
                          const std::function<void(const CountVec&)>& fn) {
    CountVec v(static_cast<std::size_t>(parts), 0);
    std::function<void(int, long)> rec = [&](int idx, long remaining) {
        if (idx == parts - 1) {
            v[idx] = static_cast<Count>(remaining);
            fn(v);
            return;
        }
        for (long c = 0; c <= remaining; ++c) {
            v[idx] = static_cast<Count>(c);
            rec(idx + 1, remaining - c);
        }
    };
    if (parts <= 0) {
        if (total == 0) fn(v);
        return;
    }
    rec(0, total);
}

void for_each_subset(int total, int parts,
                     const std::function<void(const CountVec&)>& fn) {
    CountVec v(static_cast<std::size_t>(parts), 0);
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (remaining > parts - idx) return;
        if (idx == parts) {
            if (remaining == 0) fn(v);
            return;
        }
        v[idx] = 0;
        rec(idx + 1, remaining);
        if (remaining > 0) {
            v[idx] = 1;
            rec(idx + 1, remaining - 1);
            v[idx] = 0;
        }
    };
    rec(0, total);
}

} // namespace dcj
