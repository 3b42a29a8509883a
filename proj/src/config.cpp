#include "dcj/config.hpp"

#include <fstream>

#include "dcj/rates.hpp"

namespace dcj {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

[[noreturn]] void schema_fail(const std::string& field, const std::string& what) {
    fail(Errc::SchemaError, "field '" + field + "': " + what);
}

const json& require_field(const json& doc, const std::string& key) {
    auto it = doc.find(key);
    if (it == doc.end()) schema_fail(key, "required field is missing");
    return *it;
}

double require_number(const json& doc, const std::string& key) {
    const json& v = require_field(doc, key);
    if (!v.is_number()) schema_fail(key, "expected a number");
    return v.get<double>();
}

long require_integer(const json& doc, const std::string& key) {
    const json& v = require_field(doc, key);
    if (!v.is_number_integer()) schema_fail(key, "expected an integer");
    return v.get<long>();
}

std::vector<double> number_vector(const json& v, const std::string& field, int expect) {
    if (!v.is_array()) schema_fail(field, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) schema_fail(field, "expected numbers");
        out.push_back(x.get<double>());
    }
    if (expect > 0 && static_cast<int>(out.size()) != expect)
        schema_fail(field, "expected " + std::to_string(expect) + " entries");
    return out;
}

/// Scalar broadcast or per-site vector.
std::vector<double> site_vector(const json& doc, const std::string& key, int sites,
                                double fallback, bool required) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        if (required) schema_fail(key, "required field is missing");
        return std::vector<double>(static_cast<std::size_t>(sites), fallback);
    }
    if (it->is_number())
        return std::vector<double>(static_cast<std::size_t>(sites), it->get<double>());
    return number_vector(*it, key, sites);
}

Matrix require_matrix(const json& v, const std::string& field, int sites) {
    if (!v.is_array()) schema_fail(field, "expected a square matrix");
    Matrix m;
    for (const auto& row : v) m.push_back(number_vector(row, field, sites));
    if (static_cast<int>(m.size()) != sites)
        schema_fail(field, "expected " + std::to_string(sites) + " rows");
    return m;
}

SiteRateFn parse_site_rate(const json& v, const std::string& field, int sites) {
    if (v.is_number()) return constant_rate(v.get<double>());
    if (v.is_array()) return constant_rate(number_vector(v, field, sites));
    if (!v.is_object()) schema_fail(field, "expected a rate family object");
    const std::string kind = require_field(v, "kind").get<std::string>();
    if (kind == "constant") {
        if (v.contains("rates"))
            return constant_rate(number_vector(v["rates"], field + ".rates", sites));
        return constant_rate(require_number(v, "rate"));
    }
    if (kind == "blocked") {
        return blocked_arrival(require_number(v, "rate"),
                               static_cast<Count>(require_integer(v, "cap")));
    }
    if (kind == "kserver") {
        return kserver_service(require_number(v, "rate"),
                               static_cast<Count>(require_integer(v, "servers")));
    }
    if (kind == "occupancy_scaled") {
        return occupancy_scaled(parse_site_rate(require_field(v, "base"), field + ".base", sites),
                                site_vector(v, "scale", sites, 1.0, true));
    }
    schema_fail(field + ".kind", "unknown rate family '" + kind + "'");
}

GaugeFn parse_gauge(const json& v, const std::string& field, const std::vector<double>& phi) {
    if (!v.is_object()) schema_fail(field, "expected a gauge family object");
    const std::string kind = require_field(v, "kind").get<std::string>();
    if (kind == "one") return gauge_one();
    if (kind == "const_exp") return gauge_const_exp(phi);
    if (kind == "inv_linear") return gauge_inv_linear(phi);
    if (kind == "linear") return gauge_linear(phi);
    schema_fail(field + ".kind", "unknown gauge family '" + kind + "'");
}

PairRateFn parse_pair_rate(const json& v, const std::string& field, int sites,
                           const SiteRateFn& lambda, const SiteRateFn& mu, const GaugeFn& gamma,
                           bool zero_range) {
    if (v.is_array()) return constant_matrix(require_matrix(v, field, sites));
    if (!v.is_object()) schema_fail(field, "expected an array family object or matrix");
    const std::string kind = require_field(v, "kind").get<std::string>();
    const Matrix m = require_matrix(require_field(v, "matrix"), field + ".matrix", sites);
    if (kind == "constant") return constant_matrix(m);
    if (kind == "rate_balanced") return rate_balanced_matrix(m, lambda, mu);
    if (kind == "dest_gauge") return dest_gauge_matrix(m, gamma, zero_range);
    schema_fail(field + ".kind", "unknown array family '" + kind + "'");
}

LeapRateFn parse_leap_rate(const json& v, const std::string& field, int sites,
                           const SiteRateFn& lambda, const SiteRateFn& mu,
                           const std::vector<double>& xi, const std::vector<double>& eta) {
    if (v.is_array()) return constant_leap(require_matrix(v, field, sites));
    if (!v.is_object()) schema_fail(field, "expected an array family object or matrix");
    const std::string kind = require_field(v, "kind").get<std::string>();
    const Matrix m = require_matrix(require_field(v, "matrix"), field + ".matrix", sites);
    if (kind == "constant") return constant_leap(m);
    if (kind == "fugacity_balanced") {
        if (xi.empty() || eta.empty())
            schema_fail(field, "fugacity_balanced tau needs xi and eta");
        return fugacity_leap(m, xi, eta);
    }
    if (kind == "weight_balanced") return weight_balanced_leap(m, lambda, mu);
    schema_fail(field + ".kind", "unknown leap family '" + kind + "'");
}

} // namespace

LoadedModel load_model_json(const json& doc) {
    if (!doc.is_object()) fail(Errc::SchemaError, "top-level config must be an object");
    LoadedModel out;
    ModelSpec& spec = out.spec;

    const std::string vname = require_field(doc, "variant").get<std::string>();
    const auto var = variant_from_name(vname);
    if (!var) schema_fail("variant", "unknown variant '" + vname + "'");
    spec.variant = *var;
    spec.traits = variant_traits(*var);

    const long sites = require_integer(doc, "sites");
    if (sites < 1) fail(Errc::BadParameter, "sites must be >= 1");
    spec.graph = SiteGraph::of_size(static_cast<int>(sites));
    if (doc.contains("labels")) {
        const auto& labels = doc["labels"];
        if (!labels.is_array() || static_cast<long>(labels.size()) != sites)
            schema_fail("labels", "expected one label per site");
        spec.graph.labels.clear();
        for (const auto& l : labels) spec.graph.labels.push_back(l.get<std::string>());
    }

    if (spec.traits.needs_m) {
        if (spec.traits.kind == ParticleKind::SingleDc) {
            spec.conserved_m = doc.contains("M") ? require_integer(doc, "M") : 1;
        } else {
            if (!doc.contains("M")) schema_fail("M", "required field is missing");
            spec.conserved_m = require_integer(doc, "M");
        }
    } else if (doc.contains("M") && spec.traits.kind == ParticleKind::None) {
        fail(Errc::BadParameter, "field 'M': variant V1 has no walkers");
    }
    if (spec.traits.needs_n) {
        if (!doc.contains("N")) schema_fail("N", "required field is missing");
        spec.conserved_n = require_integer(doc, "N");
    }

    const int ns = static_cast<int>(sites);
    const auto phi = site_vector(doc, "phi", ns, 0.0, false);
    spec.rates.phi = phi;

    if (doc.contains("lambda"))
        spec.rates.lambda = parse_site_rate(doc["lambda"], "lambda", ns);
    else if (spec.traits.tasks_open)
        schema_fail("lambda", "required field is missing");
    else
        spec.rates.lambda = constant_rate(1.0);

    if (doc.contains("mu"))
        spec.rates.mu = parse_site_rate(doc["mu"], "mu", ns);
    else if (spec.traits.tasks_open)
        schema_fail("mu", "required field is missing");
    else
        spec.rates.mu = constant_rate(1.0);

    spec.rates.gamma = doc.contains("gamma") ? parse_gauge(doc["gamma"], "gamma", phi)
                                             : gauge_one();

    if (spec.traits.dcs_open) {
        spec.rates.xi = site_vector(doc, "xi", ns, 0.0, true);
        spec.rates.eta = site_vector(doc, "eta", ns, 0.0, true);
    } else {
        if (doc.contains("xi")) spec.rates.xi = site_vector(doc, "xi", ns, 0.0, false);
        if (doc.contains("eta")) spec.rates.eta = site_vector(doc, "eta", ns, 0.0, false);
    }

    spec.rates.beta = parse_pair_rate(require_field(doc, "beta"), "beta", ns,
                                      spec.rates.lambda, spec.rates.mu, spec.rates.gamma,
                                      false);
    if (spec.traits.uses_theta) {
        spec.rates.theta = parse_pair_rate(require_field(doc, "theta"), "theta", ns,
                                           spec.rates.lambda, spec.rates.mu, spec.rates.gamma,
                                           false);
    }
    if (spec.traits.uses_epsilon) {
        spec.rates.epsilon = parse_pair_rate(
            require_field(doc, "epsilon"), "epsilon", ns, spec.rates.lambda, spec.rates.mu,
            spec.rates.gamma, spec.traits.kind == ParticleKind::ZeroRange);
    }
    if (spec.traits.uses_tau) {
        spec.rates.tau = parse_leap_rate(require_field(doc, "tau"), "tau", ns,
                                         spec.rates.lambda, spec.rates.mu, spec.rates.xi,
                                         spec.rates.eta);
    }

    if (doc.contains("truncation")) {
        const auto& tr = doc["truncation"];
        if (!tr.is_object()) schema_fail("truncation", "expected an object");
        if (tr.contains("n_max"))
            spec.truncation.n_max = static_cast<Count>(require_integer(tr, "n_max"));
        if (tr.contains("y_max"))
            spec.truncation.y_max = static_cast<Count>(require_integer(tr, "y_max"));
    }
    if (spec.traits.tasks_open && !spec.truncation.n_max)
        schema_fail("truncation.n_max", "required for open-task variants");
    if (spec.traits.dcs_open && spec.traits.kind == ParticleKind::ZeroRange &&
        !spec.truncation.y_max)
        schema_fail("truncation.y_max", "required for open-walker zero-range variants");

    if (doc.contains("tolerances")) {
        const auto& tl = doc["tolerances"];
        if (tl.contains("validation")) spec.tol.validation = tl["validation"].get<double>();
        if (tl.contains("series")) spec.tol.series = tl["series"].get<double>();
        if (tl.contains("dbe")) spec.tol.dbe = tl["dbe"].get<double>();
        if (tl.contains("oracle")) spec.tol.oracle = tl["oracle"].get<double>();
        if (tl.contains("series_window"))
            spec.tol.series_window = tl["series_window"].get<std::size_t>();
        if (tl.contains("state_budget"))
            spec.tol.state_budget = tl["state_budget"].get<std::size_t>();
    }

    if (doc.contains("seed")) out.seed = doc["seed"].get<std::uint64_t>();

    // optional single-entry perturbation, for sensitivity experiments
    if (doc.contains("perturb")) {
        const auto& p = doc["perturb"];
        const std::string array = require_field(p, "array").get<std::string>();
        const int from = static_cast<int>(require_integer(p, "from"));
        const int to = static_cast<int>(require_integer(p, "to"));
        const double factor = require_number(p, "factor");
        if (from < 0 || from >= ns || to < 0 || to >= ns)
            schema_fail("perturb", "site index out of range");
        if (array == "beta")
            spec.rates.beta = perturb_entry(spec.rates.beta, from, to, factor);
        else if (array == "theta" && spec.rates.theta)
            spec.rates.theta = perturb_entry(spec.rates.theta, from, to, factor);
        else if (array == "epsilon" && spec.rates.epsilon)
            spec.rates.epsilon = perturb_entry(spec.rates.epsilon, from, to, factor);
        else if (array == "tau" && spec.rates.tau)
            spec.rates.tau = perturb_entry(spec.rates.tau, from, to, factor);
        else
            schema_fail("perturb.array", "unknown or unused array '" + array + "'");
    }

    spec.validate();

    out.init = spec.canonical_state();
    if (doc.contains("init")) {
        const auto& init = doc["init"];
        if (init.contains("n")) {
            const auto n = number_vector(init["n"], "init.n", ns);
            for (int i = 0; i < ns; ++i) out.init.tasks[i] = static_cast<Count>(n[i]);
        }
        if (init.contains("y")) {
            const auto y = number_vector(init["y"], "init.y", ns);
            for (int i = 0; i < ns; ++i) out.init.occupancy[i] = static_cast<Count>(y[i]);
        }
        spec.require_admissible(out.init);
    }

    out.canonical = doc; // nlohmann objects keep keys sorted, so dump() is canonical
    out.config_hash = fnv1a64(out.canonical.dump());
    return out;
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(Errc::ParseError, std::string("invalid JSON in '") + path + "': " + e.what());
    }
    return load_model_json(doc);
}

} // namespace dcj
