#include "dcj/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "dcj/generator.hpp"
#include "dcj/rates.hpp"
#include "dcj/simulate.hpp"
#include "dcj/stationary.hpp"
#include "dcj/verify.hpp"
#include "dcj/version.hpp"

namespace dcj::cli {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << content;
        if (!out) fail(Errc::ParseError, "cannot write " + path.string());
    }
    fs::rename(tmp, path);
}

json provenance(const LoadedModel& model) {
    json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    std::ostringstream hash;
    hash << std::hex << model.config_hash;
    j["config_hash"] = hash.str();
    j["seed"] = model.seed;
    j["variant"] = variant_name(model.spec.variant);
    return j;
}

std::string csv_provenance(const LoadedModel& model) {
    std::ostringstream os;
    os << "# tool=" << kToolName << " version=" << kToolVersion << " config=" << std::hex
       << model.config_hash << std::dec << " seed=" << model.seed
       << " variant=" << variant_name(model.spec.variant) << "\n";
    return os.str();
}

int failure_exit(const Error& e, std::ostream& out) {
    out << "error: " << e.what() << "\n";
    switch (e.code()) {
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::BadParameter:
    case Errc::MissingXiEta:
    case Errc::DomainMismatch:
        return 2;
    default:
        return 1;
    }
}

template <typename Fn>
int guarded(std::ostream& out, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return failure_exit(e, out);
    }
}

/// Every admissible state of the truncated space, independent of
/// reachability: occupancy configurations times task configurations.
std::vector<NetworkState> enumerate_admissible_states(const ModelSpec& spec) {
    std::vector<NetworkState> out;
    const auto contexts = occupancy_contexts(spec, spec.tol.state_budget);
    for (const auto& y : contexts) {
        NetworkState s;
        s.occupancy = y;
        auto push = [&](const CountVec& n) {
            s.tasks = n;
            out.push_back(s);
        };
        if (spec.traits.tasks_open) {
            const Count cap = *spec.truncation.n_max;
            CountVec n(static_cast<std::size_t>(spec.sites()), 0);
            std::function<void(int)> rec = [&](int idx) {
                if (idx == spec.sites()) {
                    push(n);
                    return;
                }
                for (Count c = 0; c <= cap; ++c) {
                    n[static_cast<std::size_t>(idx)] = c;
                    rec(idx + 1);
                }
            };
            rec(0);
        } else {
            for_each_composition(*spec.conserved_n, spec.sites(), push);
        }
        if (out.size() > spec.tol.state_budget)
            fail(Errc::BudgetExceeded, "state enumeration exceeds budget");
    }
    return out;
}

json validation_json(const std::vector<ValidationReport>& reports,
                     const SubcriticalityReport& sub) {
    json out;
    out["conditions"] = json::array();
    bool all = true;
    for (const auto& r : reports) {
        json c;
        c["name"] = r.condition;
        c["pass"] = r.pass();
        c["checked"] = r.checked;
        c["max_rel_err"] = r.max_rel_err;
        if (!r.violations.empty()) {
            const auto& v = r.violations.front();
            c["worst"] = {{"where", v.where}, {"lhs", v.lhs}, {"rhs", v.rhs},
                          {"rel_err", v.rel_err}};
        }
        all = all && r.pass();
        out["conditions"].push_back(std::move(c));
    }
    json sc;
    sc["pass"] = sub.pass;
    sc["series"] = json::array();
    for (const auto& e : sub.entries) {
        json s;
        s["series"] = e.series;
        s["converged"] = e.converged;
        if (e.converged) s["value"] = e.value;
        if (!e.detail.empty()) s["detail"] = e.detail;
        if (e.last_ratio != 0) s["term_ratio"] = e.last_ratio;
        sc["series"].push_back(std::move(s));
    }
    out["subcriticality"] = std::move(sc);
    out["pass"] = all && sub.pass;
    return out;
}

} // namespace

LoadedModel load_with_overrides(const Options& opt) {
    LoadedModel model = load_model(opt.config_path);
    if (opt.seed) model.seed = *opt.seed;
    if (opt.nmax) model.spec.truncation.n_max = static_cast<Count>(*opt.nmax);
    if (opt.ymax) model.spec.truncation.y_max = static_cast<Count>(*opt.ymax);
    if (opt.tol) {
        model.spec.tol.validation = *opt.tol;
        model.spec.tol.dbe = *opt.tol;
    }
    model.spec.validate();
    return model;
}

int cmd_validate(const Options& opt, std::ostream& out) {
    return guarded(out, [&]() {
        const LoadedModel model = load_with_overrides(opt);
        const auto reports = validate_all(model.spec);
        const auto sub = check_subcriticality(model.spec);
        json doc = provenance(model);
        doc.update(validation_json(reports, sub));
        doc["tolerances"] = {{"validation", model.spec.tol.validation},
                             {"series", model.spec.tol.series}};
        atomic_write(fs::path(opt.out_dir) / "validate.json", doc.dump(2) + "\n");
        for (const auto& r : reports)
            out << r.condition << ": " << (r.pass() ? "pass" : "FAIL")
                << " (checked " << r.checked << ", max rel err " << r.max_rel_err << ")\n";
        out << "sub-criticality: " << (sub.pass ? "pass" : "FAIL") << "\n";
        if (!sub.pass) {
            for (const auto& e : sub.entries)
                if (!e.converged) out << "  divergent: " << e.series << " — " << e.detail << "\n";
        }
        const bool ok = doc["pass"].get<bool>();
        return ok ? 0 : 1;
    });
}

int cmd_stationary(const Options& opt, std::ostream& out) {
    return guarded(out, [&]() {
        const LoadedModel model = load_with_overrides(opt);
        const ModelSpec& spec = model.spec;

        const auto sub = check_subcriticality(spec);
        if (!sub.pass) {
            out << "sub-criticality failed; no stationary law\n";
            for (const auto& e : sub.entries)
                if (!e.converged) out << "  divergent: " << e.series << "\n";
            return 1;
        }
        const SeriesValue xi = partition_function(spec);

        CumulativeCache cache(spec);
        const auto states = enumerate_admissible_states(spec);
        const double log_xi = std::log(xi.value);

        std::ostringstream csv;
        csv << csv_provenance(model);
        csv << "# Xi=" << std::setprecision(17) << xi.value << " tail_bound=" << xi.tail_bound
            << " converged=" << (xi.converged ? "true" : "false") << "\n";
        csv << "state,log_weight,probability\n";
        double box_mass = 0;
        for (const auto& s : states) {
            const WeightValue w = weight(spec, s, cache);
            const double p = w.is_zero() ? 0.0 : std::exp(w.log_weight - log_xi);
            box_mass += p;
            csv << to_string(s) << "," << std::setprecision(17) << w.log_weight << "," << p
                << "\n";
        }
        if (spec.traits.tasks_open ||
            (spec.traits.dcs_open && spec.traits.kind == ParticleKind::ZeroRange)) {
            const SeriesValue boxed = partition_function_boxed(spec);
            const double tail_mass =
                std::max(0.0, (xi.value + xi.tail_bound - boxed.value) / xi.value);
            csv << "# box_mass=" << box_mass << " tail_mass_bound=" << tail_mass << "\n";
        }
        atomic_write(fs::path(opt.out_dir) / "stationary.csv", csv.str());
        out << "Xi = " << xi.value << " (+" << xi.tail_bound << "), " << states.size()
            << " states written\n";
        return 0;
    });
}

int cmd_verify(const Options& opt, std::ostream& out) {
    return guarded(out, [&]() {
        const LoadedModel model = load_with_overrides(opt);
        const ModelSpec& spec = model.spec;

        const auto space = reachable_states(spec, model.init, spec.tol.state_budget);
        const auto interior = interior_states(spec, space);
        const BalanceReport dbe = check_detailed_balance(spec, interior, spec.tol.dbe);

        json doc = provenance(model);
        doc["dbe"] = {{"states", space.states.size()},
                      {"interior_states", interior.size()},
                      {"transitions_checked", dbe.transitions_checked},
                      {"max_residual", dbe.max_residual},
                      {"tolerance", dbe.tolerance},
                      {"pass", dbe.pass}};
        if (!dbe.pass) {
            doc["dbe"]["worst"] = {{"state", to_string(dbe.worst_state)},
                                   {"target", to_string(dbe.worst_target)},
                                   {"kind", kind_name(dbe.worst_kind)},
                                   {"lhs", dbe.worst_lhs},
                                   {"rhs", dbe.worst_rhs}};
            out << "DBE FAIL: residual " << dbe.max_residual << " at "
                << to_string(dbe.worst_state) << " -> " << to_string(dbe.worst_target) << " ("
                << kind_name(dbe.worst_kind) << ", lhs " << dbe.worst_lhs << " rhs "
                << dbe.worst_rhs << ")\n";
        } else {
            out << "DBE pass: max residual " << dbe.max_residual << " over "
                << dbe.transitions_checked << " transitions\n";
        }

        bool oracle_ok = true;
        if (space.states.size() <= 20000) {
            const Oracle oracle = oracle_stationary(spec, 20000);
            // product form normalized over the same space
            CumulativeCache cache(spec);
            std::vector<double> logw(oracle.space.states.size());
            double lse_max = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < oracle.space.states.size(); ++i) {
                logw[i] = weight(spec, oracle.space.states[i], cache).log_weight;
                lse_max = std::max(lse_max, logw[i]);
            }
            double z = 0;
            for (double lw : logw) z += std::exp(lw - lse_max);
            std::vector<double> pf(logw.size());
            for (std::size_t i = 0; i < logw.size(); ++i)
                pf[i] = std::exp(logw[i] - lse_max) / z;
            double max_abs = 0;
            for (std::size_t i = 0; i < pf.size(); ++i)
                max_abs = std::max(max_abs, std::abs(pf[i] - oracle.probs[i]));
            const double tv = total_variation(pf, oracle.probs);
            oracle_ok = max_abs <= spec.tol.oracle && tv <= spec.tol.oracle;
            doc["oracle"] = {{"states", oracle.space.states.size()},
                             {"max_abs_diff", max_abs},
                             {"tv_distance", tv},
                             {"tolerance", spec.tol.oracle},
                             {"pass", oracle_ok}};
            out << "oracle: max |pf - solve| = " << max_abs << ", TV = " << tv << " over "
                << oracle.probs.size() << " states: " << (oracle_ok ? "pass" : "FAIL") << "\n";
        } else {
            doc["oracle"] = {{"skipped", true},
                             {"reason", "state space above 20000-state budget"}};
            out << "oracle skipped: " << space.states.size() << " states exceed budget\n";
        }

        doc["pass"] = dbe.pass && oracle_ok;
        atomic_write(fs::path(opt.out_dir) / "verify.json", doc.dump(2) + "\n");
        return (dbe.pass && oracle_ok) ? 0 : 1;
    });
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    return guarded(out, [&]() {
        const LoadedModel model = load_with_overrides(opt);
        const ModelSpec& spec = model.spec;

        SimBudget budget;
        budget.max_events = opt.events.value_or(100000);
        if (opt.time_budget) budget.max_time = *opt.time_budget;
        const int replicas = opt.replicas.value_or(1);

        std::vector<std::uint64_t> checkpoints;
        for (std::uint64_t c = 100; c < budget.max_events; c *= 10) checkpoints.push_back(c);
        if (budget.max_events > 0) checkpoints.push_back(budget.max_events);

        const auto runs =
            run_replicas(spec, model.init, budget, model.seed, replicas, 0, checkpoints);

        const fs::path dir(opt.out_dir);
        std::vector<Trajectory> trajs;
        for (int k = 0; k < replicas; ++k) {
            const auto& traj = runs[static_cast<std::size_t>(k)].traj;
            trajs.push_back(traj);
            std::ostringstream csv;
            csv << csv_provenance(model);
            csv << "# replica=" << k << " stream_seed=" << traj.seed << " events="
                << traj.event_count << " time=" << traj.total_time << "\n";
            csv << "state,residence,fraction\n";
            if (traj.total_time > 0) {
                for (const auto& [s, t] : traj.occupation)
                    csv << to_string(s) << "," << t << "," << t / traj.total_time << "\n";
                if (traj.overflow_time > 0)
                    csv << "overflow," << traj.overflow_time << ","
                        << traj.overflow_time / traj.total_time << "\n";
            }
            atomic_write(dir / ("occupation_r" + std::to_string(k) + ".csv"), csv.str());
        }

        // merged occupation
        std::ostringstream merged_csv;
        merged_csv << csv_provenance(model);
        merged_csv << "state,residence,fraction\n";
        double total_time = 0;
        OccupationMap merged;
        double overflow = 0;
        for (const auto& t : trajs) {
            for (const auto& [s, r] : t.occupation) merged[s] += r;
            overflow += t.overflow_time;
            total_time += t.total_time;
        }
        if (total_time > 0) {
            for (const auto& [s, r] : merged)
                merged_csv << to_string(s) << "," << r << "," << r / total_time << "\n";
            if (overflow > 0)
                merged_csv << "overflow," << overflow << "," << overflow / total_time << "\n";
        }
        atomic_write(dir / "merged.csv", merged_csv.str());

        // TV against the exact law when the space is small enough
        if (budget.max_events > 0) {
            try {
                const auto space = reachable_states(spec, model.init, 20000);
                CumulativeCache cache(spec);
                std::vector<double> logw(space.states.size());
                double m = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < space.states.size(); ++i) {
                    logw[i] = weight(spec, space.states[i], cache).log_weight;
                    m = std::max(m, logw[i]);
                }
                double z = 0;
                for (double lw : logw) z += std::exp(lw - m);
                std::vector<double> pf(logw.size());
                for (std::size_t i = 0; i < logw.size(); ++i)
                    pf[i] = std::exp(logw[i] - m) / z;

                std::ostringstream tv_csv;
                tv_csv << csv_provenance(model);
                tv_csv << "events,tv\n";
                for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
                    Trajectory snap_merged;
                    bool have = true;
                    for (const auto& r : runs) {
                        if (ci >= r.snapshots.size()) {
                            have = false;
                            break;
                        }
                        const auto& snap = r.snapshots[ci];
                        for (const auto& [s, t] : snap.occupation)
                            snap_merged.occupation[s] += t;
                        snap_merged.overflow_time += snap.overflow_time;
                        snap_merged.total_time += snap.total_time;
                    }
                    if (!have || !(snap_merged.total_time > 0)) continue;
                    const double tv =
                        tv_against(empirical_distribution(snap_merged), space, pf);
                    tv_csv << checkpoints[ci] << "," << tv << "\n";
                }
                atomic_write(dir / "tv_table.csv", tv_csv.str());
            } catch (const Error&) {
                // exact law unavailable (budget or divergence): skip the table
            }
        }

        out << replicas << " replicas, " << budget.max_events << " events each, total time "
            << total_time << "\n";
        return 0;
    });
}

int cmd_report(const Options& opt, std::ostream& out) {
    return guarded(out, [&]() {
        const LoadedModel model = load_with_overrides(opt);
        json doc = provenance(model);

        const auto reports = validate_all(model.spec);
        const auto sub = check_subcriticality(model.spec);
        doc["validation"] = validation_json(reports, sub);

        bool ok = doc["validation"]["pass"].get<bool>();
        if (ok) {
            try {
                const SeriesValue xi = partition_function(model.spec);
                doc["partition_function"] = {{"value", xi.value},
                                             {"tail_bound", xi.tail_bound},
                                             {"converged", xi.converged}};
            } catch (const Error& e) {
                doc["partition_function"] = {{"error", e.what()}};
                ok = false;
            }
        }

        const auto space = reachable_states(model.spec, model.init, model.spec.tol.state_budget);
        const auto interior = interior_states(model.spec, space);
        const BalanceReport dbe = check_detailed_balance(model.spec, interior, model.spec.tol.dbe);
        doc["dbe"] = {{"transitions_checked", dbe.transitions_checked},
                      {"max_residual", dbe.max_residual},
                      {"pass", dbe.pass}};
        ok = ok && dbe.pass;

        doc["pass"] = ok;
        atomic_write(std::filesystem::path(opt.out_dir) / "report.json", doc.dump(2) + "\n");
        out << "report: " << (ok ? "pass" : "FAIL") << "\n";
        return ok ? 0 : 1;
    });
}

} // namespace dcj::cli
