#include "idset/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "idset/errors.hpp"
#include "idset/examples.hpp"
#include "idset/reduce.hpp"
#include "idset/scan.hpp"

namespace idset::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

// ------------------------------------------------------------ config access

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

std::string path_of(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("key '" + path_of(where, key) + "' has the wrong type (" + e.what() + ")");
    }
}

template <class T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + path_of(where, key) + "'");
    return get<T>(j, key, where, T{});
}

template <class T>
void maybe(const json& j, const std::string& key, const std::string& where, T& target) {
    target = get<T>(j, key, where, target);
}

// ------------------------------------------------------------ model loading

struct Loaded {
    std::string label;
    ModelSpec model;
    std::optional<EntryGameConfig> entry;
    std::optional<IntervalRegConfig> interval;
    std::vector<double> truncations;
    fs::path base_dir;
    json cfg;
};

EntryGameConfig entry_config(const json& j) {
    const std::string w = "model_config";
    check_keys(j, {"x_support", "x_weights", "alpha", "delta", "variant", "tau", "sigma2", "truncation",
                   "points_per_dim", "theta_lower", "theta_upper", "theta_resolution"},
               w);
    EntryGameConfig c;
    maybe(j, "x_support", w, c.x_support);
    maybe(j, "x_weights", w, c.x_weights);
    maybe(j, "alpha", w, c.alpha);
    maybe(j, "delta", w, c.delta);
    if (j.contains("variant")) {
        try {
            c.variant = parse_moment_variant(require<std::string>(j, "variant", w));
        } catch (const ConfigError& e) {
            throw ConfigError("key 'model_config.variant': " + std::string(e.what()));
        }
    }
    maybe(j, "tau", w, c.tau);
    maybe(j, "sigma2", w, c.sigma2);
    maybe(j, "truncation", w, c.truncation);
    maybe(j, "points_per_dim", w, c.points_per_dim);
    maybe(j, "theta_lower", w, c.theta_lower);
    maybe(j, "theta_upper", w, c.theta_upper);
    maybe(j, "theta_resolution", w, c.theta_resolution);
    return c;
}

IntervalRegConfig interval_config(const json& j, IntervalForm form) {
    const std::string w = "model_config";
    check_keys(j, {"w_support", "w_weights", "below", "above", "truncation", "points_per_dim", "theta_lower",
                   "theta_upper", "theta_resolution", "theta0"},
               w);
    IntervalRegConfig c;
    c.form = form;
    maybe(j, "w_support", w, c.w_support);
    maybe(j, "w_weights", w, c.w_weights);
    maybe(j, "below", w, c.below);
    maybe(j, "above", w, c.above);
    maybe(j, "truncation", w, c.truncation);
    maybe(j, "points_per_dim", w, c.points_per_dim);
    maybe(j, "theta_lower", w, c.theta_lower);
    maybe(j, "theta_upper", w, c.theta_upper);
    maybe(j, "theta_resolution", w, c.theta_resolution);
    maybe(j, "theta0", w, c.theta0);
    return c;
}

Loaded load(const json& cfg, const fs::path& base_dir) {
    check_keys(cfg, {"model", "model_config", "data", "truncations", "output_dir", "seed", "threads",
                     "counterfactual", "reduce"},
               "config");
    Loaded L;
    L.cfg = cfg;
    L.base_dir = base_dir;
    L.label = require<std::string>(cfg, "model", "");
    const json mc = cfg.contains("model_config") ? cfg.at("model_config") : json::object();
    if (L.label == "production_function")
        throw NotSupported(
            "the production-function model and its quantile counterfactual are outside the supported "
            "scope; available models: interval_proper, interval_dagger, entry_game");
    if (L.label == "entry_game") {
        L.entry = entry_config(mc);
        L.model = build_entry_model(*L.entry);
    } else if (L.label == "interval_proper" || L.label == "interval_dagger") {
        L.interval = interval_config(mc, L.label == "interval_proper" ? IntervalForm::Proper : IntervalForm::Dagger);
        L.model = build_interval_model(*L.interval);
    } else {
        throw ConfigError("key 'model': unknown model '" + L.label +
                          "' (available: interval_proper, interval_dagger, entry_game)");
    }
    L.truncations = get<std::vector<double>>(cfg, "truncations", "", {});
    if (L.truncations.empty()) {
        const double m0 = L.model.latent.default_truncation;
        L.truncations = {m0, 2 * m0, 4 * m0};
    }
    for (double m : L.truncations)
        if (!(m > 0.0)) throw ConfigError("key 'truncations': entries must be positive");
    std::sort(L.truncations.begin(), L.truncations.end());
    return L;
}

std::uint64_t seed_of(const json& cfg) { return get<std::uint64_t>(cfg, "seed", "", 0); }

Sampling parse_sampling(const std::string& s) {
    if (s == "stratified") return Sampling::Stratified;
    if (s == "iid") return Sampling::Iid;
    throw ConfigError("key 'data.simulate.sampling': expected 'stratified' or 'iid', got '" + s + "'");
}

DiscreteDistribution simulate(const Loaded& L, const json& sim, std::uint64_t seed) {
    const std::string w = "data.simulate";
    const Sampling sampling = parse_sampling(get<std::string>(sim, "sampling", w, "stratified"));
    if (L.entry) {
        check_keys(sim, {"n", "sampling", "selection", "theta0", "u_law"}, w);
        const auto n = get<std::size_t>(sim, "n", w, 3200);
        const auto th = get<Vec>(sim, "theta0", w, L.entry->theta0());
        Selection sel;
        const auto rule = get<std::string>(sim, "selection", w, "first_lex");
        if (rule == "first_lex")
            sel.rule = SelectionRule::FirstLex;
        else if (rule == "random")
            sel.rule = SelectionRule::Random;
        else
            throw ConfigError("key 'data.simulate.selection': expected 'first_lex' or 'random'");
        sel.seed = seed;
        LatentLaw law = LatentLaw::entry_default();
        if (sim.contains("u_law")) {
            const auto& u = sim.at("u_law");
            check_keys(u, {"points", "weights"}, w + ".u_law");
            law.points = require<std::vector<Vec>>(u, "points", w + ".u_law");
            law.weights = require<Vec>(u, "weights", w + ".u_law");
        }
        return simulate_entry_data(*L.entry, th, n, sel, law, sampling, seed);
    }
    check_keys(sim, {"n", "sampling", "theta0", "noise"}, w);
    const auto n = get<std::size_t>(sim, "n", w, 300);
    const auto th = get<Vec>(sim, "theta0", w, L.interval->theta0);
    NoiseLaw eps;
    if (sim.contains("noise")) {
        const auto& e = sim.at("noise");
        check_keys(e, {"points", "weights"}, w + ".noise");
        eps.points = require<Vec>(e, "points", w + ".noise");
        eps.weights = require<Vec>(e, "weights", w + ".noise");
    }
    return simulate_interval_data(*L.interval, th, n, eps, seed, sampling);
}

DiscreteDistribution load_data(const Loaded& L) {
    if (!L.cfg.contains("data")) throw ConfigError("missing key 'data'");
    const auto& d = L.cfg.at("data");
    check_keys(d, {"csv", "simulate"}, "data");
    if (d.contains("csv") == d.contains("simulate"))
        throw ConfigError("key 'data': give exactly one of 'csv' or 'simulate'");
    DiscreteDistribution F;
    if (d.contains("simulate")) {
        F = simulate(L, d.at("simulate"), seed_of(L.cfg));
    } else {
        fs::path p = require<std::string>(d, "csv", "data");
        if (p.is_relative()) p = L.base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError("key 'data.csv': cannot open '" + p.string() + "'");
        F = read_distribution_csv(in);
    }
    if (F.z_dim() != L.model.z_dim)
        throw ConfigError("data has " + std::to_string(F.z_dim()) + " z columns, model '" + L.label +
                          "' expects " + std::to_string(L.model.z_dim));
    return F;
}

// ------------------------------------------------------------------ output

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

json meta(const RunContext& ctx, const std::string& command) {
    return {{"tool", "idtool"},
            {"version", kVersion},
            {"command", command},
            {"config_hash", hex(ctx.config_hash)},
            {"seed", ctx.seed}};
}

std::string csv_header(const RunContext& ctx, const std::string& command) {
    return "# idtool " + std::string(kVersion) + " command=" + command + " config_hash=" +
           hex(ctx.config_hash) + " seed=" + std::to_string(ctx.seed) + "\n";
}

std::ofstream open_out(const RunContext& ctx, const std::string& name) {
    fs::create_directories(ctx.output_dir);
    std::ofstream os(ctx.output_dir / name);
    if (!os) throw ConfigError("cannot write '" + (ctx.output_dir / name).string() + "'");
    return os;
}

void write_json(const RunContext& ctx, const std::string& name, const json& j) {
    auto os = open_out(ctx, name);
    os << j.dump(2) << '\n';
}

json number(double v) { return std::isfinite(v) ? json(v) : json(std::isnan(v) ? "nan" : v > 0 ? "inf" : "-inf"); }

json hull_json(const SetSummary& s) {
    json out = json::array();
    for (const auto& h : s.hull) {
        json e = {{"name", h.name}, {"empty", h.empty}};
        if (!h.empty) {
            e["lo"] = h.lo;
            e["hi"] = h.hi;
        }
        out.push_back(e);
    }
    return out;
}

json verdict_json(const Verdict& v) {
    return {{"M", v.truncation},
            {"member_sf", v.member_sf},
            {"member_lp", v.member_lp},
            {"criterion_value", number(v.criterion_value)},
            {"lp_violation", number(v.lp_violation)},
            {"divergent_dirs", v.divergent_direction_count}};
}

json scan_summary(const ScanReport& rep) {
    auto lp = set_summary(rep, MembershipKind::Lp);
    auto sf = set_summary(rep, MembershipKind::SupportFunction);
    json dis = json::array();
    for (auto i : rep.disagreements) {
        const auto& v = rep.verdicts[i];
        json e = verdict_json(v);
        e["index"] = i;
        e["theta"] = v.theta;
        dis.push_back(e);
    }
    json traj = json::array();
    for (const auto& t : rep.trajectories) {
        json steps = json::array();
        steps.push_back(verdict_json(rep.verdicts[t.index]));
        for (const auto& s : t.steps) steps.push_back(verdict_json(s));
        traj.push_back({{"index", t.index}, {"theta", rep.verdicts[t.index].theta}, {"steps", steps}});
    }
    json errs = json::array();
    for (const auto& e : rep.errors)
        errs.push_back({{"index", e.index}, {"theta", e.theta}, {"kind", e.kind}, {"message", e.message}});
    return {{"model", rep.model_label},
            {"theta_names", rep.theta_names},
            {"truncations", rep.truncations},
            {"grid_points", rep.verdicts.size()},
            {"complete", rep.complete},
            {"members_lp", lp.members.size()},
            {"members_sf", sf.members.size()},
            {"hull_note", "per-coordinate hull of the member points: an outer description of the set"},
            {"hull_lp", hull_json(lp)},
            {"hull_sf", hull_json(sf)},
            {"lp_empty", lp.empty},
            {"disagreements", dis},
            {"trajectories", traj},
            {"errors", errs}};
}

ScanOptions scan_options(const Loaded& L, std::vector<double> truncations) {
    ScanOptions o;
    o.truncations = std::move(truncations);
    o.threads = get<std::size_t>(L.cfg, "threads", "", 0);
    return o;
}

// ---------------------------------------------------------------- commands

int cmd_scan(const Loaded& L, const RunContext& ctx, int verbosity) {
    auto F = load_data(L);
    auto rep = scan(L.model, F, scan_options(L, L.truncations));
    if (verbosity > 0)
        std::cerr << "scan: " << rep.verdicts.size() << " points, " << rep.disagreements.size()
                  << " disagreements, " << rep.errors.size() << " errors\n";
    {
        auto os = open_out(ctx, "verdicts.csv");
        os << csv_header(ctx, "scan");
        write_verdicts_csv(os, rep);
    }
    json s = scan_summary(rep);
    s["meta"] = meta(ctx, "scan");
    write_json(ctx, "summary.json", s);
    return rep.complete ? kOk : kIncomplete;
}

DeltaRule parse_delta_rule(const std::string& s) {
    if (s == "mean") return DeltaRule::Mean;
    if (s == "min") return DeltaRule::Min;
    if (s == "max") return DeltaRule::Max;
    throw ConfigError("key 'counterfactual.delta_rule': expected mean, min or max");
}

int cmd_counterfactual(const Loaded& L, const RunContext& ctx, int verbosity) {
    if (!L.entry)
        throw NotSupported("counterfactuals are defined for the entry game only; model '" + L.label +
                           "' has none");
    if (!L.cfg.contains("counterfactual")) throw ConfigError("missing key 'counterfactual'");
    const auto& c = L.cfg.at("counterfactual");
    const std::string w = "counterfactual";
    check_keys(c, {"case", "scale", "shift", "x_scale", "x_shift", "delta_rule", "target", "firm", "thetas",
                   "theta_tilde_box", "check_nonempty"},
               w);
    const auto kind = get<std::string>(c, "case", w, "shift_x");
    CounterfactualCase cf_case;
    if (kind == "shift_x") {
        ShiftX s;
        maybe(c, "scale", w, s.scale);
        maybe(c, "shift", w, s.shift);
        cf_case = s;
    } else if (kind == "merger") {
        cf_case = Merger{};
    } else if (kind == "new_competitor") {
        NewCompetitor nc;
        maybe(c, "x_scale", w, nc.x_scale);
        maybe(c, "x_shift", w, nc.x_shift);
        nc.delta_rule = parse_delta_rule(get<std::string>(c, "delta_rule", w, "mean"));
        cf_case = nc;
    } else {
        throw ConfigError("key 'counterfactual.case': expected shift_x, merger or new_competitor");
    }
    CounterfactualTarget target;
    target.type = parse_target(get<std::string>(c, "target", w, "expected_entrants"));
    target.firm = get<std::size_t>(c, "firm", w, 0);
    ParameterBox tbox;
    if (c.contains("theta_tilde_box")) {
        const auto& b = c.at("theta_tilde_box");
        check_keys(b, {"lower", "upper", "resolution"}, w + ".theta_tilde_box");
        tbox.lower = {require<double>(b, "lower", w + ".theta_tilde_box")};
        tbox.upper = {require<double>(b, "upper", w + ".theta_tilde_box")};
        tbox.resolution = {get<std::size_t>(b, "resolution", w + ".theta_tilde_box", 201)};
        tbox.names = {"theta_tilde"};
    }
    auto spec = build_entry_counterfactual(*L.entry, cf_case, target, tbox);
    const bool check = get<bool>(c, "check_nonempty", w, false);
    auto aug = augment(L.model, spec, check ? entry_z_support(*L.entry) : std::vector<Vec>{});

    auto F = load_data(L);
    std::vector<Vec> thetas;
    bool from_scan = false;
    if (c.contains("thetas")) {
        thetas = require<std::vector<Vec>>(c, "thetas", w);
        for (const auto& t : thetas)
            if (t.size() != L.model.params.dim())
                throw ConfigError("key 'counterfactual.thetas': each entry needs " +
                                  std::to_string(L.model.params.dim()) + " coordinates");
    } else {
        auto rep = scan(L.model, F, scan_options(L, {L.truncations.front()}));
        thetas = set_summary(rep).members;
        from_scan = true;
        if (verbosity > 0) std::cerr << "counterfactual: " << thetas.size() << " baseline members\n";
    }

    json rows = json::array();
    bool incomplete = false;
    std::optional<double> ulo, uhi;
    bool ulo_grow = false, uhi_grow = false;
    for (const auto& th : thetas) {
        json row = {{"theta", th}};
        json by = json::array();
        try {
            BoundsResult last;
            std::optional<BoundsResult> prev;
            // Growth is judged on the final doubling of the sweep.
            bool lo_grow = false, hi_grow = false;
            for (double M : L.truncations) {
                auto b = theta_tilde_interval(aug, F, th, M);
                by.push_back({{"M", M}, {"lo", b.lo}, {"hi", b.hi}, {"lo_growing", b.lo_growing},
                              {"hi_growing", b.hi_growing}, {"lo_at_box", b.lo_at_box}, {"hi_at_box", b.hi_at_box}});
                if (prev) {
                    lo_grow = prev->lo - b.lo > 0.01 * (1.0 + std::abs(prev->lo));
                    hi_grow = b.hi - prev->hi > 0.01 * (1.0 + std::abs(prev->hi));
                }
                prev = b;
                last = b;
            }
            lo_grow = lo_grow || last.lo_growing;
            hi_grow = hi_grow || last.hi_growing;
            row["lo"] = last.lo;
            row["hi"] = last.hi;
            row["lo_growing"] = lo_grow;
            row["hi_growing"] = hi_grow;
            row["by_truncation"] = by;
            ulo = ulo ? std::min(*ulo, last.lo) : last.lo;
            uhi = uhi ? std::max(*uhi, last.hi) : last.hi;
            ulo_grow = ulo_grow || lo_grow;
            uhi_grow = uhi_grow || hi_grow;
        } catch (const Error& e) {
            incomplete = true;
            row["error"] = {{"kind", e.kind()}, {"message", e.what()}};
            row["by_truncation"] = by;
        }
        rows.push_back(row);
    }
    json out = {{"meta", meta(ctx, "counterfactual")},
                {"model", L.label},
                {"counterfactual", spec.label},
                {"target", to_string(target.type)},
                {"truncations", L.truncations},
                {"thetas_from_scan", from_scan},
                {"intervals", rows},
                {"complete", !incomplete}};
    if (ulo)
        out["union"] = {{"lo", *ulo}, {"hi", *uhi}, {"lo_growing", ulo_grow}, {"hi_growing", uhi_grow}};
    else
        out["union"] = nullptr;
    write_json(ctx, "intervals.json", out);
    return incomplete ? kIncomplete : kOk;
}

json certificate_json(const ReductionCertificate& c) {
    return {{"lambda", c.lambda.values()},
            {"achieved_value", c.achieved_value},
            {"completion", c.completion},
            {"truncation", c.truncation},
            {"smallest_singular_value", c.smallest_singular_value},
            {"condition_number", c.condition_number}};
}

int cmd_reduce(const Loaded& L, const RunContext& ctx, int verbosity) {
    const json r = L.cfg.contains("reduce") ? L.cfg.at("reduce") : json::object();
    check_keys(r, {"include_interior"}, "reduce");
    const bool interior = get<bool>(r, "include_interior", "reduce", false);
    json out = {{"meta", meta(ctx, "reduce")}, {"model", L.label}};
    if (L.model.moments.dim_r2 == 0) {
        out["vacuous"] = true;
        out["note"] = "no latent-dependent moments: nothing to reduce";
        write_json(ctx, "reduction.json", out);
        return kOk;
    }
    auto F = load_data(L);
    const double M = L.truncations.front();
    auto base = scan(L.model, F, scan_options(L, {M}));
    std::vector<bool> member;
    for (const auto& v : base.verdicts) member.push_back(v.member_lp);
    auto grid = L.model.make_grid(M);
    auto rep = irreducibility_report(L.model, grid, {F}, {member}, interior);
    json entries = json::array();
    const ReductionCertificate* cert = nullptr;
    for (const auto& e : rep.entries) {
        json j = {{"theta", e.theta}, {"found", e.found}};
        if (e.certificate) {
            j["certificate"] = certificate_json(*e.certificate);
            if (!cert) cert = &*e.certificate;
        }
        if (!e.error.empty()) j["error"] = e.error;
        entries.push_back(j);
    }
    out["vacuous"] = rep.vacuous;
    out["note"] = rep.note;
    out["boundary_points"] = rep.boundary_points;
    out["reducible_pairs"] = rep.reducible_pairs;
    out["entries"] = entries;
    out["truncation"] = M;
    bool complete = base.complete;
    if (cert) {
        auto reduced = reduce_model(L.model, *cert);
        auto red = scan(reduced, F, scan_options(L, {M}));
        complete = complete && red.complete;
        std::size_t agree = 0;
        auto os = open_out(ctx, "comparison.csv");
        os << csv_header(ctx, "reduce");
        for (const auto& n : base.theta_names) os << n << ',';
        os << "member_lp,member_lp_reduced,member_sf,member_sf_reduced\n";
        std::ostringstream line;
        line.precision(12);
        for (std::size_t i = 0; i < base.verdicts.size(); ++i) {
            const auto& a = base.verdicts[i];
            const auto& b = red.verdicts[i];
            agree += a.member_lp == b.member_lp;
            line.str("");
            for (double t : a.theta) line << t << ',';
            line << a.member_lp << ',' << b.member_lp << ',' << a.member_sf << ',' << b.member_sf << '\n';
            os << line.str();
        }
        out["certificate"] = certificate_json(*cert);
        out["double_scan"] = {{"points", base.verdicts.size()},
                              {"agree_lp", agree},
                              {"identical", agree == base.verdicts.size()},
                              {"reduced_members_sf", set_summary(red, MembershipKind::SupportFunction).members.size()}};
        if (verbosity > 0) std::cerr << "reduce: double scan agrees at " << agree << " points\n";
    } else {
        out["certificate"] = nullptr;
    }
    out["complete"] = complete;
    write_json(ctx, "reduction.json", out);
    return complete ? kOk : kIncomplete;
}

int cmd_simulate(const Loaded& L, const RunContext& ctx, int) {
    if (!L.cfg.contains("data") || !L.cfg.at("data").contains("simulate"))
        throw ConfigError("missing key 'data.simulate'");
    auto F = load_data(L);
    auto os = open_out(ctx, "data.csv");
    os << csv_header(ctx, "simulate");
    write_distribution_csv(os, F, L.model.z_names);
    return kOk;
}

void report_error(const RunContext& ctx, const std::string& command, const char* kind, const std::string& what,
                  int code) {
    json d = {{"error", kind}, {"message", what}, {"exit_code", code}, {"command", command}};
    std::cerr << d.dump() << '\n';
    if (ctx.output_dir.empty()) return;
    try {
        d["meta"] = meta(ctx, command);
        write_json(ctx, "diagnostics.json", d);
    } catch (...) {
    }
}

int dispatch(const std::string& command, const json& cfg, const fs::path& base_dir,
             const fs::path& output_override, int verbosity) {
    RunContext ctx;
    try {
        ctx.config_text = cfg.dump();
        ctx.config_hash = fnv1a(ctx.config_text);
        if (cfg.is_object()) {
            ctx.seed = seed_of(cfg);
            ctx.output_dir = output_override.empty()
                                 ? fs::path(get<std::string>(cfg, "output_dir", "", "."))
                                 : output_override;
            if (ctx.output_dir.is_relative() && output_override.empty()) ctx.output_dir = base_dir / ctx.output_dir;
        }
        Loaded L = load(cfg, base_dir);
        if (command == "scan") return cmd_scan(L, ctx, verbosity);
        if (command == "counterfactual") return cmd_counterfactual(L, ctx, verbosity);
        if (command == "reduce") return cmd_reduce(L, ctx, verbosity);
        if (command == "simulate") return cmd_simulate(L, ctx, verbosity);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        report_error(ctx, command, e.kind(), e.what(), kConfig);
        return kConfig;
    } catch (const NotSupported& e) {
        report_error(ctx, command, e.kind(), e.what(), kConfig);
        return kConfig;
    } catch (const NonemptyCorrespondenceViolated& e) {
        report_error(ctx, command, e.kind(), e.what(), kConfig);
        return kConfig;
    } catch (const Error& e) {
        report_error(ctx, command, e.kind(), e.what(), kIncomplete);
        return kIncomplete;
    } catch (const fs::filesystem_error& e) {
        report_error(ctx, command, "FilesystemError", e.what(), kConfig);
        return kConfig;
    }
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

int run_command_text(const std::string& command, const std::string& config_json, const fs::path& output_override,
                     int verbosity) {
    json cfg;
    try {
        cfg = parse_json(config_json);
    } catch (const ConfigError& e) {
        report_error({}, command, e.kind(), e.what(), kConfig);
        return kConfig;
    }
    return dispatch(command, cfg, fs::current_path(), output_override, verbosity);
}

int run_command(const std::string& command, const fs::path& config_path, const fs::path& output_override,
                int verbosity) {
    std::ifstream in(config_path);
    if (!in) {
        report_error({}, command, "ConfigError", "cannot open config '" + config_path.string() + "'", kConfig);
        return kConfig;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    json cfg;
    try {
        cfg = parse_json(ss.str());
    } catch (const ConfigError& e) {
        report_error({}, command, e.kind(), e.what(), kConfig);
        return kConfig;
    }
    auto base = config_path.parent_path();
    if (base.empty()) base = ".";
    return dispatch(command, cfg, base, output_override, verbosity);
}

int main(int argc, char** argv) {
    CLI::App app{"idtool: identified sets, moment closures and counterfactual bounds"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    struct Args {
        std::string config, output;
        int verbosity = 0;
    };
    // Separate storage per subcommand; unused subcommands would otherwise
    // reset shared variables to their defaults.
    std::map<std::string, Args> args;
    const std::pair<const char*, const char*> commands[] = {
        {"scan", "membership verdicts over the parameter grid"},
        {"counterfactual", "bounds on a counterfactual parameter"},
        {"reduce", "moment-closure reduction and a comparison scan"},
        {"simulate", "write a simulated data set"},
    };
    for (const auto& [name, about] : commands) {
        auto& a = args[name];
        auto* sub = app.add_subcommand(name, about);
        sub->add_option("--config", a.config, "JSON run configuration")->required();
        sub->add_option("-o,--output", a.output, "output directory (overrides output_dir)");
        sub->add_flag("-v,--verbose", a.verbosity, "progress messages on stderr");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const auto& a = args[command];
    return run_command(command, a.config, a.output, a.verbosity);
}

}  // namespace idset::cli
