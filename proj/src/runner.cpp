#include "roughwalk/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "roughwalk/limits.hpp"
#include "roughwalk/path_lift.hpp"
#include "roughwalk/renewal.hpp"
#include "roughwalk/report.hpp"
#include "roughwalk/variation.hpp"

namespace roughwalk {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::invalid_argument("config." + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        const bool known = std::any_of(required.begin(), required.end(),
                                       [&](const char* k) { return key == k; }) ||
                           std::any_of(optional.begin(), optional.end(),
                                       [&](const char* k) { return key == k; });
        if (!known) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
    for (const char* k : required)
        if (!obj.contains(k)) fail(path, std::string("missing required key '") + k + "'");
}

double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int64_t get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int64_t>();
}

uint64_t get_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<int64_t>() >= 0))
        fail(path, "expected a non-negative integer");
    return j.get<uint64_t>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string get_str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Vec parse_vec(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || j.size() > static_cast<size_t>(kMaxDim))
        fail(path, "expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
    Vec v(static_cast<int>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = get_num(j[i], path);
    return v;
}

Mat parse_mat(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || j.size() > static_cast<size_t>(kMaxDim))
        fail(path, "expected a square matrix as nested arrays");
    const int d = static_cast<int>(j.size());
    Mat m(d);
    for (int i = 0; i < d; ++i) {
        if (!j[static_cast<size_t>(i)].is_array() || static_cast<int>(j[static_cast<size_t>(i)].size()) != d)
            fail(path, "expected a square matrix as nested arrays");
        for (int c = 0; c < d; ++c)
            m(i, c) = get_num(j[static_cast<size_t>(i)][static_cast<size_t>(c)], path);
    }
    return m;
}

FiniteLaw parse_law(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected an array of {prob, step} atoms");
    FiniteLaw law;
    for (size_t i = 0; i < j.size(); ++i) {
        const std::string apath = path + "[" + std::to_string(i) + "]";
        check_keys(j[i], apath, {"prob", "step"});
        law.prob.push_back(get_num(j[i]["prob"], apath + ".prob"));
        law.atom.push_back(parse_vec(j[i]["step"], apath + ".step"));
    }
    law.validate();
    return law;
}

}  // namespace

GeneratorConfig parse_generator(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    if (!j.contains("type")) fail(path, "missing required key 'type'");
    const std::string type = get_str(j["type"], path + ".type");
    GeneratorConfig gen;
    if (type == "rotor") {
        check_keys(j, path, {"type", "p_ccw"}, {"extra_step"});
        gen.kind = GeneratorConfig::Kind::rotor;
        gen.p_ccw = get_num(j["p_ccw"], path + ".p_ccw");
        gen.extra_step = j.contains("extra_step") && get_bool(j["extra_step"], path + ".extra_step");
    } else if (type == "delayed_rw") {
        check_keys(j, path, {"type", "step_law"}, {"delay_law"});
        gen.kind = GeneratorConfig::Kind::delayed_rw;
        gen.step_law = parse_law(j["step_law"], path + ".step_law");
        if (j.contains("delay_law")) gen.delay_law = parse_law(j["delay_law"], path + ".delay_law");
    } else if (type == "markov_additive") {
        check_keys(j, path, {"type", "transition", "f", "anchor"});
        gen.kind = GeneratorConfig::Kind::markov_additive;
        const json& t = j["transition"];
        if (!t.is_array() || t.empty()) fail(path + ".transition", "expected a square matrix");
        for (size_t r = 0; r < t.size(); ++r) {
            const json& row = t[r];
            if (!row.is_array() || row.size() != t.size())
                fail(path + ".transition", "expected a square matrix");
            std::vector<double> rv;
            for (size_t c = 0; c < row.size(); ++c)
                rv.push_back(get_num(row[c], path + ".transition"));
            gen.chain.transition.push_back(std::move(rv));
        }
        const json& f = j["f"];
        if (!f.is_array() || f.size() != t.size())
            fail(path + ".f", "expected one vector per state");
        for (size_t r = 0; r < f.size(); ++r)
            gen.chain.f.push_back(parse_vec(f[r], path + ".f[" + std::to_string(r) + "]"));
        gen.chain.anchor = static_cast<int>(get_int(j["anchor"], path + ".anchor"));
    } else if (type == "periodic_env") {
        check_keys(j, path, {"type", "profile"});
        gen.kind = GeneratorConfig::Kind::periodic_env;
        const json& prof = j["profile"];
        if (!prof.is_array() || prof.empty()) fail(path + ".profile", "expected an array of laws");
        for (size_t i = 0; i < prof.size(); ++i)
            gen.profile.push_back(parse_law(prof[i], path + ".profile[" + std::to_string(i) + "]"));
    } else if (type == "linear_drift") {
        check_keys(j, path, {"type"}, {"dim"});
        gen.kind = GeneratorConfig::Kind::linear_drift;
        gen.drift_dim = j.contains("dim") ? static_cast<int>(get_int(j["dim"], path + ".dim")) : 1;
    } else {
        fail(path + ".type", "unknown generator type '" + type + "'");
    }
    gen.validate();
    return gen;
}

namespace {

const std::initializer_list<const char*> kCommands = {
    "lift", "pvar", "simulate", "estimate", "mc-marginal",
    "mc-area", "tightness", "donsker", "renewal", "lemma-a2"};

void check_command_schema(const json& doc, const std::string& command) {
    const std::initializer_list<const char*> common = {"command", "master_seed", "workers", "output",
                                                       "formats"};
    auto with_common = [&](std::initializer_list<const char*> extra_req,
                           std::initializer_list<const char*> extra_opt) {
        std::vector<const char*> req(extra_req);
        req.push_back("command");
        req.push_back("master_seed");
        std::vector<const char*> opt(extra_opt);
        opt.push_back("workers");
        opt.push_back("output");
        opt.push_back("formats");
        if (!doc.is_object()) fail("", "expected an object");
        for (const auto& [key, value] : doc.items()) {
            (void)value;
            const bool known =
                std::any_of(req.begin(), req.end(), [&](const char* k) { return key == k; }) ||
                std::any_of(opt.begin(), opt.end(), [&](const char* k) { return key == k; });
            if (!known) fail(key, "unknown key");
        }
        for (const char* k : req)
            if (!doc.contains(k)) fail("", std::string("missing required key '") + k + "'");
    };
    (void)common;

    if (command == "lift") with_common({"generator", "n"}, {"export_trajectory"});
    else if (command == "pvar") with_common({"generator", "n", "p"}, {});
    else if (command == "simulate") with_common({"generator", "n"}, {"export_trajectory"});
    else if (command == "estimate") with_common({"generator", "n"}, {"targets", "curve_points"});
    else if (command == "mc-marginal") with_common({"generator", "n", "trials", "targets"}, {});
    else if (command == "mc-area") with_common({"generator", "n", "trials", "targets"}, {});
    else if (command == "tightness") with_common({"generator", "n_list", "p", "trials"}, {});
    else if (command == "donsker") with_common({"generator", "n", "trials"}, {});
    else if (command == "renewal") with_common({"renewal"}, {});
    else if (command == "lemma-a2") with_common({"lemma_a2"}, {});
    else
        fail("command", "unknown command '" + command + "'");
}

int64_t positive_int(const json& j, const std::string& path) {
    const int64_t v = get_int(j, path);
    if (v < 1) fail(path, "must be a positive integer");
    return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(json doc) {
    if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
    if (!doc.contains("command")) fail("", "missing required key 'command'");
    const std::string command = get_str(doc["command"], "command");
    if (!std::any_of(kCommands.begin(), kCommands.end(), [&](const char* c) { return command == c; }))
        fail("command", "unknown command '" + command + "'");
    check_command_schema(doc, command);

    ExperimentConfig cfg;
    cfg.command = command;
    cfg.master_seed = get_u64(doc["master_seed"], "master_seed");
    cfg.workers = doc.contains("workers") ? static_cast<int>(positive_int(doc["workers"], "workers")) : 1;
    cfg.output = doc.contains("output") ? get_str(doc["output"], "output") : std::string("out");
    if (doc.contains("formats")) {
        if (!doc["formats"].is_array() || doc["formats"].empty())
            fail("formats", "expected a non-empty array drawn from [\"csv\", \"json\"]");
        cfg.format_csv = false;
        cfg.format_json = false;
        for (const auto& f : doc["formats"]) {
            const std::string s = get_str(f, "formats");
            if (s == "csv") cfg.format_csv = true;
            else if (s == "json") cfg.format_json = true;
            else fail("formats", "unknown format '" + s + "'");
        }
    }

    // deep-validate command parameters now so errors surface before any work
    if (doc.contains("generator")) parse_generator(doc["generator"], "generator");
    if (doc.contains("n")) positive_int(doc["n"], "n");
    if (doc.contains("trials")) positive_int(doc["trials"], "trials");
    if (doc.contains("p")) {
        const double p = get_num(doc["p"], "p");
        if (!(p > 2.0)) fail("p", "rough-norm commands require p > 2");
    }
    if (doc.contains("n_list")) {
        const json& nl = doc["n_list"];
        if (!nl.is_array() || nl.size() < 2) fail("n_list", "expected an increasing array of sizes");
        for (size_t i = 0; i < nl.size(); ++i) {
            positive_int(nl[i], "n_list");
            if (i > 0 && nl[i].get<int64_t>() <= nl[i - 1].get<int64_t>())
                fail("n_list", "sizes must be strictly increasing");
        }
    }
    if (doc.contains("export_trajectory")) get_bool(doc["export_trajectory"], "export_trajectory");
    if (doc.contains("curve_points")) positive_int(doc["curve_points"], "curve_points");
    if (doc.contains("targets")) {
        check_keys(doc["targets"], "targets", {}, {"sigma", "gamma"});
        if (doc["targets"].contains("sigma")) parse_mat(doc["targets"]["sigma"], "targets.sigma");
        if (doc["targets"].contains("gamma")) parse_mat(doc["targets"]["gamma"], "targets.gamma");
    }
    if (command == "mc-marginal" && !doc["targets"].contains("sigma"))
        fail("targets", "missing required key 'sigma'");
    if (command == "mc-area" && !doc["targets"].contains("gamma"))
        fail("targets", "missing required key 'gamma'");
    if (command == "donsker" &&
        get_str(doc["generator"]["type"], "generator.type") != "delayed_rw")
        fail("generator.type", "donsker requires a delayed_rw generator");
    if (command == "renewal") {
        const json& r = doc["renewal"];
        check_keys(r, "renewal", {"pmf", "b", "N"}, {"lattice_mode"});
        if (!r["pmf"].is_array() || r["pmf"].size() < 2) fail("renewal.pmf", "expected the pmf as an array");
        for (const auto& v : r["pmf"]) get_num(v, "renewal.pmf");
        const json& b = r["b"];
        check_keys(b, "renewal.b", {"kind"}, {"values"});
        const std::string kind = get_str(b["kind"], "renewal.b.kind");
        if (kind == "sequence") {
            if (!b.contains("values") || !b["values"].is_array())
                fail("renewal.b", "kind 'sequence' requires 'values'");
            for (const auto& v : b["values"]) get_num(v, "renewal.b.values");
        } else if (kind != "delta0") {
            fail("renewal.b.kind", "expected 'delta0' or 'sequence'");
        }
        positive_int(r["N"], "renewal.N");
        if (r.contains("lattice_mode")) get_bool(r["lattice_mode"], "renewal.lattice_mode");
    }
    if (command == "lemma-a2") {
        const json& l = doc["lemma_a2"];
        check_keys(l, "lemma_a2", {"block_law", "r", "ell", "N", "mc"});
        check_keys(l["block_law"], "lemma_a2.block_law", {"atoms"});
        const json& atoms = l["block_law"]["atoms"];
        if (!atoms.is_array() || atoms.empty()) fail("lemma_a2.block_law.atoms", "expected atoms");
        for (size_t i = 0; i < atoms.size(); ++i) {
            const std::string apath = "lemma_a2.block_law.atoms[" + std::to_string(i) + "]";
            check_keys(atoms[i], apath, {"prob", "T", "xi"});
            get_num(atoms[i]["prob"], apath + ".prob");
            positive_int(atoms[i]["T"], apath + ".T");
            parse_vec(atoms[i]["xi"], apath + ".xi");
        }
        const int64_t r = get_int(l["r"], "lemma_a2.r");
        if (r < 0 || r > 2) fail("lemma_a2.r", "tensor order must be 0, 1 or 2");
        if (get_int(l["ell"], "lemma_a2.ell") < 0) fail("lemma_a2.ell", "must be non-negative");
        positive_int(l["N"], "lemma_a2.N");
        check_keys(l["mc"], "lemma_a2.mc", {"n", "trajectories"});
        positive_int(l["mc"]["n"], "lemma_a2.mc.n");
        positive_int(l["mc"]["trajectories"], "lemma_a2.mc.trajectories");
    }

    // normalize: embed effective defaults so reports round-trip
    doc["workers"] = cfg.workers;
    doc["output"] = cfg.output;
    json formats = json::array();
    if (cfg.format_csv) formats.push_back("csv");
    if (cfg.format_json) formats.push_back("json");
    doc["formats"] = formats;
    cfg.raw = std::move(doc);
    return cfg;
}

// ---------------------------------------------------------------------------
// command implementations

namespace {

struct RunOutput {
    std::string payload;
    std::string numeric_payload;
    std::string report_json;
    std::string report_csv;
    std::vector<std::pair<std::string, std::string>> csv_files;
    std::vector<MetricRow> rows;
    bool all_pass = true;
};

MetricRow info_row(std::string name, double estimate, double se = std::numeric_limits<double>::quiet_NaN()) {
    MetricRow row;
    row.name = std::move(name);
    row.estimate = estimate;
    row.se = se;
    row.target = std::numeric_limits<double>::quiet_NaN();
    row.z = std::numeric_limits<double>::quiet_NaN();
    return row;
}

MetricRow bound_row(std::string name, double estimate, double bound) {
    // pass when estimate <= bound; encoded with target = bound
    MetricRow row;
    row.name = std::move(name);
    row.estimate = estimate;
    row.se = std::numeric_limits<double>::quiet_NaN();
    row.target = bound;
    row.z = std::numeric_limits<double>::quiet_NaN();
    row.has_target = true;
    row.pass = estimate <= bound;
    return row;
}

json mat_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(m(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

void cmd_lift(const ExperimentConfig& cfg, ReportBuilder& rb,
              std::vector<std::pair<std::string, std::string>>& csv_files) {
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const int64_t n = cfg.raw["n"].get<int64_t>();
    const RegenTrajectory traj = gen.generate(n, derive_seed(cfg.master_seed, seed_stream::trajectory, 0));
    const ScaledRoughPath lift(traj.path, n);
    const double horizon = lift.horizon();

    Rng diag(derive_seed(cfg.master_seed, seed_stream::target, 0));
    double max_chen = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        double a = diag.next_double() * horizon;
        double b = diag.next_double() * horizon;
        double c = diag.next_double() * horizon;
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        if (a == b || b == c) continue;
        max_chen = std::max(max_chen, chen_defect(lift, a, b, c).max_abs());
    }
    double max_sym = 0.0;
    const int64_t len = traj.path.length();
    for (int rep = 0; rep < 200; ++rep) {
        int64_t m = static_cast<int64_t>(diag.next_below(static_cast<uint64_t>(len + 1)));
        int64_t nn = static_cast<int64_t>(diag.next_below(static_cast<uint64_t>(len + 1)));
        if (m > nn) std::swap(m, nn);
        const Vec inc = traj.path.increment(m, nn);
        const Mat residual = sym_part(lift.istr(m, nn)) - 0.5 * outer(inc, inc);
        max_sym = std::max(max_sym, residual.max_abs());
    }

    std::vector<MetricRow> rows;
    rows.push_back(bound_row("chen_defect_max", max_chen, 1e-10));
    rows.push_back(bound_row("sym_identity_residual_max", max_sym, 1e-12));
    const RoughIncrement full = lift.eval(0.0, horizon);
    rows.push_back(info_row("endpoint_level1_norm", full.level1.norm()));
    rows.push_back(info_row("endpoint_level2_frobenius", full.level2.frobenius()));
    rb.add_section("lift", rows);
    rb.add_extra("lift", json{{"n", n}, {"horizon", horizon}, {"grid_points", lift.grid_count()}});

    if (cfg.raw.contains("export_trajectory") && cfg.raw["export_trajectory"].get<bool>())
        csv_files.emplace_back("trajectory.csv", trajectory_csv(traj));
}

void cmd_pvar(const ExperimentConfig& cfg, ReportBuilder& rb) {
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const int64_t n = cfg.raw["n"].get<int64_t>();
    const double p = cfg.raw["p"].get<double>();
    const RegenTrajectory traj = gen.generate(n, derive_seed(cfg.master_seed, seed_stream::trajectory, 0));
    const ScaledRoughPath lift(traj.path, n);

    const PvarBounds bounds = rough_norm_bounded(lift, p);
    std::vector<MetricRow> rows;
    if (bounds.mode == PvarMode::dp_exact) {
        const double inv_root = 1.0 / std::sqrt(static_cast<double>(n));
        std::vector<Vec> samples;
        samples.reserve(static_cast<size_t>(lift.grid_count()));
        for (int64_t k = 0; k < lift.grid_count(); ++k)
            samples.push_back(inv_root * traj.path.value(k));
        rows.push_back(info_row("pvar_level1", pvar_level1(samples, p)));
        rows.push_back(info_row("pvar_level2", pvar_level2(lift, 0.5 * p)));
    }
    rows.push_back(info_row("rough_norm_lower", bounds.lower));
    rows.push_back(info_row("rough_norm_upper", bounds.upper));
    rows.push_back(info_row("mode_blocked_sandwich", bounds.mode == PvarMode::blocked_sandwich ? 1.0 : 0.0));
    rb.add_section("pvar", rows);
}

void cmd_simulate(const ExperimentConfig& cfg, ReportBuilder& rb,
                  std::vector<std::pair<std::string, std::string>>& csv_files) {
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const int64_t n = cfg.raw["n"].get<int64_t>();
    const RegenTrajectory traj = gen.generate(n, derive_seed(cfg.master_seed, seed_stream::trajectory, 0));
    const std::vector<BlockStats> blocks = block_stats(traj);
    const AssumptionReport ar = assumption_report(blocks);

    std::vector<MetricRow> rows;
    for (const AssumptionRow& r : ar.rows) {
        std::string name = (r.exponent == 0 ? "ET" : "xi2T_" + std::to_string(r.coordinate + 1));
        name += r.delay_block ? "_delay" : "_generic";
        rows.push_back(info_row(name, r.estimate, r.se));
        if (r.zero_flag) rows.push_back(info_row(name + "_zero_flag", 1.0));
    }
    // observed gcd of the generic block lengths (the interarrival lattice)
    int64_t gcd = 0;
    for (size_t k = 1; k < blocks.size(); ++k) gcd = std::gcd(gcd, blocks[k].length);
    rows.push_back(info_row("block_length_gcd", static_cast<double>(gcd)));
    rb.add_section("assumption", rows);
    rb.add_extra("simulate", json{{"block_count", traj.complete_blocks()},
                                  {"horizon", n},
                                  {"degenerate", ar.any_zero}});

    if (cfg.raw.contains("export_trajectory") && cfg.raw["export_trajectory"].get<bool>())
        csv_files.emplace_back("trajectory.csv", trajectory_csv(traj));
}

void cmd_estimate(const ExperimentConfig& cfg, ReportBuilder& rb,
                  std::vector<std::pair<std::string, std::string>>& csv_files) {
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const int64_t n = cfg.raw["n"].get<int64_t>();
    const RegenTrajectory traj = gen.generate(n, derive_seed(cfg.master_seed, seed_stream::trajectory, 0));
    const std::vector<BlockStats> blocks = block_stats(traj);
    const auto generic = generic_blocks(blocks);
    const LimitEstimates est = estimate_limits(generic);
    const int d = gen.dim();

    const bool has_sigma_target = cfg.raw.contains("targets") && cfg.raw["targets"].contains("sigma");
    const bool has_gamma_target = cfg.raw.contains("targets") && cfg.raw["targets"].contains("gamma");
    const Mat sigma_target = has_sigma_target ? parse_mat(cfg.raw["targets"]["sigma"], "targets.sigma") : Mat(d);
    const Mat gamma_target = has_gamma_target ? parse_mat(cfg.raw["targets"]["gamma"], "targets.gamma") : Mat(d);

    auto entry_rows = [&](const char* prefix, const MatrixEstimate& me, bool upper_only,
                          bool has_target, const Mat& target) {
        std::vector<MetricRow> rows;
        for (int i = 0; i < d; ++i) {
            for (int j = upper_only ? i + 1 : i; j < d; ++j) {
                MetricRow row;
                row.name = std::string(prefix) + "_" + std::to_string(i + 1) + std::to_string(j + 1);
                row.estimate = me.value(i, j);
                row.se = me.se(i, j);
                if (has_target) {
                    row.has_target = true;
                    row.target = target(i, j);
                    if (row.se > 0.0) {
                        row.z = (row.estimate - row.target) / row.se;
                        row.pass = std::abs(row.z) <= 3.0;
                    } else {
                        row.z = row.estimate == row.target ? 0.0 : std::numeric_limits<double>::infinity();
                        row.pass = row.estimate == row.target;
                    }
                } else {
                    row.z = std::numeric_limits<double>::quiet_NaN();
                    row.target = std::numeric_limits<double>::quiet_NaN();
                }
                rows.push_back(std::move(row));
            }
        }
        return rows;
    };

    rb.add_section("sigma", entry_rows("sigma", est.sigma, false, has_sigma_target, sigma_target));
    rb.add_section("gamma", entry_rows("gamma", est.gamma, true, has_gamma_target, gamma_target));

    std::vector<MetricRow> extra_rows;
    extra_rows.push_back(info_row("beta", est.beta.value, est.beta.se));
    const std::vector<double> eig = sym_eigenvalues(est.sigma.value);
    MetricRow psd;
    psd.name = "sigma_min_eigenvalue";
    psd.estimate = eig.front();
    psd.se = std::numeric_limits<double>::quiet_NaN();
    psd.target = -1e-10;
    psd.z = std::numeric_limits<double>::quiet_NaN();
    psd.has_target = true;
    psd.pass = eig.front() >= -1e-10;
    extra_rows.push_back(psd);
    double asym = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) asym = std::max(asym, std::abs(est.gamma.value(i, j) + est.gamma.value(j, i)));
    extra_rows.push_back(bound_row("gamma_antisym_residual", asym, 1e-12));
    rb.add_section("limits", extra_rows);

    json extras;
    extras["block_count"] = est.block_count;
    extras["sigma"] = json{{"value", mat_json(est.sigma.value)}, {"se", mat_json(est.sigma.se)}};
    extras["gamma"] = json{{"value", mat_json(est.gamma.value)}, {"se", mat_json(est.gamma.se)}};
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            extras["gamma"]["entry_" + std::to_string(i + 1) + std::to_string(j + 1)] =
                est.gamma.value(i, j);
    extras["beta"] = json{{"value", est.beta.value}, {"se", est.beta.se}};
    rb.add_extra("estimates", extras);

    // LLN curves on a uniform grid over the horizon
    const int64_t points = cfg.raw.contains("curve_points") ? cfg.raw["curve_points"].get<int64_t>() : 101;
    std::vector<double> tgrid;
    tgrid.reserve(static_cast<size_t>(points));
    const double horizon = static_cast<double>(traj.path.length()) / static_cast<double>(n);
    for (int64_t i = 0; i < points; ++i)
        tgrid.push_back(horizon * static_cast<double>(i) / static_cast<double>(points - 1));
    const std::vector<Mat> anomaly = anomaly_lln_curve(traj, tgrid, n);
    const std::vector<double> renewal = renewal_lln_curve(traj, tgrid, n);

    std::vector<std::string> header{"t"};
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            header.push_back("anomaly_" + std::to_string(i + 1) + std::to_string(j + 1));
    header.push_back("kappa_ratio");
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < tgrid.size(); ++k) {
        std::vector<double> row{tgrid[k]};
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) row.push_back(anomaly[k](i, j));
        row.push_back(renewal[k]);
        rows.push_back(std::move(row));
    }
    csv_files.emplace_back("curves.csv", curves_csv(header, rows));
}

void cmd_mc_marginal(const ExperimentConfig& cfg, ReportBuilder& rb) {
    rb.add_extra("acceptance_note",
                 "distributional convergence is not directly testable; checks are moment/mean "
                 "functionals with 3-SE bands plus the tightness probe; endpoint lifts carry an "
                 "accepted O(1/n) partial-block bias");
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const Mat sigma = parse_mat(cfg.raw["targets"]["sigma"], "targets.sigma");
    if (sigma.dim() != gen.dim()) fail("targets.sigma", "dimension does not match the generator");
    const McReport rep = mc_marginal_test(gen, cfg.raw["n"].get<int64_t>(), cfg.raw["trials"].get<int64_t>(),
                                          cfg.master_seed, cfg.workers, sigma);
    rb.add_section(rep.title, rep.rows);
}

void cmd_mc_area(const ExperimentConfig& cfg, ReportBuilder& rb) {
    rb.add_extra("acceptance_note",
                 "distributional convergence is not directly testable; checks are moment/mean "
                 "functionals with 3-SE bands plus the tightness probe; endpoint lifts carry an "
                 "accepted O(1/n) partial-block bias");
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const Mat gamma = parse_mat(cfg.raw["targets"]["gamma"], "targets.gamma");
    if (gamma.dim() != gen.dim()) fail("targets.gamma", "dimension does not match the generator");
    const McReport rep = mc_area_test(gen, cfg.raw["n"].get<int64_t>(), cfg.raw["trials"].get<int64_t>(),
                                      cfg.master_seed, cfg.workers, gamma);
    rb.add_section(rep.title, rep.rows);
}

void cmd_tightness(const ExperimentConfig& cfg, ReportBuilder& rb,
                   std::vector<std::pair<std::string, std::string>>& csv_files) {
    rb.add_extra("acceptance_note",
                 "distributional convergence is not directly testable; checks are moment/mean "
                 "functionals with 3-SE bands plus the tightness probe; endpoint lifts carry an "
                 "accepted O(1/n) partial-block bias");
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    std::vector<int64_t> ns;
    for (const auto& v : cfg.raw["n_list"]) ns.push_back(v.get<int64_t>());
    const TightnessReport rep =
        pvar_tightness_probe(gen, ns, cfg.raw["p"].get<double>(), cfg.raw["trials"].get<int64_t>(),
                             cfg.master_seed, cfg.workers);

    std::vector<MetricRow> rows;
    for (const TightnessRow& r : rep.rows) {
        rows.push_back(info_row("median_n" + std::to_string(r.n), r.median));
        rows.push_back(info_row("q95_n" + std::to_string(r.n), r.q95));
    }
    MetricRow verdict;
    verdict.name = "median_ratio";
    verdict.estimate = rep.median_ratio;
    verdict.se = std::numeric_limits<double>::quiet_NaN();
    verdict.target = 1.0 + rep.spread_tol;
    verdict.z = std::numeric_limits<double>::quiet_NaN();
    verdict.has_target = true;
    verdict.pass = rep.bounded;
    rows.push_back(verdict);
    rb.add_section("tightness", rows);

    std::vector<std::vector<double>> crows;
    for (const TightnessRow& r : rep.rows)
        crows.push_back({static_cast<double>(r.n), r.median, r.q95, r.upper_median,
                         r.mode == PvarMode::blocked_sandwich ? 1.0 : 0.0});
    csv_files.emplace_back("curves.csv",
                           curves_csv({"n", "median", "q95", "upper_median", "blocked_sandwich"}, crows));
}

void cmd_donsker(const ExperimentConfig& cfg, ReportBuilder& rb) {
    rb.add_extra("acceptance_note",
                 "distributional convergence is not directly testable; checks are moment/mean "
                 "functionals with 3-SE bands plus the tightness probe; endpoint lifts carry an "
                 "accepted O(1/n) partial-block bias");
    const GeneratorConfig gen = parse_generator(cfg.raw["generator"], "generator");
    const McReport rep = donsker_check(gen.step_law, cfg.raw["n"].get<int64_t>(),
                                       cfg.raw["trials"].get<int64_t>(), cfg.master_seed, cfg.workers);
    rb.add_section(rep.title, rep.rows);
}

void cmd_renewal(const ExperimentConfig& cfg, ReportBuilder& rb,
                 std::vector<std::pair<std::string, std::string>>& csv_files) {
    const json& r = cfg.raw["renewal"];
    std::vector<double> pmf;
    for (const auto& v : r["pmf"]) pmf.push_back(v.get<double>());
    const RenewalModel model = RenewalModel::from_pmf(pmf);
    std::vector<double> b;
    if (r["b"]["kind"].get<std::string>() == "delta0") b = {1.0};
    else
        for (const auto& v : r["b"]["values"]) b.push_back(v.get<double>());
    const int64_t N = r["N"].get<int64_t>();
    const bool lattice_mode = r.contains("lattice_mode") && r["lattice_mode"].get<bool>();

    const std::vector<double> a = solve_renewal(model, b, N);
    const KeyRenewalResult kr = key_renewal_limit(model, b, N, lattice_mode);

    std::vector<MetricRow> rows;
    rows.push_back(info_row("lattice", static_cast<double>(model.lattice)));
    rows.push_back(info_row("mean_interarrival", model.mean));
    rows.push_back(info_row("limit", kr.limit));
    rows.push_back(info_row("tail_gap", kr.tail_gap));
    rb.add_section("renewal", rows);
    rb.add_extra("renewal", json{{"limit", kr.limit}, {"tail_gap", kr.tail_gap}, {"N", N}});

    std::vector<std::vector<double>> crows;
    for (int64_t ncur = 0; ncur <= N; ++ncur)
        crows.push_back({static_cast<double>(ncur), a[static_cast<size_t>(ncur)], kr.limit,
                         std::abs(a[static_cast<size_t>(ncur)] - kr.limit)});
    csv_files.emplace_back("curves.csv", curves_csv({"n", "a_n", "limit", "gap"}, crows));
}

void cmd_lemma_a2(const ExperimentConfig& cfg, ReportBuilder& rb,
                  std::vector<std::pair<std::string, std::string>>& csv_files) {
    const json& l = cfg.raw["lemma_a2"];
    BlockLaw law;
    for (const auto& atom : l["block_law"]["atoms"]) {
        BlockLawAtom a;
        a.prob = atom["prob"].get<double>();
        a.length = atom["T"].get<int64_t>();
        a.xi = parse_vec(atom["xi"], "lemma_a2.block_law.atoms.xi");
        law.atoms.push_back(std::move(a));
    }
    law.validate();
    const RenewalModel model = law.interarrival();
    if (model.lattice > 1)
        fail("lemma_a2.block_law", "interarrival law is d-arithmetic with d > 1; limits need d = 1");
    const int r = static_cast<int>(l["r"].get<int64_t>());
    const int64_t ell = l["ell"].get<int64_t>();
    const int64_t N = l["N"].get<int64_t>();
    const int d = law.dim();

    const TensorValue limit = size_biased_moment_limit(law, r, ell);
    const McMoment mc = mc_size_biased_moment(law, r, ell, l["mc"]["n"].get<int64_t>(),
                                              l["mc"]["trajectories"].get<int64_t>(), cfg.master_seed,
                                              cfg.workers);
    double mean_t = 0.0;
    for (const BlockLawAtom& a : law.atoms) mean_t += a.prob * static_cast<double>(a.length);

    std::vector<MetricRow> rows;
    std::vector<std::vector<double>> crows;
    auto for_entries = [&](auto&& fn) {
        if (r == 0) fn(0, 0, std::string(""));
        else if (r == 1)
            for (int i = 0; i < d; ++i) fn(i, 0, "_" + std::to_string(i + 1));
        else
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) fn(i, j, "_" + std::to_string(i + 1) + std::to_string(j + 1));
    };
    for_entries([&](int i, int j, const std::string& suffix) {
        const std::vector<double> b = size_biased_forcing(law, r, ell, i, j);
        const std::vector<double> a = solve_renewal(model, b, N);
        const double target = limit.entry(i, j);
        rows.push_back(info_row("limit" + suffix, target));
        rows.push_back(info_row("recursion_gap" + suffix, std::abs(a.back() - target)));

        MetricRow mc_row;
        mc_row.name = "mc" + suffix;
        mc_row.estimate = mc.estimate.entry(i, j);
        mc_row.se = mc.se.entry(i, j);
        mc_row.target = target;
        mc_row.has_target = true;
        if (mc_row.se > 0.0) {
            mc_row.z = (mc_row.estimate - mc_row.target) / mc_row.se;
            mc_row.pass = std::abs(mc_row.z) <= 3.0;
        } else {
            mc_row.z = mc_row.estimate == mc_row.target ? 0.0 : std::numeric_limits<double>::infinity();
            mc_row.pass = mc_row.estimate == mc_row.target;
        }
        rows.push_back(mc_row);

        double bsum = 0.0;
        for (double v : b) bsum += v;
        // telescoping identity: sum_n b_n equals the (ell+1)-st joint moment
        const double target_sum = target * mean_t;
        MetricRow sum_row;
        sum_row.name = "sum_b" + suffix;
        sum_row.estimate = bsum;
        sum_row.se = std::numeric_limits<double>::quiet_NaN();
        sum_row.target = target_sum;
        sum_row.z = std::numeric_limits<double>::quiet_NaN();
        sum_row.has_target = true;
        sum_row.pass = std::abs(bsum - target_sum) <= 1e-12 * std::max(1.0, std::abs(target_sum));
        rows.push_back(sum_row);

        if (suffix.empty() || suffix == "_1" || suffix == "_11") {
            crows.clear();
            for (int64_t ncur = 0; ncur <= N; ++ncur)
                crows.push_back({static_cast<double>(ncur), a[static_cast<size_t>(ncur)], target,
                                 std::abs(a[static_cast<size_t>(ncur)] - target)});
        }
    });
    rb.add_section("lemma_a2", rows);
    csv_files.emplace_back("curves.csv", curves_csv({"n", "a_n", "limit", "gap"}, crows));
}

RunOutput execute_experiment(const ExperimentConfig& cfg) {
    ReportBuilder rb(cfg.command, cfg.raw, cfg.master_seed, cfg.workers);
    std::vector<std::pair<std::string, std::string>> csv_files;

    if (cfg.command == "lift") cmd_lift(cfg, rb, csv_files);
    else if (cfg.command == "pvar") cmd_pvar(cfg, rb);
    else if (cfg.command == "simulate") cmd_simulate(cfg, rb, csv_files);
    else if (cfg.command == "estimate") cmd_estimate(cfg, rb, csv_files);
    else if (cfg.command == "mc-marginal") cmd_mc_marginal(cfg, rb);
    else if (cfg.command == "mc-area") cmd_mc_area(cfg, rb);
    else if (cfg.command == "tightness") cmd_tightness(cfg, rb, csv_files);
    else if (cfg.command == "donsker") cmd_donsker(cfg, rb);
    else if (cfg.command == "renewal") cmd_renewal(cfg, rb, csv_files);
    else if (cfg.command == "lemma-a2") cmd_lemma_a2(cfg, rb, csv_files);
    else
        throw std::invalid_argument("unknown command: " + cfg.command);

    RunOutput out;
    out.payload = rb.payload_without_timestamp();
    out.numeric_payload = rb.numeric_payload();
    out.report_json = rb.json_with_timestamp();
    out.report_csv = rb.metrics_csv();
    out.csv_files = std::move(csv_files);
    out.rows = rb.rows();
    out.all_pass = rb.all_pass();
    return out;
}

void print_summary(const RunOutput& out, const ExperimentConfig& cfg, std::ostream& log) {
    log << "command: " << cfg.command << "  seed: " << cfg.master_seed << "  workers: " << cfg.workers
        << "\n";
    log << std::left << std::setw(28) << "metric" << std::right << std::setw(16) << "estimate"
        << std::setw(13) << "se" << std::setw(16) << "target" << std::setw(9) << "z" << "  status\n";
    for (const MetricRow& row : out.rows) {
        log << std::left << std::setw(28) << row.name << std::right << std::setw(16) << std::setprecision(8)
            << row.estimate;
        if (std::isnan(row.se)) log << std::setw(13) << "-";
        else log << std::setw(13) << std::setprecision(3) << row.se;
        if (row.has_target) {
            log << std::setw(16) << std::setprecision(8) << row.target;
            if (std::isnan(row.z)) log << std::setw(9) << "-";
            else log << std::setw(9) << std::setprecision(2) << row.z;
            log << (row.pass ? "  pass" : "  FAIL");
        } else {
            log << std::setw(16) << "-" << std::setw(9) << "-" << "  info";
        }
        log << "\n";
    }
    log << (out.all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    const RunOutput out = execute_experiment(cfg);

    const std::filesystem::path dir(cfg.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + cfg.output + "': " + ec.message());

    if (cfg.format_json) write_text_file(dir / "report.json", out.report_json);
    if (cfg.format_csv) {
        write_text_file(dir / "report.csv", out.report_csv);
        for (const auto& [name, content] : out.csv_files) write_text_file(dir / name, content);
    }
    print_summary(out, cfg, log);
    return out.all_pass ? 0 : 2;
}

std::string run_to_payload(const ExperimentConfig& cfg) { return execute_experiment(cfg).payload; }

std::string run_to_numeric_payload(const ExperimentConfig& cfg) {
    return execute_experiment(cfg).numeric_payload;
}

PayloadPair run_to_payloads(const ExperimentConfig& cfg) {
    const RunOutput out = execute_experiment(cfg);
    return PayloadPair{out.payload, out.numeric_payload};
}

int run_experiment_file(const std::string& config_path, const CliOverrides& overrides,
                        std::ostream& log) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config file: " + config_path);
    json doc = json::parse(f);

    if (overrides.seed) doc["master_seed"] = *overrides.seed;
    if (overrides.workers) doc["workers"] = *overrides.workers;
    if (overrides.output) doc["output"] = *overrides.output;
    if (overrides.formats) {
        json arr = json::array();
        std::stringstream ss(*overrides.formats);
        std::string item;
        while (std::getline(ss, item, ',')) arr.push_back(item);
        doc["formats"] = arr;
    }
    return run_experiment(ExperimentConfig::from_json(std::move(doc)), log);
}

}  // namespace roughwalk
