// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "occupancy/applications.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/simulation.hpp"
#include "occupancy/twist.hpp"
#include "occupancy/verify.hpp"

namespace occupancy::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kKindNames[] = {"rate", "path", "classical", "overflow", "coupon", "simulate", "oracle", "verify"};
constexpr const char* kKindHelp[] = {
    "terminal rate J for an endpoint constraint",
    "minimizing path sampled on a grid",
    "single-level empty-urn deviation",
    "overflow / spare-capacity deviation",
    "low-occupancy (coupon) deviation",
    "simulate the urn process or estimate an exponent",
    "brute-force entropy minimizer vs. the solver",
    "run the property suite",
};

struct Field {
    const char* key;
    const char* help;
    bool flag;
};

constexpr Field kFields[] = {
    {"alpha", "initial occupancy, comma-separated levels 0..I+", false},
    {"omega", "terminal occupancy, comma-separated levels 0..I+", false},
    {"beta", "balls per urn", false},
    {"capacity", "largest explicit level I", false},
    {"eta", "overflow balls per urn", false},
    {"xi", "fraction of urns with at most I balls", false},
    {"omega0", "empty-urn fraction", false},
    {"n", "number of urns", false},
    {"seed", "random seed", false},
    {"trials", "simulation trials", false},
    {"grid", "number of output times", false},
    {"format", "json or csv", false},
    {"levels", "explicit levels in classical path output", false},
    {"truncation", "oracle support bound", false},
    {"lower_tail", "solve the small-overflow direction", true},
    {"zero_cost", "emit the zero-cost path from alpha", true},
};

std::string normalize_key(std::string k) {
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Kind parse_kind(const std::string& v) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i)
        if (v == kKindNames[i]) return static_cast<Kind>(i);
    throw ParseError("kind: unknown problem kind '" + v + "'");
}

double parse_double(const std::string& key, const std::string& token) {
    const std::string t = trim(token);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw ParseError(key + ": expected a finite number, got '" + token + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& token) {
    const std::string t = trim(token);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParseError(key + ": expected a nonnegative integer, got '" + token + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& token) {
    const std::string t = trim(token);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ParseError(key + ": expected true or false, got '" + token + "'");
}

std::vector<double> parse_vector(const std::string& key, const std::string& token) {
    std::vector<double> v;
    std::stringstream ss(token);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double x = parse_double(key, item);
        if (x < 0.0) throw ParseError(key + ": negative entry '" + trim(item) + "' in '" + token + "'");
        v.push_back(x);
    }
    if (v.size() < 2) throw ParseError(key + ": expected at least two comma-separated entries, got '" + token + "'");
    double sum = 0.0;
    for (double x : v) sum += x;
    if (std::fabs(sum - 1.0) > 1e-6) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", sum);
        throw ParseError(key + ": entries of '" + token + "' sum to " + buf + ", not 1");
    }
    return v;
}

void set_field(ProblemSpec& s, const std::string& raw_key, const std::string& value) {
    const std::string key = normalize_key(raw_key);
    if (key == "kind") s.kind = parse_kind(trim(value));
    else if (key == "format") {
        const std::string f = trim(value);
        if (f == "json") s.format = Format::Json;
        else if (f == "csv") s.format = Format::Csv;
        else throw ParseError("format: expected json or csv, got '" + value + "'");
    }
    else if (key == "alpha") s.alpha = parse_vector(key, value);
    else if (key == "omega") s.omega = parse_vector(key, value);
    else if (key == "beta") s.beta = parse_double(key, value);
    else if (key == "capacity") s.capacity = parse_unsigned(key, value);
    else if (key == "eta") s.eta = parse_double(key, value);
    else if (key == "xi") s.xi = parse_double(key, value);
    else if (key == "omega0") s.omega0 = parse_double(key, value);
    else if (key == "n") s.n = parse_unsigned(key, value);
    else if (key == "seed") s.seed = parse_unsigned(key, value);
    else if (key == "trials") s.trials = parse_unsigned(key, value);
    else if (key == "grid") s.grid = parse_unsigned(key, value);
    else if (key == "levels") s.levels = parse_unsigned(key, value);
    else if (key == "truncation") s.truncation = parse_unsigned(key, value);
    else if (key == "lower_tail") s.lower_tail = parse_bool(key, value);
    else if (key == "zero_cost") s.zero_cost = parse_bool(key, value);
    else throw ParseError("unknown field '" + raw_key + "'");
}

std::string json_scalar_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ParseError("expected a numeric array, got " + v.dump());
            if (!out.empty()) out += ',';
            out += e.dump();
        }
        return out;
    }
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw ParseError("unsupported value " + v.dump());
}

// Ordered (key, value, origin) entries from a config document.
std::vector<std::tuple<std::string, std::string, std::string>> config_entries(const std::string& text) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    if (trim(text).starts_with("{")) {
        Json doc;
        try {
            doc = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw ParseError(std::string("config: invalid JSON: ") + e.what());
        }
        const Json& obj = doc.contains("problem") && doc["problem"].is_object() ? doc["problem"] : doc;
        for (const auto& [k, v] : obj.items()) {
            if (v.is_null()) continue;
            try {
                out.emplace_back(k, json_scalar_text(v), "config field '" + k + "'");
            } catch (const ParseError& e) {
                throw ParseError("config field '" + k + "': " + e.what());
            }
        }
        return out;
    }
    std::stringstream ss(text);
    std::string line;
    for (int no = 1; std::getline(ss, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config line " + std::to_string(no) + ": expected key = value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), "config line " + std::to_string(no));
    }
    return out;
}

void apply_entries(ProblemSpec& s, const std::vector<std::tuple<std::string, std::string, std::string>>& entries) {
    for (const auto& [k, v, origin] : entries) {
        try {
            set_field(s, k, v);
        } catch (const ParseError& e) {
            throw ParseError(origin + ": " + e.what());
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ParseError(what);
}

void validate(const ProblemSpec& s) {
    const std::string kind = to_string(s.kind);
    auto need = [&](bool have, const char* field) { require(have, kind + ": missing required field '" + field + "'"); };
    auto check_capacity = [&](const std::optional<std::vector<double>>& v, const char* field) {
        if (v && s.capacity)
            require(v->size() <= *s.capacity + 2, kind + ": " + field + " has more than capacity + 2 entries");
    };
    if (s.beta) require(*s.beta >= 0.0, kind + ": beta must be nonnegative");
    switch (s.kind) {
    case Kind::Rate:
    case Kind::Path:
    case Kind::Oracle:
        need(s.beta.has_value(), "beta");
        if (s.kind == Kind::Oracle && (s.xi || s.eta)) {
            need(s.capacity.has_value(), "capacity");
            if (s.xi) need(s.alpha.has_value(), "alpha");
            break;
        }
        if (s.kind == Kind::Path && s.zero_cost) {
            need(s.alpha.has_value(), "alpha");
            check_capacity(s.alpha, "alpha");
            break;
        }
        need(s.omega.has_value(), "omega");
        if (s.capacity)
            require(s.omega->size() == *s.capacity + 2, kind + ": omega must have capacity + 2 entries");
        if (s.alpha) require(s.alpha->size() <= s.omega->size(), kind + ": alpha has more entries than omega");
        break;
    case Kind::Classical:
        need(s.omega0.has_value(), "omega0");
        need(s.beta.has_value(), "beta");
        require(*s.omega0 >= 0.0 && *s.omega0 <= 1.0, kind + ": omega0 must lie in [0, 1]");
        break;
    case Kind::Overflow:
        need(s.capacity.has_value(), "capacity");
        need(s.beta.has_value(), "beta");
        need(s.eta.has_value(), "eta");
        break;
    case Kind::Coupon:
        need(s.alpha.has_value(), "alpha");
        need(s.capacity.has_value(), "capacity");
        need(s.beta.has_value(), "beta");
        need(s.xi.has_value(), "xi");
        check_capacity(s.alpha, "alpha");
        break;
    case Kind::Simulate:
        need(s.n.has_value(), "n");
        need(s.beta.has_value(), "beta");
        require(*s.n >= 1, kind + ": n must be positive");
        require(s.trials >= 1, kind + ": trials must be positive");
        check_capacity(s.alpha, "alpha");
        break;
    case Kind::Verify:
        break;
    }
    if (s.grid) require(*s.grid >= 2, kind + ": grid needs at least 2 points");
}

}  // namespace

const char* to_string(Kind k) { return kKindNames[static_cast<int>(k)]; }
const char* to_string(Format f) { return f == Format::Json ? "json" : "csv"; }

ProblemSpec spec_from_config(const std::string& text, std::optional<Kind> kind) {
    ProblemSpec s;
    const auto entries = config_entries(text);
    const bool names_kind =
        std::any_of(entries.begin(), entries.end(), [](const auto& e) { return std::get<0>(e) == "kind"; });
    if (!names_kind && !kind) throw ParseError("config: missing field 'kind'");
    apply_entries(s, entries);
    if (kind) s.kind = *kind;
    validate(s);
    return s;
}

ProblemSpec parse_problem(const std::vector<std::string>& args) {
    CLI::App app{"Large-deviation rates for occupancy processes", "occupancy"};
    app.require_subcommand(1);
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config_path;
    std::vector<std::pair<CLI::App*, std::vector<std::pair<std::string, CLI::Option*>>>> subs;
    for (std::size_t q = 0; q < std::size(kKindNames); ++q) {
        const char* name = kKindNames[q];
        CLI::App* sub = app.add_subcommand(name, kKindHelp[q]);
        std::vector<std::pair<std::string, CLI::Option*>> opts;
        for (const Field& f : kFields) {
            std::string flag = "--" + std::string(f.key);
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (f.flag) opts.emplace_back(f.key, sub->add_flag(flag, flags[f.key], f.help));
            else opts.emplace_back(f.key, sub->add_option(flag, values[f.key], f.help));
        }
        sub->add_option("--config", config_path, "config file (JSON or key = value lines)");
        subs.emplace_back(sub, std::move(opts));
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        for (auto& [sub, opts] : subs)
            if (sub->parsed()) throw HelpRequested(sub->help());
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw ParseError(e.what());
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto& [sub, opts] = subs[i];
        if (!sub->parsed()) continue;
        const Kind kind = static_cast<Kind>(i);
        ProblemSpec s;
        if (!config_path.empty()) {
            apply_entries(s, config_entries(read_file(config_path)));
        }
        s.kind = kind;
        for (const auto& [key, opt] : opts) {
            if (opt->count() == 0) continue;
            set_field(s, key, flags.count(key) ? (flags[key] ? "true" : "false") : values[key]);
        }
        validate(s);
        return s;
    }
    throw ParseError("no subcommand given");
}

std::string spec_to_json(const ProblemSpec& s) {
    Json j;
    j["kind"] = to_string(s.kind);
    j["format"] = to_string(s.format);
    if (s.alpha) j["alpha"] = *s.alpha;
    if (s.omega) j["omega"] = *s.omega;
    if (s.beta) j["beta"] = *s.beta;
    if (s.capacity) j["capacity"] = *s.capacity;
    if (s.eta) j["eta"] = *s.eta;
    if (s.xi) j["xi"] = *s.xi;
    if (s.omega0) j["omega0"] = *s.omega0;
    if (s.n) j["n"] = *s.n;
    j["seed"] = s.seed;
    j["trials"] = s.trials;
    if (s.grid) j["grid"] = *s.grid;
    if (s.levels) j["levels"] = *s.levels;
    j["truncation"] = s.truncation;
    j["lower_tail"] = s.lower_tail;
    j["zero_cost"] = s.zero_cost;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

struct Failure {
    int code;
    std::string message;
};

constexpr double kResidualLimit = 1e-8;

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json map_json(const std::map<std::size_t, double>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = num(v);
    return j;
}

Json vec_json(std::span<const double> v) {
    Json j = Json::array();
    for (double x : v) j.push_back(num(x));
    return j;
}

void check_residual(double r, const char* what) {
    if (!(r <= kResidualLimit)) throw Failure{kSolverFailure, std::string(what) + ": residual " + std::to_string(r) + " exceeds 1e-8"};
}

SimplexVector simplex(const std::vector<double>& v, std::size_t size) {
    std::vector<double> out(v);
    out.resize(size, 0.0);
    double s = 0.0;
    for (double x : out) s += x;
    for (double& x : out) x /= s;
    return SimplexVector(std::move(out), 1e-12);
}

std::size_t capacity_of(const ProblemSpec& s) {
    if (s.capacity) return *s.capacity;
    if (s.omega) return s.omega->size() - 2;
    if (s.alpha) return s.alpha->size() - 2;
    return 0;
}

EndpointConstraint endpoint(const ProblemSpec& s) {
    const std::size_t L = s.omega->size();
    const SimplexVector a = s.alpha ? simplex(*s.alpha, L) : SimplexVector::empty_urns(L - 2);
    return EndpointConstraint(a, simplex(*s.omega, L), *s.beta);
}

void write_csv_number(std::ostream& out, double v) {
    if (std::isfinite(v)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    } else {
        out << (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
    }
}

// Scalar fields as "field,value" rows.
void write_flat_csv(const Json& j, std::ostream& out) {
    out << "field,value\n";
    for (const auto& [k, v] : j.items()) {
        if (v.is_number()) {
            out << k << ',';
            write_csv_number(out, v.get<double>());
            out << '\n';
        } else if (v.is_null()) {
            out << k << ",inf\n";
        } else if (v.is_string() || v.is_boolean()) {
            out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        }
    }
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_table_csv(const Table& t, std::ostream& out) {
    for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            write_csv_number(out, row[c]);
        }
        out << '\n';
    }
}

Json table_json(const Table& t) {
    Json j = Json::object();
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        Json col = Json::array();
        for (const auto& row : t.rows) col.push_back(num(row[c]));
        j[t.header[c]] = std::move(col);
    }
    return j;
}

std::string level_name(const char* prefix, std::size_t i, std::size_t size) {
    return std::string(prefix) + "_" + (i + 1 == size ? std::string("over") : std::to_string(i));
}

Table path_table(const PathFunction& f, double beta, std::size_t grid, std::size_t size) {
    Table t;
    t.header.push_back("x");
    for (std::size_t i = 0; i < size; ++i) t.header.push_back(level_name("gamma", i, size));
    for (std::size_t i = 0; i < size; ++i) t.header.push_back(level_name("theta", i, size));
    for (std::size_t i = 0; i + 1 < size; ++i) t.header.push_back("psi_" + std::to_string(i));
    for (std::size_t g = 0; g < grid; ++g) {
        const double x = g + 1 == grid ? beta : beta * static_cast<double>(g) / static_cast<double>(grid - 1);
        const PathPoint p = f(x);
        std::vector<double> row{x};
        row.insert(row.end(), p.gamma.begin(), p.gamma.end());
        row.insert(row.end(), p.theta.begin(), p.theta.end());
        double psi = 0.0;
        for (std::size_t i = 0; i + 1 < size; ++i) {
            psi += p.gamma[i];
            row.push_back(psi);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

struct Output {
    Json json;
    std::optional<Table> table;
};

Output run_rate(const ProblemSpec& s) {
    const EndpointConstraint c = endpoint(s);
    const FeasibilityReport rep = feasibility_check(c);
    Json j;
    j["kind"] = "rate";
    j["feasibility"] = to_string(rep.kind);
    if (rep.kind == Feasibility::Infeasible) require_feasible(c);
    if (rep.kind == Feasibility::InfiniteRate) {
        j["finite"] = false;
        j["J"] = nullptr;
        return {j, std::nullopt};
    }
    const Decomposition dec = irreducible_decompose(c);
    std::vector<double> rates;
    double residual = 0.0;
    Json pieces = Json::array();
    for (const auto& p : dec.pieces) {
        Json pj;
        pj["offset"] = p.offset;
        pj["mass"] = p.mass;
        pj["beta"] = p.beta;
        pj["closed"] = p.closed;
        if (!p.constraint) {
            rates.push_back(0.0);
            pj["J"] = 0.0;
            pieces.push_back(pj);
            continue;
        }
        const GeneralTwist tw = solve_general(*p.constraint);
        const double r = std::max(tw.residual, tw.constraint_residual());
        residual = std::max(residual, r);
        rates.push_back(tw.rate());
        pj["case"] = to_string(tw.kind);
        pj["rho"] = tw.rho;
        pj["C"] = map_json(tw.class_scales);
        pj["W"] = map_json(tw.endpoint_weights);
        pj["J"] = tw.rate();
        pj["residual"] = r;
        pieces.push_back(pj);
    }
    check_residual(residual, "rate");
    const double J = compose_piece_rates(dec.pieces, rates, c.beta);
    j["finite"] = true;
    j["J"] = num(J);
    j["residual"] = residual;
    j["pieces"] = pieces;
    return {j, std::nullopt};
}

Output run_path(const ProblemSpec& s) {
    const std::size_t grid = s.grid.value_or(101);
    PathFunction f;
    double J = 0.0;
    std::size_t size = 0;
    if (s.zero_cost) {
        const std::size_t cap = capacity_of(s);
        const SimplexVector a = simplex(*s.alpha, cap + 2);
        f = zero_cost_path(a);
        size = cap + 2;
    } else {
        const EndpointConstraint c = endpoint(s);
        const FeasibilityReport rep = feasibility_check(c);
        if (rep.kind == Feasibility::Infeasible) require_feasible(c);
        if (rep.kind == Feasibility::InfiniteRate)
            throw Failure{kInfeasible, "infinite-rate: no finite-cost path reaches omega"};
        const ExtremalPath e = build_extremal(c);
        J = closed_form_cost(e);
        f = as_path(e);
        size = c.alpha.size();
    }
    Table t = path_table(f, *s.beta, grid, size);
    Json j;
    j["kind"] = "path";
    j["J"] = num(J);
    j["grid"] = grid;
    j["path"] = table_json(t);
    return {j, std::move(t)};
}

Output run_classical(const ProblemSpec& s) {
    const ClassicalSolution sol = classical_rate(*s.omega0, *s.beta);
    Json j;
    j["kind"] = "classical";
    j["omega0"] = *s.omega0;
    j["beta"] = *s.beta;
    j["expected_empty"] = std::exp(-*s.beta);
    j["rho"] = num(sol.rho);
    j["C"] = num(sol.C);
    j["J"] = num(sol.J);
    j["finite"] = std::isfinite(sol.J);
    if (!s.grid) return {j, std::nullopt};
    const std::size_t levels = s.levels.value_or(3);
    Table t = path_table(sol.path(levels), *s.beta, *s.grid, levels + 2);
    j["path"] = table_json(t);
    return {j, std::move(t)};
}

Output run_overflow(const ProblemSpec& s) {
    OverflowOptions opt;
    opt.lower_tail = s.lower_tail;
    const OverflowSolution sol = overflow_rate(*s.capacity, *s.beta, *s.eta, opt);
    check_residual(sol.residual, "overflow");
    Json j;
    j["kind"] = "overflow";
    j["capacity"] = *s.capacity;
    j["beta"] = *s.beta;
    j["eta"] = sol.eta;
    j["zeta"] = sol.zeta;
    j["zeta_star"] = zero_cost_spare_capacity(*s.capacity, *s.beta);
    j["C"] = sol.C;
    j["rho"] = sol.rho;
    j["nu"] = sol.nu;
    j["Q"] = sol.Q();
    j["R"] = sol.R();
    j["J"] = num(sol.J);
    j["residual"] = sol.residual;
    j["omega"] = vec_json(sol.terminal_state().entries());
    return {j, std::nullopt};
}

Output run_coupon(const ProblemSpec& s) {
    const SimplexVector a = simplex(*s.alpha, *s.capacity + 2);
    const CouponSolution sol = coupon_rate(a, *s.beta, *s.xi);
    check_residual(sol.residual, "coupon");
    Json j;
    j["kind"] = "coupon";
    j["capacity"] = *s.capacity;
    j["beta"] = *s.beta;
    j["xi"] = sol.xi;
    j["xi_star"] = zero_cost_low_fraction(a, *s.beta);
    j["rho"] = sol.rho;
    j["W"] = sol.W;
    j["C"] = map_json(sol.class_scales);
    j["J"] = num(sol.J);
    j["residual"] = sol.residual;
    j["omega"] = vec_json(sol.terminal_state().entries());
    return {j, std::nullopt};
}

Output run_simulate(const ProblemSpec& s) {
    const std::size_t cap = capacity_of(s);
    SimConfig cfg{*s.n, *s.beta, s.alpha ? simplex(*s.alpha, cap + 2) : SimplexVector::empty_urns(cap), s.seed,
                  s.trials};
    Json j;
    j["kind"] = "simulate";
    j["n"] = cfg.n;
    j["balls"] = ball_count(cfg.n, cfg.beta);
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    std::vector<double> mean(cap + 2, 0.0);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto counts = simulate_counts(cfg, t);
        for (std::size_t i = 0; i < counts.size(); ++i)
            mean[i] += static_cast<double>(counts[i]) / static_cast<double>(cfg.n * cfg.trials);
    }
    j["first"] = vec_json(simulate(cfg, 0).entries());
    j["mean"] = vec_json(mean);
    if (s.omega0) {
        const double w0 = *s.omega0;
        const TerminalEvent event = [w0](std::span<const std::uint64_t> c, std::size_t n) {
            return static_cast<double>(c[0]) >= std::ceil(w0 * static_cast<double>(n) - 1e-9);
        };
        const auto e = empirical_exponent(cfg, event, {cfg.n}).front();
        Json ej;
        ej["event"] = "empty fraction >= omega0";
        ej["hits"] = e.hits;
        ej["p_hat"] = e.p_hat;
        ej["exponent"] = num(e.exponent);
        ej["exponent_lo"] = num(e.exponent_lo);
        ej["exponent_hi"] = num(e.exponent_hi);
        ej["zero_hits"] = e.zero_hits;
        j["estimate"] = ej;
    }
    if (!s.grid) return {j, std::nullopt};
    std::vector<double> xs;
    for (std::size_t g = 0; g < *s.grid; ++g)
        xs.push_back(g + 1 == *s.grid ? cfg.beta : cfg.beta * static_cast<double>(g) / static_cast<double>(*s.grid - 1));
    const auto tr = simulate_trajectory(cfg, xs, 0);
    Table t;
    t.header.push_back("x");
    for (std::size_t i = 0; i < cap + 2; ++i) t.header.push_back(level_name("gamma", i, cap + 2));
    for (std::size_t g = 0; g < xs.size(); ++g) {
        std::vector<double> row{tr.times[g]};
        for (auto c : tr.counts[g]) row.push_back(static_cast<double>(c) / static_cast<double>(cfg.n));
        t.rows.push_back(std::move(row));
    }
    j["trajectory"] = table_json(t);
    return {j, std::move(t)};
}

Output run_oracle(const ProblemSpec& s) {
    TruncatedProgram p;
    double reference = 0.0;
    if (s.xi) {
        const SimplexVector a = simplex(*s.alpha, *s.capacity + 2);
        p = coupon_program(a, *s.beta, *s.xi, s.truncation);
        reference = coupon_rate(a, *s.beta, *s.xi).J;
    } else if (s.eta) {
        const OverflowSolution sol = overflow_rate(*s.capacity, *s.beta, *s.eta, {s.lower_tail});
        p = overflow_program(*s.capacity, *s.beta, sol.zeta, s.truncation);
        reference = sol.J;
    } else {
        const EndpointConstraint c = endpoint(s);
        require_feasible(c);
        p = endpoint_program(c, s.truncation);
        reference = terminal_rate_general(c);
    }
    const OracleResult r = entropy_min_oracle(p);
    Json j;
    j["kind"] = "oracle";
    j["value"] = r.value;
    j["kkt_residual"] = r.kkt_residual;
    j["sweeps"] = r.sweeps;
    j["newton_iterations"] = r.newton_iterations;
    j["reference_J"] = num(reference);
    j["difference"] = num(r.value - reference);
    return {j, std::nullopt};
}

Output run_verify(const ProblemSpec& s, bool& all_passed) {
    Json j;
    j["kind"] = "verify";
    Json checks = Json::array();
    all_passed = true;
    for (const auto& c : run_property_suite(s.seed)) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        all_passed = all_passed && c.passed;
    }
    j["passed"] = all_passed;
    j["checks"] = checks;
    return {j, std::nullopt};
}

}  // namespace

int run(const ProblemSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        validate(spec);
        Output o;
        bool verified = true;
        switch (spec.kind) {
        case Kind::Rate: o = run_rate(spec); break;
        case Kind::Path: o = run_path(spec); break;
        case Kind::Classical: o = run_classical(spec); break;
        case Kind::Overflow: o = run_overflow(spec); break;
        case Kind::Coupon: o = run_coupon(spec); break;
        case Kind::Simulate: o = run_simulate(spec); break;
        case Kind::Oracle: o = run_oracle(spec); break;
        case Kind::Verify: o = run_verify(spec, verified); break;
        }
        if (spec.format == Format::Csv) {
            if (spec.kind == Kind::Verify) {
                out << "name,passed,detail\n";
                for (const auto& c : o.json["checks"])
                    out << c["name"].get<std::string>() << ',' << (c["passed"].get<bool>() ? "true" : "false") << ",\""
                        << c["detail"].get<std::string>() << "\"\n";
            } else if (o.table) {
                write_table_csv(*o.table, out);
            } else {
                write_flat_csv(o.json, out);
            }
        } else {
            o.json["problem"] = Json::parse(spec_to_json(spec));
            out << o.json.dump(2) << '\n';
        }
        if (!verified) {
            err << "error: property checks failed\n";
            return kSolverFailure;
        }
        return kOk;
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const InfeasibleInput& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const Error& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    }
}

}  // namespace occupancy::cli
