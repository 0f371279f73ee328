#include "ccsim/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "ccsim/branching.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/format.hpp"
#include "ccsim/kernel.hpp"
#include "ccsim/nonspatial.hpp"
#include "ccsim/simulator.hpp"
#include "ccsim/sweep.hpp"

namespace ccsim::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { Real, Integer, Count, Text, RealList };

struct OptionSpec {
    std::string key;  // config key; the flag is --key with '_' replaced by '-'
    Kind kind;
    Json fallback;    // null: unset unless given
    std::string help;
    bool required = false;
};

struct Emitted {
    Json result = Json::object();
    std::optional<std::vector<Json>> rows;
    // Preformatted CSV table; takes precedence over rows for CSV output.
    std::optional<std::string> csv_header;
    std::vector<std::string> csv_lines;
    bool csv_summary = false;  // append the result object as a trailing comment
    int exit_code = kOk;
};

struct Context {
    Json config;
    unsigned jobs;
};

using Handler = std::function<Emitted(const Context&)>;

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<OptionSpec> options;
    Handler run;
};

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

// ---------------------------------------------------------------------------
// value parsing

double parse_real(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) throw UsageError(what + ": '" + s + "' is not a number");
    return v;
}

std::int64_t parse_integer(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec == std::errc{} && res.ptr == end) return v;
    const double d = parse_real(s, what);
    if (std::floor(d) != d || std::fabs(d) > 9.0e15) throw UsageError(what + ": '" + s + "' is not an integer");
    return static_cast<std::int64_t>(d);
}

std::uint64_t parse_count(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec == std::errc{} && res.ptr == end) return v;
    const double d = parse_real(s, what);
    if (d < 0.0 || std::floor(d) != d || d > 1.8e19) {
        throw UsageError(what + ": '" + s + "' is not a nonnegative integer");
    }
    return static_cast<std::uint64_t>(d);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

Json parse_flag_value(const OptionSpec& spec, const std::string& raw) {
    const std::string what = flag_name(spec.key);
    switch (spec.kind) {
        case Kind::Real: return parse_real(raw, what);
        case Kind::Integer: return parse_integer(raw, what);
        case Kind::Count: return parse_count(raw, what);
        case Kind::Text: return raw;
        case Kind::RealList: {
            Json list = Json::array();
            for (const auto& item : split(raw, ',')) list.push_back(parse_real(item, what));
            if (list.empty()) throw UsageError(what + ": empty list");
            return list;
        }
    }
    return nullptr;
}

void check_config_value(const OptionSpec& spec, const Json& v) {
    if (v.is_null()) return;
    bool ok = false;
    switch (spec.kind) {
        case Kind::Real: ok = v.is_number(); break;
        case Kind::Integer: ok = v.is_number_integer(); break;
        case Kind::Count: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
        case Kind::Text: ok = v.is_string(); break;
        case Kind::RealList:
            ok = v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number(); });
            break;
    }
    if (!ok) throw UsageError("config key '" + spec.key + "' has the wrong type");
}

// ---------------------------------------------------------------------------
// config accessors

double real(const Json& c, const char* key) { return c.at(key).get<double>(); }
std::uint64_t count(const Json& c, const char* key) { return c.at(key).get<std::uint64_t>(); }
std::string text(const Json& c, const char* key) { return c.at(key).get<std::string>(); }

int small_int(const Json& c, const char* key) {
    const auto v = c.at(key).get<std::int64_t>();
    if (v < -1'000'000 || v > 1'000'000) throw UsageError(flag_name(key) + " is out of range");
    return static_cast<int>(v);
}

std::optional<std::string> optional_text(const Json& c, const char* key) {
    if (!c.contains(key) || c.at(key).is_null()) return std::nullopt;
    return c.at(key).get<std::string>();
}

std::vector<double> real_list(const Json& c, const char* key) { return c.at(key).get<std::vector<double>>(); }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return buf.str();
}

Topology make_topology(const Json& c) {
    const std::string graph = text(c, "graph");
    const bool has_box = c.contains("box") && !c.at("box").is_null();
    if (graph == "lattice") {
        std::optional<std::int64_t> box;
        if (has_box) box = c.at("box").get<std::int64_t>();
        return Topology::lattice(small_int(c, "d"), box);
    }
    if (has_box) throw UsageError("--box applies only to --graph lattice");
    if (graph == "tree") return Topology::tree(small_int(c, "d"));
    if (graph.rfind("file:", 0) == 0) return parse_edge_list(read_file(graph.substr(5)));
    throw UsageError("--graph must be lattice, tree or file:PATH (got '" + graph + "')");
}

RegularFamily regular_family(const Json& c) {
    const std::string graph = text(c, "graph");
    if (c.contains("box") && !c.at("box").is_null()) throw UsageError("--box is not accepted by this command");
    if (graph == "lattice") return RegularFamily::Lattice;
    if (graph == "tree") return RegularFamily::Tree;
    throw UsageError("--graph must be lattice or tree for this command (got '" + graph + "')");
}

VertexId parse_vertex(const std::string& s) {
    if (s.empty() || s == "root") return VertexId{};
    std::vector<std::int64_t> coords;
    for (const auto& part : split(s, ',')) coords.push_back(parse_integer(part, "vertex"));
    return VertexId(std::move(coords));
}

SimConfig sim_config(const Json& c) {
    SimConfig cfg;
    cfg.t_max = real(c, "t_max");
    cfg.n_max = count(c, "n_max");
    cfg.event_max = count(c, "event_max");
    cfg.seed = count(c, "seed");
    if (const auto track = optional_text(c, "track")) cfg.track_vertex = parse_vertex(*track);
    cfg.validate();
    return cfg;
}

std::optional<VertexId> start_vertex(const Json& c) {
    if (const auto s = optional_text(c, "start")) return parse_vertex(*s);
    return std::nullopt;
}

Json estimate_json(const SurvivalEstimate& e) {
    Json j;
    j["replicas"] = e.replicas;
    j["survivors"] = e.survivors;
    j["event_capped"] = e.event_capped;
    j["survived_fraction"] = e.survived_fraction;
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
    return j;
}

Json optional_int_json(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// commands

Emitted cmd_mu(const Context& ctx) {
    const Json& c = ctx.config;
    const ModelParams params(real(c, "lambda"), real(c, "p"));
    const int m = small_int(c, "m");
    if (m < 1) throw DomainError("--m must be >= 1");
    const auto pmf = offspring_pmf(m, params);
    Emitted e;
    e.result["m"] = m;
    e.result["lambda"] = params.lambda();
    e.result["p"] = params.p();
    e.result["mu"] = mu(m, params);
    e.result["alpha"] = alpha(params);
    e.result["q"] = pmf[m];
    e.result["q_lower_bound"] = params.lambda() > 0.0 && params.p() > 0.0 ? Json(q_lower_bound(m, params)) : Json(nullptr);
    e.result["mu_hypergeometric"] = params.lambda() > 0.0 ? Json(mu_hypergeometric(m, params)) : Json(nullptr);
    return e;
}

Emitted cmd_pmf(const Context& ctx) {
    const Json& c = ctx.config;
    const ModelParams params(real(c, "lambda"), real(c, "p"));
    const int m = small_int(c, "m");
    if (m < 1) throw DomainError("--m must be >= 1");
    const auto pmf = offspring_pmf(m, params);
    Emitted e;
    e.result["m"] = m;
    e.result["lambda"] = params.lambda();
    e.result["p"] = params.p();
    e.result["mean"] = pmf.mean();
    e.result["probs"] = std::vector<double>(pmf.probs().begin(), pmf.probs().end());
    std::vector<Json> rows;
    for (int w = 0; w <= m; ++w) rows.push_back(Json{{"w", w}, {"probability", pmf[w]}});
    e.rows = std::move(rows);
    return e;
}

Emitted cmd_thresholds(const Context& ctx) {
    const Json& c = ctx.config;
    const auto rec = theorem_thresholds(regular_family(c), small_int(c, "d"), real(c, "p"));
    Emitted e;
    e.result["family"] = to_string(rec.family);
    e.result["d"] = rec.d;
    e.result["p"] = rec.p;
    e.result["lambda_global"] = optional_json(rec.lambda_global);
    e.result["lambda_local"] = optional_json(rec.lambda_local);
    return e;
}

Emitted cmd_verdict(const Context& ctx) {
    const Json& c = ctx.config;
    const auto v = theorem1_verdict(regular_family(c), small_int(c, "d"), ModelParams(real(c, "lambda"), real(c, "p")));
    Emitted e;
    e.result["family"] = to_string(v.family);
    e.result["d"] = v.d;
    e.result["m"] = v.m;
    e.result["mu"] = v.mu;
    e.result["global_extinct"] = to_string(v.global);
    e.result["local_extinct"] = to_string(v.local);
    return e;
}

Emitted simulate_common(const Context& ctx, ProcessKind kind) {
    const Json& c = ctx.config;
    const Topology topo = make_topology(c);
    const ModelParams params(real(c, "lambda"), real(c, "p"));
    const SimConfig cfg = sim_config(c);
    const std::uint64_t replicas = count(c, "replicas");
    const std::vector<VertexId> init{start_vertex(c).value_or(topo.default_start())};
    const auto results = run_replica_results(topo, params, init, cfg, replicas, ctx.jobs, kind);

    Emitted e;
    std::vector<Json> rows;
    rows.reserve(results.size());
    std::map<std::string, std::uint64_t> by_status;
    for (std::size_t r = 0; r < results.size(); ++r) {
        const SimResult& res = results[r];
        ++by_status[to_string(res.status)];
        Json row;
        row["replica"] = r;
        row["seed"] = cfg.seed;
        row["status"] = to_string(res.status);
        row["extinction_time"] = optional_json(res.extinction_time);
        row["collapses"] = res.collapses;
        row["max_colonies"] = res.max_colonies;
        row["origin_colonizations"] = res.origin_colonizations;
        row["rightmost_site"] = optional_int_json(res.rightmost_site);
        rows.push_back(std::move(row));
    }
    const SurvivalEstimate est = estimate_survival(results);
    e.result["graph"] = topo.describe();
    e.result["survival"] = estimate_json(est);
    Json statuses = Json::object();
    for (const auto& [name, n] : by_status) statuses[name] = n;
    e.result["status_counts"] = statuses;

    if (kind == ProcessKind::Xi) {
        std::vector<std::uint64_t> counts;
        for (const SimResult& res : results) {
            if (counts.size() < res.offspring_counts.size()) counts.resize(res.offspring_counts.size(), 0);
            for (std::size_t w = 0; w < res.offspring_counts.size(); ++w) counts[w] += res.offspring_counts[w];
        }
        std::uint64_t total = 0;
        for (auto n : counts) total += n;
        e.result["offspring_counts"] = counts;
        const bool regular = topo.family() == GraphFamily::Tree || (topo.family() == GraphFamily::Lattice && !topo.box_extent());
        if (regular && total > 0) {
            const int m = topo.degree(init.front());
            const auto exact = offspring_pmf(m, params);
            double tv = 0.0;
            for (int w = 0; w <= m; ++w) {
                const double emp = static_cast<std::size_t>(w) < counts.size()
                                       ? static_cast<double>(counts[static_cast<std::size_t>(w)]) / static_cast<double>(total)
                                       : 0.0;
                tv += std::fabs(emp - exact[w]);
            }
            e.result["offspring_tv_distance"] = 0.5 * tv;
        }
    }
    e.rows = std::move(rows);
    e.csv_summary = true;
    if (est.event_capped > 0) e.exit_code = kSimulationCap;
    return e;
}

Emitted cmd_simulate(const Context& ctx) { return simulate_common(ctx, ProcessKind::CC); }
Emitted cmd_xi(const Context& ctx) { return simulate_common(ctx, ProcessKind::Xi); }

Emitted cmd_speed(const Context& ctx) {
    const Json& c = ctx.config;
    const ModelParams params(real(c, "lambda"), real(c, "p"));
    const auto s = edge_speed_experiment(params, real(c, "t_max"), count(c, "replicas"), count(c, "seed"), ctx.jobs);
    Emitted e;
    e.result["mean"] = s.mean;
    e.result["std_error"] = s.std_error;
    e.result["survivors"] = s.survivors;
    e.result["replicas"] = s.replicas;
    return e;
}

Emitted cmd_gw(const Context& ctx) {
    const Json& c = ctx.config;
    const ModelParams params(real(c, "lambda"), real(c, "p"));
    const int m = small_int(c, "m");
    if (m < 1) throw DomainError("--m must be >= 1");
    const GWModel model{offspring_pmf(m, params)};
    const auto sim = gw_simulate(model, count(c, "generations"), count(c, "replicas"), count(c, "seed"), ctx.jobs);
    Emitted e;
    e.result["m"] = m;
    e.result["lambda"] = params.lambda();
    e.result["p"] = params.p();
    e.result["mean"] = model.offspring.mean();
    e.result["extinction_prob"] = gw_extinction_prob(model);
    e.result["extinction_frequency"] = sim.extinction_frequency;
    e.result["extinct"] = sim.extinct;
    e.result["hit_cap"] = sim.hit_cap;
    e.result["replicas"] = sim.replicas;
    return e;
}

Emitted cmd_nonspatial(const Context& ctx) {
    const Json& c = ctx.config;
    const ColonyModel model = parse_colony_model(text(c, "model"));
    const CatastropheParams params{real(c, "lambda"), real(c, "mu"), real(c, "a"), real(c, "p")};
    params.validate();
    const SimConfig cfg = sim_config(c);
    NonspatialOptions opt;
    opt.leap_threshold = count(c, "leap_threshold");
    opt.certify_eps = real(c, "certify_eps");
    if (!(opt.certify_eps >= 0.0 && opt.certify_eps < 1.0)) throw DomainError("--certify-eps must lie in [0, 1)");
    const auto results = run_nonspatial_replica_results(model, params, cfg, count(c, "replicas"), ctx.jobs, opt);
    const SurvivalEstimate est = estimate_survival(results);

    Emitted e;
    e.result["model"] = to_string(model);
    e.result["lambda"] = params.lambda;
    e.result["mu"] = params.mu_death;
    e.result["a"] = params.a;
    e.result["p"] = params.p;
    e.result["replicas"] = est.replicas;
    e.result["survived_fraction"] = est.survived_fraction;
    e.result["ci_low"] = est.ci_low;
    e.result["ci_high"] = est.ci_high;
    e.result["p1"] = optional_json(critical_p(ColonyModel::Single, params));
    e.result["p2"] = optional_json(critical_p(ColonyModel::Multi, params));
    e.result["survival_condition"] = survival_condition(model, params);
    e.result["event_capped"] = est.event_capped;
    std::uint64_t certified = 0;
    for (const auto& r : results) certified += r.status == SimStatus::SurvivalCertified;
    e.result["certified"] = certified;
    e.csv_header = nonspatial_csv_header();
    e.csv_lines = {nonspatial_csv_row(model, params, est)};
    if (est.event_capped > 0) e.exit_code = kSimulationCap;
    return e;
}

SweepSpec sweep_spec(const Json& c, unsigned jobs) {
    SweepSpec spec;
    spec.topology = make_topology(c);
    spec.replicas = count(c, "replicas");
    spec.sim = sim_config(c);
    spec.start = start_vertex(c);
    spec.jobs = jobs;
    return spec;
}

Emitted cmd_sweep(const Context& ctx) {
    const Json& c = ctx.config;
    SweepSpec spec = sweep_spec(c, ctx.jobs);
    spec.lambdas = real_list(c, "lambdas");
    spec.ps = real_list(c, "ps");
    const auto rows = survival_curve(spec);

    Emitted e;
    e.csv_header = curve_csv_header();
    std::vector<Json> json_rows;
    std::uint64_t capped = 0;
    for (const auto& row : rows) {
        e.csv_lines.push_back(curve_csv_row(spec, row));
        Json j;
        j["lambda"] = row.lambda;
        j["p"] = row.p;
        j["survival"] = estimate_json(row.estimate);
        json_rows.push_back(std::move(j));
        capped += row.estimate.event_capped;
    }
    e.result["graph"] = spec.topology.describe();
    e.rows = std::move(json_rows);
    if (capped > 0) e.exit_code = kSimulationCap;
    return e;
}

Emitted cmd_bisect(const Context& ctx) {
    const Json& c = ctx.config;
    const SweepSpec spec = sweep_spec(c, ctx.jobs);
    const auto b =
        estimate_lambda_c(spec, real(c, "p"), real(c, "lo"), real(c, "hi"), real(c, "target"), real(c, "width_tol"));
    Emitted e;
    e.result["graph"] = spec.topology.describe();
    e.result["p"] = real(c, "p");
    e.result["target"] = real(c, "target");
    e.result["lambda_lo"] = b.lo;
    e.result["lambda_hi"] = b.hi;
    e.result["survival_lo"] = b.survival_lo;
    e.result["survival_hi"] = b.survival_hi;
    e.result["evaluations"] = b.evaluations;
    e.result["mu_at_lo"] = optional_json(b.mu_at_lo);
    e.result["mu_at_lo_at_most_one"] = b.mu_at_lo ? Json(*b.mu_at_lo <= 1.0) : Json(nullptr);
    return e;
}

// ---------------------------------------------------------------------------
// command table

std::vector<CommandSpec> command_table() {
    const OptionSpec lambda{"lambda", Kind::Real, nullptr, "birth rate per individual", true};
    const OptionSpec p{"p", Kind::Real, nullptr, "survival probability of each individual at collapse", true};
    const OptionSpec m{"m", Kind::Integer, nullptr, "number of neighbours", true};
    const OptionSpec seed{"seed", Kind::Count, 24301, "base seed"};
    const OptionSpec replicas{"replicas", Kind::Count, 100, "number of replicas"};
    const OptionSpec graph{"graph", Kind::Text, "lattice", "lattice, tree or file:PATH (edge list)"};
    const OptionSpec d{"d", Kind::Integer, 1, "lattice dimension or tree branching number"};
    const OptionSpec box{"box", Kind::Integer, nullptr, "restrict Z^d to the box [0,n)^d"};
    const OptionSpec t_max{"t_max", Kind::Real, 100.0, "time horizon"};
    const OptionSpec n_max{"n_max", Kind::Count, 1'000'000, "colony (or population) cap counted as survival"};
    const OptionSpec event_max{"event_max", Kind::Count, 100'000'000, "hard cap on events per replica"};
    const OptionSpec start{"start", Kind::Text, nullptr, "initial vertex, e.g. 0,0 or root"};
    const OptionSpec track{"track", Kind::Text, nullptr, "vertex whose colonizations are counted"};
    const auto fmt = [](const char* def) { return OptionSpec{"format", Kind::Text, def, "csv or json"}; };
    const std::vector<OptionSpec> sim{graph, d, box, replicas, t_max, n_max, event_max, seed, start};

    const auto concat = [](std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    return {
        {"mu", "mean offspring, alpha and P[W=m]", {m, lambda, p, fmt("json")}, cmd_mu},
        {"pmf", "offspring distribution of one collapse", {m, lambda, p, fmt("json")}, cmd_pmf},
        {"thresholds",
         "birth rates where mu reaches the extinction bounds",
         {graph, d, box, p, fmt("json")},
         cmd_thresholds},
        {"verdict", "analytic extinction flags on Z^d or T^d", {graph, d, box, lambda, p, fmt("json")},
         cmd_verdict},
        {"simulate", "replicas of the colonization-and-collapse process",
         concat({lambda, p, track, fmt("csv")}, sim), cmd_simulate},
        {"xi", "replicas of the auxiliary process", concat({lambda, p, track, fmt("csv")}, sim), cmd_xi},
        {"speed",
         "edge speed on Z^1 from the half-full interval",
         {lambda, p, OptionSpec{"t_max", Kind::Real, 200.0, "time horizon"}, replicas, seed, fmt("json")},
         cmd_speed},
        {"gw",
         "Galton-Watson extinction: fixed point and simulation",
         {m, lambda, p, OptionSpec{"generations", Kind::Count, 1000, "generation cap"},
          OptionSpec{"replicas", Kind::Count, 10000, "number of replicas"}, seed, fmt("json")},
         cmd_gw},
        {"nonspatial",
         "birth-death populations with binomial catastrophes",
         {OptionSpec{"model", Kind::Text, "single", "single or multi"}, lambda,
          OptionSpec{"mu", Kind::Real, nullptr, "death rate per individual", true},
          OptionSpec{"a", Kind::Real, nullptr, "catastrophe (collapse) rate", true}, p,
          OptionSpec{"replicas", Kind::Count, 1000, "number of replicas"},
          OptionSpec{"t_max", Kind::Real, 1000.0, "time horizon"},
          OptionSpec{"n_max", Kind::Count, 1'000'000, "population cap counted as survival"}, event_max, seed,
          OptionSpec{"leap_threshold", Kind::Count, 1024, "single model: population above which catastrophes are jumped to"},
          OptionSpec{"certify_eps", Kind::Real, 1e-12, "multi model: extinction probability bound that ends a run (0 disables)"},
          fmt("csv")},
         cmd_nonspatial},
        {"sweep", "survival fractions over a (lambda, p) grid",
         concat({OptionSpec{"lambdas", Kind::RealList, nullptr, "comma-separated birth rates", true},
                 OptionSpec{"ps", Kind::RealList, nullptr, "comma-separated survival probabilities", true}, fmt("csv")},
                sim),
         cmd_sweep},
        {"bisect", "bracket the birth rate where survival crosses a target",
         concat({p, OptionSpec{"lo", Kind::Real, nullptr, "lower bracket end", true},
                 OptionSpec{"hi", Kind::Real, nullptr, "upper bracket end", true},
                 OptionSpec{"target", Kind::Real, 0.5, "survival fraction to cross"},
                 OptionSpec{"width_tol", Kind::Real, 0.5, "stop once the bracket is this narrow"}, fmt("json")},
                sim),
         cmd_bisect},
    };
}

// ---------------------------------------------------------------------------
// rendering

std::string csv_cell(const Json& v) {
    if (v.is_null()) return "NA";
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

bool scalar(const Json& v) { return !v.is_object() && !v.is_array(); }

std::string render_csv(const Emitted& e, const Json& config) {
    std::string out = "# " + config.dump() + "\n";
    const auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
        out += s + "\n";
    };
    if (e.csv_header) {
        out += *e.csv_header + "\n";
        for (const auto& l : e.csv_lines) out += l + "\n";
    } else if (e.rows && !e.rows->empty()) {
        std::vector<std::string> header;
        for (const auto& [k, v] : e.rows->front().items()) header.push_back(k);
        line(header);
        for (const Json& row : *e.rows) {
            std::vector<std::string> cells;
            for (const auto& [k, v] : row.items()) cells.push_back(csv_cell(v));
            line(cells);
        }
    } else {
        std::vector<std::string> header, cells;
        for (const auto& [k, v] : e.result.items()) {
            if (!scalar(v)) continue;
            header.push_back(k);
            cells.push_back(csv_cell(v));
        }
        line(header);
        line(cells);
    }
    if (e.csv_summary) out += "# summary " + e.result.dump() + "\n";
    return out;
}

std::string render_json(const Emitted& e, const Json& config) {
    Json doc;
    doc["config"] = config;
    for (const auto& [k, v] : e.result.items()) doc[k] = v;
    if (e.rows) doc["rows"] = *e.rows;
    return doc.dump(2) + "\n";
}

// A config file is a JSON object, a JSON artifact written by this program
// (its "config" member is used) or a CSV artifact whose first line is
// "# {json}".
Json load_config(const std::string& path) {
    const std::string body = read_file(path);
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw UsageError("config file '" + path + "' is empty");
    std::string json_text;
    if (body[first] == '#') {
        const auto eol = body.find('\n', first);
        json_text = body.substr(first + 1, eol == std::string::npos ? std::string::npos : eol - first - 1);
    } else {
        json_text = body.substr(first);
    }
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& ex) {
        throw UsageError("config file '" + path + "' is not valid JSON");
    }
    if (doc.is_object() && doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
    if (!doc.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    return doc;
}

unsigned resolve_job_count(const std::string& flag, bool given) {
    std::string raw;
    if (given) {
        raw = flag;
    } else if (const char* env = std::getenv("CCSIM_JOBS"); env && *env) {
        raw = env;
    } else {
        return 0;
    }
    const auto n = parse_count(raw, given ? "--jobs" : "CCSIM_JOBS");
    if (n > 4096) throw UsageError("job count " + raw + " is too large");
    return static_cast<unsigned>(n);
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto commands = command_table();

    CLI::App app{"Simulation and analysis of colonization-and-collapse processes", "ccsim"};
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path, output_path, jobs_flag;
    bool entropy = false;
    app.add_option("--config", config_path, "JSON config, or a CSV/JSON artifact to replay");
    app.add_option("--output", output_path, "write the artifact here instead of standard output");
    app.add_option("--jobs", jobs_flag, "worker threads (default: CCSIM_JOBS or all cores)");
    app.add_flag("--entropy", entropy, "draw the seed from the system entropy source");

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        for (const auto& opt : cmd.options) {
            std::string help = opt.help;
            if (!opt.fallback.is_null()) help += " (default " + csv_cell(opt.fallback) + ")";
            sub->add_option(flag_name(opt.key), raw[cmd.name][opt.key], help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ccsim: error: " << one_line(e.what()) << "\n";
        return kUsage;
    }

    const CommandSpec* cmd = nullptr;
    for (const auto& c : commands) {
        if (subs[c.name]->parsed()) cmd = &c;
    }
    if (cmd == nullptr) throw UsageError("no command given");
    CLI::App* sub = subs[cmd->name];

    Json file_config = Json::object();
    if (!config_path.empty()) file_config = load_config(config_path);
    if (file_config.contains("command") && file_config.at("command") != cmd->name) {
        throw UsageError("config file is for command '" + file_config.at("command").dump() + "', not '" + cmd->name + "'");
    }

    Json config;
    config["command"] = cmd->name;
    for (const auto& opt : cmd->options) config[opt.key] = opt.fallback;
    for (const auto& [key, value] : file_config.items()) {
        if (key == "command") continue;
        const auto it = std::find_if(cmd->options.begin(), cmd->options.end(),
                                     [&](const OptionSpec& o) { return o.key == key; });
        if (it == cmd->options.end()) throw UsageError("unknown config key '" + key + "' for command " + cmd->name);
        check_config_value(*it, value);
        config[key] = value;
    }
    for (const auto& opt : cmd->options) {
        if (sub->count(flag_name(opt.key)) > 0) config[opt.key] = parse_flag_value(opt, raw[cmd->name][opt.key]);
    }
    if (entropy && config.contains("seed")) {
        std::random_device rd;
        config["seed"] = (std::uint64_t{rd()} << 32) | rd();
    }
    for (const auto& opt : cmd->options) {
        if (opt.required && config[opt.key].is_null()) throw UsageError("missing required option " + flag_name(opt.key));
    }
    const std::string format = text(config, "format");
    if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");

    const Context ctx{config, resolve_job_count(jobs_flag, app.count("--jobs") > 0)};
    const Emitted emitted = cmd->run(ctx);
    const std::string artifact = format == "csv" ? render_csv(emitted, config) : render_json(emitted, config);

    if (output_path.empty()) {
        out << artifact;
        out.flush();
    } else {
        std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot open '" + output_path + "' for writing");
        file << artifact;
        file.close();
        if (!file) throw IoError("error while writing '" + output_path + "'");
    }
    if (emitted.exit_code == kSimulationCap) {
        err << "ccsim: warning: some replicas hit the event cap; raise --event-max\n";
    }
    return emitted.exit_code;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto fail = [&](int code, const std::string& msg) {
        err << "ccsim: error: " << one_line(msg) << "\n";
        return code;
    };
    try {
        return run(args, out, err);
    } catch (const UsageError& e) {
        return fail(kUsage, e.what());
    } catch (const IoError& e) {
        return fail(kIo, e.what());
    } catch (const DomainError& e) {
        return fail(kUsage, e.what());
    } catch (const FormatError& e) {
        return fail(kUsage, e.what());
    } catch (const ValidationError& e) {
        return fail(kUsage, e.what());
    } catch (const InsufficientDataError& e) {
        return fail(kSimulationCap, e.what());
    } catch (const ConvergenceError& e) {
        return fail(kNumeric, e.what());
    } catch (const NumericInstabilityError& e) {
        return fail(kNumeric, e.what());
    } catch (const DivergenceError& e) {
        return fail(kNumeric, e.what());
    } catch (const NoSolutionError& e) {
        return fail(kNumeric, e.what());
    } catch (const BracketError& e) {
        return fail(kNumeric, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(kUsage, std::string("bad config value: ") + e.what());
    } catch (const std::exception& e) {
        return fail(kUsage, e.what());
    }
}

}  // namespace ccsim::cli
