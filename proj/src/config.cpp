#include "pathwise/config.hpp"

#include "pathwise/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pathwise {

namespace {

struct Rule {
    std::set<std::string> required;
    std::set<std::string> optional;
    std::map<std::string, double> tolerances;
};

const std::set<std::string> kCommonRequired{"experiment", "seed", "dims"};
const std::set<std::string> kCommonOptional{"seeds", "tolerances", "output"};

const std::map<std::string, Rule>& rules() {
    static const std::map<std::string, Rule> r{
        {"gen-path", {{"path"}, {}, {}}},
        {"levy-check", {{"path"}, {}, {{"chen", 1e-10}}}},
        {"taylor-order",
         {{"path", "coefficients", "field", "lattice", "points"}, {}, {{"min_slope", 1.25}, {"quota", 0.8}}}},
        {"check-viscosity",
         {{"path", "coefficients", "field", "lattice", "points"},
          {},
          {{"alpha", 0.25}, {"threshold", 0.05}, {"f_tolerance", 1e-9}}}},
        {"convert",
         {{"path", "coefficients", "grid", "initial"},
          {},
          {{"max_discrepancy", 0.05}, {"ratio_lo", 0.35}, {"ratio_hi", 0.65}, {"control_factor", 10.0}}}},
        {"solve-fd", {{"path", "coefficients", "grid", "initial"}, {"scheme"}, {}}},
        {"solve-characteristics",
         {{"path", "coefficients", "field", "initial", "grid", "monte_carlo", "evaluate"}, {"reference_field"}, {}}},
        {"feynman-kac",
         {{"path", "coefficients", "field", "initial", "grid", "monte_carlo", "evaluate"}, {"reference_field"}, {}}},
        {"compare",
         {{"path", "coefficients", "grid", "initial", "comparison_initial"}, {}, {{"min_difference", -1e-6}}}},
        {"envelope", {{"path", "coefficients", "grid", "initial", "envelope"}, {}, {{"gap_relative", 0.1}}}},
    };
    return r;
}

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

// Map view with duplicate detection and a record of which keys were read.
class MapReader {
public:
    MapReader(const YAML::Node& node, std::string context) : context_(std::move(context)), line_(line_of(node)) {
        if (!node.IsMap()) throw ConfigError("expected a mapping", context_, line_);
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (entries_.count(key) != 0) throw ConfigError("duplicate key", qualified(key), line_of(kv.first));
            entries_.emplace(key, Entry{kv.second, line_of(kv.first)});
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const YAML::Node& node(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing required key", qualified(key), line_);
        used_.insert(key);
        return it->second.node;
    }

    int line(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? line_ : it->second.line;
    }

    std::string qualified(const std::string& key) const { return context_.empty() ? key : context_ + "." + key; }

    double number(const std::string& key) {
        const YAML::Node& n = node(key);
        try {
            if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
            return n.as<double>();
        } catch (const YAML::BadConversion&) {
            throw ConfigError("expected a number", qualified(key), line(key));
        }
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::size_t count(const std::string& key) {
        const double v = number(key);
        if (v < 0.0 || v != std::floor(v) || v > 9.0e15)
            throw ConfigError("expected a nonnegative integer", qualified(key), line(key));
        return static_cast<std::size_t>(v);
    }
    std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

    std::uint64_t u64(const std::string& key) {
        const YAML::Node& n = node(key);
        try {
            return n.as<std::uint64_t>();
        } catch (const YAML::BadConversion&) {
            throw ConfigError("expected an unsigned 64-bit integer", qualified(key), line(key));
        }
    }

    std::string text(const std::string& key) {
        const YAML::Node& n = node(key);
        if (!n.IsScalar()) throw ConfigError("expected a string", qualified(key), line(key));
        return n.as<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const YAML::Node& n = node(key);
        if (!n.IsSequence()) throw ConfigError("expected a list of numbers", qualified(key), line(key));
        std::vector<double> out;
        for (const auto& e : n) {
            try {
                out.push_back(e.as<double>());
            } catch (const YAML::BadConversion&) {
                throw ConfigError("expected a list of numbers", qualified(key), line_of(e));
            }
        }
        return out;
    }

    std::pair<double, double> range(const std::string& key) {
        const auto v = numbers(key);
        if (v.size() != 2 || !(v[0] <= v[1]))
            throw ConfigError("expected [lo, hi] with lo <= hi", qualified(key), line(key));
        return {v[0], v[1]};
    }

    MapReader child(const std::string& key) { return MapReader(node(key), qualified(key)); }

    /// Every key must have been read.
    void finish() const {
        for (const auto& [key, entry] : entries_)
            if (used_.count(key) == 0) throw ConfigError("unknown key", qualified(key), entry.line);
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto& kv : entries_) out.push_back(kv.first);
        return out;
    }

    int map_line() const { return line_; }

private:
    struct Entry {
        YAML::Node node;
        int line;
    };
    std::string context_;
    int line_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& message, const MapReader& m, const std::string& key) {
    if (!ok) throw ConfigError(message, m.qualified(key), m.line(key));
}

enum class FamilyKind { f, g, field, initial };

FamilySpec read_family(MapReader m, FamilyKind kind, std::size_t noise_dim, std::size_t space_dim) {
    FamilySpec spec;
    spec.family = m.text("family");
    for (const auto& key : m.keys())
        if (key != "family") spec.params[key] = m.number(key);
    m.finish();
    try {
        switch (kind) {
            case FamilyKind::f: make_f(spec.family, spec.params, space_dim); break;
            case FamilyKind::g: make_g(spec.family, spec.params, noise_dim, space_dim); break;
            case FamilyKind::field: make_field(spec.family, spec.params); break;
            case FamilyKind::initial: make_initial(spec.family, spec.params); break;
        }
    } catch (const Error& e) {
        throw ConfigError(e.what(), m.qualified("family"), m.line("family"));
    }
    return spec;
}

PathSpec read_path(MapReader m) {
    PathSpec p;
    p.horizon = m.number("T");
    p.steps = m.count("N");
    p.refine = m.count("refine", 1);
    require(p.horizon > 0.0, "must be positive", m, "T");
    require(p.steps >= 1, "must be at least 1", m, "N");
    require(p.refine >= 1 && (p.refine & (p.refine - 1)) == 0, "must be a power of two", m, "refine");
    m.finish();
    return p;
}

LatticeSpec read_lattice(MapReader m) {
    LatticeSpec l;
    l.finest = static_cast<int>(m.count("finest", static_cast<std::size_t>(l.finest)));
    l.coarsest = static_cast<int>(m.count("coarsest", static_cast<std::size_t>(l.coarsest)));
    require(l.finest >= l.coarsest, "finest exponent must be >= coarsest", m, "finest");
    if (m.has("pairing")) {
        const std::string p = m.text("pairing");
        require(p == "matched" || p == "product", "expected 'matched' or 'product'", m, "pairing");
        l.pairing = p == "matched" ? Pairing::matched : Pairing::product;
    }
    if (m.has("multipliers")) l.multipliers = m.numbers("multipliers");
    if (m.has("offsets")) l.offsets = m.numbers("offsets");
    if (l.pairing == Pairing::matched)
        require(!l.multipliers.empty(), "matched pairing needs multipliers", m, "multipliers");
    else
        require(!l.offsets.empty(), "product pairing needs offsets", m, "offsets");
    m.finish();
    return l;
}

GridSpec read_grid(MapReader m) {
    GridSpec g;
    g.x_lo = m.number("x_lo", g.x_lo);
    g.x_hi = m.number("x_hi", g.x_hi);
    g.nx = m.count("nx", g.nx);
    g.store_every = m.count("store_every", g.store_every);
    require(g.x_hi > g.x_lo, "x_hi must exceed x_lo", m, "x_hi");
    require(g.nx >= 5, "needs at least 5 nodes", m, "nx");
    require(g.store_every >= 1, "must be at least 1", m, "store_every");
    if (m.has("boundary")) {
        const std::string b = m.text("boundary");
        require(b == "dirichlet" || b == "clamp", "expected 'dirichlet' or 'clamp'", m, "boundary");
        g.boundary = b == "dirichlet" ? Boundary::dirichlet : Boundary::clamp;
    }
    m.finish();
    return g;
}

PointsSpec read_points(MapReader m) {
    PointsSpec p;
    if (m.has("list")) {
        require(!m.has("count") && !m.has("t") && !m.has("x"), "give either a list or count/t/x", m, "list");
        const YAML::Node& list = m.node("list");
        require(list.IsSequence() && list.size() > 0, "expected a nonempty list of [t, x] pairs", m, "list");
        for (const auto& e : list) {
            if (!e.IsSequence() || e.size() != 2)
                throw ConfigError("expected [t, x]", m.qualified("list"), line_of(e));
            try {
                p.list.emplace_back(e[0].as<double>(), e[1].as<double>());
            } catch (const YAML::BadConversion&) {
                throw ConfigError("expected [t, x]", m.qualified("list"), line_of(e));
            }
        }
    } else {
        p.count = m.count("count");
        require(p.count >= 1, "must be at least 1", m, "count");
        if (m.has("t")) p.t_range = m.range("t");
        if (m.has("x")) p.x_range = m.range("x");
        require(p.t_range.first > 0.0, "times must be positive", m, "t");
    }
    m.finish();
    return p;
}

MonteCarloSpec read_mc(MapReader m) {
    MonteCarloSpec s;
    s.samples = m.count("samples", s.samples);
    s.inner_steps = m.count("inner_steps", s.inner_steps);
    require(s.samples >= 2, "needs at least 2 samples", m, "samples");
    require(s.inner_steps >= 1, "needs at least 1 inner step", m, "inner_steps");
    m.finish();
    return s;
}

EvaluateSpec read_evaluate(MapReader m) {
    EvaluateSpec e;
    e.t = m.number("t");
    e.xs = m.numbers("x");
    require(e.t > 0.0, "must be positive", m, "t");
    require(!e.xs.empty(), "needs at least one point", m, "x");
    m.finish();
    return e;
}

std::vector<double> read_envelope(MapReader m) {
    const auto eps = m.numbers("eps");
    require(!eps.empty(), "needs at least one value", m, "eps");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] >= 0.0, "values must be nonnegative", m, "eps");
        require(i == 0 || eps[i] < eps[i - 1], "values must be strictly decreasing", m, "eps");
    }
    m.finish();
    return eps;
}

}  // namespace

std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& kv : rules()) out.push_back(kv.first);
    return out;
}

double ExperimentConfig::tolerance(const std::string& name) const {
    auto it = tolerances.find(name);
    if (it == tolerances.end()) throw ConfigError("experiment defines no such tolerance", "tolerances." + name);
    return it->second;
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, "<document>", e.mark.line + 1);
    }
    if (!root.IsMap()) throw ConfigError("expected a mapping at the top level", "<document>", 1);
    MapReader top(root, "");

    ExperimentConfig c;
    c.experiment = top.text("experiment");
    auto rule_it = rules().find(c.experiment);
    if (rule_it == rules().end()) throw ConfigError("unknown experiment '" + c.experiment + "'", "experiment", top.line("experiment"));
    const Rule& rule = rule_it->second;

    for (const auto& key : kCommonRequired) top.node(key);
    for (const auto& key : rule.required)
        if (!top.has(key)) throw ConfigError("missing required block for " + c.experiment, key, top.map_line());
    for (const auto& key : top.keys())
        if (kCommonRequired.count(key) == 0 && kCommonOptional.count(key) == 0 && rule.required.count(key) == 0 &&
            rule.optional.count(key) == 0)
            throw ConfigError("not used by experiment " + c.experiment, key, top.line(key));

    c.seed = top.u64("seed");
    c.seeds = top.count("seeds", 1);
    require(c.seeds >= 1, "must be at least 1", top, "seeds");
    {
        MapReader dims = top.child("dims");
        c.noise_dim = dims.count("noise");
        c.space_dim = dims.count("space");
        require(c.noise_dim >= 1 && c.noise_dim <= kMaxDim, "must lie in [1, 6]", dims, "noise");
        require(c.space_dim >= 1 && c.space_dim <= kMaxDim, "must lie in [1, 6]", dims, "space");
        dims.finish();
    }
    if (top.has("output")) c.output = top.text("output");
    if (top.has("path")) c.path = read_path(top.child("path"));
    if (top.has("coefficients")) {
        MapReader co = top.child("coefficients");
        c.f = read_family(co.child("f"), FamilyKind::f, c.noise_dim, c.space_dim);
        c.g = read_family(co.child("g"), FamilyKind::g, c.noise_dim, c.space_dim);
        co.finish();
    }
    if (top.has("field")) c.field = read_family(top.child("field"), FamilyKind::field, c.noise_dim, c.space_dim);
    if (top.has("reference_field"))
        c.reference_field = read_family(top.child("reference_field"), FamilyKind::field, c.noise_dim, c.space_dim);
    if (top.has("initial")) c.initial = read_family(top.child("initial"), FamilyKind::initial, 1, 1);
    if (top.has("comparison_initial"))
        c.comparison_initial = read_family(top.child("comparison_initial"), FamilyKind::initial, 1, 1);
    if (top.has("lattice")) c.lattice = read_lattice(top.child("lattice"));
    if (top.has("grid")) c.grid = read_grid(top.child("grid"));
    if (top.has("points")) c.points = read_points(top.child("points"));
    if (top.has("monte_carlo")) c.monte_carlo = read_mc(top.child("monte_carlo"));
    if (top.has("evaluate")) c.evaluate = read_evaluate(top.child("evaluate"));
    if (top.has("envelope")) c.eps = read_envelope(top.child("envelope"));
    if (top.has("scheme")) {
        c.scheme = top.text("scheme");
        require(c.scheme == "stratonovich" || c.scheme == "ito", "expected 'stratonovich' or 'ito'", top, "scheme");
    }

    c.tolerances = rule.tolerances;
    if (top.has("tolerances")) {
        MapReader tol = top.child("tolerances");
        for (const auto& key : tol.keys()) {
            if (rule.tolerances.count(key) == 0)
                throw ConfigError("not a tolerance of experiment " + c.experiment, tol.qualified(key), tol.line(key));
            c.tolerances[key] = tol.number(key);
        }
        tol.finish();
    }
    top.finish();
    return c;
}

ExperimentConfig load_config(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ConfigError("cannot open config file " + filename, "<file>");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

void emit_family(YAML::Emitter& out, const std::string& key, const FamilySpec& spec) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "family" << YAML::Value << spec.family;
    for (const auto& [k, v] : spec.params) out << YAML::Key << k << YAML::Value << v;
    out << YAML::EndMap;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << v;
    out << YAML::EndSeq;
}

}  // namespace

std::string echo_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "experiment" << YAML::Value << c.experiment;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "seeds" << YAML::Value << c.seeds;
    out << YAML::Key << "dims" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "noise" << YAML::Value
        << c.noise_dim << YAML::Key << "space" << YAML::Value << c.space_dim << YAML::EndMap;
    if (c.path) {
        out << YAML::Key << "path" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "T" << YAML::Value << c.path->horizon;
        out << YAML::Key << "N" << YAML::Value << c.path->steps;
        out << YAML::Key << "refine" << YAML::Value << c.path->refine << YAML::EndMap;
    }
    if (c.f && c.g) {
        out << YAML::Key << "coefficients" << YAML::Value << YAML::BeginMap;
        emit_family(out, "f", *c.f);
        emit_family(out, "g", *c.g);
        out << YAML::EndMap;
    }
    if (c.field) emit_family(out, "field", *c.field);
    if (c.reference_field) emit_family(out, "reference_field", *c.reference_field);
    if (c.initial) emit_family(out, "initial", *c.initial);
    if (c.comparison_initial) emit_family(out, "comparison_initial", *c.comparison_initial);
    if (c.lattice) {
        const auto& l = *c.lattice;
        out << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "finest" << YAML::Value << l.finest;
        out << YAML::Key << "coarsest" << YAML::Value << l.coarsest;
        out << YAML::Key << "pairing" << YAML::Value << (l.pairing == Pairing::matched ? "matched" : "product");
        if (!l.multipliers.empty()) {
            out << YAML::Key << "multipliers" << YAML::Value;
            emit_list(out, l.multipliers);
        }
        if (!l.offsets.empty()) {
            out << YAML::Key << "offsets" << YAML::Value;
            emit_list(out, l.offsets);
        }
        out << YAML::EndMap;
    }
    if (c.grid) {
        const auto& g = *c.grid;
        out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "x_lo" << YAML::Value << g.x_lo;
        out << YAML::Key << "x_hi" << YAML::Value << g.x_hi;
        out << YAML::Key << "nx" << YAML::Value << g.nx;
        out << YAML::Key << "boundary" << YAML::Value << (g.boundary == Boundary::dirichlet ? "dirichlet" : "clamp");
        out << YAML::Key << "store_every" << YAML::Value << g.store_every << YAML::EndMap;
    }
    if (c.points) {
        const auto& p = *c.points;
        out << YAML::Key << "points" << YAML::Value << YAML::BeginMap;
        if (!p.list.empty()) {
            out << YAML::Key << "list" << YAML::Value << YAML::BeginSeq;
            for (const auto& [t, x] : p.list) emit_list(out, {t, x});
            out << YAML::EndSeq;
        } else {
            out << YAML::Key << "count" << YAML::Value << p.count;
            out << YAML::Key << "t" << YAML::Value;
            emit_list(out, {p.t_range.first, p.t_range.second});
            out << YAML::Key << "x" << YAML::Value;
            emit_list(out, {p.x_range.first, p.x_range.second});
        }
        out << YAML::EndMap;
    }
    if (c.monte_carlo) {
        out << YAML::Key << "monte_carlo" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "samples" << YAML::Value << c.monte_carlo->samples;
        out << YAML::Key << "inner_steps" << YAML::Value << c.monte_carlo->inner_steps << YAML::EndMap;
    }
    if (c.evaluate) {
        out << YAML::Key << "evaluate" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "t" << YAML::Value << c.evaluate->t;
        out << YAML::Key << "x" << YAML::Value;
        emit_list(out, c.evaluate->xs);
        out << YAML::EndMap;
    }
    if (!c.eps.empty()) {
        out << YAML::Key << "envelope" << YAML::Value << YAML::BeginMap << YAML::Key << "eps" << YAML::Value;
        emit_list(out, c.eps);
        out << YAML::EndMap;
    }
    if (c.experiment == "solve-fd") out << YAML::Key << "scheme" << YAML::Value << c.scheme;
    if (!c.tolerances.empty()) {
        out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : c.tolerances) out << YAML::Key << k << YAML::Value << v;
        out << YAML::EndMap;
    }
    if (!c.output.empty()) out << YAML::Key << "output" << YAML::Value << c.output;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace pathwise
