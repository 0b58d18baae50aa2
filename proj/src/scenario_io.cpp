#include "ooc/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ooc/errors.hpp"

namespace ooc {

using nlohmann::json;

namespace {

// Read cursor over one JSON object or value. Keys read through `at`/`opt`
// are remembered so `finish` can reject everything else.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return *j_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SchemaError((path_.empty() ? std::string("<root>") : path_) + ": " + msg);
    }

    Node object() const {
        if (!j_->is_object()) fail("expected an object");
        return *this;
    }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) {
        if (!j_->is_object()) fail("expected an object");
        if (!j_->contains(key)) fail("missing required key '" + key + "'");
        used_.insert(key);
        return Node(j_->at(key), child(key));
    }

    std::optional<Node> opt(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return at(key);
    }

    void finish() const {
        for (const auto& [key, _] : j_->items()) {
            if (!used_.count(key)) throw SchemaError(child(key) + ": unknown key");
        }
    }

    double number() const {
        if (!j_->is_number()) fail("expected a number");
        const double v = j_->get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("must be positive");
        return v;
    }

    double nonnegative() const {
        const double v = number();
        if (!(v >= 0.0)) fail("must be nonnegative");
        return v;
    }

    std::uint64_t unsigned_integer() const {
        if (!j_->is_number_integer() || (!j_->is_number_unsigned() && j_->get<std::int64_t>() < 0)) {
            fail("expected a nonnegative integer");
        }
        return j_->get<std::uint64_t>();
    }

    bool boolean() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }

    std::string string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }

    std::vector<Node> array() const {
        if (!j_->is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t k = 0; k < j_->size(); ++k) out.emplace_back((*j_)[k], path_ + "[" + std::to_string(k) + "]");
        return out;
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (const auto& e : array()) out.push_back(e.number());
        return out;
    }

    Eigen::VectorXd vector() const {
        const auto v = numbers();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    Interval interval() const {
        const auto v = numbers();
        if (v.size() != 2 || !(v[0] < v[1])) fail("expected [lo, hi] with lo < hi");
        return {v[0], v[1]};
    }

    Eigen::MatrixXd matrix() const {
        const auto rows = array();
        if (rows.empty()) fail("expected a nonempty matrix");
        Eigen::MatrixXd m;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto row = rows[r].numbers();
            if (r == 0) m.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(row.size()));
            if (static_cast<Eigen::Index>(row.size()) != m.cols()) rows[r].fail("ragged matrix row");
            for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        return m;
    }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

// Runs a constructor and reports library errors against the field path.
template <class F>
auto guarded(const Node& at, F&& make) {
    try {
        return make();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        at.fail(e.what());
    }
}

Digraph parse_graph(Node node) {
    node.object();
    const auto nodes = node.at("nodes").unsigned_integer();
    if (nodes < 1) node.fail("need at least one node");
    std::vector<Edge> edges;
    for (auto e : node.at("edges").array()) {
        e.object();
        const auto from = e.at("from").unsigned_integer();
        const auto to = e.at("to").unsigned_integer();
        if (from < 1 || from > nodes || to < 1 || to > nodes) e.fail("node index out of 1.." + std::to_string(nodes));
        if (from == to) e.fail("self-loop on node " + std::to_string(from));
        double w = 1.0;
        if (auto wn = e.opt("weight")) {
            w = wn->number();
            if (!(w > 0.0)) wn->fail("edge " + std::to_string(from) + "->" + std::to_string(to) + " needs a positive weight");
        }
        e.finish();
        edges.push_back({from - 1, to - 1, w});
    }
    node.finish();
    return guarded(node, [&] { return Digraph(nodes, edges); });
}

CostFunction parse_cost(Node node, Interval domain) {
    node.object();
    const auto kind = node.at("kind").string();
    CostFunction c = guarded(node, [&]() -> CostFunction {
        if (kind == "quadratic") {
            const double a = node.at("a").positive();
            return CostFunction::quadratic(a, node.at("b").number(), domain);
        }
        if (kind == "exp_sum") {
            const double c1 = node.at("c1").number(), k1 = node.at("k1").number();
            const double c2 = node.at("c2").number(), k2 = node.at("k2").number();
            return CostFunction::exp_sum(c1, k1, c2, k2, domain);
        }
        if (kind == "named") return CostFunction::named(node.at("name").string(), domain);
        node.fail("unknown cost kind '" + kind + "'");
    });
    node.finish();
    return c;
}

Plant parse_plant(Node node) {
    node.object();
    const auto kind = node.at("kind").string();
    Plant p = guarded(node, [&]() -> Plant {
        if (kind == "vdp_like") {
            VdpLike k{};
            k.mu1 = node.at("mu1").number();
            k.disturbance_gain = node.at("disturbance_gain").number();
            k.b = node.at("b").positive();
            return Plant(k);
        }
        if (kind == "damping_spring") {
            DampingSpring k{};
            k.m = node.at("m").positive();
            k.kappa1 = node.at("kappa1").number();
            k.kappa2 = node.at("kappa2").number();
            k.mu1 = node.at("mu1").number();
            k.mu2 = node.at("mu2").number();
            k.amplitude = node.at("amplitude").number();
            return Plant(k);
        }
        node.fail("unknown plant kind '" + kind + "' (custom plants are library-only)");
    });
    node.finish();
    return p;
}

template <class T, class F>
std::vector<T> per_agent(Node node, std::size_t n, F&& parse) {
    auto items = node.array();
    if (items.size() != n && items.size() != 1) {
        node.fail("expected 1 or " + std::to_string(n) + " entries, got " + std::to_string(items.size()));
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(parse(items.size() == 1 ? items[0] : items[i]));
    return out;
}

void parse_tolerances(Node node, Tolerances& tol) {
    node.object();
    if (auto v = node.opt("output")) tol.output = v->positive();
    if (auto v = node.opt("velocity")) tol.velocity = v->positive();
    if (auto v = node.opt("velocity_from")) tol.velocity_from = v->number();
    if (auto v = node.opt("xi")) tol.xi = v->positive();
    if (auto v = node.opt("z_drift")) tol.z_drift = v->positive();
    if (auto v = node.opt("rowsum_drift")) tol.rowsum_drift = v->positive();
    if (auto v = node.opt("exo_drift")) tol.exo_drift = v->positive();
    if (auto v = node.opt("sylvester")) tol.sylvester = v->positive();
    if (auto v = node.opt("psi")) tol.psi = v->positive();
    node.finish();
}

std::string format_gains(const CoordinatorGains& g) {
    std::ostringstream os;
    os.precision(6);
    os << "beta1 = " << g.beta1 << ", beta2 = " << g.beta2 << ", delta = " << g.delta;
    return os.str();
}

json example1() {
    json costs = json::array(), plants = json::array();
    for (int i = 1; i <= 5; ++i) {
        costs.push_back({{"kind", "quadratic"}, {"a", 0.1}, {"b", i}});
        plants.push_back({{"kind", "vdp_like"}, {"mu1", i}, {"disturbance_gain", i}, {"b", 1.0}});
    }
    json edges = json::array();
    for (auto [f, t] : {std::pair{3, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 5}, {5, 1}}) {
        edges.push_back({{"from", f}, {"to", t}, {"weight", 1.0}});
    }
    return {
        {"name", "example1"},
        {"seed", 1},
        {"graph", {{"nodes", 5}, {"edges", edges}}},
        {"costs", {{"domain", {-10.0, 10.0}}, {"agents", costs}}},
        {"plants", {{"uncertainty", 0.2}, {"agents", plants}}},
        {"exosystem", {{"S", {{0.0, 0.8}, {-0.8, 0.0}}}, {"v0", {0.0, 10.0}}}},
        {"coordinator", {{"gains", "auto"}, {"margin", 2.0}, {"y0_range", {-5.0, 5.0}}}},
        {"tracker",
         {{"gamma", 2.0},
          {"rho", {{"coeff", 1.0}, {"power", 4.0}}},
          {"models", {{{"char_coeffs", {2.0, 3.0}}}}},
          {"truth_frequencies", {0.8}},
          {"init_range", 0.0}}},
        {"sim",
         {{"horizon", 100.0},
          {"step", 1e-3},
          {"record_every", 100},
          {"ablate_internal_model", false},
          {"x0_range", {-2.0, 2.0}},
          {"courant", 1.0},
          {"tolerances", {{"output", 5e-2}, {"velocity", 5e-2}, {"psi", 5e-2}}}}},
    };
}

json example2() {
    json costs = json::array(), plants = json::array();
    for (int i = 1; i <= 5; ++i) {
        const double d = i;
        costs.push_back({{"kind", "named"}, {"name", "ex2_f" + std::to_string(i)}});
        plants.push_back({{"kind", "damping_spring"},
                          {"m", 1.0 + 0.1 * d},
                          {"kappa1", 2.0 + 0.2 * d},
                          {"kappa2", 3.0 - 0.1 * d},
                          {"mu1", 4.0 - 0.2 * d},
                          {"mu2", 5.0 - 0.3 * d},
                          {"amplitude", 100.0}});
    }
    json doc = example1();
    doc["name"] = "example2";
    doc["costs"] = {{"domain", {-5.0, 5.0}}, {"agents", costs}};
    doc["plants"] = {{"uncertainty", 0.0}, {"agents", plants}};
    doc["exosystem"] = {{"S", {{0.0, 1.0}, {-1.0, 0.0}}}, {"v0", {0.0, 1.0}}};
    // The selection rule on these costs asks for beta1 ~ 1e7, far beyond what a
    // 1 ms step can integrate; any positive pair works for the coordinator.
    doc["coordinator"] = {{"gains", {{"beta1", 20.0}, {"beta2", 2.0}}}, {"y0_range", {-5.0, 5.0}}};
    doc["tracker"]["models"] = {{{"char_coeffs", {10.0, 18.0, 15.0, 6.0}}}};
    doc["tracker"]["truth_frequencies"] = {1.0, 3.0};
    doc["sim"]["tolerances"] = {{"output", 5e-2}, {"velocity", 5e-2}, {"velocity_from", 50.0}};
    return doc;
}

}  // namespace

std::vector<std::string> preset_names() { return {"example1", "example2"}; }

json preset_json(std::string_view name) {
    if (name == "example1") return example1();
    if (name == "example2") return example2();
    throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

Scenario parse_scenario(const json& doc, std::ostream* log) {
    Node root(doc, "");
    root.object();
    Scenario sc;
    if (auto v = root.opt("name")) sc.name = v->string();
    sc.seed = root.at("seed").unsigned_integer();

    sc.graph = parse_graph(root.at("graph"));
    const auto n = sc.graph.size();

    auto costs = root.at("costs").object();
    if (auto d = costs.opt("domain")) sc.cost_domain = d->interval();
    sc.costs = per_agent<CostFunction>(costs.at("agents"), n, [&](Node c) { return parse_cost(c, sc.cost_domain); });
    costs.finish();

    auto plants = root.at("plants").object();
    if (auto u = plants.opt("uncertainty")) {
        sc.plant_uncertainty = u->nonnegative();
        if (!(sc.plant_uncertainty < 1.0)) u->fail("must be below 1");
    }
    sc.plants = per_agent<Plant>(plants.at("agents"), n, parse_plant);
    plants.finish();

    auto exo = root.at("exosystem").object();
    {
        auto S = exo.at("S");
        auto v0 = exo.at("v0");
        const Eigen::MatrixXd Sm = S.matrix();
        const Eigen::VectorXd v = v0.vector();
        if (Sm.rows() != Sm.cols()) S.fail("S must be square");
        if (v.size() != Sm.rows()) v0.fail("v0 must have " + std::to_string(Sm.rows()) + " entries");
        sc.exo = guarded(exo, [&] { return Exosystem(Sm, v); });
    }
    exo.finish();

    bool auto_gains = true;
    if (auto coord = root.opt("coordinator")) {
        coord->object();
        if (auto g = coord->opt("gains")) {
            if (g->raw().is_string()) {
                if (g->string() != "auto") g->fail("expected \"auto\" or {beta1, beta2}");
            } else {
                g->object();
                sc.gains = CoordinatorGains{g->at("beta1").positive(), g->at("beta2").positive(), 0.0};
                g->finish();
                auto_gains = false;
            }
        }
        if (auto m = coord->opt("margin")) {
            sc.gain_margin = m->number();
            if (!(sc.gain_margin > 1.0)) m->fail("must exceed 1");
        }
        if (auto r = coord->opt("y0_range")) sc.init.yr_range = r->interval();
        if (auto y = coord->opt("y0")) {
            sc.init.y_r = y->vector();
            if (static_cast<std::size_t>(sc.init.y_r->size()) != n) y->fail("expected one entry per agent");
        }
        coord->finish();
    }

    auto tracker = root.at("tracker").object();
    if (auto g = tracker.opt("gamma")) {
        sc.tracker.gamma = g->number();
        if (!(sc.tracker.gamma >= 1.5)) g->fail("gamma must be at least 1.5");
    }
    if (auto r = tracker.opt("rho")) {
        r->object();
        if (auto c = r->opt("coeff")) sc.tracker.rho.coeff = c->nonnegative();
        if (auto p = r->opt("power")) sc.tracker.rho.power = p->positive();
        r->finish();
    }
    sc.models = per_agent<InternalModel>(tracker.at("models"), n, [](Node m) {
        m.object();
        auto cn = m.at("char_coeffs");
        const auto coeffs = cn.numbers();
        if (coeffs.empty()) cn.fail("need at least one coefficient");
        auto model = guarded(cn, [&] { return companion_pair(coeffs.size(), coeffs); });
        m.finish();
        return model;
    });
    if (auto f = tracker.opt("truth_frequencies")) {
        sc.truth_frequencies = f->numbers();
        for (double w : sc.truth_frequencies) {
            if (!(w >= 0.0)) f->fail("frequencies must be nonnegative");
        }
    }
    if (auto r = tracker.opt("init_range")) sc.init.tracker_range = r->nonnegative();
    tracker.finish();

    if (auto sim = root.opt("sim")) {
        sim->object();
        if (auto v = sim->opt("horizon")) sc.horizon = v->positive();
        if (auto v = sim->opt("step")) sc.step = v->positive();
        if (auto v = sim->opt("record_every")) {
            sc.record_every = v->unsigned_integer();
            if (sc.record_every < 1) v->fail("must be at least 1");
        }
        if (auto v = sim->opt("ablate_internal_model")) sc.ablate_internal_model = v->boolean();
        if (auto v = sim->opt("x0_range")) sc.init.x_range = v->interval();
        if (auto v = sim->opt("x0")) {
            std::vector<Eigen::Vector2d> xs;
            for (const auto& row : v->array()) {
                const auto p = row.numbers();
                if (p.size() != 2) row.fail("expected [x1, x2]");
                xs.emplace_back(p[0], p[1]);
            }
            if (xs.size() != n) v->fail("expected one entry per agent");
            sc.init.x = xs;
        }
        if (auto v = sim->opt("courant")) sc.courant = v->nonnegative();
        if (auto v = sim->opt("max_substeps")) sc.max_substeps = v->unsigned_integer();
        if (auto v = sim->opt("tolerances")) parse_tolerances(*v, sc.tol);
        sim->finish();
    }
    root.finish();

    try {
        sc.validate();
    } catch (const InvalidArgument& e) {
        throw SchemaError(e.what());
    }

    if (auto_gains) {
        sc.gains = resolve_gains(sc);
        if (log) *log << "scenario " << sc.name << ": auto gains resolved to " << format_gains(*sc.gains) << "\n";
    }
    return sc;
}

Scenario parse_scenario_text(std::string_view text, std::ostream* log) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(doc, log);
}

Scenario load_scenario(std::string_view source, std::ostream* log) {
    for (const auto& name : preset_names()) {
        if (source == name) return parse_scenario(preset_json(name), log);
    }
    std::ifstream in{std::string(source)};
    if (!in) throw IoError("cannot read scenario file '" + std::string(source) + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), log);
}

}  // namespace ooc
