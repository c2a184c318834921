#include "causalfrac/physics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "causalfrac/errors.hpp"
#include "causalfrac/rng.hpp"

#include <json.hpp>

namespace causalfrac {

double breakdown_stress_poro(const PoroBreakdownParams& p) {
    if (p.A_pe == 2.0) throw DomainError("breakdown_stress_poro: A_pe must not equal 2");
    if (p.v == 1.0) throw DomainError("breakdown_stress_poro: v must not equal 1");
    const double num =
        2.0 * (p.v / (1.0 - p.v)) * p.S_V + 2.0 * p.S_hi + p.A_pe * p.p_s + p.sigma_T;
    return num / (2.0 - p.A_pe);
}

double fracture_width(const FractureWidthParams& p) {
    if (p.G <= 0.0) throw DomainError("fracture_width: G must be positive");
    if (p.L <= 0.0) throw DomainError("fracture_width: L must be positive");
    if (p.x < 0.0 || p.x > p.L) throw DomainError("fracture_width: x must lie in [0, L]");
    const double w0 = (1.0 - p.v) * p.dp_T * p.H / p.G;
    const double u = p.x / p.L;
    const double radical = p.printed_profile ? 1.0 + u * u : 1.0 - u * u;
    const double bracket = u * std::asin(u) + std::sqrt(radical) - 0.5 * M_PI * u;
    if (bracket < 0.0) throw DomainError("fracture_width: profile bracket is negative");
    return w0 * std::pow(bracket, 0.25);
}

double gas_production(const GasFlowParams& p) {
    if (!(p.r_e > p.r_w && p.r_w > 0.0)) {
        throw DomainError("gas_production: need r_e > r_w > 0");
    }
    const double log_term =
        p.skin_inside_log ? std::log(p.r_e / p.r_w + p.S) : std::log(p.r_e / p.r_w) + p.S;
    const double denom = p.B_g * p.mu_g * log_term;
    if (denom == 0.0 || !std::isfinite(denom)) {
        throw DomainError("gas_production: zero or non-finite denominator");
    }
    return p.alpha * p.K * p.h * (p.p_e - p.p_wf) / denom;
}

double gas_content(const GasContentParams& p) {
    const double denom = p.p_0 * p.T * p.Z;
    if (denom == 0.0) throw DomainError("gas_content: p_0 * T * Z must be nonzero");
    return p.phi * p.S_g * p.p_e * p.T_0 / denom + p.V_p;
}

VolumeBalance volume_balance(double Q_p, double Q_s, double Q_r) {
    if (Q_p < 0.0 || Q_s < 0.0 || Q_r < 0.0) {
        throw DomainError("volume_balance: volumes must be nonnegative");
    }
    VolumeBalance vb;
    vb.Q_f = Q_p + Q_s + Q_r;
    if (vb.Q_f == 0.0) throw AllZeroVolumes("volume ratios undefined for all-zero volumes");
    vb.R_p = Q_p / vb.Q_f;
    vb.R_s = Q_s / vb.Q_f;
    vb.R_r = Q_r / vb.Q_f;
    return vb;
}

double breakdown_stress_classic(double sigma_y, double sigma_x, double sigma_t, double p_s) {
    return 3.0 * sigma_y - sigma_x + sigma_t + p_s;
}

// --- SCM synthesizer -------------------------------------------------------

const ScmNode* ScmSpec::find(const std::string& name) const {
    for (const auto& node : nodes) {
        if (node.name == name) return &node;
    }
    return nullptr;
}

std::vector<std::string> scm_formula_symbols(const std::string& formula) {
    if (formula == "breakdown_poro") return {"v", "S_V", "S_hi", "A_pe", "p_s", "sigma_T"};
    if (formula == "breakdown_classic") return {"sigma_y", "sigma_x", "sigma_t", "p_s"};
    if (formula == "fracture_width") return {"x", "t", "L", "v", "dp_T", "H", "G"};
    if (formula == "prepad_volume") return {"v", "u_p", "c1", "c2", "x", "t", "L", "dp_T", "H", "G"};
    if (formula == "gas_flow") {
        return {"alpha", "K", "h", "p_e", "p_wf", "B_g", "mu_g", "r_e", "r_w", "S"};
    }
    if (formula == "gas_flow_skin") {
        return {"alpha", "K", "h", "p_e", "p_wf", "B_g", "mu_g", "r_e", "r_w", "s0", "s1", "pF", "pF0"};
    }
    if (formula == "gas_content") return {"phi", "S_g", "p_e", "T_0", "T", "p_0", "Z", "V_p"};
    if (formula == "ratio") return {"num", "den"};
    if (formula == "sum3") return {"a", "b", "c"};
    if (formula == "product") return {"a", "b"};
    throw MechanismArityMismatch("unknown formula mechanism: " + formula);
}

namespace {

double apply_link(const std::string& link, double x) {
    if (link == "identity") return x;
    if (link == "exp") return std::exp(x);
    if (link == "sigmoid") return 1.0 / (1.0 + std::exp(-x));
    if (link == "reciprocal") {
        if (x == 0.0) throw DomainError("reciprocal link at zero");
        return 1.0 / x;
    }
    throw MechanismArityMismatch("unknown monotone link: " + link);
}

double eval_formula(const std::string& formula, const std::map<std::string, double>& sym) {
    auto s = [&](const char* k) { return sym.at(k); };
    if (formula == "breakdown_poro") {
        return breakdown_stress_poro(
            {s("v"), s("S_V"), s("S_hi"), s("A_pe"), s("p_s"), s("sigma_T")});
    }
    if (formula == "breakdown_classic") {
        return breakdown_stress_classic(s("sigma_y"), s("sigma_x"), s("sigma_t"), s("p_s"));
    }
    if (formula == "fracture_width") {
        FractureWidthParams p;
        p.x = s("x");
        p.t = s("t");
        p.L = s("L");
        p.v = s("v");
        p.dp_T = s("dp_T");
        p.H = s("H");
        p.G = s("G");
        return fracture_width(p);
    }
    if (formula == "prepad_volume") {
        FractureWidthParams p;
        p.x = s("x");
        p.t = s("t");
        p.L = s("L");
        p.v = s("v");
        p.dp_T = s("dp_T");
        p.H = s("H");
        p.G = s("G");
        return s("c1") * fracture_width(p) * (1.0 + s("c2") * s("u_p"));
    }
    if (formula == "gas_flow") {
        GasFlowParams p;
        p.alpha = s("alpha");
        p.K = s("K");
        p.h = s("h");
        p.p_e = s("p_e");
        p.p_wf = s("p_wf");
        p.B_g = s("B_g");
        p.mu_g = s("mu_g");
        p.r_e = s("r_e");
        p.r_w = s("r_w");
        p.S = s("S");
        return gas_production(p);
    }
    if (formula == "gas_flow_skin") {
        GasFlowParams p;
        p.alpha = s("alpha");
        p.K = s("K");
        p.h = s("h");
        p.p_e = s("p_e");
        p.p_wf = s("p_wf");
        p.B_g = s("B_g");
        p.mu_g = s("mu_g");
        p.r_e = s("r_e");
        p.r_w = s("r_w");
        p.S = s("s0") + s("s1") * (s("pF") - s("pF0"));
        return gas_production(p);
    }
    if (formula == "gas_content") {
        return gas_content(
            {s("phi"), s("S_g"), s("p_e"), s("T_0"), s("T"), s("p_0"), s("Z"), s("V_p")});
    }
    if (formula == "ratio") {
        if (s("den") == 0.0) throw DomainError("ratio mechanism with zero denominator");
        return s("num") / s("den");
    }
    if (formula == "sum3") return s("a") + s("b") + s("c");
    if (formula == "product") return s("a") * s("b");
    throw MechanismArityMismatch("unknown formula mechanism: " + formula);
}

void validate_mechanism(const ScmNode& node) {
    const Mechanism& m = node.mechanism;
    if (m.type == Mechanism::Type::Formula) {
        const std::vector<std::string> symbols = scm_formula_symbols(m.formula);
        if (m.inputs.size() != symbols.size()) {
            throw MechanismArityMismatch(node.name + ": formula " + m.formula + " expects " +
                                         std::to_string(symbols.size()) + " inputs");
        }
        std::size_t wired = 0;
        for (const auto& sym : symbols) {
            auto it = m.inputs.find(sym);
            if (it == m.inputs.end()) {
                throw MechanismArityMismatch(node.name + ": missing formula input " + sym);
            }
            if (it->second.parent >= 0) {
                if (static_cast<std::size_t>(it->second.parent) >= node.parents.size()) {
                    throw MechanismArityMismatch(node.name + ": input " + sym +
                                                 " references parent out of range");
                }
                ++wired;
            }
        }
        if (wired != node.parents.size()) {
            throw MechanismArityMismatch(node.name + ": every parent must feed a formula input");
        }
        return;
    }
    if (m.weights.size() != node.parents.size()) {
        throw MechanismArityMismatch(node.name + ": " + std::to_string(m.weights.size()) +
                                     " weights for " + std::to_string(node.parents.size()) +
                                     " parents");
    }
}

double eval_mechanism(const ScmNode& node, const std::vector<double>& parent_values,
                      double noise) {
    const Mechanism& m = node.mechanism;
    switch (m.type) {
        case Mechanism::Type::LinearGaussian: {
            double v = m.intercept + noise;
            for (std::size_t i = 0; i < parent_values.size(); ++i) {
                v += m.weights[i] * parent_values[i];
            }
            return v;
        }
        case Mechanism::Type::Monotone: {
            double lin = m.intercept + noise;
            for (std::size_t i = 0; i < parent_values.size(); ++i) {
                lin += m.weights[i] * parent_values[i];
            }
            return m.out_shift + m.out_scale * apply_link(m.link, lin);
        }
        case Mechanism::Type::Formula: {
            std::map<std::string, double> sym;
            for (const auto& [name, input] : m.inputs) {
                sym[name] = input.parent >= 0
                                ? parent_values[static_cast<std::size_t>(input.parent)]
                                : input.constant;
            }
            return eval_formula(m.formula, sym) + noise;
        }
    }
    throw MechanismArityMismatch(node.name + ": unhandled mechanism type");
}

}  // namespace

SynthResult synth_scm(const ScmSpec& spec, std::size_t n) {
    if (spec.nodes.empty()) throw CyclicSpec("SCM spec has no nodes");
    if (n == 0) throw ConfigError("synth_scm: n must be positive");

    const std::size_t d = spec.nodes.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d; ++i) {
        if (index.count(spec.nodes[i].name)) {
            throw DuplicateNodeId("duplicate SCM node: " + spec.nodes[i].name);
        }
        index[spec.nodes[i].name] = i;
    }

    std::vector<std::vector<std::size_t>> parent_idx(d);
    for (std::size_t i = 0; i < d; ++i) {
        validate_mechanism(spec.nodes[i]);
        for (const auto& p : spec.nodes[i].parents) {
            auto it = index.find(p);
            if (it == index.end()) {
                throw MechanismArityMismatch(spec.nodes[i].name + ": unknown parent " + p);
            }
            parent_idx[i].push_back(it->second);
        }
    }

    // Kahn topological order
    std::vector<int> indeg(d, 0);
    std::vector<std::vector<std::size_t>> children(d);
    for (std::size_t i = 0; i < d; ++i) {
        indeg[i] = static_cast<int>(parent_idx[i].size());
        for (std::size_t p : parent_idx[i]) children[p].push_back(i);
    }
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < d; ++i) {
        if (indeg[i] == 0) q.push_back(i);
    }
    std::vector<std::size_t> topo;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop_front();
        topo.push_back(u);
        for (std::size_t c : children[u]) {
            if (--indeg[c] == 0) q.push_back(c);
        }
    }
    if (topo.size() != d) throw CyclicSpec("SCM parent structure contains a cycle");

    // One noise stream per node so column values do not depend on topo order.
    std::vector<std::vector<double>> noise(d);
    for (std::size_t i = 0; i < d; ++i) {
        Rng rng(Rng::derive(spec.seed, i));
        noise[i].resize(n);
        const double sd = spec.nodes[i].mechanism.noise_sd;
        for (std::size_t r = 0; r < n; ++r) noise[i][r] = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
    }

    std::vector<std::vector<double>> values(d, std::vector<double>(n));
    std::vector<double> parent_values;
    for (std::size_t node : topo) {
        for (std::size_t r = 0; r < n; ++r) {
            parent_values.clear();
            for (std::size_t p : parent_idx[node]) parent_values.push_back(values[p][r]);
            values[node][r] = eval_mechanism(spec.nodes[node], parent_values, noise[node][r]);
        }
    }

    // full generating DAG, latents included
    std::vector<std::string> names;
    names.reserve(d);
    for (const auto& nd : spec.nodes) names.push_back(nd.name);
    MixedGraph dag(GraphKind::DAG, names);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t p : parent_idx[i]) {
            dag.add_edge(static_cast<int>(p), static_cast<int>(i), Mark::Tail, Mark::Arrow);
        }
    }

    SynthResult res{Dataset{}, std::move(dag), {}};
    std::vector<VariableMeta> cols;
    std::vector<std::size_t> emit;
    for (std::size_t i = 0; i < d; ++i) {
        if (spec.nodes[i].latent && spec.hide_latents) {
            res.latent_names.push_back(spec.nodes[i].name);
            continue;
        }
        cols.push_back(VariableMeta{spec.nodes[i].name, spec.nodes[i].role, spec.nodes[i].unit});
        emit.push_back(i);
    }
    if (cols.empty()) throw ConfigError("synth_scm: every node is latent; nothing to emit");
    std::vector<double> flat;
    flat.reserve(n * emit.size());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i : emit) flat.push_back(values[i][r]);
    }
    res.data = Dataset(std::move(cols), std::move(flat));
    return res;
}

// --- presets ---------------------------------------------------------------

namespace {

ScmNode exo_normal(std::string name, VariableRole role, double mean, double sd,
                   std::string unit = "") {
    ScmNode n;
    n.name = std::move(name);
    n.role = role;
    n.unit = std::move(unit);
    n.mechanism.type = Mechanism::Type::LinearGaussian;
    n.mechanism.intercept = mean;
    n.mechanism.noise_sd = sd;
    return n;
}

ScmNode exo_lognormal(std::string name, VariableRole role, double log_mean, double log_sd,
                      std::string unit = "") {
    ScmNode n;
    n.name = std::move(name);
    n.role = role;
    n.unit = std::move(unit);
    n.mechanism.type = Mechanism::Type::Monotone;
    n.mechanism.link = "exp";
    n.mechanism.intercept = log_mean;
    n.mechanism.noise_sd = log_sd;
    return n;
}

FormulaInput from_parent(int i) { return FormulaInput{i, 0.0}; }
FormulaInput from_const(double c) { return FormulaInput{-1, c}; }

ScmSpec preset_fig8b() {
    ScmSpec spec;
    // Latent tectonic driver correlates the two horizontal stresses, so no
    // conditioning set separates them in the observed margin.
    ScmNode tect = exo_normal("Tect_Driv", VariableRole::Geological, 0.0, 1.0);
    tect.latent = true;
    spec.nodes.push_back(tect);

    ScmNode sy;
    sy.name = "Max_Hori_Stre";
    sy.role = VariableRole::Geological;
    sy.unit = "MPa";
    sy.parents = {"Tect_Driv"};
    sy.mechanism.type = Mechanism::Type::LinearGaussian;
    sy.mechanism.weights = {2.5};
    sy.mechanism.intercept = 20.0;
    sy.mechanism.noise_sd = 1.0;
    spec.nodes.push_back(sy);

    ScmNode sx = sy;
    sx.name = "Min_Hori_Stre";
    sx.mechanism.weights = {1.8};
    sx.mechanism.intercept = 14.0;
    sx.mechanism.noise_sd = 1.0;
    spec.nodes.push_back(sx);

    spec.nodes.push_back(exo_normal("Tens_Stre", VariableRole::Geological, 5.0, 1.0, "MPa"));
    spec.nodes.push_back(exo_normal("Pore_Pres", VariableRole::Geological, 10.0, 1.2, "MPa"));

    ScmNode pf;
    pf.name = "Break_Stre";
    pf.role = VariableRole::Geological;
    pf.unit = "MPa";
    pf.parents = {"Max_Hori_Stre", "Min_Hori_Stre", "Tens_Stre", "Pore_Pres"};
    pf.mechanism.type = Mechanism::Type::Formula;
    pf.mechanism.formula = "breakdown_classic";
    pf.mechanism.inputs = {{"sigma_y", from_parent(0)},
                           {"sigma_x", from_parent(1)},
                           {"sigma_t", from_parent(2)},
                           {"p_s", from_parent(3)}};
    pf.mechanism.noise_sd = 1.5;
    spec.nodes.push_back(pf);
    return spec;
}

ScmSpec preset_fig8a() {
    ScmSpec spec;
    // Latent displacement volume drives total/prepad/sand-laden volumes and,
    // through the fraction nodes, the ratio cluster.
    ScmNode qr = exo_lognormal("Liq_Disp", VariableRole::Engineering, 1.0, 0.4, "m3");
    qr.latent = true;
    spec.nodes.push_back(qr);

    ScmNode rp;
    rp.name = "Liq_Rati_Prep";
    rp.role = VariableRole::Engineering;
    rp.parents = {"Liq_Disp"};
    rp.mechanism.type = Mechanism::Type::Monotone;
    rp.mechanism.link = "sigmoid";
    rp.mechanism.weights = {0.5};
    rp.mechanism.intercept = -1.4;
    rp.mechanism.noise_sd = 0.4;
    rp.mechanism.out_scale = 0.30;
    rp.mechanism.out_shift = 0.15;
    spec.nodes.push_back(rp);

    ScmNode rs = rp;
    rs.name = "Liq_Rati_Sand";
    rs.mechanism.weights = {-0.4};
    rs.mechanism.intercept = 0.2;
    spec.nodes.push_back(rs);

    ScmNode rr;
    rr.name = "Liq_Rati_Disp";
    rr.role = VariableRole::Engineering;
    rr.parents = {"Liq_Rati_Prep", "Liq_Rati_Sand"};
    rr.mechanism.type = Mechanism::Type::LinearGaussian;
    rr.mechanism.weights = {-1.0, -1.0};
    rr.mechanism.intercept = 1.0;
    rr.mechanism.noise_sd = 0.0;  // ratios must sum to one exactly
    spec.nodes.push_back(rr);

    ScmNode qf;
    qf.name = "Tol_Frac_Fild";
    qf.role = VariableRole::Engineering;
    qf.unit = "m3";
    qf.parents = {"Liq_Disp"};
    qf.mechanism.type = Mechanism::Type::LinearGaussian;
    qf.mechanism.weights = {9.0};
    qf.mechanism.intercept = 30.0;
    qf.mechanism.noise_sd = 1.5;
    spec.nodes.push_back(qf);

    ScmNode qp;
    qp.name = "Liq_Prep";
    qp.role = VariableRole::Engineering;
    qp.unit = "m3";
    qp.parents = {"Liq_Rati_Prep", "Tol_Frac_Fild"};
    qp.mechanism.type = Mechanism::Type::LinearGaussian;
    qp.mechanism.weights = {55.0, 0.50};
    qp.mechanism.noise_sd = 1.2;
    spec.nodes.push_back(qp);

    ScmNode qs = qp;
    qs.name = "Liq_Sand";
    qs.parents = {"Liq_Rati_Sand", "Tol_Frac_Fild"};
    qs.mechanism.weights = {55.0, 0.55};
    spec.nodes.push_back(qs);
    return spec;
}

ScmSpec preset_fig7() {
    ScmSpec spec;

    // Latent common causes: the Poisson ratio behind the prepad/breakdown
    // pair, the reservoir stress behind the gas-content/production pair.
    ScmNode v;
    v.name = "Pois_Rati";
    v.role = VariableRole::Geological;
    v.latent = true;
    v.mechanism.type = Mechanism::Type::Monotone;
    v.mechanism.link = "sigmoid";
    v.mechanism.intercept = 0.0;
    v.mechanism.noise_sd = 1.2;
    v.mechanism.out_scale = 0.20;
    v.mechanism.out_shift = 0.15;
    spec.nodes.push_back(v);

    spec.nodes.push_back(exo_normal("Buri_Dept", VariableRole::Geological, 600.0, 40.0, "m"));

    ScmNode pe;
    pe.name = "Rese_Stre";
    pe.role = VariableRole::Geological;
    pe.unit = "MPa";
    pe.latent = true;
    pe.parents = {"Buri_Dept"};
    pe.mechanism.type = Mechanism::Type::Monotone;
    pe.mechanism.link = "exp";
    pe.mechanism.weights = {0.00550};
    pe.mechanism.intercept = -1.00;
    pe.mechanism.noise_sd = 0.225;
    spec.nodes.push_back(pe);

    // Observed exogenous factors.
    spec.nodes.push_back(exo_normal("Proppant", VariableRole::Engineering, 5.0, 1.0, "t"));
    spec.nodes.push_back(exo_normal("Init_Stre", VariableRole::Geological, 12.0, 1.5, "MPa"));
    spec.nodes.push_back(exo_lognormal("Perm", VariableRole::Geological, 0.8, 0.24, "mD"));
    spec.nodes.push_back(exo_normal("Gas_Thick", VariableRole::Geological, 8.0, 2.0, "m"));
    spec.nodes.push_back(exo_normal("Flow_Pres", VariableRole::Engineering, 4.0, 1.65, "MPa"));

    // Gas saturation rises with reservoir stress: first observed reflection
    // of the latent p_e.
    ScmNode sg;
    sg.name = "Gas_Satu";
    sg.role = VariableRole::Geological;
    sg.parents = {"Rese_Stre"};
    sg.mechanism.type = Mechanism::Type::Monotone;
    sg.mechanism.link = "sigmoid";
    sg.mechanism.weights = {0.40};
    sg.mechanism.intercept = -4.1;
    sg.mechanism.noise_sd = 1.35;
    sg.mechanism.out_scale = 0.40;
    sg.mechanism.out_shift = 0.35;
    spec.nodes.push_back(sg);

    ScmNode sc;
    sc.name = "Gas_Cont";
    sc.role = VariableRole::Geological;
    sc.unit = "m3/t";
    sc.parents = {"Gas_Satu", "Rese_Stre"};
    sc.mechanism.type = Mechanism::Type::Formula;
    sc.mechanism.formula = "gas_content";
    sc.mechanism.inputs = {{"phi", from_const(1.0)},   {"S_g", from_parent(0)},
                           {"p_e", from_parent(1)},    {"T_0", from_const(300.0)},
                           {"T", from_const(310.0)},   {"p_0", from_const(8.0)},
                           {"Z", from_const(0.95)},    {"V_p", from_const(1.5)}};
    sc.mechanism.noise_sd = 0.40;
    spec.nodes.push_back(sc);

    ScmNode rcd;
    rcd.name = "Rati_Crit_Rese";
    rcd.role = VariableRole::Geological;
    rcd.parents = {"Rese_Stre"};
    rcd.mechanism.type = Mechanism::Type::Monotone;
    rcd.mechanism.link = "reciprocal";
    rcd.mechanism.weights = {0.095};
    rcd.mechanism.intercept = 0.90;
    rcd.mechanism.noise_sd = 0.26;
    spec.nodes.push_back(rcd);

    ScmNode pf;
    pf.name = "Break_Stre";
    pf.role = VariableRole::Geological;
    pf.unit = "MPa";
    pf.parents = {"Pois_Rati", "Init_Stre"};
    pf.mechanism.type = Mechanism::Type::Formula;
    pf.mechanism.formula = "breakdown_poro";
    pf.mechanism.inputs = {{"v", from_parent(0)},      {"S_V", from_const(30.0)},
                           {"S_hi", from_parent(1)},   {"A_pe", from_const(1.0)},
                           {"p_s", from_const(10.0)},  {"sigma_T", from_const(5.0)}};
    pf.mechanism.noise_sd = 1.2;
    spec.nodes.push_back(pf);

    ScmNode qp;
    qp.name = "Liq_Prep";
    qp.role = VariableRole::Engineering;
    qp.unit = "m3";
    qp.parents = {"Pois_Rati", "Proppant"};
    qp.mechanism.type = Mechanism::Type::Formula;
    qp.mechanism.formula = "prepad_volume";
    qp.mechanism.inputs = {{"v", from_parent(0)},     {"u_p", from_parent(1)},
                           {"c1", from_const(300.0)}, {"c2", from_const(0.04)},
                           {"x", from_const(50.0)},   {"t", from_const(0.0)},
                           {"L", from_const(100.0)},  {"dp_T", from_const(2.0)},
                           {"H", from_const(10.0)},   {"G", from_const(100.0)}};
    qp.mechanism.noise_sd = 1.5;
    spec.nodes.push_back(qp);

    ScmNode qg;
    qg.name = "Gas_Prod";
    qg.role = VariableRole::Output;
    qg.unit = "1e4 m3";
    qg.parents = {"Perm", "Gas_Thick", "Flow_Pres", "Rese_Stre", "Break_Stre"};
    qg.mechanism.type = Mechanism::Type::Formula;
    qg.mechanism.formula = "gas_flow_skin";
    qg.mechanism.inputs = {{"alpha", from_const(1.0)}, {"K", from_parent(0)},
                           {"h", from_parent(1)},      {"p_wf", from_parent(2)},
                           {"p_e", from_parent(3)},    {"B_g", from_const(1.0)},
                           {"mu_g", from_const(1.0)},  {"r_e", from_const(150.0)},
                           {"r_w", from_const(0.1)},   {"s0", from_const(1.0)},
                           {"s1", from_const(0.32)},   {"pF", from_parent(4)},
                           {"pF0", from_const(59.0)}};
    qg.mechanism.noise_sd = 4.0;
    spec.nodes.push_back(qg);
    return spec;
}

}  // namespace

ScmSpec scm_preset(const std::string& name) {
    if (name == "FIG7") return preset_fig7();
    if (name == "FIG8A") return preset_fig8a();
    if (name == "FIG8B") return preset_fig8b();
    throw ConfigError("unknown SCM preset: " + name);
}

std::vector<std::string> scm_preset_names() { return {"FIG7", "FIG8A", "FIG8B"}; }

ScmSpec random_linear_scm(std::size_t d, std::size_t max_parents, std::uint64_t seed) {
    if (d == 0) throw ConfigError("random_linear_scm: d must be positive");
    ScmSpec spec;
    spec.seed = seed;
    Rng rng(Rng::derive(seed, 0x5c1f));
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<ScmNode> nodes(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::string num = std::to_string(i + 1);
        while (num.size() < 2) num.insert(num.begin(), '0');
        nodes[i].name = "V" + num;
        nodes[i].role = VariableRole::Geological;
        nodes[i].mechanism.type = Mechanism::Type::LinearGaussian;
        nodes[i].mechanism.noise_sd = 1.0;
    }
    for (std::size_t pos = 1; pos < d; ++pos) {
        const std::size_t node = order[pos];
        const std::size_t cap = std::min(max_parents, pos);
        const std::size_t npar = rng.index(cap + 1);
        std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pos));
        rng.shuffle(pool);
        for (std::size_t k = 0; k < npar; ++k) {
            nodes[node].parents.push_back(nodes[pool[k]].name);
            const double mag = rng.uniform(0.5, 1.5);
            nodes[node].mechanism.weights.push_back(rng.uniform() < 0.5 ? mag : -mag);
        }
    }
    spec.nodes = std::move(nodes);
    return spec;
}

// --- JSON ------------------------------------------------------------------

std::string scm_to_json(const ScmSpec& spec) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["seed"] = spec.seed;
    j["hide_latents"] = spec.hide_latents;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : spec.nodes) {
        nlohmann::json jn;
        jn["name"] = n.name;
        jn["role"] = to_string(n.role);
        jn["unit"] = n.unit;
        jn["parents"] = n.parents;
        jn["latent"] = n.latent;
        nlohmann::json jm;
        const Mechanism& m = n.mechanism;
        jm["type"] = m.type == Mechanism::Type::LinearGaussian ? "linear_gaussian"
                     : m.type == Mechanism::Type::Monotone     ? "monotone"
                                                               : "formula";
        jm["weights"] = m.weights;
        jm["intercept"] = m.intercept;
        jm["noise_sd"] = m.noise_sd;
        jm["link"] = m.link;
        jm["out_scale"] = m.out_scale;
        jm["out_shift"] = m.out_shift;
        jm["formula"] = m.formula;
        nlohmann::json inputs = nlohmann::json::object();
        for (const auto& [sym, input] : m.inputs) {
            if (input.parent >= 0) {
                inputs[sym] = {{"parent", input.parent}};
            } else {
                inputs[sym] = {{"const", input.constant}};
            }
        }
        jm["inputs"] = inputs;
        jn["mechanism"] = jm;
        nodes.push_back(jn);
    }
    j["nodes"] = nodes;
    return j.dump(2);
}

ScmSpec scm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad SCM JSON: ") + e.what());
    }
    ScmSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.hide_latents = j.value("hide_latents", true);
    for (const auto& jn : j.at("nodes")) {
        ScmNode n;
        n.name = jn.at("name").get<std::string>();
        n.role = role_from_string(jn.value("role", "geological"));
        n.unit = jn.value("unit", "");
        n.parents = jn.value("parents", std::vector<std::string>{});
        n.latent = jn.value("latent", false);
        const auto& jm = jn.at("mechanism");
        const std::string type = jm.value("type", "linear_gaussian");
        Mechanism& m = n.mechanism;
        m.type = type == "linear_gaussian" ? Mechanism::Type::LinearGaussian
                 : type == "monotone"      ? Mechanism::Type::Monotone
                 : type == "formula"       ? Mechanism::Type::Formula
                                           : throw ConfigError("unknown mechanism type " + type);
        m.weights = jm.value("weights", std::vector<double>{});
        m.intercept = jm.value("intercept", 0.0);
        m.noise_sd = jm.value("noise_sd", 0.0);
        m.link = jm.value("link", "identity");
        m.out_scale = jm.value("out_scale", 1.0);
        m.out_shift = jm.value("out_shift", 0.0);
        m.formula = jm.value("formula", "");
        if (jm.contains("inputs")) {
            for (auto it = jm["inputs"].begin(); it != jm["inputs"].end(); ++it) {
                FormulaInput fi;
                if (it.value().contains("parent")) {
                    fi.parent = it.value()["parent"].get<int>();
                } else {
                    fi.parent = -1;
                    fi.constant = it.value().value("const", 0.0);
                }
                m.inputs[it.key()] = fi;
            }
        }
        spec.nodes.push_back(std::move(n));
    }
    return spec;
}

}  // namespace causalfrac
