#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causalfrac/dataset.hpp"
#include "causalfrac/graph.hpp"

namespace causalfrac {

// --- closed-form fracturing formulas --------------------------------------

struct PoroBreakdownParams {
    double v = 0.25;     // Poisson ratio, 0 < v < 0.5
    double S_V = 0.0;    // overburden stress (MPa)
    double S_hi = 0.0;   // initial principal stress (MPa)
    double A_pe = 1.0;   // pore-pressure coefficient (A_pe != 2)
    double p_s = 0.0;    // pore pressure (MPa)
    double sigma_T = 0.0;  // tensile strength (MPa)
};

/// Breakdown stress of a porous formation:
///   p_F = [2(v/(1-v)) S_V + 2 S_hi + A_pe p_s + sigma_T] / (2 - A_pe)
double breakdown_stress_poro(const PoroBreakdownParams& p);

struct FractureWidthParams {
    double x = 0.0;  // position along the fracture (m), 0 <= x <= L
    double t = 0.0;  // time (s); carried but unused by the closed form
    double L = 1.0;  // fracture length (m)
    double v = 0.25;
    double dp_T = 0.0;  // total pressure loss (MPa)
    double H = 0.0;     // fracture height (m)
    double G = 1.0;     // rock shear modulus (MPa), > 0
    // The printed profile uses sqrt(1 + (x/L)^2); the conventional width
    // profile uses sqrt(1 - (x/L)^2). Default follows the printed form.
    bool printed_profile = true;
};

/// Fracture width W(x, t) with W(0, t) = (1 - v) dp_T H / G.
double fracture_width(const FractureWidthParams& p);

struct GasFlowParams {
    double alpha = 1.0;  // unit-conversion coefficient
    double K = 0.0;      // permeability
    double h = 0.0;      // gas layer thickness
    double p_e = 0.0;    // reservoir stress
    double p_wf = 0.0;   // bottom-hole flowing pressure
    double B_g = 1.0;    // gas formation volume factor
    double mu_g = 1.0;   // gas viscosity
    double r_e = 2.0;    // supply radius, r_e > r_w > 0
    double r_w = 1.0;    // well radius
    double S = 0.0;      // skin coefficient
    // Standard radial-flow form is ln(r_e/r_w) + S; the alternative groups
    // the skin inside the logarithm, ln(r_e/r_w + S).
    bool skin_inside_log = false;
};

/// Radial gas inflow: q_g = alpha K h (p_e - p_wf) / (B_g mu_g (ln(r_e/r_w) + S)).
double gas_production(const GasFlowParams& p);

struct GasContentParams {
    double phi = 0.0;  // porosity (fraction)
    double S_g = 0.0;  // gas saturation (fraction)
    double p_e = 0.0;
    double T_0 = 1.0;  // initial reservoir temperature
    double T = 1.0;    // reservoir temperature
    double p_0 = 1.0;  // initial reservoir stress
    double Z = 1.0;    // gas compressibility factor
    double V_p = 0.0;  // adsorbed gas quantity
};

/// Gas content: S_c = phi S_g p_e T_0 / (p_0 T Z) + V_p.
double gas_content(const GasContentParams& p);

struct VolumeBalance {
    double Q_f = 0.0;  // total = Q_p + Q_s + Q_r
    double R_p = 0.0;
    double R_s = 0.0;
    double R_r = 0.0;
};

/// Fluid-volume bookkeeping; ratios sum to one by construction.
VolumeBalance volume_balance(double Q_p, double Q_s, double Q_r);

/// Classic breakdown stress: p_F = 3 sigma_y - sigma_x + sigma_t + p_s.
double breakdown_stress_classic(double sigma_y, double sigma_x, double sigma_t, double p_s);

// --- structural-causal-model synthesizer -----------------------------------

/// One input of a formula mechanism: either wired to a parent node or fixed.
struct FormulaInput {
    int parent = -1;       // index into the node's parent list, or -1
    double constant = 0.0;  // used when parent < 0
};

struct Mechanism {
    enum class Type { LinearGaussian, Monotone, Formula };
    Type type = Type::LinearGaussian;

    // LinearGaussian: value = intercept + sum(w_i parent_i) + noise
    // Monotone:       value = out_shift + out_scale * link(intercept + sum(w_i parent_i) + noise)
    std::vector<double> weights;
    double intercept = 0.0;
    double noise_sd = 0.0;
    std::string link = "identity";  // identity | exp | sigmoid | reciprocal
    double out_scale = 1.0;
    double out_shift = 0.0;

    // Formula: value = formula(inputs) + noise. Inputs are bound by symbol
    // to a parent or a constant; see `scm_formula_symbols`.
    std::string formula;
    std::map<std::string, FormulaInput> inputs;
};

struct ScmNode {
    std::string name;
    VariableRole role = VariableRole::Geological;
    std::string unit;
    std::vector<std::string> parents;
    Mechanism mechanism;
    bool latent = false;  // sampled but dropped from the emitted dataset
};

struct ScmSpec {
    std::vector<ScmNode> nodes;
    std::uint64_t seed = 0;
    bool hide_latents = true;

    const ScmNode* find(const std::string& name) const;
};

/// Input symbols a named formula mechanism expects, in binding order.
std::vector<std::string> scm_formula_symbols(const std::string& formula);

struct SynthResult {
    Dataset data;          // latent columns dropped when spec.hide_latents
    MixedGraph dag;         // full generating DAG, latents included
    std::vector<std::string> latent_names;
};

/// Sample n rows in topological order with independent Gaussian noises.
SynthResult synth_scm(const ScmSpec& spec, std::size_t n);

/// Named presets: FIG8A (volume-balance cluster with a latent displacement
/// volume), FIG8B (stress cluster feeding classic breakdown stress), FIG7
/// (two latent common causes bridging the prepad/breakdown and gas-content/
/// production pairs).
ScmSpec scm_preset(const std::string& name);
std::vector<std::string> scm_preset_names();

/// Random linear-Gaussian SCM over `d` nodes with at most `max_parents`
/// parents per node; used by recovery benchmarks.
ScmSpec random_linear_scm(std::size_t d, std::size_t max_parents, std::uint64_t seed);

std::string scm_to_json(const ScmSpec& spec);
ScmSpec scm_from_json(const std::string& text);

}  // namespace causalfrac
