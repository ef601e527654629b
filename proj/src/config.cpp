#include "lahda/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace lahda {

namespace {

template <class E>
struct EnumNames {
    std::vector<std::pair<E, std::string>> names;

    std::string name(E v) const
    {
        for (const auto& [e, s] : names) {
            if (e == v) {
                return s;
            }
        }
        return "?";
    }

    E parse(const std::string& s, const std::string& field) const
    {
        std::string allowed;
        for (const auto& [e, n] : names) {
            if (n == s) {
                return e;
            }
            allowed += (allowed.empty() ? "" : "|") + n;
        }
        throw ConfigError(fmt::format("{}: invalid value '{}' (expected {})", field, s, allowed));
    }
};

const EnumNames<ModelKind> model_names{{{ModelKind::kse, "kse"}, {ModelKind::nagumo, "nagumo"}}};
const EnumNames<Method> method_names{{{Method::A, "A"}, {Method::B, "B"}}};
const EnumNames<LahVariant> variant_names{{{LahVariant::non_flow, "nonflow"},
                                           {LahVariant::flow, "flow"},
                                           {LahVariant::non_flow_obs_accum, "nonflow-obs-accum"}}};
const EnumNames<MeshMode> mesh_names{{{MeshMode::adaptive, "adaptive"}, {MeshMode::uniform, "uniform"}}};
const EnumNames<Coupling> coupling_names{{{Coupling::coupled, "coupled"}, {Coupling::uncoupled, "uncoupled"}}};
const EnumNames<ObsKind> kind_names{{{ObsKind::pointwise, "pointwise"}, {ObsKind::nonlocal, "nonlocal"}}};
const EnumNames<ObsLayout> layout_names{
    {{ObsLayout::midpoints, "midpoints"}, {ObsLayout::offset, "offset"}, {ObsLayout::range, "range"}}};

struct Field {
    std::string section;
    std::string key;
    std::function<void(CycleConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const CycleConfig&)> get;
};

template <class T>
T parse_number(const std::string& s, const std::string& field)
{
    T v{};
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", field, s));
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& field)
{
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw ConfigError(fmt::format("{}: invalid boolean '{}'", field, s));
}

template <class Access>
Field real(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](CycleConfig& c, const std::string& v, const std::string& f) {
                access(c) = parse_number<double>(v, f);
            },
            [access](const CycleConfig& c) {
                return fmt::format("{:.17g}", access(const_cast<CycleConfig&>(c)));
            }};
}

template <class Access>
Field integer(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](CycleConfig& c, const std::string& v, const std::string& f) {
                using T = std::remove_reference_t<decltype(access(c))>;
                access(c) = parse_number<T>(v, f);
            },
            [access](const CycleConfig& c) { return fmt::format("{}", access(const_cast<CycleConfig&>(c))); }};
}

template <class Access>
Field boolean(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](CycleConfig& c, const std::string& v, const std::string& f) { access(c) = parse_bool(v, f); },
            [access](const CycleConfig& c) {
                return std::string(access(const_cast<CycleConfig&>(c)) ? "true" : "false");
            }};
}

template <class E, class Access>
Field enumeration(std::string section, std::string key, const EnumNames<E>& names, Access access)
{
    return {std::move(section), std::move(key),
            [access, &names](CycleConfig& c, const std::string& v, const std::string& f) {
                access(c) = names.parse(v, f);
            },
            [access, &names](const CycleConfig& c) { return names.name(access(const_cast<CycleConfig&>(c))); }};
}

#define LAHDA_FIELD(expr) [](CycleConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        enumeration("experiment", "model", model_names, LAHDA_FIELD(model)),
        enumeration("experiment", "method", method_names, LAHDA_FIELD(method)),
        enumeration("experiment", "variant", variant_names, LAHDA_FIELD(variant)),
        integer("experiment", "cycles", LAHDA_FIELD(cycles)),
        integer("experiment", "spinup_cycles", LAHDA_FIELD(spinup_cycles)),
        real("experiment", "dt_obs", LAHDA_FIELD(dt_obs)),
        real("experiment", "dt_solver", LAHDA_FIELD(dt_solver)),
        integer("experiment", "seed", LAHDA_FIELD(seed)),
        integer("experiment", "threads", LAHDA_FIELD(threads)),
        real("experiment", "rmse_window", LAHDA_FIELD(rmse_window)),

        real("kse", "L1", LAHDA_FIELD(kse.L1)),
        real("kse", "L2", LAHDA_FIELD(kse.L2)),
        real("kse", "mu1", LAHDA_FIELD(kse.mu1)),
        real("kse", "mu_min", LAHDA_FIELD(kse.mu_min)),
        real("kse", "mu_max", LAHDA_FIELD(kse.mu_max)),
        real("kse", "omega", LAHDA_FIELD(kse.omega)),
        real("kse", "c1", LAHDA_FIELD(kse.c1)),
        real("kse", "c2", LAHDA_FIELD(kse.c2)),
        boolean("kse", "mu2_literal", LAHDA_FIELD(kse.mu2_literal)),

        real("nagumo", "eps2", LAHDA_FIELD(nagumo.eps2)),
        real("nagumo", "a", LAHDA_FIELD(nagumo.a)),
        real("nagumo", "L", LAHDA_FIELD(nagumo.L)),
        real("nagumo", "x0", LAHDA_FIELD(nagumo.x0)),
        real("nagumo", "tol", LAHDA_FIELD(nagumo_control.tol)),
        real("nagumo", "dt_initial", LAHDA_FIELD(nagumo_control.dt_initial)),
        real("nagumo", "dt_min", LAHDA_FIELD(nagumo_control.dt_min)),
        real("nagumo", "dt_max", LAHDA_FIELD(nagumo_control.dt_max)),

        integer("ensemble", "ne", LAHDA_FIELD(ne)),
        integer("ensemble", "nse", LAHDA_FIELD(nse)),
        real("ensemble", "p0", LAHDA_FIELD(p0)),
        real("ensemble", "q", LAHDA_FIELD(q)),

        real("analysis", "r", LAHDA_FIELD(r)),
        real("analysis", "rho", LAHDA_FIELD(rho)),
        real("analysis", "r0", LAHDA_FIELD(r0)),
        real("analysis", "loc_alpha_h", LAHDA_FIELD(loc_alpha_h)),
        enumeration("analysis", "coupling", coupling_names, LAHDA_FIELD(coupling)),
        boolean("analysis", "perturbed_obs", LAHDA_FIELD(perturbed_obs)),

        enumeration("mesh", "mode", mesh_names, LAHDA_FIELD(mesh)),
        integer("mesh", "intervals", LAHDA_FIELD(intervals)),
        real("mesh", "alpha_h", LAHDA_FIELD(alpha_h)),
        integer("mesh", "smoothing", LAHDA_FIELD(smoothing)),
        real("mesh", "sigma", LAHDA_FIELD(sigma)),
        boolean("mesh", "obs_metric", LAHDA_FIELD(obs_metric)),
        integer("mesh", "remesh_steps", LAHDA_FIELD(remesh_steps)),

        enumeration("observations", "kind", kind_names, LAHDA_FIELD(obs.kind)),
        integer("observations", "count", LAHDA_FIELD(obs.count)),
        enumeration("observations", "layout", layout_names, LAHDA_FIELD(obs.layout)),
        real("observations", "first", LAHDA_FIELD(obs.first)),
        real("observations", "spacing", LAHDA_FIELD(obs.spacing)),
        real("observations", "range_lo", LAHDA_FIELD(obs.range_lo)),
        real("observations", "range_hi", LAHDA_FIELD(obs.range_hi)),
        boolean("observations", "moving", LAHDA_FIELD(obs.moving)),
        real("observations", "amplitude", LAHDA_FIELD(obs.amplitude)),
        real("observations", "omega", LAHDA_FIELD(obs.omega)),
        real("observations", "delta", LAHDA_FIELD(obs.delta)),
        real("observations", "r_obs", LAHDA_FIELD(obs.r_obs)),
        integer("observations", "components", LAHDA_FIELD(obs.components)),

        integer("truth", "refinement", LAHDA_FIELD(truth_refinement)),
        real("truth", "spinup", LAHDA_FIELD(truth_spinup)),
    };
    return table;
}

#undef LAHDA_FIELD

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) {
        throw ConfigError(fmt::format("{}: {}", field, what));
    }
}

} // namespace

void CycleConfig::validate() const
{
    require(ne >= 2, "ensemble.ne", "need at least 2 members");
    require(nse >= 1 && nse <= ne, "ensemble.nse", "must lie in [1, ne]");
    require(dt_obs > 0.0, "experiment.dt_obs", "must be positive");
    require(cycles >= 1, "experiment.cycles", "must be at least 1");
    require(spinup_cycles >= 0 && spinup_cycles < cycles, "experiment.spinup_cycles", "must lie in [0, cycles)");
    require(rmse_window > 0.0, "experiment.rmse_window", "must be positive");
    require(threads >= 1, "experiment.threads", "must be at least 1");
    require(intervals >= 4, "mesh.intervals", "need at least 4 intervals");
    require(p0 > 0.0, "ensemble.p0", "must be positive");
    require(q >= 0.0, "ensemble.q", "must be non-negative");
    require(r > 0.0, "analysis.r", "must be positive");
    require(rho >= 1.0, "analysis.rho", "must be at least 1");
    require(r0 > 0.0, "analysis.r0", "must be positive");
    require(alpha_h > 0.0, "mesh.alpha_h", "must be positive");
    require(loc_alpha_h >= 0.0, "analysis.loc_alpha_h", "must be non-negative");
    require(smoothing >= 0, "mesh.smoothing", "must be non-negative");
    require(sigma > 0.0, "mesh.sigma", "must be positive");
    require(remesh_steps >= 1, "mesh.remesh_steps", "must be at least 1");
    require(obs.count >= 1, "observations.count", "need at least one observation");
    require(obs.delta > 0.0, "observations.delta", "must be positive");
    require(obs.r_obs > 0.0, "observations.r_obs", "must be positive");
    require(obs.components >= 0, "observations.components", "must be non-negative");
    require(obs.layout != ObsLayout::offset || obs.spacing > 0.0 || obs.count == 1, "observations.spacing",
            "must be positive for the offset layout");
    require(obs.layout != ObsLayout::range || obs.range_hi >= obs.range_lo, "observations.range_hi",
            "must not be below range_lo");
    require(truth_refinement >= 1, "truth.refinement", "must be at least 1");
    require(truth_spinup >= 0.0, "truth.spinup", "must be non-negative");
    if (model == ModelKind::kse) {
        require(dt_solver > 0.0, "experiment.dt_solver", "must be positive");
        const double ratio = dt_obs / dt_solver;
        require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio && ratio >= 1.0, "experiment.dt_solver",
                "must divide dt_obs");
        try {
            kse.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(fmt::format("kse: {}", e.what()));
        }
        require(obs.components <= 2, "observations.components", "KSE has two components");
    } else {
        try {
            nagumo.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(fmt::format("nagumo: {}", e.what()));
        }
        require(nagumo_control.tol > 0.0, "nagumo.tol", "must be positive");
        require(obs.components <= 1, "observations.components", "the Nagumo model has one component");
    }
}

CycleConfig parse_config(std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("config syntax error: {}", e.what()));
    }
    std::map<std::string, const Field*> index;
    std::set<std::string> sections;
    for (const auto& f : fields()) {
        index[f.section + "." + f.key] = &f;
        sections.insert(f.section);
    }
    CycleConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(fmt::format("{}: keys must appear inside a [section]", section));
        }
        if (!sections.count(section)) {
            throw ConfigError(fmt::format("[{}]: unknown section", section));
        }
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            const auto it = index.find(name);
            if (it == index.end()) {
                throw ConfigError(fmt::format("{}: unknown key", name));
            }
            std::string v = value.data();
            while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) {
                v.pop_back();
            }
            it->second->set(cfg, v, name);
        }
    }
    cfg.validate();
    return cfg;
}

CycleConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path));
    }
    return parse_config(in);
}

std::string write_config(const CycleConfig& cfg)
{
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", f.section);
            section = f.section;
        }
        out += fmt::format("{} = {}\n", f.key, f.get(cfg));
    }
    return out;
}

std::string to_string(ModelKind v) { return model_names.name(v); }
std::string to_string(Method v) { return method_names.name(v); }
std::string to_string(LahVariant v) { return variant_names.name(v); }
std::string to_string(MeshMode v) { return mesh_names.name(v); }
std::string to_string(Coupling v) { return coupling_names.name(v); }
std::string to_string(ObsKind v) { return kind_names.name(v); }
std::string to_string(ObsLayout v) { return layout_names.name(v); }

} // namespace lahda
