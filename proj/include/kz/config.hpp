#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kz/defects.hpp"
#include "kz/evolve.hpp"
#include "kz/fit.hpp"
#include "kz/models.hpp"

namespace kz {

// Flat key-value configuration with section headers. Unknown keys are hard
// errors: a silently ignored typo in a physics config is the classic way
// to publish the wrong exponent.
struct RunConfig {
    ModelSpec model;
    double dt = defaults::dt;
    double g_start = defaults::ramp_start;
    std::vector<double> tau_list;
    std::vector<int> n_list;
    std::vector<Method> methods;
    long chi_max = defaults::chi_max;
    double trunc_cutoff = defaults::trunc_cutoff;
    int workers = 0;  // 0: hardware concurrency
    std::string output_dir = "out";

    long n_traj = 1000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool record_partial = true;

    SwapPlan swap_plan = SwapPlan::None;
    int half_swap_block = 2;

    FitWindow window;
    bool has_long_window = false;
    FitWindow long_window;
    Extrapolation extrapolation = Extrapolation::LinearInvN;

    bool use_eta_effective = false;

    std::string canonical_text() const;
    std::uint64_t hash() const;

    QuenchProtocol protocol_for(double tau_q) const {
        return make_protocol(model, tau_q, dt, g_start);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: bad numeric value for '" + key + "': " + value);
    }
}

inline long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: bad integer value for '" + key + "': " + value);
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config: bad boolean value for '" + key + "': " + value);
}

} // namespace detail

// All recognized keys, as printed by --help.
inline const std::map<std::string, std::string>& config_key_help() {
    static const std::map<std::string, std::string> help = {
        {"model.kind", "tfim | ssh | essh | cluster | essh_digital | tfim_inhom"},
        {"model.direction", "forward | reverse (default forward)"},
        {"model.essh_ramp", "hopping | anisotropy (eSSH forward ramp choice)"},
        {"model.delta", "eSSH anisotropy (fixed value)"},
        {"model.v", "AB coupling where fixed (default 1)"},
        {"model.w", "BA coupling where fixed (default 1)"},
        {"model.j0", "inhomogeneous chain center coupling (default 1)"},
        {"model.alpha", "inhomogeneous depth in [0,1) (default 0)"},
        {"model.q", "inhomogeneous power >= 1 (default 2)"},
        {"protocol.tau_q", "comma list of quench rates"},
        {"protocol.dt", "Trotter step (default 0.05)"},
        {"protocol.g_start", "initial ramp value for single-ramp quenches (default 5)"},
        {"sweep.n", "comma list of chain sizes"},
        {"sweep.method", "comma list of expect | mc_full | mc_sz"},
        {"sweep.chi_max", "bond-dimension cap (default 256)"},
        {"sweep.trunc_cutoff", "discarded-weight cutoff (default 1e-8)"},
        {"sweep.workers", "worker threads, 0 = hardware (KZ_WORKERS overrides)"},
        {"sweep.output_dir", "output directory (default out)"},
        {"mc.n_traj", "Monte-Carlo trajectories per run (default 1000)"},
        {"mc.seed", "base RNG seed; required when any mc method is selected"},
        {"mc.partial", "record eta_partial for expectation runs (default true)"},
        {"swap.plan", "none | half | full (default none)"},
        {"swap.half_block", "block tag receiving SWAPs in half mode: 1 | 2 (default 2)"},
        {"fit.window", "tau window 'min,max' (default 2,64)"},
        {"fit.window_long", "optional second window 'min,max' for two-regime fits"},
        {"fit.extrapolation", "linear_inv_n | largest_n (default linear_inv_n)"},
        {"estimate.eta_effective", "subtract the final ground state's density (default false)"},
    };
    return help;
}

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section at line " +
                                            std::to_string(line_no));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(line_no));
        const std::string key = section + "." + detail::trim(line.substr(0, eq));
        if (!config_key_help().count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' at line " +
                                        std::to_string(line_no));
        if (kv.count(key))
            throw std::invalid_argument("config: duplicate key '" + key + "'");
        kv[key] = detail::trim(line.substr(eq + 1));
    }

    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::string();
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    // model
    {
        const std::string kind = take("model.kind");
        if (kind == "tfim" || kind.empty()) cfg.model.kind = ModelKind::TFIM;
        else if (kind == "ssh") cfg.model.kind = ModelKind::SSH;
        else if (kind == "essh") cfg.model.kind = ModelKind::ESSH;
        else if (kind == "cluster") cfg.model.kind = ModelKind::CLUSTER;
        else if (kind == "essh_digital") cfg.model.kind = ModelKind::ESSH_DIGITAL;
        else if (kind == "tfim_inhom") cfg.model.kind = ModelKind::TFIM_INHOM;
        else throw std::invalid_argument("config: unknown model.kind '" + kind + "'");

        const std::string dir = take("model.direction");
        if (dir == "reverse") cfg.model.direction = Direction::Reverse;
        else if (!dir.empty() && dir != "forward")
            throw std::invalid_argument("config: unknown model.direction '" + dir + "'");

        const std::string ramp = take("model.essh_ramp");
        if (ramp == "anisotropy") cfg.model.essh_ramp = EsshRamp::Anisotropy;
        else if (!ramp.empty() && ramp != "hopping")
            throw std::invalid_argument("config: unknown model.essh_ramp '" + ramp + "'");

        if (const auto v = take("model.delta"); !v.empty())
            cfg.model.delta = detail::parse_double("model.delta", v);
        if (const auto v = take("model.v"); !v.empty())
            cfg.model.v = detail::parse_double("model.v", v);
        if (const auto v = take("model.w"); !v.empty())
            cfg.model.w = detail::parse_double("model.w", v);
        if (const auto v = take("model.j0"); !v.empty())
            cfg.model.j0 = detail::parse_double("model.j0", v);
        if (const auto v = take("model.alpha"); !v.empty())
            cfg.model.alpha = detail::parse_double("model.alpha", v);
        if (const auto v = take("model.q"); !v.empty())
            cfg.model.q = detail::parse_double("model.q", v);
    }

    // protocol
    for (const std::string& item : detail::split_list(take("protocol.tau_q")))
        cfg.tau_list.push_back(detail::parse_double("protocol.tau_q", item));
    if (const auto v = take("protocol.dt"); !v.empty())
        cfg.dt = detail::parse_double("protocol.dt", v);
    if (const auto v = take("protocol.g_start"); !v.empty())
        cfg.g_start = detail::parse_double("protocol.g_start", v);

    // sweep
    for (const std::string& item : detail::split_list(take("sweep.n")))
        cfg.n_list.push_back(static_cast<int>(detail::parse_long("sweep.n", item)));
    for (const std::string& item : detail::split_list(take("sweep.method"))) {
        if (item == "expect") cfg.methods.push_back(Method::Expect);
        else if (item == "mc_full") cfg.methods.push_back(Method::McFullBasis);
        else if (item == "mc_sz") cfg.methods.push_back(Method::McSzOnly);
        else throw std::invalid_argument("config: unknown method '" + item + "'");
    }
    if (const auto v = take("sweep.chi_max"); !v.empty())
        cfg.chi_max = detail::parse_long("sweep.chi_max", v);
    if (const auto v = take("sweep.trunc_cutoff"); !v.empty())
        cfg.trunc_cutoff = detail::parse_double("sweep.trunc_cutoff", v);
    if (const auto v = take("sweep.workers"); !v.empty())
        cfg.workers = static_cast<int>(detail::parse_long("sweep.workers", v));
    if (const auto v = take("sweep.output_dir"); !v.empty()) cfg.output_dir = v;

    // mc
    if (const auto v = take("mc.n_traj"); !v.empty())
        cfg.n_traj = detail::parse_long("mc.n_traj", v);
    if (const auto v = take("mc.seed"); !v.empty()) {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_long("mc.seed", v));
        cfg.seed_given = true;
    }
    if (const auto v = take("mc.partial"); !v.empty())
        cfg.record_partial = detail::parse_bool("mc.partial", v);

    // swap
    if (const auto v = take("swap.plan"); !v.empty()) {
        if (v == "none") cfg.swap_plan = SwapPlan::None;
        else if (v == "half") cfg.swap_plan = SwapPlan::Half;
        else if (v == "full") cfg.swap_plan = SwapPlan::Full;
        else throw std::invalid_argument("config: unknown swap.plan '" + v + "'");
    }
    if (const auto v = take("swap.half_block"); !v.empty())
        cfg.half_swap_block = static_cast<int>(detail::parse_long("swap.half_block", v));

    // fit
    if (const auto v = take("fit.window"); !v.empty()) {
        const auto parts = detail::split_list(v);
        if (parts.size() != 2) throw std::invalid_argument("config: fit.window needs 'min,max'");
        cfg.window = {detail::parse_double("fit.window", parts[0]),
                      detail::parse_double("fit.window", parts[1])};
    }
    if (const auto v = take("fit.window_long"); !v.empty()) {
        const auto parts = detail::split_list(v);
        if (parts.size() != 2)
            throw std::invalid_argument("config: fit.window_long needs 'min,max'");
        cfg.long_window = {detail::parse_double("fit.window_long", parts[0]),
                           detail::parse_double("fit.window_long", parts[1])};
        cfg.has_long_window = true;
    }
    if (const auto v = take("fit.extrapolation"); !v.empty()) {
        if (v == "linear_inv_n") cfg.extrapolation = Extrapolation::LinearInvN;
        else if (v == "largest_n") cfg.extrapolation = Extrapolation::LargestN;
        else throw std::invalid_argument("config: unknown fit.extrapolation '" + v + "'");
    }

    // estimate
    if (const auto v = take("estimate.eta_effective"); !v.empty())
        cfg.use_eta_effective = detail::parse_bool("estimate.eta_effective", v);

    if (!kv.empty())
        throw std::invalid_argument("config: unconsumed key '" + kv.begin()->first + "'");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

inline void validate_config(const RunConfig& cfg) {
    if (cfg.tau_list.empty()) throw std::invalid_argument("config: protocol.tau_q is empty");
    for (double tau : cfg.tau_list)
        if (!(tau > 0.0)) throw std::invalid_argument("config: tau_q values must be positive");
    if (cfg.n_list.empty()) throw std::invalid_argument("config: sweep.n is empty");
    if (cfg.methods.empty()) throw std::invalid_argument("config: sweep.method is empty");
    for (int n : cfg.n_list) validate_model(cfg.model, n);
    bool any_mc = false;
    for (Method m : cfg.methods) any_mc = any_mc || m != Method::Expect;
    if (any_mc && !cfg.seed_given)
        throw std::invalid_argument("config: mc.seed is required when a Monte-Carlo method is selected");
    if (any_mc && cfg.n_traj < 1)
        throw std::invalid_argument("config: mc.n_traj must be positive");
    if (cfg.chi_max < 1 || cfg.trunc_cutoff < 0.0)
        throw std::invalid_argument("config: invalid truncation settings");
    if (cfg.window.tau_min > cfg.window.tau_max)
        throw std::invalid_argument("config: fit.window is inverted");
    if (cfg.swap_plan != SwapPlan::None && !is_ssh_family(cfg.model.kind))
        throw std::invalid_argument("config: swap injection needs an SSH-family model");
    if (cfg.use_eta_effective &&
        !(cfg.model.kind == ModelKind::ESSH && cfg.model.essh_ramp == EsshRamp::Anisotropy))
        throw std::invalid_argument(
            "config: eta_effective applies to the eSSH anisotropy ramp only");
    // protocol construction validates g_start against the critical point
    make_protocol(cfg.model, cfg.tau_list.front(), cfg.dt, cfg.g_start);
}

inline std::string RunConfig::canonical_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "model.kind=" << model_name(model)
        << ";direction=" << (model.direction == Direction::Forward ? "forward" : "reverse")
        << ";essh_ramp=" << (model.essh_ramp == EsshRamp::Hopping ? "hopping" : "anisotropy")
        << ";delta=" << model.delta << ";v=" << model.v << ";w=" << model.w
        << ";j0=" << model.j0 << ";alpha=" << model.alpha << ";q=" << model.q << ";dt=" << dt
        << ";g_start=" << g_start << ";tau=";
    for (double t : tau_list) out << t << ',';
    out << ";n=";
    for (int n : n_list) out << n << ',';
    out << ";methods=";
    for (Method m : methods) out << method_name(m) << ',';
    out << ";chi_max=" << chi_max << ";cutoff=" << trunc_cutoff << ";n_traj=" << n_traj
        << ";seed=" << seed << ";partial=" << record_partial
        << ";swap=" << swap_plan_name(swap_plan) << ";half_block=" << half_swap_block
        << ";window=" << window.tau_min << ',' << window.tau_max;
    if (has_long_window)
        out << ";window_long=" << long_window.tau_min << ',' << long_window.tau_max;
    out << ";extrapolation=" << extrapolation_name(extrapolation)
        << ";eta_effective=" << use_eta_effective;
    return out.str();
}

inline std::uint64_t RunConfig::hash() const {
    // FNV-1a over the canonical serialization
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[h & 0xF];
        h >>= 4;
    }
    return s;
}

} // namespace kz
