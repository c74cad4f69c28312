#include "nsv/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nsv/snapshot.hpp"

namespace nsv {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap tokenize(const std::string& text) {
    SectionMap sections;
    std::istringstream in(text);
    std::string line, current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            current = trim(line.substr(1, line.size() - 2));
            sections.try_emplace(current);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || current.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value' inside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!sections[current].emplace(key, val).second)
            throw ConfigError("config: duplicate key " + current + "." + key);
    }
    return sections;
}

class Extractor {
  public:
    explicit Extractor(SectionMap sections) : sections_(std::move(sections)) {}

    bool has(const std::string& sec, const std::string& key) {
        auto s = sections_.find(sec);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string take(const std::string& sec, const std::string& key) {
        used_[sec].insert(key);
        return sections_.at(sec).at(key);
    }

    double take_double(const std::string& sec, const std::string& key) {
        const std::string v = take(sec, key);
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config: " + sec + "." + key + " is not a number: " + v);
        }
    }

    long take_long(const std::string& sec, const std::string& key) {
        const std::string v = take(sec, key);
        try {
            std::size_t pos = 0;
            const long d = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config: " + sec + "." + key + " is not an integer: " + v);
        }
    }

    void reject_unknown() const {
        static const std::map<std::string, int> known_sections{
            {"grid", 0}, {"time", 0},      {"model", 0}, {"cost", 0}, {"target", 0},
            {"box", 0},  {"optimizer", 0}, {"init", 0},  {"output", 0}, {"run", 0}};
        for (const auto& [sec, kv] : sections_) {
            if (!known_sections.count(sec))
                throw ConfigError("config: unknown section [" + sec + "]");
            auto u = used_.find(sec);
            for (const auto& [key, val] : kv) {
                (void)val;
                if (u == used_.end() || !u->second.count(key))
                    throw ConfigError("config: unknown key " + sec + "." + key);
            }
        }
    }

  private:
    SectionMap sections_;
    std::map<std::string, std::set<std::string>> used_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    SectionMap sections = tokenize(text);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value: " + ov);
        const std::string sec = trim(ov.substr(0, dot));
        const std::string key = trim(ov.substr(dot + 1, eq - dot - 1));
        const std::string val = trim(ov.substr(eq + 1));
        if (sec.empty() || key.empty() || val.empty())
            throw ConfigError("override must look like section.key=value: " + ov);
        sections[sec][key] = val;
    }

    Extractor ex(std::move(sections));
    RunConfig cfg;

    if (!ex.has("grid", "n")) throw ConfigError("config: grid.n is required");
    cfg.n = int(ex.take_long("grid", "n"));
    if (ex.has("grid", "L")) cfg.length = ex.take_double("grid", "L");
    if (ex.has("grid", "dealias")) cfg.dealias = ex.take_double("grid", "dealias");

    if (!ex.has("time", "T") || !ex.has("time", "steps"))
        throw ConfigError("config: time.T and time.steps are required");
    cfg.horizon = ex.take_double("time", "T");
    cfg.steps = int(ex.take_long("time", "steps"));
    if (ex.has("time", "scheme")) {
        const std::string s = ex.take("time", "scheme");
        if (s == "imex-euler")
            cfg.scheme = TimeScheme::imex_euler;
        else if (s == "cnab")
            cfg.scheme = TimeScheme::cnab;
        else
            throw ConfigError("config: time.scheme must be imex-euler or cnab, got " + s);
    }

    for (const char* k : {"mu", "nu", "alpha", "beta", "r"})
        if (!ex.has("model", k))
            throw ConfigError(std::string("config: model.") + k + " is required");
    cfg.model.mu = ex.take_double("model", "mu");
    cfg.model.nu = ex.take_double("model", "nu");
    cfg.model.alpha = ex.take_double("model", "alpha");
    cfg.model.beta = ex.take_double("model", "beta");
    cfg.model.r = ex.take_double("model", "r");
    cfg.model.horizon = cfg.horizon;

    if (ex.has("cost", "kappa")) cfg.kappa = ex.take_double("cost", "kappa");
    if (ex.has("cost", "lambda")) cfg.lambda = ex.take_double("cost", "lambda");

    if (ex.has("target", "kind")) cfg.target_kind = ex.take("target", "kind");
    if (ex.has("target", "amplitude")) cfg.target_amplitude = ex.take_double("target", "amplitude");
    if (ex.has("target", "seed")) cfg.target_seed = std::uint64_t(ex.take_long("target", "seed"));
    if (ex.has("target", "prefix")) cfg.target_prefix = ex.take("target", "prefix");
    if (cfg.target_kind != "zero" && cfg.target_kind != "synthetic" && cfg.target_kind != "files")
        throw ConfigError("config: target.kind must be zero, synthetic or files");

    if (ex.has("box", "u_min")) cfg.u_min = ex.take_double("box", "u_min");
    if (ex.has("box", "u_max")) cfg.u_max = ex.take_double("box", "u_max");

    if (ex.has("optimizer", "max_iters"))
        cfg.optimizer.max_iters = int(ex.take_long("optimizer", "max_iters"));
    if (ex.has("optimizer", "step0")) cfg.optimizer.step0 = ex.take_double("optimizer", "step0");
    if (ex.has("optimizer", "armijo_c"))
        cfg.optimizer.armijo_c = ex.take_double("optimizer", "armijo_c");
    if (ex.has("optimizer", "shrink")) cfg.optimizer.shrink = ex.take_double("optimizer", "shrink");
    if (ex.has("optimizer", "tol_vi")) cfg.optimizer.tol_vi = ex.take_double("optimizer", "tol_vi");

    if (ex.has("init", "kind")) cfg.init_kind = ex.take("init", "kind");
    if (ex.has("init", "amplitude")) cfg.init_amplitude = ex.take_double("init", "amplitude");
    if (ex.has("init", "path")) cfg.init_path = ex.take("init", "path");
    if (cfg.init_kind != "zero" && cfg.init_kind != "taylor-green" &&
        cfg.init_kind != "random-divfree" && cfg.init_kind != "file")
        throw ConfigError("config: init.kind must be zero, taylor-green, random-divfree or file");

    if (ex.has("output", "dir")) cfg.output_dir = ex.take("output", "dir");
    if (ex.has("output", "snapshot_every"))
        cfg.snapshot_every = int(ex.take_long("output", "snapshot_every"));

    if (ex.has("run", "seed")) cfg.seed = std::uint64_t(ex.take_long("run", "seed"));

    ex.reject_unknown();

    // revalidate the module-level invariants up front
    try {
        cfg.make_grid();
        cfg.model.validate();
        cfg.optimizer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.steps < 1) throw ConfigError("config: time.steps must be >= 1");
    if (!(cfg.u_min <= cfg.u_max)) throw ConfigError("config: box requires u_min <= u_max");
    if (cfg.kappa < 0.0 || cfg.lambda < 0.0)
        throw ConfigError("config: cost weights must be nonnegative");
    if (cfg.snapshot_every < 0) throw ConfigError("config: output.snapshot_every must be >= 0");
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

PeriodicGrid RunConfig::make_grid() const { return PeriodicGrid(n, length, dealias); }

TimeGrid RunConfig::make_time_grid() const { return TimeGrid{steps, horizon}; }

SpectralField RunConfig::make_initial_condition() const {
    const PeriodicGrid g = make_grid();
    if (init_kind == "zero") return zero_spectral(g);
    if (init_kind == "taylor-green") return taylor_green(g, init_amplitude);
    if (init_kind == "random-divfree") return random_divfree(g, init_amplitude, seed + 17);
    // file
    if (init_path.empty()) throw ConfigError("config: init.path required for init.kind=file");
    const Snapshot snap = read_snapshot(init_path);
    if (snap.field.grid.n() != g.n())
        throw ConfigError("config: initial-condition snapshot grid does not match grid.n");
    PhysicalField f(g);
    f.comp = snap.field.comp;
    return leray_project(to_spectral(f));
}

BoxConstraints RunConfig::make_box() const { return BoxConstraints::uniform(u_min, u_max); }

TargetField RunConfig::make_target() const {
    const PeriodicGrid g = make_grid();
    const TimeGrid tg = make_time_grid();
    if (target_kind == "zero") return zero_target(g, tg);
    if (target_kind == "synthetic") {
        ControlSchedule ctrl = random_control(g, tg, target_amplitude, target_seed);
        ctrl = project_box(ctrl, make_box());
        return target_from_trajectory(solve_forward(make_initial_condition(), ctrl, model));
    }
    // files
    if (target_prefix.empty())
        throw ConfigError("config: target.prefix required for target.kind=files");
    std::vector<SpectralField> frames;
    frames.reserve(tg.steps + 1);
    for (int m = 0; m <= tg.steps; ++m) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%06d.nsvd", m);
        const Snapshot snap = read_snapshot(target_prefix + buf);
        if (snap.field.grid.n() != g.n())
            throw ConfigError("config: target snapshot grid does not match grid.n");
        PhysicalField f(g);
        f.comp = snap.field.comp;
        frames.push_back(to_spectral(f));
    }
    return ::nsv::make_target(std::move(frames), tg);
}

CostConfig RunConfig::make_cost() const {
    CostConfig c;
    c.kappa = kappa;
    c.lambda = lambda;
    c.target = make_target();
    return c;
}

}  // namespace nsv
