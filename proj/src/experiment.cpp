#include "lmc/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "lmc/csv.hpp"

namespace lmc {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

//---------------------------------------------------------------------------//
// Formatting
//---------------------------------------------------------------------------//

std::string format_double(double value)
{
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string chain_to_csv(const Chain& chain)
{
    std::string out = "step";
    for (std::size_t d = 0; d < chain.dim; ++d) {
        out += ",x" + std::to_string(d);
    }
    out += ",log_p,accepted\n";
    for (std::size_t i = 0; i < chain.size(); ++i) {
        out += std::to_string(i);
        for (double v : chain.row(i)) {
            out += ',';
            out += format_double(v);
        }
        out += ',';
        out += format_double(chain.log_ps[i]);
        out += chain.accepted[i] ? ",1\n" : ",0\n";
    }
    return out;
}

std::string grid_to_csv(const Grid2D& grid)
{
    std::string out;
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            if (c > 0) {
                out += ',';
            }
            out += format_double(grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

//---------------------------------------------------------------------------//
// Config
//---------------------------------------------------------------------------//

namespace {

template<class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

TargetConfig parse_target(const json& j)
{
    if (!j.is_object() || !j.contains("name")) {
        throw ConfigError("config: target block needs a name");
    }
    TargetConfig t;
    t.name = j.at("name").get<std::string>();
    if (t.name == "particle_box") {
        t.box.lx = get_or(j, "Lx", 1.0);
        t.box.ly = get_or(j, "Ly", 1.0);
        t.box.nx = get_or(j, "nx", 1);
        t.box.ny = get_or(j, "ny", 1);
        t.gmax = get_or(j, "gmax", kDefaultGradClamp);
        t.consts.rho = get_or(j, "rho", 1.0);
        t.consts.hbar = get_or(j, "hbar", 1.0);
        t.consts.mass = get_or(j, "m", 1.0);
    } else if (t.name == "gauss_mix") {
        if (!j.contains("components") || !j.at("components").is_array()) {
            throw ConfigError("config: gauss_mix needs a components list");
        }
        for (const auto& c : j.at("components")) {
            GaussComponent comp;
            comp.weight = get_or(c, "weight", 1.0);
            comp.mean = get_or(c, "mean", Vector{});
            comp.variance = get_or(c, "variance", Vector{});
            t.components.push_back(std::move(comp));
        }
    } else {
        throw ConfigError("config: unknown target '" + t.name + "'");
    }
    return t;
}

SamplerBlock parse_sampler(const json& j)
{
    if (!j.is_object() || !j.contains("name")) {
        throw ConfigError("config: sampler block needs a name");
    }
    const auto name = j.at("name").get<std::string>();
    SamplerBlock block;
    block.label = get_or(j, "label", name);
    if (name == "mala") {
        block.config = MalaConfig{get_or(j, "eps", MalaConfig{}.eps)};
    } else if (name == "adaptive") {
        const json a = j.contains("adaptation") ? j.at("adaptation") : j;
        AdaptParams p;
        p.beta = get_or(a, "beta", p.beta);
        p.xi = get_or(a, "xi", p.xi);
        p.eps = get_or(a, "eps", p.eps);
        p.sigma0 = get_or(a, "sigma0", p.sigma0);
        p.base_floor = get_or(a, "base_floor", p.base_floor);
        p.norm_floor = get_or(a, "norm_floor", p.norm_floor);
        block.config = AdaptiveConfig{p};
    } else if (name == "hmc") {
        HmcParams p;
        p.eps_leap = get_or(j, "eps_leap", p.eps_leap);
        p.n_leap = get_or(j, "n_leap", p.n_leap);
        block.config = HmcConfig{p};
    } else {
        throw ConfigError("config: unknown sampler '" + name + "'");
    }
    return block;
}

ordered_json sampler_to_json(const SamplerBlock& block)
{
    ordered_json j;
    j["name"] = sampler_name(block.config);
    j["label"] = block.label;
    if (const auto* m = std::get_if<MalaConfig>(&block.config)) {
        j["eps"] = m->eps;
    } else if (const auto* a = std::get_if<AdaptiveConfig>(&block.config)) {
        const auto& p = a->params;
        j["adaptation"] = {{"beta", p.beta},         {"xi", p.xi},
                           {"eps", p.eps},           {"sigma0", p.sigma0},
                           {"base_floor", p.base_floor},
                           {"norm_floor", p.norm_floor}};
    } else {
        const auto& p = std::get<HmcConfig>(block.config).params;
        j["eps_leap"] = p.eps_leap;
        j["n_leap"] = p.n_leap;
    }
    return j;
}

ordered_json target_to_json(const TargetConfig& t)
{
    ordered_json j;
    j["name"] = t.name;
    if (t.name == "particle_box") {
        j["Lx"] = t.box.lx;
        j["Ly"] = t.box.ly;
        j["nx"] = t.box.nx;
        j["ny"] = t.box.ny;
        j["gmax"] = t.gmax;
        j["rho"] = t.consts.rho;
        j["hbar"] = t.consts.hbar;
        j["m"] = t.consts.mass;
    } else {
        j["components"] = ordered_json::array();
        for (const auto& c : t.components) {
            j["components"].push_back(
                {{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
        }
    }
    return j;
}

ordered_json config_json(const ExperimentConfig& cfg)
{
    ordered_json j;
    j["target"] = target_to_json(cfg.target);
    j["samplers"] = ordered_json::array();
    for (const auto& s : cfg.samplers) {
        j["samplers"].push_back(sampler_to_json(s));
    }
    j["n"] = cfg.n;
    j["burn_in"] = cfg.burn_in;
    j["chains"] = cfg.chains;
    j["seed"] = cfg.seed;
    j["init"] = cfg.init ? ordered_json(*cfg.init) : ordered_json("mode_center");
    j["outputs"] = cfg.outputs.string();
    j["grid_res"] = cfg.grid_res;
    j["max_lag"] = cfg.max_lag;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (n < 1) {
        throw ConfigError("config: n must be >= 1");
    }
    if (chains < 1) {
        throw ConfigError("config: chains must be >= 1");
    }
    if (grid_res < 2) {
        throw ConfigError("config: grid_res must be >= 2");
    }
    std::set<std::string> labels;
    for (const auto& s : samplers) {
        if (s.label.empty() || !labels.insert(s.label).second) {
            throw ConfigError("config: duplicate or empty sampler label '"
                              + s.label + "'");
        }
    }
    try {
        make_target(target);
        for (const auto& s : samplers) {
            if (const auto* m = std::get_if<MalaConfig>(&s.config);
                m && !(m->eps > 0.0)) {
                throw std::invalid_argument("mala eps must be > 0");
            }
            if (const auto* a = std::get_if<AdaptiveConfig>(&s.config)) {
                a->params.validate();
            }
            if (const auto* h = std::get_if<HmcConfig>(&s.config)) {
                h->params.validate();
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    if (!j.contains("target")) {
        throw ConfigError("config: missing target block");
    }

    ExperimentConfig cfg;
    cfg.target = parse_target(j.at("target"));
    if (j.contains("samplers")) {
        for (const auto& s : j.at("samplers")) {
            cfg.samplers.push_back(parse_sampler(s));
        }
    } else if (j.contains("sampler")) {
        cfg.samplers.push_back(parse_sampler(j.at("sampler")));
    }
    cfg.n = get_or(j, "n", cfg.n);
    cfg.burn_in = get_or(j, "burn_in", cfg.burn_in);
    cfg.chains = get_or(j, "chains", cfg.chains);
    cfg.seed = get_or(j, "seed", cfg.seed);
    if (j.contains("init") && !j.at("init").is_string()) {
        cfg.init = get_or(j, "init", Vector{});
    } else if (j.contains("init") && j.at("init") != "mode_center") {
        throw ConfigError("config: init must be a vector or \"mode_center\"");
    }
    cfg.outputs = get_or(j, "outputs", cfg.outputs.string());
    cfg.grid_res = get_or(j, "grid_res", cfg.grid_res);
    cfg.max_lag = get_or(j, "max_lag", cfg.max_lag);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg)
{
    return config_json(cfg).dump(2);
}

std::unique_ptr<Target> make_target(const TargetConfig& cfg)
{
    if (cfg.name == "particle_box") {
        cfg.consts.validate();
        return std::make_unique<ParticleBoxTarget>(cfg.box, cfg.gmax);
    }
    if (cfg.name == "gauss_mix") {
        return std::make_unique<GaussMixTarget>(GaussMixSpec(cfg.components));
    }
    throw ConfigError("unknown target '" + cfg.name + "'");
}

Vector resolve_init(const ExperimentConfig& cfg)
{
    if (cfg.init) {
        return *cfg.init;
    }
    if (cfg.target.name == "particle_box") {
        return pib_first_mode_center(cfg.target.box);
    }
    return cfg.target.components.front().mean;
}

//---------------------------------------------------------------------------//
// Experiments
//---------------------------------------------------------------------------//

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xF];
    }
    return hex;
}

namespace {

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

fs::path prepare_outputs(const ExperimentConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(cfg.outputs, ec);
    if (ec || !fs::is_directory(cfg.outputs)) {
        throw std::runtime_error("cannot create output directory "
                                 + cfg.outputs.string());
    }
    return cfg.outputs;
}

std::vector<ChainRun> run_all_chains(const ExperimentConfig& cfg,
                                     const Target& target, int workers)
{
    if (cfg.samplers.empty()) {
        throw ConfigError("config: at least one sampler block is required");
    }
    const Vector init = resolve_init(cfg);
    if (init.size() != target.dim() || !target.log_density(init).is_finite()) {
        throw ConfigError("config: init has zero density under the target");
    }
    const DiagnosticsOptions opts{cfg.max_lag, cfg.grid_res};

    std::vector<ChainRun> runs;
    for (const auto& block : cfg.samplers) {
        for (std::size_t k = 0; k < cfg.chains; ++k) {
            runs.push_back({block.label, k, {}, {}});
        }
    }
    std::vector<std::exception_ptr> errors(runs.size());
    const std::size_t per_block = cfg.chains;

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
    for (std::size_t job = 0; job < runs.size(); ++job) {
        try {
            auto& run = runs[job];
            const auto& block = cfg.samplers[job / per_block];
            run.chain = run_chain(block.config, target, cfg.n, cfg.burn_in, init,
                                  cfg.seed, run.chain_id);
            run.chain.sampler = block.label;
            run.report = compute_report(run.chain, target, opts);
        } catch (...) {
            errors[job] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return runs;
}

std::string chain_stem(const ChainRun& run)
{
    return run.label + "_chain" + std::to_string(run.chain_id);
}

struct OutputSet
{
    fs::path dir;
    //! Files whose bytes depend only on config and seed.
    std::map<std::string, std::string> hashed;
    //! Files that also carry wall-clock timings.
    std::vector<std::string> timing;

    void add(const std::string& name, const std::string& text, bool deterministic)
    {
        write_text(dir / name, text);
        if (deterministic) {
            hashed[name] = sha256_file(dir / name);
        } else {
            timing.push_back(name);
        }
    }
};

ExperimentResult write_experiment(const ExperimentConfig& cfg,
                                  std::vector<ChainRun> runs,
                                  const std::string* comparison_csv)
{
    OutputSet out{prepare_outputs(cfg), {}, {}};
    const bool is_box = cfg.target.name == "particle_box";

    if (is_box) {
        out.add("target_grid.csv",
                grid_to_csv(pib_analytic_grid(cfg.target.box, cfg.grid_res)), true);
    }
    for (const auto& run : runs) {
        const auto stem = chain_stem(run);
        out.add(stem + ".csv", chain_to_csv(run.chain), true);
        out.add(stem + "_acf.csv", acf_to_csv(run.report), true);
        if (is_box) {
            out.add(stem + "_hist.csv",
                    grid_to_csv(histogram2d(run.chain.samples, cfg.target.box,
                                            cfg.grid_res)),
                    true);
        }
        out.add(stem + "_diag.json", report_to_json(run.report), false);
    }
    if (comparison_csv) {
        out.add("comparison.csv", *comparison_csv, false);
    }

    ordered_json manifest;
    manifest["config"] = config_json(cfg);
    manifest["seed"] = cfg.seed;
    if (is_box) {
        manifest["energy"] = pib_energy(cfg.target.box, cfg.target.consts);
    }
    manifest["files"] = ordered_json::object();
    for (const auto& [name, hash] : out.hashed) {
        manifest["files"][name] = hash;
    }
    std::sort(out.timing.begin(), out.timing.end());
    manifest["timing_reports"] = out.timing;
    write_text(out.dir / "manifest.json", manifest.dump(2) + "\n");

    ExperimentResult result;
    result.runs = std::move(runs);
    for (const auto& [name, hash] : out.hashed) {
        result.files.push_back(name);
    }
    result.files.insert(result.files.end(), out.timing.begin(), out.timing.end());
    result.files.push_back("manifest.json");
    std::sort(result.files.begin(), result.files.end());
    return result;
}

std::string comparison_table(const ExperimentConfig& cfg,
                             const std::vector<ChainRun>& runs)
{
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    std::string out
        = "sampler,mean_time_s,acceptance_rate,min_ess,tv_distance,mode_coverage\n";
    for (const auto& block : cfg.samplers) {
        double time = 0.0;
        double acc = 0.0;
        double min_ess = 0.0;
        std::optional<double> tv;
        std::optional<double> cover;
        std::size_t count = 0;
        for (const auto& run : runs) {
            if (run.label != block.label) {
                continue;
            }
            ++count;
            time += run.report.wall_time_s;
            acc += run.report.acceptance_rate;
            min_ess += *std::min_element(run.report.ess.begin(), run.report.ess.end());
            if (run.report.tv_distance) {
                tv = tv.value_or(0.0) + *run.report.tv_distance;
            }
            if (run.report.mode_coverage) {
                cover = cover.value_or(0.0) + *run.report.mode_coverage;
            }
        }
        const double c = static_cast<double>(count);
        if (tv) {
            *tv /= c;
        }
        if (cover) {
            *cover /= c;
        }
        out += block.label + ',' + format_double(time / c) + ','
               + format_double(acc / c) + ',' + format_double(min_ess / c) + ','
               + opt(tv) + ',' + opt(cover) + '\n';
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers)
{
    cfg.validate();
    const auto target = make_target(cfg.target);
    auto runs = run_all_chains(cfg, *target, workers);
    return write_experiment(cfg, std::move(runs), nullptr);
}

ExperimentResult compare_samplers(const ExperimentConfig& cfg, int workers)
{
    cfg.validate();
    if (cfg.samplers.size() < 2) {
        throw ConfigError("compare needs at least two sampler blocks");
    }
    const auto target = make_target(cfg.target);
    auto runs = run_all_chains(cfg, *target, workers);
    const std::string table = comparison_table(cfg, runs);
    return write_experiment(cfg, std::move(runs), &table);
}

fs::path emit_grid(const ExperimentConfig& cfg)
{
    if (cfg.target.name != "particle_box") {
        throw ConfigError("grid requires a particle_box target");
    }
    const auto dir = prepare_outputs(cfg);
    const auto path = dir / "target_grid.csv";
    write_text(path, grid_to_csv(pib_analytic_grid(cfg.target.box, cfg.grid_res)));
    return path;
}

}  // namespace lmc
