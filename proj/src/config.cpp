#include "movo/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace movo {

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: bad number for " + key + ": " + v);
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int d = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: bad integer for " + key + ": " + v);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const std::uint64_t d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: bad unsigned for " + key + ": " + v);
    }
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + " missing '='");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(lineno) + " has empty key");
        }
        map[key] = value;
    }
    return map;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ConfigMap merge_config(const ConfigMap& base, const ConfigMap& overrides) {
    ConfigMap out = base;
    for (const auto& [k, v] : overrides) out[k] = v;
    return out;
}

PipelineConfig config_from_map(const ConfigMap& map) {
    PipelineConfig cfg;
    for (const auto& [k, v] : map) {
        if (k == "frontend.fast_threshold") cfg.detector.fast_threshold = parse_int(k, v);
        else if (k == "frontend.nms_radius") cfg.detector.nms_radius = parse_int(k, v);
        else if (k == "frontend.min_features") cfg.detector.min_features = parse_int(k, v);
        else if (k == "frontend.pyramid_levels") cfg.detector.pyramid_levels = parse_int(k, v);
        else if (k == "frontend.lk_window") cfg.detector.lk_window = parse_int(k, v);
        else if (k == "frontend.lk_max_iterations") cfg.detector.lk_max_iterations = parse_int(k, v);
        else if (k == "frontend.lk_epsilon") cfg.detector.lk_epsilon = parse_double(k, v);
        else if (k == "frontend.fb_threshold") cfg.detector.fb_threshold = parse_double(k, v);
        else if (k == "twoview.max_iterations") cfg.essential_ransac.max_iterations = parse_int(k, v);
        else if (k == "twoview.threshold") cfg.essential_ransac.threshold = parse_double(k, v);
        else if (k == "twoview.confidence") cfg.essential_ransac.confidence = parse_double(k, v);
        else if (k == "pnp.max_iterations") cfg.pnp_ransac.max_iterations = parse_int(k, v);
        else if (k == "pnp.threshold") cfg.pnp_ransac.threshold = parse_double(k, v);
        else if (k == "pnp.confidence") cfg.pnp_ransac.confidence = parse_double(k, v);
        else if (k == "scale.relative_gate") cfg.scale.relative_gate = parse_double(k, v);
        else if (k == "scale.min_consensus_abs") cfg.scale.min_consensus_abs = parse_int(k, v);
        else if (k == "scale.min_consensus_frac") cfg.scale.min_consensus_frac = parse_double(k, v);
        else if (k == "pipeline.gric_sigma") cfg.gric_sigma = parse_double(k, v);
        else if (k == "pipeline.depth_scale") cfg.depth_scale = parse_double(k, v);
        else if (k == "pipeline.seed") cfg.seed = parse_u64(k, v);
        else throw ParseError("config: unknown key: " + k);
    }
    cfg.essential_ransac.seed = cfg.seed;
    cfg.pnp_ransac.seed = cfg.seed;
    return cfg;
}

ConfigMap config_to_map(const PipelineConfig& cfg) {
    ConfigMap m;
    m["frontend.fast_threshold"] = std::to_string(cfg.detector.fast_threshold);
    m["frontend.nms_radius"] = std::to_string(cfg.detector.nms_radius);
    m["frontend.min_features"] = std::to_string(cfg.detector.min_features);
    m["frontend.pyramid_levels"] = std::to_string(cfg.detector.pyramid_levels);
    m["frontend.lk_window"] = std::to_string(cfg.detector.lk_window);
    m["frontend.lk_max_iterations"] = std::to_string(cfg.detector.lk_max_iterations);
    m["frontend.lk_epsilon"] = num(cfg.detector.lk_epsilon);
    m["frontend.fb_threshold"] = num(cfg.detector.fb_threshold);
    m["twoview.max_iterations"] = std::to_string(cfg.essential_ransac.max_iterations);
    m["twoview.threshold"] = num(cfg.essential_ransac.threshold);
    m["twoview.confidence"] = num(cfg.essential_ransac.confidence);
    m["pnp.max_iterations"] = std::to_string(cfg.pnp_ransac.max_iterations);
    m["pnp.threshold"] = num(cfg.pnp_ransac.threshold);
    m["pnp.confidence"] = num(cfg.pnp_ransac.confidence);
    m["scale.relative_gate"] = num(cfg.scale.relative_gate);
    m["scale.min_consensus_abs"] = std::to_string(cfg.scale.min_consensus_abs);
    m["scale.min_consensus_frac"] = num(cfg.scale.min_consensus_frac);
    m["pipeline.gric_sigma"] = num(cfg.gric_sigma);
    m["pipeline.depth_scale"] = num(cfg.depth_scale);
    m["pipeline.seed"] = std::to_string(cfg.seed);
    return m;
}

std::string dump_config(const ConfigMap& map) {
    std::ostringstream out;
    for (const auto& [k, v] : map) out << k << " = " << v << "\n";
    return out.str();
}

}  // namespace movo
