#include "dsbad/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dsbad {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) {
        throw Error("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw Error("config key '" + key + "' expects a number, got '" + v + "'");
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
    for (const auto& [k, v] : j.items()) {
        const auto key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, out);
        } else if (v.is_string()) {
            out[key] = v.get<std::string>();
        } else {
            out[key] = v.dump();
        }
    }
}

}  // namespace

EngineConfig::EngineConfig() {
    round.budget = 32;
    round.gamma = 8;
    round.gate = GateConfig{0.1, 720};
    round.filter.budget = round.budget;
}

void EngineConfig::set(const std::string& key, const std::string& raw) {
    const auto value = unquote(trim(raw));
    if (key == "gate.alpha") {
        round.gate.alpha = to_real(key, value);
    } else if (key == "gate.warmup") {
        round.gate.warmup = to_uint(key, value);
    } else if (key == "gate.rewarm") {
        round.rewarm = parse_gate_rewarm(value);
    } else if (key == "round.gamma") {
        round.gamma = to_uint(key, value);
    } else if (key == "round.budget") {
        round.budget = to_uint(key, value);
        round.filter.budget = round.budget;
    } else if (key == "round.rounds") {
        round.rounds = to_uint(key, value);
    } else if (key == "filter.strategy") {
        round.filter.strategy = parse_strategy(value);
    } else if (key == "filter.density_metric") {
        round.filter.density_metric = parse_density_metric(value);
    } else if (key == "filter.area_epsilon") {
        round.filter.area_epsilon = to_real(key, value);
    } else if (key == "seed") {
        seed = to_uint(key, value);
    } else if (key == "jobs") {
        jobs = to_uint(key, value);
    } else {
        throw Error("unknown config key '" + key + "'");
    }
}

nlohmann::json EngineConfig::to_json() const {
    return nlohmann::json{{"gate.alpha", round.gate.alpha},
                          {"gate.warmup", round.gate.warmup},
                          {"gate.rewarm", std::string(to_string(round.rewarm))},
                          {"round.gamma", round.gamma},
                          {"round.budget", round.budget},
                          {"round.rounds", round.rounds},
                          {"filter.strategy", std::string(to_string(round.filter.strategy))},
                          {"filter.density_metric", std::string(to_string(round.filter.density_metric))},
                          {"filter.area_epsilon", round.filter.area_epsilon},
                          {"seed", seed},
                          {"jobs", jobs}};
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();

    std::map<std::string, std::string> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            flatten(nlohmann::json::parse(text), "", out);
        } catch (const nlohmann::json::exception& e) {
            throw Error("config file " + path.string() + ": " + e.what());
        }
        return out;
    }

    std::istringstream lines(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError(lineno, "expected key = value in " + path.string());
        }
        const auto key = trim(std::string_view(t).substr(0, eq));
        out[section.empty() ? key : section + "." + key] = trim(std::string_view(t).substr(eq + 1));
    }
    return out;
}

void apply_config_file(EngineConfig& cfg, const std::filesystem::path& path) {
    for (const auto& [k, v] : read_config_file(path)) {
        cfg.set(k, v);
    }
}

}  // namespace dsbad
