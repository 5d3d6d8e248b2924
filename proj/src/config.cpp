#include "mrn/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "mrn/errors.hpp"
#include "mrn/rng.hpp"

namespace mrn {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("config: unknown key '" + path + key + "'");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("config: missing key '" + path + key + "'");
    return *it;
}

double number_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) throw ConfigError("config: '" + path + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ConfigError("config: '" + path + key + "' must be a number");
    return it->get<double>();
}

int int_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number_integer()) throw ConfigError("config: '" + path + key + "' must be an integer");
    return v.get<int>();
}

int int_or(const json& obj, const std::string& path, const char* key, int fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ConfigError("config: '" + path + key + "' must be an integer");
    return it->get<int>();
}

std::string string_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_string()) throw ConfigError("config: '" + path + key + "' must be a string");
    return v.get<std::string>();
}

RegionParams parse_region(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    reject_unknown(obj, path + ".",
                   {"name", "area_km2", "detectors", "n_jam", "avg_trip_length_m", "capacity_max", "mfd"});
    RegionParams r;
    r.name = string_at(obj, path + ".", "name");
    r.area_km2 = number_at(obj, path + ".", "area_km2");
    r.n_detectors = int_at(obj, path + ".", "detectors");
    r.n_jam = number_at(obj, path + ".", "n_jam");
    r.avg_trip_length_m = number_at(obj, path + ".", "avg_trip_length_m");
    r.capacity_max = number_at(obj, path + ".", "capacity_max");
    const json& mfd = require(obj, path + ".", "mfd");
    if (!mfd.is_object()) throw ConfigError("config: '" + path + ".mfd' must be an object");
    reject_unknown(mfd, path + ".mfd.", {"a", "b", "c", "n_jam"});
    r.mfd.a = number_at(mfd, path + ".mfd.", "a");
    r.mfd.b = number_at(mfd, path + ".mfd.", "b");
    r.mfd.c = number_at(mfd, path + ".mfd.", "c");
    r.mfd.n_jam = number_or(mfd, path + ".mfd.", "n_jam", r.n_jam);
    return r;
}

} // namespace

int ScenarioConfig::steps() const {
    return static_cast<int>(std::lround(horizon_s / step_s));
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config: cannot parse " + origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level of " + origin + " must be an object");
    reject_unknown(doc, "", {"name", "seed", "horizon_s", "step_s", "regions", "adjacency", "demand", "choice",
                             "lrho", "pwa_lines", "training"});

    ScenarioConfig cfg;
    cfg.name = string_at(doc, "", "name");
    const json& seed = require(doc, "", "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
        throw ConfigError("config: 'seed' must be a nonnegative integer");
    if (seed.is_number_integer() && seed.get<long long>() < 0)
        throw ConfigError("config: 'seed' must be a nonnegative integer");
    cfg.seed = seed.get<std::uint64_t>();
    cfg.horizon_s = number_at(doc, "", "horizon_s");
    cfg.step_s = number_or(doc, "", "step_s", 20.0);
    if (!(cfg.horizon_s > 0.0)) throw ConfigError("config: 'horizon_s' must be positive");
    if (!(cfg.step_s > 0.0)) throw ConfigError("config: 'step_s' must be positive");
    const double ratio = cfg.horizon_s / cfg.step_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ConfigError("config: 'horizon_s' must be a whole number of steps");

    const json& regions = require(doc, "", "regions");
    if (!regions.is_array() || regions.size() < 2)
        throw ConfigError("config: 'regions' must be an array of at least 2 regions");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        RegionParams r = parse_region(regions[i], "regions[" + std::to_string(i) + "]");
        try {
            finalize_region(r);
        } catch (const std::exception& e) {
            throw ConfigError("config: regions[" + std::to_string(i) + "] (" + r.name + "): " + e.what());
        }
        cfg.regions.push_back(std::move(r));
    }
    const int k = static_cast<int>(cfg.regions.size());

    const json& adj = require(doc, "", "adjacency");
    if (!adj.is_array() || static_cast<int>(adj.size()) != k)
        throw ConfigError("config: 'adjacency' must be a " + std::to_string(k) + "-row matrix");
    std::vector<std::uint8_t> flat;
    for (std::size_t i = 0; i < adj.size(); ++i) {
        const json& row = adj[i];
        if (!row.is_array() || static_cast<int>(row.size()) != k)
            throw ConfigError("config: 'adjacency[" + std::to_string(i) + "]' must have " + std::to_string(k) +
                              " entries");
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!row[j].is_number_integer() || (row[j].get<int>() != 0 && row[j].get<int>() != 1))
                throw ConfigError("config: 'adjacency[" + std::to_string(i) + "][" + std::to_string(j) +
                                  "]' must be 0 or 1");
            flat.push_back(static_cast<std::uint8_t>(row[j].get<int>()));
        }
    }
    cfg.topo = make_topology(k, flat);

    const json& demand = require(doc, "", "demand");
    if (!demand.is_array()) throw ConfigError("config: 'demand' must be an array");
    cfg.demand.k = k;
    cfg.demand.od.assign(static_cast<std::size_t>(k) * k, {});
    for (std::size_t d = 0; d < demand.size(); ++d) {
        const std::string path = "demand[" + std::to_string(d) + "]";
        const json& entry = demand[d];
        if (!entry.is_object()) throw ConfigError("config: '" + path + "' must be an object");
        reject_unknown(entry, path + ".", {"from", "to", "magnitude", "start_s", "rise_s", "constant_s", "fall_s"});
        const int from = int_at(entry, path + ".", "from");
        const int to = int_at(entry, path + ".", "to");
        if (from < 1 || from > k || to < 1 || to > k)
            throw ConfigError("config: '" + path + "' references region pair (" + std::to_string(from) + ", " +
                              std::to_string(to) + ") outside 1.." + std::to_string(k));
        Trapezoid t;
        t.magnitude = number_at(entry, path + ".", "magnitude");
        t.t_start = number_at(entry, path + ".", "start_s");
        t.t_rise = number_at(entry, path + ".", "rise_s");
        t.t_const = number_at(entry, path + ".", "constant_s");
        t.t_fall = number_at(entry, path + ".", "fall_s");
        cfg.demand.od[static_cast<std::size_t>(from - 1) * k + (to - 1)].push_back(t);
    }
    validate_demand(cfg.demand);

    if (const auto it = doc.find("choice"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("config: 'choice' must be an object");
        reject_unknown(*it, "choice.", {"mu", "vot_chf_per_hour"});
        cfg.choice.mu = number_or(*it, "choice.", "mu", 1.0);
        cfg.choice.vot_chf_per_hour = number_or(*it, "choice.", "vot_chf_per_hour", 27.0);
    }
    if (!(cfg.choice.mu > 0.0)) throw ConfigError("config: 'choice.mu' must be positive");
    if (!(cfg.choice.vot_chf_per_hour > 0.0)) throw ConfigError("config: 'choice.vot_chf_per_hour' must be positive");

    if (const auto it = doc.find("lrho"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("config: 'lrho' must be an object");
        reject_unknown(*it, "lrho.", {"prediction_steps", "control_cycle_steps", "step_s", "sigma"});
        cfg.lrho.n_p = int_or(*it, "lrho.", "prediction_steps", 3);
        cfg.lrho.n_c = int_or(*it, "lrho.", "control_cycle_steps", 4);
        cfg.lrho.t_c = number_or(*it, "lrho.", "step_s", cfg.step_s);
        cfg.lrho.sigma = number_or(*it, "lrho.", "sigma", 0.2);
    } else {
        cfg.lrho.t_c = cfg.step_s;
    }
    validate_lrho(cfg.lrho);

    cfg.pwa_lines = int_or(doc, "", "pwa_lines", 20);
    if (cfg.pwa_lines < 2) throw ConfigError("config: 'pwa_lines' must be at least 2");

    if (const auto it = doc.find("training"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("config: 'training' must be an object");
        reject_unknown(*it, "training.",
                       {"epochs", "batch_size", "validation_split", "initial_lr", "decay_steps", "decay_rate",
                        "hidden"});
        cfg.training.epochs = int_or(*it, "training.", "epochs", 100);
        cfg.training.batch_size = int_or(*it, "training.", "batch_size", 64);
        cfg.training.validation_split = number_or(*it, "training.", "validation_split", 0.2);
        cfg.training.initial_lr = number_or(*it, "training.", "initial_lr", 0.01);
        cfg.training.decay_steps = number_or(*it, "training.", "decay_steps", 10000.0);
        cfg.training.decay_rate = number_or(*it, "training.", "decay_rate", 0.9);
        if (const auto h = it->find("hidden"); h != it->end()) {
            if (!h->is_array() || h->empty()) throw ConfigError("config: 'training.hidden' must be a nonempty array");
            cfg.hidden_sizes.clear();
            for (std::size_t l = 0; l < h->size(); ++l) {
                if (!(*h)[l].is_number_integer() || (*h)[l].get<int>() < 1)
                    throw ConfigError("config: 'training.hidden[" + std::to_string(l) +
                                      "]' must be a positive integer");
                cfg.hidden_sizes.push_back((*h)[l].get<int>());
            }
        }
    }
    validate_train_config(cfg.training);

    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string content_fingerprint(const std::string& bytes) {
    const std::uint64_t h = fnv1a64(bytes);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

} // namespace mrn
