#include "icd/config_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace icd {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ParseError(what + ": expected an array of rows");
    const auto rows = j.size();
    const auto cols = j.front().size();
    Mat m(static_cast<long>(rows), static_cast<long>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) throw ParseError(what + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<long>(i), static_cast<long>(c)) = j[i][c].get<double>();
    }
    return m;
}

std::string weight_mode_name(WeightMode m) {
    switch (m) {
        case WeightMode::Constant: return "constant";
        case WeightMode::RandomSigned: return "random_signed";
        case WeightMode::CoordinateWiseConstant: return "coordinate_wise";
        case WeightMode::Partition: return "partition";
        case WeightMode::Explicit: return "explicit";
    }
    return "constant";
}

WeightMode weight_mode_from_name(const std::string& s) {
    if (s == "constant") return WeightMode::Constant;
    if (s == "random_signed") return WeightMode::RandomSigned;
    if (s == "coordinate_wise") return WeightMode::CoordinateWiseConstant;
    if (s == "partition") return WeightMode::Partition;
    if (s == "explicit") return WeightMode::Explicit;
    throw ParseError("unknown weight mode '" + s + "'");
}

std::string topology_kind_name(TopologySpec::Kind k) {
    using Kind = TopologySpec::Kind;
    switch (k) {
        case Kind::Path: return "path";
        case Kind::Cycle: return "cycle";
        case Kind::Star: return "star";
        case Kind::Complete: return "complete";
        case Kind::Custom: return "custom";
        case Kind::Explicit: return "explicit";
        case Kind::TimeVarying: return "time_varying";
    }
    return "path";
}

TopologySpec::Kind topology_kind_from_name(const std::string& s) {
    using Kind = TopologySpec::Kind;
    if (s == "path") return Kind::Path;
    if (s == "cycle") return Kind::Cycle;
    if (s == "star") return Kind::Star;
    if (s == "complete") return Kind::Complete;
    if (s == "custom") return Kind::Custom;
    if (s == "explicit") return Kind::Explicit;
    if (s == "time_varying") return Kind::TimeVarying;
    throw ParseError("unknown topology kind '" + s + "'");
}

json topology_to_json(const TopologySpec& t) {
    json j;
    j["kind"] = topology_kind_name(t.kind);
    using Kind = TopologySpec::Kind;
    if (t.kind == Kind::TimeVarying) {
        json seq = json::array();
        for (const auto& sub : t.sequence) seq.push_back(topology_to_json(sub));
        j["sequence"] = std::move(seq);
        return j;
    }
    if (t.kind == Kind::Explicit) {
        j["matrix"] = matrix_to_json(t.matrix);
        return j;
    }
    j["kappa"] = t.kappa;
    if (t.kind == Kind::Star) j["hub"] = t.hub;
    if (t.kind == Kind::Custom) {
        json edges = json::array();
        for (auto [a, b] : t.edges) edges.push_back(json::array({a, b}));
        j["edges"] = std::move(edges);
    }
    return j;
}

TopologySpec topology_from_json(const json& j) {
    TopologySpec t;
    t.kind = topology_kind_from_name(j.at("kind").get<std::string>());
    using Kind = TopologySpec::Kind;
    if (t.kind == Kind::TimeVarying) {
        for (const auto& sub : j.at("sequence")) t.sequence.push_back(topology_from_json(sub));
        return t;
    }
    if (t.kind == Kind::Explicit) {
        t.matrix = matrix_from_json(j.at("matrix"), "topology.matrix");
        return t;
    }
    t.kappa = j.value("kappa", 0.2);
    t.hub = j.value("hub", 0);
    if (t.kind == Kind::Custom) {
        for (const auto& e : j.at("edges"))
            t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return t;
}

}  // namespace

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::General: return "general";
        case RunMode::CompleteGraph: return "complete_graph";
        case RunMode::CompleteGraphNonnegW: return "complete_graph_nonneg_w";
    }
    return "general";
}

RunMode mode_from_name(const std::string& name) {
    if (name == "general") return RunMode::General;
    if (name == "complete_graph") return RunMode::CompleteGraph;
    if (name == "complete_graph_nonneg_w") return RunMode::CompleteGraphNonnegW;
    throw ParseError("unknown run mode '" + name + "'");
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = cfg.name;
    j["dimension"] = cfg.dimension;
    j["servers"] = cfg.servers;
    j["clients"] = cfg.clients;
    j["delta"] = cfg.delta;
    j["cycles"] = cfg.nsteps;
    j["seed"] = cfg.seed;
    j["mode"] = mode_name(cfg.mode);
    j["zero_grad_masking"] = cfg.zero_grad_masking;
    j["masking_bound"] = cfg.masking_bound;
    j["decision_set"] = {{"lower", cfg.lower}, {"upper", cfg.upper}};

    json objs = json::array();
    for (const auto& o : cfg.objectives) {
        json jo = {{"type", "quadratic"}, {"scale", o.scale}, {"center", o.center}};
        if (o.grad_bound) jo["grad_bound"] = *o.grad_bound;
        objs.push_back(std::move(jo));
    }
    j["objectives"] = std::move(objs);

    if (cfg.step_size.kind == StepSizeSpec::Kind::Harmonic) {
        j["step_size"] = {{"kind", "harmonic"}, {"offset", cfg.step_size.offset}};
    } else {
        j["step_size"] = {{"kind", "custom"}, {"values", cfg.step_size.custom}};
    }

    json w;
    w["mode"] = weight_mode_name(cfg.weights.mode);
    switch (cfg.weights.mode) {
        case WeightMode::Constant:
            w["matrix"] = matrix_to_json(cfg.weights.constant);
            break;
        case WeightMode::CoordinateWiseConstant: {
            json per = json::array();
            for (const auto& m : cfg.weights.constant_per_coord) per.push_back(matrix_to_json(m));
            w["matrices_per_coordinate"] = std::move(per);
            break;
        }
        case WeightMode::RandomSigned:
            w["slc_window"] = cfg.weights.slc_window;
            w["buc_window"] = cfg.weights.buc_window;
            w["regenerate_each_cycle"] = cfg.weights.regenerate_each_cycle;
            break;
        case WeightMode::Partition:
            w["assignment"] = cfg.weights.assignment;
            break;
        case WeightMode::Explicit: {
            // [cycle][step][server][client]
            json cycles = json::array();
            for (const auto& cycle : cfg.weights.explicit_cycles) {
                json steps = json::array();
                for (const auto& m : cycle) steps.push_back(matrix_to_json(m));
                cycles.push_back(std::move(steps));
            }
            w["schedule"] = std::move(cycles);
            break;
        }
    }
    j["weights"] = std::move(w);
    j["topology"] = topology_to_json(cfg.topology);

    if (cfg.links.kind == LinkSpec::Kind::All) {
        j["client_links"] = {{"kind", "all"}};
    } else {
        json phases = json::array();
        for (const auto& phase : cfg.links.links) {
            json links = json::array();
            for (auto [J, h] : phase) links.push_back(json::array({J, h}));
            phases.push_back(std::move(links));
        }
        j["client_links"] = {{"kind", "periodic"}, {"period", cfg.links.period},
                             {"links", std::move(phases)}};
    }

    if (!cfg.initial.empty()) j["initial"] = cfg.initial;
    if (cfg.record_steps != -1) j["record_steps"] = cfg.record_steps == 1;
    if (cfg.emit_stride != 1) j["emit_stride"] = cfg.emit_stride;

    return j.dump(2) + "\n";
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("schema_version", kSchemaVersion) != kSchemaVersion)
            throw ParseError("unsupported schema_version");

        ExperimentConfig cfg;
        cfg.name = j.value("name", std::string("experiment"));
        cfg.dimension = j.at("dimension").get<int>();
        cfg.servers = j.at("servers").get<int>();
        cfg.clients = j.at("clients").get<int>();
        cfg.delta = j.at("delta").get<int>();
        cfg.nsteps = j.at("cycles").get<long>();
        cfg.seed = j.value("seed", 0ULL);
        cfg.mode = mode_from_name(j.value("mode", std::string("general")));
        cfg.zero_grad_masking = j.value("zero_grad_masking", false);
        cfg.masking_bound = j.value("masking_bound", 1.0);

        const auto& ds = j.at("decision_set");
        cfg.lower = ds.at("lower").get<std::vector<double>>();
        cfg.upper = ds.at("upper").get<std::vector<double>>();

        for (const auto& jo : j.at("objectives")) {
            if (jo.value("type", std::string("quadratic")) != "quadratic")
                throw ParseError("only quadratic objectives are supported");
            ObjectiveSpec o;
            o.scale = jo.at("scale").get<double>();
            o.center = jo.at("center").get<std::vector<double>>();
            if (jo.contains("grad_bound")) o.grad_bound = jo["grad_bound"].get<double>();
            cfg.objectives.push_back(std::move(o));
        }

        const auto& ss = j.at("step_size");
        if (ss.at("kind") == "harmonic") {
            cfg.step_size.kind = StepSizeSpec::Kind::Harmonic;
            cfg.step_size.offset = ss.value("offset", 1e-4);
        } else if (ss.at("kind") == "custom") {
            cfg.step_size.kind = StepSizeSpec::Kind::Custom;
            cfg.step_size.custom = ss.at("values").get<std::vector<double>>();
        } else {
            throw ParseError("unknown step size kind");
        }

        const auto& w = j.at("weights");
        cfg.weights.mode = weight_mode_from_name(w.at("mode").get<std::string>());
        switch (cfg.weights.mode) {
            case WeightMode::Constant:
                cfg.weights.constant = matrix_from_json(w.at("matrix"), "weights.matrix");
                break;
            case WeightMode::CoordinateWiseConstant:
                for (const auto& m : w.at("matrices_per_coordinate"))
                    cfg.weights.constant_per_coord.push_back(
                        matrix_from_json(m, "weights.matrices_per_coordinate"));
                break;
            case WeightMode::RandomSigned:
                cfg.weights.slc_window = w.at("slc_window").get<double>();
                cfg.weights.buc_window = w.at("buc_window").get<double>();
                cfg.weights.regenerate_each_cycle = w.value("regenerate_each_cycle", false);
                break;
            case WeightMode::Partition:
                cfg.weights.assignment = w.at("assignment").get<std::vector<std::vector<int>>>();
                break;
            case WeightMode::Explicit:
                for (const auto& cycle : w.at("schedule")) {
                    std::vector<Mat> steps;
                    for (const auto& m : cycle)
                        steps.push_back(matrix_from_json(m, "weights.schedule"));
                    cfg.weights.explicit_cycles.push_back(std::move(steps));
                }
                break;
        }

        cfg.topology = topology_from_json(j.at("topology"));

        const auto& cl = j.value("client_links", json{{"kind", "all"}});
        if (cl.at("kind") == "all") {
            cfg.links.kind = LinkSpec::Kind::All;
        } else if (cl.at("kind") == "periodic") {
            cfg.links.kind = LinkSpec::Kind::Periodic;
            cfg.links.period = cl.at("period").get<int>();
            for (const auto& phase : cl.at("links")) {
                std::vector<std::pair<int, int>> links;
                for (const auto& e : phase) links.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
                cfg.links.links.push_back(std::move(links));
            }
        } else {
            throw ParseError("unknown client link kind");
        }

        if (j.contains("initial"))
            cfg.initial = j["initial"].get<std::vector<std::vector<double>>>();
        if (j.contains("record_steps")) cfg.record_steps = j["record_steps"].get<bool>() ? 1 : 0;
        cfg.emit_stride = j.value("emit_stride", 1L);
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg = config_from_json_text(buf.str());
    try {
        validate_config(cfg);
    } catch (const std::runtime_error& e) {
        throw ValidationError(e.what());
    }
    return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write config file " + path.string());
    out << config_to_json_text(cfg);
}

}  // namespace icd
