#include "spn/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "spn/error.hpp"

namespace spn {

namespace {

[[noreturn]] void fail(const std::string& origin, const YAML::Node& node, const std::string& message) {
    std::string where = origin;
    if (node.IsDefined() && node.Mark().line >= 0) where += ":" + std::to_string(node.Mark().line + 1);
    throw Error(ErrorCode::ConfigError, where + ": " + message);
}

void require_keys(const std::string& origin, const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& what) {
    if (!node.IsMap()) fail(origin, node, what + " must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(origin, kv.first, "unknown key '" + key + "' in " + what);
    }
}

template <class T>
T read(const std::string& origin, const YAML::Node& node, const std::string& what) {
    if (!node.IsDefined() || node.IsNull()) fail(origin, node, "missing " + what);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(origin, node, "cannot read " + what);
    }
}

double read_number(const std::string& origin, const YAML::Node& node, const std::string& what) {
    const double x = read<double>(origin, node, what);
    if (!std::isfinite(x)) fail(origin, node, what + " must be finite");
    return x;
}

int read_index(const std::string& origin, const YAML::Node& node, int count, const std::string& what) {
    const int x = read<int>(origin, node, what);
    if (x < 1 || x > count) {
        fail(origin, node, what + " must lie in 1.." + std::to_string(count) + ", got " + std::to_string(x));
    }
    return x - 1;
}

ArrivalModel read_arrival(const std::string& origin, const YAML::Node& node) {
    require_keys(origin, node, {"kind", "rate"}, "arrival");
    const auto kind = read<std::string>(origin, node["kind"], "arrival kind");
    if (kind == "none") return ArrivalModel::none();
    const double rate = read_number(origin, node["rate"], "arrival rate");
    if (kind == "poisson") return ArrivalModel::poisson(rate);
    if (kind == "slotted") return ArrivalModel::slotted(rate);
    fail(origin, node["kind"], "unknown arrival kind '" + kind + "' (poisson|slotted|none)");
}

ServiceDistribution read_service(const std::string& origin, const YAML::Node& node) {
    require_keys(origin, node, {"kind", "mean", "a", "b", "values", "probs"}, "service");
    const auto kind = read<std::string>(origin, node["kind"], "service kind");
    if (kind == "deterministic") return ServiceDistribution::deterministic(read_number(origin, node["mean"], "mean"));
    if (kind == "exponential") return ServiceDistribution::exponential(read_number(origin, node["mean"], "mean"));
    if (kind == "uniform") {
        return ServiceDistribution::uniform(read_number(origin, node["a"], "a"), read_number(origin, node["b"], "b"));
    }
    if (kind == "discrete") {
        return ServiceDistribution::discrete(read<std::vector<double>>(origin, node["values"], "values"),
                                             read<std::vector<double>>(origin, node["probs"], "probs"));
    }
    fail(origin, node["kind"], "unknown service kind '" + kind + "' (deterministic|exponential|uniform|discrete)");
}

Matrix read_routing(const std::string& origin, const YAML::Node& node, int I) {
    Matrix p = Matrix::Zero(I, I);
    if (!node.IsDefined() || node.IsNull()) return p;
    require_keys(origin, node, {"dense", "triplets"}, "routing");
    if (node["dense"] && node["triplets"]) fail(origin, node, "routing takes either dense or triplets, not both");
    if (const auto dense = node["dense"]) {
        if (!dense.IsSequence() || static_cast<int>(dense.size()) != I) {
            fail(origin, dense, "dense routing must have " + std::to_string(I) + " rows");
        }
        for (int i = 0; i < I; ++i) {
            if (!dense[i].IsSequence() || static_cast<int>(dense[i].size()) != I) {
                fail(origin, dense[i], "dense routing row must have " + std::to_string(I) + " entries");
            }
            for (int l = 0; l < I; ++l) p(i, l) = read_number(origin, dense[i][l], "routing entry");
        }
    } else if (const auto trip = node["triplets"]) {
        if (!trip.IsSequence()) fail(origin, trip, "triplets must be a list of [from, to, probability]");
        for (const auto& t : trip) {
            if (!t.IsSequence() || t.size() != 3) fail(origin, t, "triplet must be [from, to, probability]");
            const int i = read_index(origin, t[0], I, "routing source");
            const int l = read_index(origin, t[1], I, "routing target");
            p(i, l) += read_number(origin, t[2], "routing probability");
        }
    }
    return p;
}

void emit_number(YAML::Emitter& out, double x) { out << format_shortest(x); }

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_shortest(double x) {
    if (!std::isfinite(x)) return format_double(x);
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

PolicyKind make_policy(std::string_view kind, std::optional<double> epsilon, const std::vector<int>& order_one_based,
                       int num_buffers) {
    if (kind == "lrfs") return Lrfs{};
    if (kind == "eps-lrfs") {
        if (!epsilon) throw Error(ErrorCode::ConfigError, "eps-lrfs needs an epsilon");
        if (!(*epsilon >= 0.0 && *epsilon <= 1.0)) throw Error(ErrorCode::ConfigError, "epsilon must lie in [0, 1]");
        return EpsLrfs{*epsilon};
    }
    if (kind == "static-priority") {
        std::vector<int> order;
        for (int i : order_one_based) order.push_back(i - 1);
        priority_ranks(order, num_buffers);
        return StaticPriority{order};
    }
    throw Error(ErrorCode::ConfigError,
                "unknown policy '" + std::string(kind) + "' (lrfs|eps-lrfs|static-priority)");
}

ConfigFile parse_config(std::string_view text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigError, origin + ": " + e.what());
    }
    require_keys(origin, root,
                 {"spec_version", "name", "processors", "synchronized", "buffers", "arrivals", "services",
                  "activities", "routing", "partition", "initial", "policy", "epsilon", "priority_order"},
                 "spec");
    if (!root["spec_version"]) fail(origin, root, "spec_version is mandatory");
    const int version = read<int>(origin, root["spec_version"], "spec_version");
    if (version != kSpecVersion) {
        fail(origin, root["spec_version"], "unsupported spec_version " + std::to_string(version));
    }

    ConfigFile cfg;
    NetworkSpec& s = cfg.spec;
    s.name = root["name"] ? read<std::string>(origin, root["name"], "name") : std::string("unnamed");
    s.num_processors = read<int>(origin, root["processors"], "processors");
    if (s.num_processors < 1) fail(origin, root["processors"], "processors must be >= 1");
    s.synchronized = root["synchronized"] ? read<bool>(origin, root["synchronized"], "synchronized") : false;

    const auto buffers = root["buffers"];
    if (!buffers.IsSequence() || buffers.size() == 0) fail(origin, buffers, "buffers must be a nonempty list of names");
    for (const auto& b : buffers) s.buffer_names.push_back(read<std::string>(origin, b, "buffer name"));
    const int I = static_cast<int>(s.buffer_names.size());

    const auto arrivals = root["arrivals"];
    if (!arrivals.IsSequence() || static_cast<int>(arrivals.size()) != I) {
        fail(origin, arrivals, "arrivals must list one entry per buffer");
    }
    for (const auto& a : arrivals) s.arrivals.push_back(read_arrival(origin, a));

    const auto services = root["services"];
    if (!services.IsSequence() || static_cast<int>(services.size()) != I) {
        fail(origin, services, "services must list one entry per buffer");
    }
    for (const auto& sv : services) s.services.push_back(read_service(origin, sv));

    const auto activities = root["activities"];
    if (!activities.IsSequence()) fail(origin, activities, "activities must be a list");
    for (const auto& a : activities) {
        require_keys(origin, a, {"buffer", "processors", "beta"}, "activity");
        Activity act;
        act.buffer = read_index(origin, a["buffer"], I, "activity buffer");
        const auto procs = a["processors"];
        if (!procs.IsSequence()) fail(origin, procs, "activity processors must be a list");
        for (const auto& k : procs) act.processors.push_back(read_index(origin, k, s.num_processors, "processor"));
        act.beta = a["beta"] ? read_number(origin, a["beta"], "beta") : 1.0;
        s.activities.push_back(std::move(act));
    }

    s.routing = read_routing(origin, root["routing"], I);

    if (const auto part = root["partition"]) {
        if (!part.IsSequence()) fail(origin, part, "partition must be a list of buffer lists");
        for (const auto& comp : part) {
            if (!comp.IsSequence()) fail(origin, comp, "partition component must be a list");
            std::vector<int> members;
            for (const auto& b : comp) members.push_back(read_index(origin, b, I, "partition buffer"));
            s.partition.push_back(std::move(members));
        }
    }

    if (const auto init = root["initial"]) {
        if (!init.IsSequence()) fail(origin, init, "initial must be a list");
        for (const auto& e : init) {
            require_keys(origin, e, {"buffer", "counter", "count"}, "initial entry");
            InitialJobs j;
            j.buffer = read_index(origin, e["buffer"], I, "initial buffer");
            j.counter = e["counter"] ? read<int>(origin, e["counter"], "counter") : 1;
            j.count = read<int>(origin, e["count"], "count");
            if (j.counter < 1 || j.count < 0) fail(origin, e, "initial jobs need counter >= 1 and count >= 0");
            cfg.initial.push_back(j);
        }
    }

    std::vector<int> order;
    if (const auto po = root["priority_order"]) {
        order = read<std::vector<int>>(origin, po, "priority_order");
        for (int i : order) cfg.priority_order.push_back(i - 1);
        try {
            priority_ranks(cfg.priority_order, I);
        } catch (const Error& e) {
            fail(origin, po, e.what());
        }
    }
    if (const auto pol = root["policy"]) {
        std::optional<double> eps;
        if (root["epsilon"]) eps = read_number(origin, root["epsilon"], "epsilon");
        try {
            cfg.policy = make_policy(read<std::string>(origin, pol, "policy"), eps, order, I);
        } catch (const Error& e) {
            fail(origin, pol, e.what());
        }
    }
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string dump_config(const ConfigFile& cfg) {
    const NetworkSpec& s = cfg.spec;
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "spec_version" << YAML::Value << kSpecVersion;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "processors" << YAML::Value << s.num_processors;
    out << YAML::Key << "synchronized" << YAML::Value << s.synchronized;

    out << YAML::Key << "buffers" << YAML::Value << YAML::Flow << s.buffer_names;

    out << YAML::Key << "arrivals" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : s.arrivals) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << to_string(a.kind);
        if (a.kind != ArrivalKind::None) {
            out << YAML::Key << "rate" << YAML::Value;
            emit_number(out, a.rate);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
    for (const auto& sv : s.services) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << to_string(sv.kind);
        switch (sv.kind) {
            case ServiceKind::Deterministic:
            case ServiceKind::Exponential:
                out << YAML::Key << "mean" << YAML::Value;
                emit_number(out, sv.mean_value);
                break;
            case ServiceKind::Uniform:
                out << YAML::Key << "a" << YAML::Value;
                emit_number(out, sv.lo);
                out << YAML::Key << "b" << YAML::Value;
                emit_number(out, sv.hi);
                break;
            case ServiceKind::Discrete:
                out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (double v : sv.values) emit_number(out, v);
                out << YAML::EndSeq << YAML::Key << "probs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (double p : sv.probs) emit_number(out, p);
                out << YAML::EndSeq;
                break;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "activities" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : s.activities) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "buffer" << YAML::Value << a.buffer + 1;
        out << YAML::Key << "processors" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int k : a.processors) out << k + 1;
        out << YAML::EndSeq << YAML::Key << "beta" << YAML::Value;
        emit_number(out, a.beta);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap << YAML::Key << "triplets" << YAML::Value
        << YAML::BeginSeq;
    for (int i = 0; i < s.routing.rows(); ++i) {
        for (int l = 0; l < s.routing.cols(); ++l) {
            if (s.routing(i, l) == 0.0) continue;
            out << YAML::Flow << YAML::BeginSeq << i + 1 << l + 1;
            emit_number(out, s.routing(i, l));
            out << YAML::EndSeq;
        }
    }
    out << YAML::EndSeq << YAML::EndMap;

    if (!s.partition.empty()) {
        out << YAML::Key << "partition" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& comp : s.partition) {
            out << YAML::Flow << YAML::BeginSeq;
            for (int i : comp) out << i + 1;
            out << YAML::EndSeq;
        }
        out << YAML::EndSeq;
    }

    if (!cfg.initial.empty()) {
        out << YAML::Key << "initial" << YAML::Value << YAML::BeginSeq;
        for (const auto& j : cfg.initial) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "buffer" << YAML::Value << j.buffer + 1
                << YAML::Key << "counter" << YAML::Value << j.counter << YAML::Key << "count" << YAML::Value
                << j.count << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    if (cfg.policy) {
        out << YAML::Key << "policy" << YAML::Value << policy_name(*cfg.policy);
        if (const auto* e = std::get_if<EpsLrfs>(&*cfg.policy)) {
            out << YAML::Key << "epsilon" << YAML::Value;
            emit_number(out, e->epsilon);
        }
    }
    auto order = cfg.priority_order;
    if (cfg.policy) {
        if (const auto* sp = std::get_if<StaticPriority>(&*cfg.policy)) order = sp->order;
    }
    if (!order.empty()) {
        out << YAML::Key << "priority_order" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int i : order) out << i + 1;
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

Matrix parse_z(std::string_view text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigError, origin + ": " + e.what());
    }
    require_keys(origin, root, {"spec_version", "z"}, "Z file");
    if (!root["spec_version"]) fail(origin, root, "spec_version is mandatory");
    if (read<int>(origin, root["spec_version"], "spec_version") != kSpecVersion) {
        fail(origin, root["spec_version"], "unsupported spec_version");
    }
    const auto z = root["z"];
    if (!z.IsSequence() || z.size() == 0) fail(origin, z, "z must be a nonempty list of rows");
    const int n = static_cast<int>(z.size());
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (!z[i].IsSequence() || static_cast<int>(z[i].size()) != n) fail(origin, z[i], "z must be square");
        for (int l = 0; l < n; ++l) m(i, l) = read_number(origin, z[i][l], "z entry");
    }
    return m;
}

Matrix load_z(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_z(ss.str(), path.string());
}

std::string dump_z(const Matrix& z) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "spec_version" << YAML::Value << kSpecVersion;
    out << YAML::Key << "z" << YAML::Value << YAML::BeginSeq;
    for (int i = 0; i < z.rows(); ++i) {
        out << YAML::Flow << YAML::BeginSeq;
        for (int l = 0; l < z.cols(); ++l) emit_number(out, z(i, l));
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace spn
