#include "spn_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spn/config.hpp"
#include "spn/diagnostics.hpp"
#include "spn/error.hpp"
#include "spn/examples.hpp"
#include "spn/lyapunov.hpp"
#include "spn/simulator.hpp"
#include "spn_cli/output.hpp"

namespace spn::cli {

namespace {

namespace fs = std::filesystem;

// Raised when a certificate or an expectation fails; maps to exit code 2.
struct Violated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

struct Source {
    std::string spec;
    std::string example;
    bool unstable = false;
};

struct PolicyFlags {
    std::string policy;
    std::optional<double> epsilon;
    std::vector<int> order;
    std::string tie_break = "lowest";
};

struct SimFlags {
    double horizon = 1000.0;
    std::optional<double> sample_interval;
    int replications = 1;
    int predraw = 0;
    int counter_cap = 0;
    bool audit = false;
    unsigned threads = 0;
    std::vector<std::string> backlog;
    bool expect_stable = false;
    bool lyapunov = false;
};

struct CertFlags {
    std::string z_path;
    std::string construct = "auto";
    std::optional<double> epsilon;
};

struct Loaded {
    ConfigFile cfg;
    ValidatedNetwork net;
};

Loaded load(const Source& src) {
    if (src.spec.empty() == src.example.empty()) {
        throw Error(ErrorCode::ConfigError, "give exactly one of --spec PATH or --example NAME");
    }
    ConfigFile cfg = src.example.empty() ? load_config(src.spec) : make_example(src.example, src.unstable);
    if (src.unstable && src.example.empty()) throw Error(ErrorCode::ConfigError, "--unstable needs --example");
    ValidatedNetwork net = validate(cfg.spec);
    return Loaded{std::move(cfg), std::move(net)};
}

TableFormat table_format(const std::string& name) {
    if (name == "csv") return TableFormat::Csv;
    if (name == "tsv") return TableFormat::Tsv;
    throw Error(ErrorCode::ConfigError, "--format must be csv or tsv");
}

fs::path out_dir(const Globals& g) {
    fs::path dir = ".";
    if (!g.out.empty()) {
        dir = g.out;
    } else if (const char* env = std::getenv("SPN_OUT_DIR"); env != nullptr && *env != '\0') {
        dir = env;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::ConfigError, "cannot create output directory " + dir.string());
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    os << content;
}

std::string file_stem(const std::string& name) {
    std::string s;
    for (char ch : name) s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return s.empty() ? "network" : s;
}

template <class Seq>
std::string list_text(const Seq& xs, int offset = 0) {
    std::string out = "[";
    bool first = true;
    for (const auto& x : xs) {
        if (!first) out += ", ";
        first = false;
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>) {
            out += format_double(x);
        } else {
            out += std::to_string(x + offset);
        }
    }
    return out + "]";
}

std::string vector_text(const Vector& v) {
    std::vector<double> xs(v.data(), v.data() + v.size());
    return list_text(xs);
}

PolicyKind resolve_policy(const Loaded& l, const PolicyFlags& f) {
    const int I = l.net.num_buffers();
    if (f.policy == "static-priority" && f.order.empty()) {
        if (const auto* sp = l.cfg.policy ? std::get_if<StaticPriority>(&*l.cfg.policy) : nullptr) return *sp;
        if (!l.cfg.priority_order.empty()) return StaticPriority{l.cfg.priority_order};
        throw Error(ErrorCode::ConfigError, "static-priority needs --priority-order or a priority_order in the spec");
    }
    if (!f.policy.empty()) return make_policy(f.policy, f.epsilon, f.order, I);
    PolicyKind p = l.cfg.policy.value_or(Lrfs{});
    if (auto* e = std::get_if<EpsLrfs>(&p); e != nullptr && f.epsilon) e->epsilon = *f.epsilon;
    return p;
}

std::string policy_text(const PolicyKind& p) {
    std::string s = policy_name(p);
    if (const auto* e = std::get_if<EpsLrfs>(&p)) s += "(epsilon=" + format_double(e->epsilon) + ")";
    if (const auto* sp = std::get_if<StaticPriority>(&p)) s += list_text(sp->order, 1);
    return s;
}

std::vector<InitialJobs> parse_backlog(const std::vector<std::string>& items, int I) {
    std::vector<InitialJobs> out;
    for (const auto& item : items) {
        std::vector<int> parts;
        std::stringstream ss(item);
        std::string tok;
        try {
            while (std::getline(ss, tok, ':')) parts.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            parts.clear();
        }
        InitialJobs j;
        if (parts.size() == 2) {
            j = {parts[0] - 1, 1, parts[1]};
        } else if (parts.size() == 3) {
            j = {parts[0] - 1, parts[1], parts[2]};
        } else {
            throw Error(ErrorCode::ConfigError, "--backlog takes BUFFER:COUNT or BUFFER:COUNTER:COUNT, got " + item);
        }
        if (j.buffer < 0 || j.buffer >= I || j.counter < 1 || j.count < 0) {
            throw Error(ErrorCode::ConfigError, "--backlog entry out of range: " + item);
        }
        out.push_back(j);
    }
    return out;
}

struct CertChoice {
    Matrix z;
    std::string source;
    std::optional<double> epsilon_bound;
};

CertChoice choose_certificate(const ValidatedNetwork& net, const CertFlags& f) {
    if (!f.z_path.empty()) return {load_z(f.z_path), "file:" + f.z_path, std::nullopt};
    if (f.construct == "psn") {
        auto c = construct_psn(net);
        return {c.z, "psn", c.epsilon_bound};
    }
    if (f.construct == "comm") {
        auto c = construct_comm(net);
        return {c.z, "comm", c.epsilon_bound};
    }
    if (f.construct != "auto") throw Error(ErrorCode::ConfigError, "--construct must be auto, psn or comm");
    try {
        auto c = construct_psn(net);
        return {c.z, "psn", c.epsilon_bound};
    } catch (const Error&) {
    }
    try {
        auto c = construct_comm(net);
        return {c.z, "comm", c.epsilon_bound};
    } catch (const Error&) {
    }
    throw Error(ErrorCode::ConfigError,
                "no closed-form certificate applies (needs A1+A2, or synchronized with B1); pass --z FILE");
}

struct LyapunovSetup {
    CertChoice choice;
    QuadraticCertificate cert;
    GlobalConstants constants;
};

LyapunovSetup setup_lyapunov(const ValidatedNetwork& net, const CertFlags& f, const PolicyKind& policy) {
    LyapunovSetup s;
    s.choice = choose_certificate(net, f);
    double eps = 0.0;
    if (f.epsilon) {
        eps = *f.epsilon;
    } else if (const auto* e = std::get_if<EpsLrfs>(&policy)) {
        eps = e->epsilon;
    }
    const auto check = check_local(net, s.choice.z, eps);
    if (!check.holds) {
        throw Violated("certificate (" + s.choice.source + ") does not hold at epsilon " + format_double(eps));
    }
    s.cert = QuadraticCertificate{s.choice.z, eps, check.eta, check.c};
    s.constants = global_constants(net, s.cert);
    return s;
}

void add_constants(Report& r, const LyapunovSetup& s) {
    const auto& g = s.constants;
    r.add("certificate", s.choice.source);
    r.add("cert_epsilon", s.cert.epsilon);
    r.add("eta", s.cert.eta);
    r.add("C_certificate", s.cert.c);
    r.add("B_renewal", g.b_renewal);
    r.add("T", g.t);
    r.add("nu", g.nu);
    r.add("gamma", g.gamma);
    r.add("D", g.d);
    r.add("gamma1", g.gamma1);
    r.add("gamma2", g.gamma2);
    r.add("upsilon", g.upsilon);
    r.add("C", g.c);
    r.add("C_rule", "max(C_certificate, 1) + max_u delta^T Z delta");
    r.add("xi", g.xi);
    r.add("beta_min", g.beta_min);
    r.add("m_min", g.m_min);
    r.add("m_max", g.m_max);
    r.add("bounded_routes", g.bounded_routes);
}

SimOptions sim_options(const Loaded& l, const Globals& g, const SimFlags& f, const std::string& command) {
    if (!g.seed) throw Error(ErrorCode::ConfigError, command + " requires --seed");
    SimOptions o;
    o.horizon = f.horizon;
    o.sample_interval = f.sample_interval.value_or(1.0);
    o.seed = *g.seed;
    o.predraw_depth = f.predraw;
    o.counter_cap = f.counter_cap;
    o.replications = f.replications;
    o.audit = f.audit;
    o.initial = l.cfg.initial;
    for (const auto& j : parse_backlog(f.backlog, l.net.num_buffers())) o.initial.push_back(j);
    return o;
}

TieBreak tie_break(const std::string& name) {
    if (name == "lowest") return TieBreak::LowestIndex;
    if (name == "random") return TieBreak::Random;
    throw Error(ErrorCode::ConfigError, "--tie-break must be lowest or random");
}

void add_audit(Report& r, const AuditReport& a) {
    r.add("audit_instants", static_cast<unsigned long long>(a.batches));
    r.add("audit_feasibility", static_cast<unsigned long long>(a.feasibility));
    r.add("audit_maximality", static_cast<unsigned long long>(a.maximality));
    r.add("audit_non_preemption", static_cast<unsigned long long>(a.non_preemption));
    r.add("audit_counter_monotonicity", static_cast<unsigned long long>(a.counter_monotonicity));
    r.add("audit_workload_identity", static_cast<unsigned long long>(a.workload_identity));
    r.add("audit_conservation", static_cast<unsigned long long>(a.conservation));
    r.add("audit_synchronization", static_cast<unsigned long long>(a.synchronization));
    r.add("audit_routing_events", static_cast<unsigned long long>(a.routing_events));
    r.add("audit_routing_mean", a.routing_mean());
    r.add("audit_routing_stderr", a.routing_stderr());
    r.add("audit_routing_martingale_ok", a.routing_martingale_ok());
}

std::vector<Trajectory> run_and_write(const Loaded& l, const PolicyKind& policy, SimOptions opts,
                                      const Globals& g, const SimFlags& f, const std::string& stem,
                                      Report& report) {
    auto trajs = run_replications(l.net, policy, opts, f.threads);
    const auto fmt = table_format(g.format);
    const auto dir = out_dir(g);
    for (const auto& t : trajs) {
        std::ostringstream os;
        write_trajectory(os, t, fmt);
        const auto path = dir / (stem + ".seed" + std::to_string(t.seed) + extension(fmt));
        write_file(path, os.str());
    }
    report.add("trajectory_files", std::to_string(trajs.size()));
    return trajs;
}

void add_runs(Report& r, const std::vector<Trajectory>& trajs, const std::optional<StabilityReport>& st) {
    for (std::size_t k = 0; k < trajs.size(); ++k) {
        const auto& t = trajs[k];
        r.section("run." + std::to_string(k + 1));
        r.add("seed", static_cast<unsigned long long>(t.seed));
        r.add("time_avg_norm", t.time_avg_norm);
        if (st) {
            r.add("tail_slope", st->runs[k].tail_slope);
            r.add("middle_average", st->runs[k].middle_average);
            r.add("tail_average", st->runs[k].tail_average);
            r.add("verdict", to_string(st->runs[k].verdict));
        }
        r.add("events_processed", static_cast<unsigned long long>(t.events_processed));
        r.add("final_norm", t.final_norm);
        if (t.audit) add_audit(r, *t.audit);
    }
}

int cmd_validate(const Source& src, std::ostream& out) {
    const auto l = load(src);
    const auto& net = l.net;
    Report r;
    r.add("command", "validate");
    r.add("network", net.spec().name);
    r.add("valid", true);
    r.add("buffers", net.num_buffers());
    r.add("activities", net.num_activities());
    r.add("processors", net.num_processors());
    r.add("synchronized", net.spec().synchronized);
    r.add("lambda", vector_text(net.load().lambda));
    r.add("rho", vector_text(net.load().rho));
    r.add("spectral_radius_bound", net.spectral_radius());
    r.add("route_depth", net.route_depth() ? std::to_string(*net.route_depth()) : std::string("unbounded"));
    for (int h = 0; h < net.num_components(); ++h) {
        r.add("component_" + std::to_string(h + 1), list_text(net.component_buffers(h), 1));
    }
    for (int i = 0; i < net.num_buffers(); ++i) {
        r.add("J_" + std::to_string(i + 1), list_text(net.activities_of_buffer(i), 1));
    }
    out << r.str();
    return kExitOk;
}

int cmd_example(const std::string& name, bool unstable, bool list, const Globals& g, std::ostream& out) {
    if (list) {
        for (const auto& e : example_catalog()) out << e.name << " = " << e.summary << "\n";
        return kExitOk;
    }
    if (name.empty()) throw Error(ErrorCode::UnknownExample, "example needs a NAME (see --list)");
    const auto cfg = make_example(name, unstable);
    validate(cfg.spec);
    const auto path = out_dir(g) / (file_stem(cfg.spec.name) + ".yaml");
    write_file(path, dump_config(cfg));
    out << "wrote = " << path.string() << "\n";
    return kExitOk;
}

int cmd_simulate(const Source& src, const Globals& g, const PolicyFlags& pf, const SimFlags& sf,
                 const CertFlags& cf, std::ostream& out) {
    const auto l = load(src);
    const auto policy = resolve_policy(l, pf);
    auto opts = sim_options(l, g, sf, "simulate");
    opts.tie_break = tie_break(pf.tie_break);
    Report r;
    r.add("command", "simulate");
    r.add("network", l.net.spec().name);
    r.add("policy", policy_text(policy));
    std::optional<LyapunovSetup> lyap;
    if (sf.lyapunov) {
        lyap = setup_lyapunov(l.net, cf, policy);
        opts.predraw_depth = std::max(opts.predraw_depth, lyap->constants.d);
        const auto cert = lyap->cert;
        const auto constants = lyap->constants;
        opts.sample_hook = [cert, constants](const SimState& s) { return eval_global(s, constants, cert); };
    }
    r.add("horizon", opts.horizon);
    r.add("sample_interval", opts.sample_interval);
    r.add("base_seed", static_cast<unsigned long long>(opts.seed));
    r.add("replications", opts.replications);
    r.add("predraw_depth", opts.predraw_depth);
    const auto stem = file_stem(l.net.spec().name);
    const auto trajs = run_and_write(l, policy, opts, g, sf, stem, r);
    std::optional<StabilityReport> st;
    if (trajs.front().rows.size() >= 100) st = stability_estimate(trajs);
    if (st) {
        r.add("verdict", to_string(st->verdict));
        r.add("mean_tail_slope", st->mean_slope);
        r.add("diverging_runs", st->diverging);
        r.add("bounded_runs", st->bounded);
    } else {
        r.add("verdict", "too-few-samples");
    }
    r.add("mean_time_avg_norm", [&] {
        double s = 0.0;
        for (const auto& t : trajs) s += t.time_avg_norm;
        return s / static_cast<double>(trajs.size());
    }());
    if (lyap) {
        r.section("lyapunov");
        add_constants(r, *lyap);
    }
    add_runs(r, trajs, st);
    const auto text = r.str();
    write_file(out_dir(g) / (stem + ".simulate.txt"), text);
    out << text;
    if (sf.expect_stable && st && st->verdict == Verdict::Diverging) {
        throw Violated("verdict is diverging but --expect-stable was given");
    }
    return kExitOk;
}

int cmd_certify(const Source& src, const Globals& g, const CertFlags& cf, bool want_max_slack,
                const std::vector<std::string>& conditions, std::uint64_t samples, std::ostream& out) {
    const auto l = load(src);
    const auto& net = l.net;
    const auto choice = choose_certificate(net, cf);
    check_matrix(choice.z, net.num_buffers());
    double eps = 0.0;
    if (cf.epsilon) {
        eps = *cf.epsilon;
    } else if (choice.epsilon_bound && std::isfinite(*choice.epsilon_bound)) {
        eps = *choice.epsilon_bound / 2.0;
    }
    Report r;
    r.add("command", "certify");
    r.add("network", net.spec().name);
    r.add("z_source", choice.source);
    r.add("epsilon", eps);
    if (choice.source == "psn" || choice.source == "comm") {
        r.add("epsilon_bound", choice.epsilon_bound ? format_double(*choice.epsilon_bound) : std::string("none"));
    }
    const auto check = check_local(net, choice.z, eps);
    bool violated = !check.holds;
    r.add("holds", check.holds);
    r.add("schedules_checked", static_cast<unsigned long long>(check.schedules_checked));
    r.add("max_coefficient", check.max_coefficient);
    if (check.holds) {
        r.add("eta", check.eta);
        r.add("C", check.c);
    } else {
        const auto& w = *check.witness;
        std::vector<int> pattern, schedule;
        for (int i = 0; i < net.num_buffers(); ++i) {
            if (w.pattern[i]) pattern.push_back(i);
        }
        for (int j = 0; j < w.schedule.size(); ++j) schedule.push_back(w.schedule[j] ? 1 : 0);
        r.add("witness_pattern", list_text(pattern, 1));
        r.add("witness_schedule", list_text(schedule));
        r.add("witness_buffer", w.buffer + 1);
        r.add("witness_coefficient", w.coefficient);
    }
    if (want_max_slack) {
        const auto ms = max_slack(net, choice.z);
        r.add("max_slack", ms ? format_double(*ms) : std::string("none"));
    }
    for (const auto& name : conditions) {
        const auto cond = parse_condition(name);
        const bool ok = check_structural(net, choice.z, cond);
        r.add("condition_" + std::string(to_string(cond)), ok);
    }
    if (samples > 0 && check.holds) {
        Rng rng(g.seed.value_or(1), "sample-check");
        const auto n = sample_check(net, QuadraticCertificate{choice.z, eps, check.eta, check.c}, samples, rng);
        r.add("samples", static_cast<unsigned long long>(samples));
        r.add("sample_violations", static_cast<unsigned long long>(n));
        violated = violated || n > 0;
    }
    const auto text = r.str();
    write_file(out_dir(g) / (file_stem(net.spec().name) + ".certify.txt"), text);
    out << text;
    return violated ? kExitViolated : kExitOk;
}

int cmd_drift(const Source& src, const Globals& g, const PolicyFlags& pf, SimFlags sf, const CertFlags& cf,
              std::ostream& out) {
    const auto l = load(src);
    const auto policy = resolve_policy(l, pf);
    const auto lyap = setup_lyapunov(l.net, cf, policy);
    if (!sf.sample_interval) sf.sample_interval = static_cast<double>(lyap.constants.t);
    auto opts = sim_options(l, g, sf, "drift");
    opts.tie_break = tie_break(pf.tie_break);
    opts.predraw_depth = std::max(opts.predraw_depth, lyap.constants.d);
    const auto cert = lyap.cert;
    const auto constants = lyap.constants;
    opts.sample_hook = [cert, constants](const SimState& s) { return eval_global(s, constants, cert); };

    Report r;
    r.add("command", "drift");
    r.add("network", l.net.spec().name);
    r.add("policy", policy_text(policy));
    r.add("horizon", opts.horizon);
    r.add("sample_interval", opts.sample_interval);
    r.add("base_seed", static_cast<unsigned long long>(opts.seed));
    r.add("replications", opts.replications);
    r.add("predraw_depth", opts.predraw_depth);
    const auto stem = file_stem(l.net.spec().name);
    const auto trajs = run_and_write(l, policy, opts, g, sf, stem, r);
    const auto drift = drift_estimate(trajs, static_cast<double>(lyap.constants.t));
    r.add("increments", static_cast<unsigned long long>(drift.increments));
    r.add("fit_a", drift.a);
    r.add("fit_b", drift.b);
    r.add("top_bins_negative", drift.top_bins_negative);
    r.add("verdict", drift.drift_consistent ? "drift-consistent" : "not-drift-consistent");
    r.section("constants");
    add_constants(r, lyap);
    for (std::size_t k = 0; k < drift.bins.size(); ++k) {
        const auto& b = drift.bins[k];
        r.section("bin." + std::to_string(k + 1));
        r.add("lo", b.lo);
        r.add("hi", b.hi);
        r.add("n", b.n);
        r.add("mean_increment", b.mean_increment);
        r.add("stderr", b.stderr_increment);
    }
    add_runs(r, trajs, std::nullopt);
    const auto fmt = table_format(g.format);
    std::ostringstream bins;
    write_drift_bins(bins, drift, fmt);
    const auto dir = out_dir(g);
    write_file(dir / (stem + ".drift_bins" + extension(fmt)), bins.str());
    const auto text = r.str();
    write_file(dir / (stem + ".drift.txt"), text);
    out << text;
    return kExitOk;
}

int cmd_analyze(const std::vector<std::string>& files, const Globals& g, std::optional<double> t_step,
                const StabilityOptions& so, bool expect_stable, std::ostream& out) {
    if (files.empty()) throw Error(ErrorCode::ConfigError, "analyze needs at least one trajectory file");
    std::vector<Trajectory> trajs;
    for (const auto& f : files) {
        std::ifstream is(f);
        if (!is) throw Error(ErrorCode::ConfigError, "cannot open " + f);
        const auto fmt = fs::path(f).extension() == ".tsv" ? TableFormat::Tsv : table_format(g.format);
        trajs.push_back(read_trajectory(is, fmt));
    }
    Report r;
    r.add("command", "analyze");
    r.add("trajectories", static_cast<int>(trajs.size()));
    const auto st = stability_estimate(trajs, so);
    r.add("verdict", to_string(st.verdict));
    r.add("mean_tail_slope", st.mean_slope);
    r.add("diverging_runs", st.diverging);
    r.add("bounded_runs", st.bounded);
    std::optional<DriftReport> drift;
    if (t_step) {
        drift = drift_estimate(trajs, *t_step);
        r.add("drift_increments", static_cast<unsigned long long>(drift->increments));
        r.add("drift_fit_a", drift->a);
        r.add("drift_fit_b", drift->b);
        r.add("drift_top_bins_negative", drift->top_bins_negative);
        r.add("drift_verdict", drift->drift_consistent ? "drift-consistent" : "not-drift-consistent");
    }
    for (std::size_t k = 0; k < trajs.size(); ++k) {
        r.section("file." + std::to_string(k + 1));
        r.add("path", files[k]);
        r.add("time_avg_norm", st.runs[k].time_avg_norm);
        r.add("tail_slope", st.runs[k].tail_slope);
        r.add("middle_average", st.runs[k].middle_average);
        r.add("tail_average", st.runs[k].tail_average);
        r.add("verdict", to_string(st.runs[k].verdict));
    }
    const auto dir = out_dir(g);
    if (drift) {
        const auto fmt = table_format(g.format);
        std::ostringstream bins;
        write_drift_bins(bins, *drift, fmt);
        write_file(dir / ("analysis.drift_bins" + extension(fmt)), bins.str());
    }
    const auto text = r.str();
    write_file(dir / "analysis.txt", text);
    out << text;
    if (expect_stable && st.verdict == Verdict::Diverging) {
        throw Violated("verdict is diverging but --expect-stable was given");
    }
    return kExitOk;
}

void add_source(CLI::App* cmd, Source& src) {
    cmd->add_option("--spec", src.spec, "Network spec file");
    cmd->add_option("--example", src.example, "Builtin example name");
    cmd->add_flag("--unstable", src.unstable, "Use the priority-instability variant of the example");
}

void add_policy(CLI::App* cmd, PolicyFlags& pf) {
    cmd->add_option("--policy", pf.policy, "lrfs | eps-lrfs | static-priority");
    cmd->add_option("--epsilon", pf.epsilon, "eps-LRFS coin probability");
    cmd->add_option("--priority-order", pf.order, "Buffers, highest priority first (1-based)")->delimiter(',');
    cmd->add_option("--tie-break", pf.tie_break, "lowest | random");
}

void add_sim(CLI::App* cmd, SimFlags& sf) {
    cmd->add_option("--horizon", sf.horizon, "Simulated time");
    cmd->add_option("--sample-interval", sf.sample_interval, "Time between trajectory rows");
    cmd->add_option("--replications", sf.replications, "Independent runs with seeds seed, seed+1, ...");
    cmd->add_option("--predraw-depth", sf.predraw, "Route pre-draw depth D (0: plain process)");
    cmd->add_option("--counter-cap", sf.counter_cap, "Record per-counter queues up to this counter");
    cmd->add_flag("--audit", sf.audit, "Check model invariants at every event instant");
    cmd->add_option("--threads", sf.threads, "Worker threads for replications (0: all cores)");
    cmd->add_option("--backlog", sf.backlog, "Initial jobs BUFFER:COUNT or BUFFER:COUNTER:COUNT");
}

void add_cert(CLI::App* cmd, CertFlags& cf, const std::string& eps_flag) {
    cmd->add_option("--z", cf.z_path, "Z matrix file");
    cmd->add_option("--construct", cf.construct, "auto | psn | comm");
    cmd->add_option(eps_flag, cf.epsilon, "Certificate slack");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and Lyapunov certification for stochastic processing networks", "spn"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--out", g.out, "Output directory (default: $SPN_OUT_DIR or .)");
    app.add_option("--format", g.format, "csv | tsv")->check(CLI::IsMember({"csv", "tsv"}));

    Source src;
    PolicyFlags pf;
    SimFlags sf;
    CertFlags cf;

    auto* validate_cmd = app.add_subcommand("validate", "Validate a network spec");
    add_source(validate_cmd, src);

    std::string example_name;
    bool example_list = false;
    auto* example_cmd = app.add_subcommand("example", "Write a builtin example spec");
    example_cmd->add_option("name", example_name, "Example name");
    example_cmd->add_flag("--unstable", src.unstable, "Priority-instability variant (rybko-stolyar)");
    example_cmd->add_flag("--list", example_list, "List builtin examples");

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate and export trajectories");
    add_source(simulate_cmd, src);
    add_policy(simulate_cmd, pf);
    add_sim(simulate_cmd, sf);
    simulate_cmd->add_flag("--expect-stable", sf.expect_stable, "Exit 2 when the verdict is diverging");
    simulate_cmd->add_flag("--lyapunov", sf.lyapunov, "Add the global Lyapunov column (route pre-draw mode)");
    add_cert(simulate_cmd, cf, "--cert-epsilon");

    bool want_max_slack = false;
    std::vector<std::string> conditions;
    std::uint64_t samples = 0;
    auto* certify_cmd = app.add_subcommand("certify", "Check a quadratic local Lyapunov certificate");
    add_source(certify_cmd, src);
    add_cert(certify_cmd, cf, "--epsilon");
    certify_cmd->add_flag("--max-slack", want_max_slack, "Report the largest slack for which Z certifies");
    certify_cmd->add_option("--condition", conditions, "C1 | C2 | C2p | C3 | C3p (repeatable)");
    certify_cmd->add_option("--samples", samples, "Random (w, u) pairs for the direct check");

    auto* drift_cmd = app.add_subcommand("drift", "Estimate the drift of the global Lyapunov function");
    add_source(drift_cmd, src);
    add_policy(drift_cmd, pf);
    add_sim(drift_cmd, sf);
    add_cert(drift_cmd, cf, "--cert-epsilon");

    std::vector<std::string> files;
    std::optional<double> t_step;
    StabilityOptions so;
    bool analyze_expect = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Stability and drift estimates from trajectory files");
    analyze_cmd->add_option("files", files, "Trajectory CSV/TSV files")->required();
    analyze_cmd->add_option("--t-step", t_step, "Drift step T (needs a Lyapunov column)");
    analyze_cmd->add_option("--slope-threshold", so.slope_threshold, "Diverging when the tail slope exceeds this");
    analyze_cmd->add_option("--ratio", so.ratio, "Bounded when tail average < ratio x middle average");
    analyze_cmd->add_flag("--expect-stable", analyze_expect, "Exit 2 when the verdict is diverging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(src, out);
        if (example_cmd->parsed()) return cmd_example(example_name, src.unstable, example_list, g, out);
        if (simulate_cmd->parsed()) return cmd_simulate(src, g, pf, sf, cf, out);
        if (certify_cmd->parsed()) return cmd_certify(src, g, cf, want_max_slack, conditions, samples, out);
        if (drift_cmd->parsed()) return cmd_drift(src, g, pf, sf, cf, out);
        if (analyze_cmd->parsed()) return cmd_analyze(files, g, t_step, so, analyze_expect, out);
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) {
            err << "error: " << module_of(v.code) << "." << to_string(v.code) << ": " << v.message << "\n";
        }
        return kExitInputError;
    } catch (const Error& e) {
        err << "error: " << module_of(e.code()) << "." << e.what() << "\n";
        return kExitInputError;
    } catch (const Violated& e) {
        err << "violated: " << e.what() << "\n";
        return kExitViolated;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace spn::cli
