#include "spn/examples.hpp"

#include "spn/error.hpp"

namespace spn {

namespace {

struct Builder {
    ConfigFile cfg;

    explicit Builder(std::string name, int processors, bool synchronized = false) {
        cfg.spec.name = std::move(name);
        cfg.spec.num_processors = processors;
        cfg.spec.synchronized = synchronized;
    }

    // processors are 1-based here to read like the config files
    int buffer(std::string name, ArrivalModel arrival, ServiceDistribution service) {
        cfg.spec.buffer_names.push_back(std::move(name));
        cfg.spec.arrivals.push_back(arrival);
        cfg.spec.services.push_back(std::move(service));
        return static_cast<int>(cfg.spec.buffer_names.size());
    }

    void activity(int buffer, std::vector<int> processors, double beta = 1.0) {
        for (int& k : processors) --k;
        cfg.spec.activities.push_back(Activity{buffer - 1, std::move(processors), beta});
    }

    void route(int from, int to, double p) {
        const int I = static_cast<int>(cfg.spec.buffer_names.size());
        if (cfg.spec.routing.rows() != I) {
            Matrix grown = Matrix::Zero(I, I);
            const auto n = cfg.spec.routing.rows();
            grown.topLeftCorner(n, n) = cfg.spec.routing;
            cfg.spec.routing = grown;
        }
        cfg.spec.routing(from - 1, to - 1) = p;
    }

    void component(std::vector<int> buffers) {
        for (int& i : buffers) --i;
        cfg.spec.partition.push_back(std::move(buffers));
    }

    ConfigFile done() {
        const int I = static_cast<int>(cfg.spec.buffer_names.size());
        if (cfg.spec.routing.rows() != I) route(1, 1, 0.0);
        return std::move(cfg);
    }
};

ConfigFile rybko_stolyar(bool unstable) {
    Builder b("rybko-stolyar", 2);
    const auto det = ServiceDistribution::deterministic;
    b.buffer("b1", ArrivalModel::poisson(1.0), det(0.1));
    b.buffer("b2", ArrivalModel::none(), det(0.6));
    b.buffer("b3", ArrivalModel::poisson(1.0), det(0.1));
    b.buffer("b4", ArrivalModel::none(), det(0.6));
    b.activity(1, {1});
    b.activity(2, {2});
    b.activity(3, {2});
    b.activity(4, {1});
    b.route(1, 2, 1.0);
    b.route(3, 4, 1.0);
    b.component({1, 4});
    b.component({2, 3});
    // processor 1 prefers buffer 4, processor 2 prefers buffer 2
    b.cfg.priority_order = {3, 1, 0, 2};
    if (unstable) {
        b.cfg.spec.name = "rybko-stolyar-unstable";
        b.cfg.policy = StaticPriority{b.cfg.priority_order};
    } else {
        b.cfg.policy = Lrfs{};
    }
    return b.done();
}

ConfigFile tandem() {
    Builder b("tandem", 2);
    b.buffer("b1", ArrivalModel::poisson(0.5), ServiceDistribution::exponential(1.0));
    b.buffer("b2", ArrivalModel::none(), ServiceDistribution::exponential(0.8));
    b.activity(1, {1});
    b.activity(2, {2});
    b.route(1, 2, 1.0);
    b.cfg.policy = Lrfs{};
    return b.done();
}

ConfigFile single_server_two_buffers() {
    Builder b("single-server-2buf", 1);
    b.buffer("b1", ArrivalModel::poisson(1.0), ServiceDistribution::deterministic(0.3));
    b.buffer("b2", ArrivalModel::poisson(1.0), ServiceDistribution::deterministic(0.3));
    b.activity(1, {1});
    b.activity(2, {1});
    b.cfg.policy = Lrfs{};
    return b.done();
}

ConfigFile psn_a2() {
    // Two buffers fully linked to two servers, plus a downstream station.
    Builder b("psn-a2", 3);
    b.buffer("b1", ArrivalModel::poisson(0.8), ServiceDistribution::exponential(1.0));
    b.buffer("b2", ArrivalModel::poisson(0.6), ServiceDistribution::uniform(0.5, 1.5));
    b.buffer("b3", ArrivalModel::poisson(0.5), ServiceDistribution::exponential(1.0));
    b.activity(1, {1});
    b.activity(1, {2});
    b.activity(2, {1});
    b.activity(2, {2});
    b.activity(3, {3});
    b.route(1, 3, 0.25);
    b.cfg.policy = EpsLrfs{0.15};
    return b.done();
}

ConfigFile reentrant_line() {
    Builder b("reentrant-line", 2);
    b.buffer("b1", ArrivalModel::poisson(1.0), ServiceDistribution::deterministic(0.3));
    b.buffer("b2", ArrivalModel::none(), ServiceDistribution::exponential(0.6));
    b.buffer("b3", ArrivalModel::none(), ServiceDistribution::deterministic(0.4));
    b.activity(1, {1});
    b.activity(2, {2});
    b.activity(3, {1});
    b.route(1, 2, 1.0);
    b.route(2, 3, 1.0);
    b.cfg.policy = Lrfs{};
    return b.done();
}

ConfigFile switch_2x2() {
    // Virtual output queues; processors are in1, in2, out1, out2.
    Builder b("switch-2x2", 4, true);
    const auto unit = ServiceDistribution::deterministic(1.0);
    b.buffer("voq11", ArrivalModel::slotted(0.2), unit);
    b.buffer("voq12", ArrivalModel::slotted(0.2), unit);
    b.buffer("voq21", ArrivalModel::slotted(0.2), unit);
    b.buffer("voq22", ArrivalModel::slotted(0.2), unit);
    b.activity(1, {1, 3});
    b.activity(2, {1, 4});
    b.activity(3, {2, 3});
    b.activity(4, {2, 4});
    b.cfg.policy = EpsLrfs{0.025};
    return b.done();
}

ConfigFile wireless_fig4() {
    // Links between four nodes; a link needs both endpoint radios.
    Builder b("wireless-fig4", 4, true);
    const auto unit = ServiceDistribution::deterministic(1.0);
    b.buffer("l12", ArrivalModel::slotted(0.1), unit);
    b.buffer("l21", ArrivalModel::slotted(0.1), unit);
    b.buffer("l13", ArrivalModel::slotted(0.1), unit);
    b.buffer("l31", ArrivalModel::slotted(0.1), unit);
    b.buffer("l24", ArrivalModel::slotted(0.2), unit);
    b.buffer("l43", ArrivalModel::none(), unit);
    b.activity(1, {1, 2});
    b.activity(2, {2, 1});
    b.activity(3, {1, 3});
    b.activity(4, {3, 1});
    b.activity(5, {2, 4});
    b.activity(6, {4, 3});
    b.route(5, 6, 1.0);
    // half of the comm-certificate slack bound 0.1 / 4
    b.cfg.policy = EpsLrfs{0.0125};
    return b.done();
}

}  // namespace

const std::vector<ExampleInfo>& example_catalog() {
    static const std::vector<ExampleInfo> catalog{
        {"rybko-stolyar", "4 buffers, 2 processors, routes 1->2 and 3->4; --unstable adds the bad priority order"},
        {"tandem", "two exponential stations in series"},
        {"single-server-2buf", "one processor shared by two buffers, m = 0.3 each"},
        {"psn-a2", "parallel server network with a complete bipartite component"},
        {"reentrant-line", "three buffers visiting station 1, 2, 1"},
        {"switch-2x2", "synchronized 2x2 input-queued switch, load 0.4 per port"},
        {"wireless-fig4", "synchronized 4-node wireless network, 6 links, 5 paths"},
    };
    return catalog;
}

ConfigFile make_example(std::string_view name, bool unstable) {
    if (unstable && name != "rybko-stolyar") {
        throw Error(ErrorCode::UnknownExample, "only rybko-stolyar has an unstable variant");
    }
    if (name == "rybko-stolyar") return rybko_stolyar(unstable);
    if (name == "tandem") return tandem();
    if (name == "single-server-2buf") return single_server_two_buffers();
    if (name == "psn-a2") return psn_a2();
    if (name == "reentrant-line") return reentrant_line();
    if (name == "switch-2x2") return switch_2x2();
    if (name == "wireless-fig4") return wireless_fig4();
    throw Error(ErrorCode::UnknownExample, "unknown example '" + std::string(name) + "'");
}

}  // namespace spn
