#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spn/network.hpp"
#include "spn/policy.hpp"
#include "spn/simulator.hpp"

namespace spn {

inline constexpr int kSpecVersion = 1;

// A network spec file: the network itself plus optional run defaults.
//
//   spec_version: 1
//   name: tandem
//   processors: 2
//   synchronized: false
//   buffers: [b1, b2]
//   arrivals: [{kind: poisson, rate: 0.5}, {kind: none}]
//   services: [{kind: exponential, mean: 1}, {kind: uniform, a: 0.4, b: 1.2}]
//   activities: [{buffer: 1, processors: [1], beta: 1}, ...]
//   routing: {triplets: [[1, 2, 1.0]]}      # or {dense: [[0, 1], [0, 0]]}
//   partition: [[1], [2]]                   # optional
//   initial: [{buffer: 1, counter: 1, count: 200}]   # optional
//   policy: eps-lrfs                        # optional, with epsilon / priority_order
//   priority_order: [4, 2, 1, 3]            # optional, may accompany any policy
//
// Buffer and processor numbers are 1-based in files.
struct ConfigFile {
    NetworkSpec spec;
    std::optional<PolicyKind> policy;
    // 0-based; used by static-priority runs that give no order of their own
    std::vector<int> priority_order;
    std::vector<InitialJobs> initial;
};

ConfigFile parse_config(std::string_view text, const std::string& origin = "<input>");
ConfigFile load_config(const std::filesystem::path& path);
std::string dump_config(const ConfigFile& config);

// Z file: spec_version plus a dense symmetric matrix under `z`.
Matrix parse_z(std::string_view text, const std::string& origin = "<input>");
Matrix load_z(const std::filesystem::path& path);
std::string dump_z(const Matrix& z);

// order is 1-based, as written in files and on the command line.
PolicyKind make_policy(std::string_view kind, std::optional<double> epsilon, const std::vector<int>& order_one_based,
                       int num_buffers);

// 17 significant digits, as used in every CSV and report.
std::string format_double(double x);

// Shortest decimal that reads back to the same double.
std::string format_shortest(double x);

}  // namespace spn
