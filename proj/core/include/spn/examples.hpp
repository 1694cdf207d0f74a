#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spn/config.hpp"

namespace spn {

struct ExampleInfo {
    std::string name;
    std::string summary;
};

const std::vector<ExampleInfo>& example_catalog();

// Builtin networks with loads inside their stability regions. unstable
// selects the priority-instability variant, which only rybko-stolyar has.
// Throws UnknownExample.
ConfigFile make_example(std::string_view name, bool unstable = false);

}  // namespace spn
