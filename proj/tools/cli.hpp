#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eate/montecarlo.hpp"

namespace eate::cli {

enum Exit : int { kOk = 0, kConfig = 2, kRuntime = 3, kDegenerate = 4 };

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class Scale { Small, Medium, Paper };

Scale parse_scale(const std::string& name);

/// Simulation configs behind `reproduce`; figB2 yields the unweighted and the weighted variant.
std::vector<SimConfig> figure_configs(const std::string& figure, Scale scale, std::uint64_t seed);

/// Rough single-worker wall time in seconds.
double estimated_seconds(const SimConfig& config);

/// Log-log line chart, one panel per design, one curve per a_n rule.
void write_svg(std::ostream& out, const std::string& title, const std::vector<SummaryRow>& rows,
               const std::string& estimator);

}  // namespace eate::cli
