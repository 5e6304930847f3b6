#pragma once

#include <string>

namespace scgan {

// Renders artifacts for one run directory (scatter per checkpoint plus one
// curve per metric) or for a sweep directory (metric-vs-axis curves per
// strategy). Outputs land under <dir>/plots. Throws ConfigError when the
// directory holds neither metrics.jsonl nor a sweep summary.
void render_plots(const std::string& dir);

}  // namespace scgan
