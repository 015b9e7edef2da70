#pragma once

#include "settings.hpp"

namespace riesne::cli {

// Each command returns a process exit code; library exceptions propagate to
// main(), which maps them to codes.
int run_embed(const EmbedOptions& o);
int run_baseline(const BaselineOptions& o);
int run_eval(const EvalOptions& o);
int run_ingest_cov(const IngestCovOptions& o);

}  // namespace riesne::cli
