#pragma once

#include <string>

#include <json.hpp>

#include "hedgelab/harness.hpp"

namespace hedgelab::io {

// Parses an experiment configuration from strict JSON: unknown keys are
// rejected, missing required keys are reported together, and defaults are
// filled explicitly (see configs/schema.md).
harness::ExperimentConfig parse_config(const std::string& text);

// Canonical JSON form with all defaults materialized; parsing this dump
// reproduces the same configuration byte for byte.
nlohmann::json canonical_json(const harness::ExperimentConfig& cfg);

harness::ExperimentConfig load_config_file(const std::string& path);

void write_samples_csv(const std::string& path, const harness::ExperimentResult& result);

void write_clt_report_json(const std::string& path, const harness::CltReport& report,
                           const harness::ExperimentResult& result);

}  // namespace hedgelab::io
