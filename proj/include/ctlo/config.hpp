#pragma once

#include <string>

#include "ctlo/pipeline.hpp"

namespace ctlo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a "key = value" config file ('#' comments). Unknown keys are
/// errors reporting key and line. Environment variables with the CTLO_
/// prefix (e.g. CTLO_SIGMA) override file values.
OdometryConfig load_config(const std::string& path);

OdometryConfig default_config();

}  // namespace ctlo
