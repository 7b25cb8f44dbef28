#pragma once

#include <string>

#include "tinerf/field.hpp"
#include "tinerf/train.hpp"

// One declarative run description: dataset location, model shape, training
// loop. Parsed from JSON with unknown keys rejected; the effective config
// (defaults filled in) echoes back as canonical JSON so a run directory is
// self-describing and a checkpoint can rebuild its exact model.

namespace tinerf {

struct RunConfig {
  std::string dataset;  // dataset root (transforms_train.json etc.)
  ModelConfig model;
  TrainConfig train;  // train.out_dir is the run's output directory

  void validate() const;
  std::string to_json() const;
};

// Unknown keys anywhere throw with the offending key's path.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace tinerf
