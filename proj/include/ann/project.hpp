// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ann/common.hpp"

namespace ann::project {

struct InitResult {
  std::vector<std::string> files;  // paths written, relative to the project root
};

/// Scaffolds a new project directory: a starter two-layer network, a default
/// configuration, a scripted-oracle rule file, demo datasets, and a README
/// documenting the deterministic demo run. The target may exist but must not
/// already hold a project. Throws Error(PathExists) when it does.
InitResult init(const std::string& path);

/// Human-readable summary of a run directory produced by training: one row
/// per epoch from history.jsonl plus the lineage of every accepted block
/// reconstructed from the persisted step files. Throws Error(Io) when the
/// directory has no history.
std::string inspect_run(const std::string& run_dir);

}  // namespace ann::project
