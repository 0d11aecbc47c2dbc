#pragma once

#include <string>
#include <vector>

#include "d2d/core.hpp"

namespace d2d {

struct Dataset {
  std::vector<Claim> items;
  std::string source_path;
  bool preprocessed = false;
};

/// Reads JSON lines {"id": string, "text": string, "label": "real"|"fake"}.
/// Labels are case-insensitive and optional; blank lines are skipped.
/// Throws IO_ERROR, or SCHEMA_ERROR naming every offending line.
Dataset load_dataset(const std::string& path);

/// Removes the floor(fraction * N) items with the highest word count. Among
/// equal counts the larger id goes first. Input order is otherwise kept.
Dataset drop_longest(const Dataset& dataset, double fraction = 0.05);

}  // namespace d2d
