#include "d2d/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

namespace d2d {

using json = nlohmann::json;

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IO_ERROR, "cannot open dataset " + path);

  Dataset ds;
  ds.source_path = path;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::string line;
  for (size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    try {
      const auto j = json::parse(line);
      if (!j.is_object()) throw std::runtime_error("record is not an object");
      if (!j.contains("id")) throw std::runtime_error("missing id");
      if (!j.contains("text") || !j["text"].is_string()) throw std::runtime_error("missing text");
      const auto id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      std::optional<Label> label;
      if (j.contains("label") && !j["label"].is_null()) label = parse_label(j["label"].get<std::string>());
      if (!seen.insert(id).second) throw std::runtime_error("duplicate id '" + id + "'");
      ds.items.push_back(Claim::make(id, j["text"].get<std::string>(), label));
    } catch (const std::exception& e) {
      problems.push_back(where + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = path;
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::SCHEMA_ERROR, msg);
  }
  return ds;
}

Dataset drop_longest(const Dataset& dataset, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(ErrorCode::INVALID_ARGUMENT, "fraction must be in [0,1)");
  const auto n = dataset.items.size();
  // The epsilon keeps products such as 0.29 * 100 = 28.999... from losing an item.
  const auto k = static_cast<size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& x = dataset.items[a];
    const auto& y = dataset.items[b];
    if (x.word_count != y.word_count) return x.word_count > y.word_count;
    return x.id > y.id;
  });
  std::vector<bool> drop(n, false);
  for (size_t i = 0; i < k; ++i) drop[order[i]] = true;

  Dataset out;
  out.source_path = dataset.source_path;
  out.preprocessed = true;
  for (size_t i = 0; i < n; ++i) {
    if (!drop[i]) out.items.push_back(dataset.items[i]);
  }
  return out;
}

}  // namespace d2d
