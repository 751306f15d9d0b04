#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "svreg/grid_function.hpp"
#include "svreg/knot_basis.hpp"
#include "svreg/solver.hpp"

namespace svreg {

using Json = nlohmann::json;

// {dim, grid: [[...]...], values: flat row-major}; exact round trip.
Json grid_function_to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

// {intercept, entries: [{subset_bits, knot: [...], coef}], dim, meta?}
Json model_to_json(const FittedFunction& fit);
FittedFunction model_from_json(const Json& j);

// CSV with header x1,...,xd,y.
DataSet read_csv_dataset(const std::string& path);
void write_csv_dataset(const std::string& path, const DataSet& data);

// Temp file + rename; no partial files on failure.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Flat key=value configuration ("[section]" headers become "section." key
// prefixes); a leading '{' switches to JSON, flattened with '.' separators.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config(const std::string& path);

// FNV-1a over the canonical "key=value\n" listing, hex string.
std::string config_hash(const std::map<std::string, std::string>& kv);

// Minimal log-log SVG line chart; series = (label, points (x, y)).
void write_loglog_svg(
    const std::string& path,
    const std::vector<std::pair<std::string,
                                std::vector<std::pair<double, double>>>>& series,
    const std::string& title);

}  // namespace svreg
