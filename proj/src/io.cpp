#include "svreg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svreg/errors.hpp"

namespace svreg {

Json grid_function_to_json(const GridFunction& f) {
  Json j;
  j["dim"] = f.dim();
  j["grid"] = f.grid();
  j["values"] = f.values();
  return j;
}

GridFunction grid_function_from_json(const Json& j) {
  auto grid = j.at("grid").get<std::vector<std::vector<double>>>();
  auto values = j.at("values").get<std::vector<double>>();
  if (j.contains("dim") && j.at("dim").get<int>() != static_cast<int>(grid.size()))
    throw DomainError("grid function JSON: dim does not match grid");
  return GridFunction(std::move(grid), std::move(values));
}

Json model_to_json(const FittedFunction& fit) {
  Json entries = Json::array();
  for (std::size_t j = 0; j < fit.coef.size(); ++j) {
    const auto& bf = fit.basis->functions[j];
    entries.push_back({{"subset_bits", bf.subset},
                       {"knot", bf.knot},
                       {"coef", fit.coef[j]}});
  }
  Json j;
  j["intercept"] = fit.intercept;
  j["entries"] = std::move(entries);
  j["dim"] = fit.basis->dim;
  return j;
}

FittedFunction model_from_json(const Json& j) {
  auto basis = std::make_shared<KnotBasis>();
  FittedFunction fit;
  fit.intercept = j.at("intercept").get<double>();
  int dim = 0;
  if (j.contains("dim")) dim = j.at("dim").get<int>();
  for (const auto& e : j.at("entries")) {
    KnotBasisFunction bf;
    bf.subset = e.at("subset_bits").get<SubsetMask>();
    bf.knot = e.at("knot").get<std::vector<double>>();
    for (int b = 0; (SubsetMask{1} << b) <= bf.subset; ++b)
      if (bf.subset & (SubsetMask{1} << b)) dim = std::max(dim, b + 1);
    basis->functions.push_back(std::move(bf));
    fit.coef.push_back(e.at("coef").get<double>());
  }
  basis->dim = std::max(dim, 1);
  fit.basis = std::move(basis);
  return fit;
}

DataSet read_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw EmptyData("empty data file: " + path);
  // Header x1,...,xd,y
  int dim = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() < 2 || cols.back() != "y")
      throw UsageError("data header must be x1,...,xd,y");
    dim = static_cast<int>(cols.size()) - 1;
  }
  DataSet data;
  data.dim = dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != dim + 1)
      throw UsageError("data row has wrong number of columns");
    for (int jj = 0; jj < dim; ++jj) data.x.push_back(row[jj]);
    data.y.push_back(row.back());
    ++data.n;
  }
  if (data.n == 0) throw EmptyData("data file has no rows: " + path);
  return data;
}

void write_csv_dataset(const std::string& path, const DataSet& data) {
  std::ostringstream out;
  out.precision(17);
  for (int j = 0; j < data.dim; ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.dim; ++j) out << data.x[i * data.dim + j] << ",";
    out << data.y[i] << "\n";
  }
  atomic_write_file(path, out.str());
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw UsageError("failed writing file: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw UsageError("failed to move temp file into place: " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void flatten_json(const Json& j, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(),
                   out);
  } else if (j.is_array()) {
    std::string items;
    for (const auto& v : j) {
      if (!items.empty()) items += ",";
      items += v.is_string() ? v.get<std::string>() : v.dump();
    }
    out[prefix] = items;
  } else if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else {
    out[prefix] = j.dump();
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    flatten_json(Json::parse(body), "", kv);
    return kv;
  }
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line is not key = value: " + t);
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    kv[section.empty() ? key : section + "." + key] = val;
  }
  return kv;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

std::string config_hash(const std::map<std::string, std::string>& kv) {
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    eat(k);
    eat("=");
    eat(v);
    eat("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_loglog_svg(
    const std::string& path,
    const std::vector<std::pair<std::string,
                                std::vector<std::pair<double, double>>>>& series,
    const std::string& title) {
  const double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [label, pts] : series) {
    for (auto [x, y] : pts) {
      if (x <= 0 || y <= 0) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-9) xmax = xmin + 1;
  if (ymax - ymin < 1e-9) ymax = ymin + 1;
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
    << H << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  s << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>"
    << title << "</text>\n";
  s << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='"
    << H - B << "' stroke='black'/>\n";
  s << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
    << "' stroke='black'/>\n";
  s << "<text x='" << W / 2 << "' y='" << H - 12
    << "' text-anchor='middle' font-size='12'>log10 n</text>\n";
  s << "<text x='16' y='" << H / 2
    << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
    << H / 2 << ")'>log10 d</text>\n";
  int ci = 0;
  for (const auto& [label, pts] : series) {
    const char* color = colors[ci % 5];
    std::ostringstream poly;
    for (auto [x, y] : pts) {
      if (x <= 0 || y <= 0) continue;
      poly << px(std::log10(x)) << "," << py(std::log10(y)) << " ";
    }
    s << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='"
      << poly.str() << "'/>\n";
    for (auto [x, y] : pts) {
      if (x <= 0 || y <= 0) continue;
      s << "<circle cx='" << px(std::log10(x)) << "' cy='" << py(std::log10(y))
        << "' r='2.5' fill='" << color << "'/>\n";
    }
    s << "<text x='" << W - R - 150 << "' y='" << T + 16 * (ci + 1)
      << "' font-size='11' fill='" << color << "'>" << label << "</text>\n";
    ++ci;
  }
  s << "</svg>\n";
  atomic_write_file(path, s.str());
}

}  // namespace svreg
