// SPDX-License-Identifier: Apache-2.0
#include "fdris/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "fdris/format.hpp"

namespace fdris {

std::string_view parameter_key(SweepParameter p) {
  switch (p) {
    case SweepParameter::kRisElements:
      return "ris_elements";
    case SweepParameter::kEta:
      return "si_eta";
    case SweepParameter::kPowerBsMax:
      return "power_bs_max_dbm";
    case SweepParameter::kDuplex:
      return "duplex";
  }
  return "";
}

SweepParameter parameter_from_key(const std::string& key) {
  for (SweepParameter p : {SweepParameter::kRisElements, SweepParameter::kEta, SweepParameter::kPowerBsMax,
                           SweepParameter::kDuplex}) {
    if (parameter_key(p) == key) return p;
  }
  throw ConfigError("unknown sweep parameter '" + key +
                    "' (valid: ris_elements, si_eta, power_bs_max_dbm, duplex)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep value list is empty");
  if (variants.empty()) throw ConfigError("sweep variant list is empty; valid variants: " + variant_names_joined());
  if (realizations < 1) throw ConfigError("sweep needs at least one realization");
  if (threads < 0) throw ConfigError("thread count must be non-negative");
  for (const std::string& v : variants) variant_by_name(v);
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    if (parameter == SweepParameter::kRisElements && (v < 1 || v != std::floor(v)))
      throw ConfigError("ris_elements values must be positive integers");
    if (parameter == SweepParameter::kEta && v < 0.0) throw ConfigError("si_eta values must be non-negative");
    if (parameter == SweepParameter::kDuplex && v != 0.0 && v != 1.0)
      throw ConfigError("duplex values must be full (0) or half (1)");
  }
  base.validate();
}

SweepSpec sweep_from_json(const nlohmann::json& j, const ScenarioConfig& base) {
  if (!j.is_object()) throw ConfigError("sweep specification must be a JSON object");
  static const std::array<const char*, 9> kKnown = {"parameter",      "values",  "variants",
                                                    "realizations",   "seed_base", "scenario",
                                                    "max_iterations", "threads", "comment"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(kKnown.begin(), kKnown.end(), [&](const char* k) { return key == k; }) == kKnown.end())
      throw ConfigError("unknown sweep key '" + key + "'");
  }
  SweepSpec spec;
  try {
    spec.parameter = parameter_from_key(j.at("parameter").get<std::string>());
    for (const auto& v : j.at("values")) {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (spec.parameter != SweepParameter::kDuplex || (s != "full" && s != "half"))
          throw ConfigError("string sweep value '" + s + "' is only valid for duplex (full, half)");
        spec.values.push_back(s == "half" ? 1.0 : 0.0);
      } else {
        spec.values.push_back(v.get<double>());
      }
    }
    spec.variants = j.at("variants").get<std::vector<std::string>>();
    spec.realizations = j.value("realizations", 1);
    spec.seed_base = j.value("seed_base", std::uint64_t{1});
    spec.base = j.contains("scenario") ? config_from_json(j.at("scenario"), base) : base;
    spec.ao.max_iterations = j.value("max_iterations", spec.ao.max_iterations);
    spec.threads = j.value("threads", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sweep specification: ") + e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep(const std::string& path, const ScenarioConfig& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return sweep_from_json(j, base);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t realization_seed(std::uint64_t seed_base, int index) {
  return mix_seed(seed_base, static_cast<std::uint64_t>(index));
}

ScenarioConfig cell_config(const SweepSpec& spec, const Variant& variant, double value) {
  ScenarioConfig cfg = spec.base;
  switch (spec.parameter) {
    case SweepParameter::kRisElements:
      cfg.ris_elements = static_cast<int>(value);
      break;
    case SweepParameter::kEta:
      cfg.si_eta = value;
      break;
    case SweepParameter::kPowerBsMax:
      cfg.power_bs_max_dbm = value;
      break;
    case SweepParameter::kDuplex:
      cfg.duplex = value == 1.0 ? Duplex::kHalf : Duplex::kFull;
      break;
  }
  if (variant.duplex == Duplex::kHalf) cfg.duplex = Duplex::kHalf;
  return cfg;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "variant,parameter,value,index,seed,r_sum,r_dl,r_ul,gamma_dl,gamma_ul,iterations,converged,feasible,error";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::string clean_error(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string ResultTable::to_csv() const {
  std::string s = std::string(kCsvHeader) + "\n";
  const std::string key(parameter_key(parameter));
  for (const ResultRow& r : rows) {
    s += r.variant + "," + key + "," + format_number(r.value) + "," + std::to_string(r.index) + "," +
         std::to_string(r.seed) + "," + format_number(r.r_sum) + "," + format_number(r.r_dl) + "," +
         format_number(r.r_ul) + "," + format_number(r.gamma_dl) + "," + format_number(r.gamma_ul) + "," +
         std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," + (r.feasible ? "1" : "0") + "," +
         clean_error(r.error) + "\n";
  }
  return s;
}

ResultTable ResultTable::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line) != split(kCsvHeader))
    throw ConfigError("result CSV header does not match: expected " + std::string(kCsvHeader));
  ResultTable t;
  bool have_parameter = false;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != 14) throw ConfigError("line " + std::to_string(n) + ": expected 14 fields");
    const SweepParameter p = parameter_from_key(f[1]);
    if (have_parameter && p != t.parameter) throw ConfigError("line " + std::to_string(n) + ": mixed parameters");
    t.parameter = p;
    have_parameter = true;
    ResultRow r;
    r.variant = f[0];
    r.value = parse_double(f[2], n);
    r.index = static_cast<int>(parse_double(f[3], n));
    r.seed = std::stoull(f[4]);
    r.r_sum = parse_double(f[5], n);
    r.r_dl = parse_double(f[6], n);
    r.r_ul = parse_double(f[7], n);
    r.gamma_dl = parse_double(f[8], n);
    r.gamma_ul = parse_double(f[9], n);
    r.iterations = static_cast<int>(parse_double(f[10], n));
    r.converged = f[11] == "1";
    r.feasible = f[12] == "1";
    r.error = f[13];
    t.rows.push_back(std::move(r));
  }
  return t;
}

ResultTable run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Cell {
    const Variant* variant;
    double value;
    int index;
  };
  std::vector<Cell> cells;
  for (const std::string& name : spec.variants)
    for (double v : spec.values)
      for (int i = 0; i < spec.realizations; ++i) cells.push_back({&variant_by_name(name), v, i});

  ResultTable table;
  table.parameter = spec.parameter;
  table.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      ResultRow& row = table.rows[k];
      row.variant = c.variant->name;
      row.value = c.value;
      row.index = c.index;
      row.seed = realization_seed(spec.seed_base, c.index);
      try {
        const ScenarioConfig cfg = cell_config(spec, *c.variant, c.value);
        const ScenarioRealization real = sample_realization(cfg, row.seed);
        const AoResult res = run_ao(cfg, real, c.variant->mask, row.seed, spec.ao);
        const RateReport& rep = res.trace.final_report();
        row.r_sum = rep.rate_sum;
        row.r_dl = rep.rate_dl;
        row.r_ul = rep.rate_ul;
        row.gamma_dl = rep.gamma_dl;
        row.gamma_ul = rep.gamma_ul;
        row.iterations = res.trace.iterations();
        row.converged = res.trace.converged;
        row.feasible = rep.flags.all();
      } catch (const std::exception& e) {
        row.error = clean_error(e.what());
      }
    }
  };
  unsigned n = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return table;
}

std::vector<AggregateRow> aggregate(const ResultTable& table) {
  std::vector<AggregateRow> out;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  std::vector<std::vector<const ResultRow*>> members;
  for (const ResultRow& r : table.rows) {
    const auto key = std::make_pair(r.variant, r.value);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      AggregateRow a;
      a.variant = r.variant;
      a.value = r.value;
      out.push_back(a);
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  const auto stats = [](const std::vector<double>& x, double& mean, double& se) {
    const double n = static_cast<double>(x.size());
    mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::vector<double> s, d, u;
    int conv = 0;
    for (const ResultRow* r : members[k]) {
      if (!r->error.empty()) {
        ++out[k].failures;
        continue;
      }
      s.push_back(r->r_sum);
      d.push_back(r->r_dl);
      u.push_back(r->r_ul);
      conv += r->converged;
    }
    out[k].count = static_cast<int>(s.size());
    if (s.empty()) continue;
    stats(s, out[k].mean_sum, out[k].se_sum);
    stats(d, out[k].mean_dl, out[k].se_dl);
    stats(u, out[k].mean_ul, out[k].se_ul);
    out[k].converged_fraction = static_cast<double>(conv) / static_cast<double>(s.size());
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string s = "variant,value,count,failures,mean_r_sum,se_r_sum,mean_r_dl,se_r_dl,mean_r_ul,se_r_ul,"
                  "converged_fraction\n";
  for (const AggregateRow& a : rows) {
    s += a.variant + "," + format_number(a.value) + "," + std::to_string(a.count) + "," +
         std::to_string(a.failures) + "," + format_number(a.mean_sum) + "," + format_number(a.se_sum) + "," +
         format_number(a.mean_dl) + "," + format_number(a.se_dl) + "," + format_number(a.mean_ul) + "," +
         format_number(a.se_ul) + "," + format_number(a.converged_fraction) + "\n";
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::error_code ec;
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_outputs(const ResultTable& table, const std::string& dir, const std::vector<std::string>* variants) {
  if (table.rows.empty()) throw ConfigError("result table is empty");
  std::vector<std::string> present;
  for (const ResultRow& r : table.rows)
    if (std::find(present.begin(), present.end(), r.variant) == present.end()) present.push_back(r.variant);
  std::vector<std::string> chosen = variants ? *variants : present;
  if (chosen.empty()) throw ConfigError("no variants selected; valid variants: " + variant_names_joined());
  for (const std::string& v : chosen) {
    variant_by_name(v);
    if (std::find(present.begin(), present.end(), v) == present.end()) {
      std::string list;
      for (const auto& p : present) list += (list.empty() ? "" : ", ") + p;
      throw ConfigError("variant '" + v + "' has no rows; variants in this table: " + list);
    }
  }
  ResultTable sel;
  sel.parameter = table.parameter;
  for (const ResultRow& r : table.rows)
    if (std::find(chosen.begin(), chosen.end(), r.variant) != chosen.end()) sel.rows.push_back(r);
  const auto agg = aggregate(sel);
  const std::string base = dir.empty() ? std::string(".") : dir;
  write_text(base + "/results.csv", sel.to_csv());
  write_text(base + "/summary.csv", aggregate_csv(agg));
  write_text(base + "/sum_rate.svg", render_svg(agg, sel.parameter, "Sum rate"));
}

}  // namespace fdris
