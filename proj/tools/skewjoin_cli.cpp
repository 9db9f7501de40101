/*
 * Copyright 2026 The skewjoin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skewjoin/skewjoin.hpp"

namespace fs = std::filesystem;
using namespace skewjoin;

namespace {

// Default location of generated data and of spec.json for commands that read data.
fs::path data_dir() {
  const char* env = std::getenv("SKEWJOIN_DATA_DIR");
  return env && *env ? fs::path(env) : fs::path("data");
}

fs::path resolve_spec(const std::string& data) {
  fs::path path = data.empty() ? data_dir() : fs::path(data);
  if (fs::is_directory(path)) path /= "spec.json";
  return path;
}

HeavyHitterThreshold threshold(std::optional<double> q, std::optional<double> tau) {
  HeavyHitterThreshold t;
  t.q = q;
  t.tau = tau;
  return t;
}

// Writes to --out when given, stdout otherwise.
template <typename Writer>
void emit(const std::string& out, Writer&& write) {
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(out);
  if (!file) fail(ErrorKind::kIo, "cannot write '" + out + "'");
  write(file);
}

void print_plan_summary(std::ostream& out, const JoinPlan& plan) {
  out << "combinations " << plan.combination_count << ", residual joins " << plan.residuals.size()
      << ", reducers " << plan.reducer_count() << ", predicted pairs " << plan.predicted_cost() << '\n';
  for (const auto& r : plan.residuals) {
    out << "  [" << r.id << "] " << r.label() << ": " << r.cost.symbolic() << " | k_int " << r.shares.k_int
        << " | shares";
    for (const auto& [name, value] : r.shares.shares) {
      if (value.integer > 1) out << ' ' << name << '=' << value.integer;
    }
    out << " | predicted " << r.predicted_cost;
    if (r.infeasible) out << " | infeasible";
    out << '\n';
  }
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::string item;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (!item.empty()) {
        try {
          out.push_back(std::stod(item));
        } catch (const std::exception&) {
          fail(ErrorKind::kInvalidArgument, "not a number: '" + item + "'");
        }
      }
      item.clear();
    } else {
      item += text[i];
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew-resistant multiway join planner and shuffle simulator"};
  app.require_subcommand(1);

  std::string data, out, config_path, plan_path, catalog_path, sizes_text, hh_text, algorithms;
  std::optional<double> k, q, tau;
  std::optional<std::uint64_t> seed;
  std::size_t cap = 0;
  bool csv = false, count_only = false, no_prune = false;
  std::size_t n = 0, d = 0;
  double r = 0, s = 0;
  std::string form;

  auto* gen = app.add_subcommand("gen", "generate a dataset from a JSON config");
  gen->add_option("config", config_path, "generator config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "override the config's master seed");
  gen->add_option("--out", out, "output directory (default: $SKEWJOIN_DATA_DIR or ./data)");

  auto* plan = app.add_subcommand("plan", "detect heavy hitters and plan residual joins");
  plan->add_option("--data", data, "spec.json or its directory");
  plan->add_option("--k", k, "reducers per residual join");
  plan->add_option("--q", q, "reducer capacity; sizes k per residual and is the default heavy-hitter threshold");
  plan->add_option("--tau", tau, "heavy-hitter threshold as a fraction of the relation size");
  plan->add_option("--seed", seed, "hash seed stored in the plan");
  plan->add_option("--cap", cap, "maximum number of type combinations");
  plan->add_option("--catalog", catalog_path, "use this heavy-hitter catalog instead of scanning");
  plan->add_flag("--no-prune", no_prune, "keep subsumed combinations");
  plan->add_option("--out", out, "plan file (default: summary on stdout only)");

  auto* run = app.add_subcommand("run", "execute a plan on data and report shuffle metrics");
  run->add_option("--plan", plan_path, "plan file")->required()->check(CLI::ExistingFile);
  run->add_option("--data", data, "spec.json or its directory");
  run->add_option("--cap", cap, "maximum tuples per reducer (0 = unlimited)");
  run->add_flag("--csv", csv, "per-residual CSV instead of JSON");
  run->add_flag("--count-only", count_only, "count outputs without keeping them");
  run->add_option("--out", out, "metrics file (default: stdout)");

  auto* compare = app.add_subcommand("compare", "sweep k for shares, sharesskew and naive");
  compare->add_option("--data", data, "spec.json or its directory");
  compare->add_option("--k", sizes_text, "comma-separated, strictly increasing reducer counts")->required();
  compare->add_option("--q", q, "heavy-hitter threshold (tuples per relation)");
  compare->add_option("--tau", tau, "heavy-hitter threshold as a fraction of the relation size");
  compare->add_option("--seed", seed, "hash seed");
  compare->add_option("--algorithms", algorithms, "subset of shares,sharesskew,naive (default: all that apply)");
  compare->add_option("--out", out, "CSV file (default: stdout)");

  auto* closed = app.add_subcommand("closed-form", "evaluate closed-form optimal costs");
  closed->add_option("form", form, "two-way | chain | chain-equal | symmetric")
      ->required()
      ->check(CLI::IsMember({"two-way", "chain", "chain-equal", "symmetric"}));
  closed->add_option("--k", k, "reducer count")->required();
  closed->add_option("--sizes", sizes_text, "comma-separated relation sizes");
  closed->add_option("--r", r, "size of R (two-way) or of every relation (chain-equal)");
  closed->add_option("--s", s, "size of S (two-way)");
  closed->add_option("--n", n, "relation count");
  closed->add_option("--d", d, "attributes per relation (symmetric)");
  closed->add_option("--hh", hh_text, "comma-separated heavy-hitter positions (chain-equal)");

  auto* oracle = app.add_subcommand("oracle", "brute-force join of a dataset");
  oracle->add_option("--data", data, "spec.json or its directory");
  oracle->add_option("--cap", cap, "maximum result size (default 10^7)");
  oracle->add_option("--out", out, "write result tuples as TSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto config = generator_config_from_json(read_json_file(config_path));
      if (seed) config.seed = *seed;
      auto [spec, store] = generate(config);
      const fs::path dir = out.empty() ? data_dir() : fs::path(out);
      save_dataset(dir, spec, store);
      std::cout << "wrote " << store.total_size() << " tuples to " << dir.string() << '\n';
    } else if (*plan) {
      auto [file, store] = load_dataset(resolve_spec(data));
      PlannerOptions options;
      if (k) {
        options.k = k;
      } else if (q) {
        options.q = q;
      } else {
        fail(ErrorKind::kInvalidArgument, "plan needs --k or --q");
      }
      if (seed) options.hash_seed = *seed;
      if (cap > 0) options.combination_cap = cap;
      options.prune = !no_prune;
      HeavyHitterCatalog catalog = catalog_path.empty()
                                       ? detect_heavy_hitters(store, file.spec, threshold(q, tau))
                                       : catalog_from_json(read_json_file(catalog_path));
      const JoinPlan result = build_plan(file.spec, store, catalog, options);
      if (!out.empty()) write_json_file(out, plan_to_json(result));
      print_plan_summary(std::cout, result);
    } else if (*run) {
      const JoinPlan loaded = plan_from_json(read_json_file(plan_path));
      auto [file, store] = load_dataset(resolve_spec(data));
      ExecutorOptions options;
      options.max_reducer_tuples = cap;
      options.materialize = !count_only;
      const auto [result, stats] = run_job(store, loaded, options);
      emit(out, [&](std::ostream& os) {
        if (csv) {
          write_stats_csv(os, stats);
        } else {
          os << stats_to_json(stats).dump(2) << '\n';
        }
      });
    } else if (*compare) {
      auto [file, store] = load_dataset(resolve_spec(data));
      ExperimentSweep sweep;
      sweep.ks = parse_doubles(sizes_text);
      sweep.algorithms.clear();
      for (std::size_t start = 0; start <= algorithms.size();) {
        std::size_t comma = algorithms.find(',', start);
        if (comma == std::string::npos) comma = algorithms.size();
        if (comma > start) sweep.algorithms.push_back(algorithms.substr(start, comma - start));
        start = comma + 1;
      }
      if (algorithms.empty()) {
        sweep.algorithms = {"shares", "sharesskew"};
        if (file.spec.relations().size() == 2) sweep.algorithms.push_back("naive");
      }
      if (seed) sweep.hash_seed = *seed;
      const auto catalog = detect_heavy_hitters(store, file.spec, threshold(q, tau));
      const auto rows = run_sweep(file.spec, store, catalog, sweep);
      emit(out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    } else if (*closed) {
      const auto sizes = parse_doubles(sizes_text);
      nlohmann::json report;
      if (form == "two-way") {
        // r c + s a with a c = k: both terms equal sqrt(k r s) at the optimum.
        report = {{"cost", two_way_lower_bound(r, s, *k)},
                  {"shares", {{"A", std::sqrt(*k * r / s)}, {"C", std::sqrt(*k * s / r)}}},
                  {"naive", naive_two_way_cost(r, s, *k)}};
      } else if (form == "chain") {
        const auto c = chain_arbitrary_cost(sizes, *k);
        report = {{"cost", c.cost}, {"shares", c.shares}};
      } else if (form == "chain-equal") {
        std::vector<std::size_t> hh;
        for (double p : parse_doubles(hh_text)) hh.push_back(static_cast<std::size_t>(p));
        const auto c = chain_equal_cost(n, r, hh, *k);
        report = {{"cost", c.cost}, {"subchain_lengths", c.subchain_lengths}, {"subchain_k", c.subchain_k},
                  {"shares", c.shares}};
      } else {
        const auto shares = symmetric_shares(sizes.size(), d, sizes, *k);
        report = {{"cost", symmetric_cost(sizes.size(), d, sizes, *k)}, {"shares", shares.shares},
                  {"closed_form_shares", shares.closed_form}};
      }
      std::cout << report.dump(2) << '\n';
    } else if (*oracle) {
      auto [file, store] = load_dataset(resolve_spec(data));
      const auto result = cap > 0 ? brute_force_join(store, file.spec, cap) : brute_force_join(store, file.spec);
      std::cout << result.tuples.size() << " result tuples\n";
      if (!out.empty()) {
        std::ofstream os(out);
        if (!os) fail(ErrorKind::kIo, "cannot write '" + out + "'");
        for (std::size_t i = 0; i < result.attributes.size(); ++i) os << (i ? "\t" : "#attrs\t") << result.attributes[i];
        os << '\n';
        for (const auto& row : result.tuples) {
          for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << row[i];
          os << '\n';
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
