// Copyright 2026 The PCM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line frontend. Exit codes: 0 success, 2 contract or usage error,
// 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pcm/attack.hpp"
#include "pcm/dataset.hpp"
#include "pcm/errors.hpp"
#include "pcm/experiment.hpp"
#include "pcm/pcm.hpp"
#include "pcm/plots.hpp"
#include "pcm/reward.hpp"

namespace {

pcm::PreferenceDataset load_dataset(const std::string& path) {
  pcm::PreferenceDataset ds = pcm::read_dataset(path);
  pcm::validate_dataset(ds);
  return ds;
}

pcm::Vector load_target(const std::string& path, const pcm::PreferenceDataset& ds) {
  pcm::Vector theta = pcm::read_theta_csv(path);
  pcm::validate_theta(theta, ds.big_n);
  return theta;
}

void emit_json(const nlohmann::json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pcm::ContractError("cannot open output file: " + path);
  out << doc.dump(2) << "\n";
}

pcm::AttackSpec parse_attack_flags(const std::string& type, double p, double a, double b) {
  pcm::AttackSpec spec;
  if (type == "random_flip")
    spec.kind = pcm::AttackKind::kRandomFlip;
  else if (type == "first_feature")
    spec.kind = pcm::AttackKind::kFirstFeature;
  else
    throw pcm::ContractError("unknown attack type: " + type);
  spec.p = p;
  spec.a = a;
  spec.b = b;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimum-cost label flips against preference-trained reward models"};
  app.require_subcommand(1);

  // gen
  std::size_t gen_n = 50, gen_big_n = 100, gen_m = 1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic preference dataset");
  gen->add_option("--n", gen_n, "feature dimension")->capture_default_str();
  gen->add_option("--N", gen_big_n, "number of response pairs")->capture_default_str();
  gen->add_option("--m", gen_m, "annotations per pair")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset file")->required();
  gen->callback([&] {
    const auto ds = pcm::generate_synthetic(gen_n, gen_big_n, gen_m, gen_seed);
    pcm::write_dataset(ds, gen_out);
    std::cout << "wrote dataset n=" << ds.n << " N=" << ds.big_n << " m=" << ds.m << " to "
              << gen_out << "\n";
  });

  // attack
  std::string atk_dataset, atk_type = "random_flip", atk_out;
  double atk_p = 0.1, atk_a = 0.25, atk_b = 0.1;
  std::uint64_t atk_seed = 0;
  auto* atk = app.add_subcommand("attack", "derive a target label vector from a dataset");
  atk->add_option("--dataset", atk_dataset, "dataset file")->required();
  atk->add_option("--type", atk_type, "random_flip or first_feature")->capture_default_str();
  atk->add_option("--p", atk_p, "flip probability (random_flip)")->capture_default_str();
  atk->add_option("--a", atk_a, "quality-filter fraction (first_feature)")
      ->capture_default_str();
  atk->add_option("--b", atk_b, "flip fraction (first_feature)")->capture_default_str();
  atk->add_option("--seed", atk_seed, "attack seed (random_flip)")->capture_default_str();
  atk->add_option("--out", atk_out, "output target CSV")->required();
  atk->callback([&] {
    const auto ds = load_dataset(atk_dataset);
    const auto spec = parse_attack_flags(atk_type, atk_p, atk_a, atk_b);
    const auto target = pcm::apply_attack(ds, spec, atk_seed);
    pcm::write_theta_csv(target.theta_a, atk_out);
    double naive = 0.0;
    for (std::size_t i = 0; i < ds.big_n; ++i)
      naive += std::fabs(target.theta_a[i] - ds.theta_o[i]);
    std::cout << target.description << " naive_cost=" << naive << " -> " << atk_out << "\n";
  });

  // bounds
  std::string bnd_dataset, bnd_target, bnd_json;
  auto* bnd = app.add_subcommand("bounds", "evaluate flip-cost bounds for a target");
  bnd->add_option("--dataset", bnd_dataset, "dataset file")->required();
  bnd->add_option("--target", bnd_target, "target label CSV")->required();
  bnd->add_option("--json", bnd_json, "write the report here instead of stdout");
  bnd->callback([&] {
    const auto ds = load_dataset(bnd_dataset);
    const auto theta_a = load_target(bnd_target, ds);
    const auto phi = pcm::feature_diff(ds);
    emit_json(pcm::to_json(pcm::bound_report(phi, ds.theta_o, theta_a)), bnd_json);
  });

  // minimize
  std::string min_dataset, min_target, min_json, min_theta_out;
  auto* mincmd = app.add_subcommand("minimize", "solve the minimum flip-cost program");
  mincmd->add_option("--dataset", min_dataset, "dataset file")->required();
  mincmd->add_option("--target", min_target, "target label CSV")->required();
  mincmd->add_option("--json", min_json, "write the report here instead of stdout");
  mincmd->add_option("--out-theta", min_theta_out, "write the rounded labels here");
  mincmd->callback([&] {
    const auto ds = load_dataset(min_dataset);
    const auto theta_a = load_target(min_target, ds);
    const auto phi = pcm::feature_diff(ds);
    const auto sol = pcm::solve_pcm(ds, phi, theta_a);
    if (!min_theta_out.empty()) pcm::write_theta_csv(sol.theta_star_discrete, min_theta_out);
    emit_json(pcm::to_json(sol), min_json);
  });

  // reduced
  std::string red_dataset, red_target, red_json, red_theta_out;
  auto* red = app.add_subcommand(
      "reduced", "solve the relaxation that preserves only the target model's scores");
  red->add_option("--dataset", red_dataset, "dataset file")->required();
  red->add_option("--target", red_target, "target label CSV")->required();
  red->add_option("--json", red_json, "write the report here instead of stdout");
  red->add_option("--out-theta", red_theta_out, "write the rounded labels here");
  red->callback([&] {
    const auto ds = load_dataset(red_dataset);
    const auto theta_a = load_target(red_target, ds);
    const auto phi = pcm::feature_diff(ds);
    const auto reward_a = pcm::train_reward(phi, theta_a);
    const auto sol = pcm::solve_reduced(ds, phi, reward_a, theta_a);
    if (!red_theta_out.empty()) pcm::write_theta_csv(sol.theta_star_discrete, red_theta_out);
    emit_json(pcm::to_json(sol), red_json);
  });

  // eval
  std::string ev_dataset, ev_target, ev_theta;
  auto* ev = app.add_subcommand("eval", "performance loss rate of rounded labels");
  ev->add_option("--dataset", ev_dataset, "dataset file")->required();
  ev->add_option("--target", ev_target, "target label CSV")->required();
  ev->add_option("--theta", ev_theta, "rounded label CSV to evaluate")->required();
  ev->callback([&] {
    const auto ds = load_dataset(ev_dataset);
    const auto theta_a = load_target(ev_target, ds);
    const auto theta_star = load_target(ev_theta, ds);
    const auto phi = pcm::feature_diff(ds);
    const double rate = pcm::performance_loss_rate(phi, ds.theta_o, theta_a, theta_star);
    std::printf("performance_loss_rate=%.12g\n", rate);
  });

  // sweep
  std::string sw_config;
  std::size_t sw_jobs = 1;
  bool sw_quiet = false;
  auto* sw = app.add_subcommand("sweep", "run a configured experiment grid");
  sw->add_option("--config", sw_config, "sweep configuration file")->required();
  sw->add_option("--jobs", sw_jobs, "worker threads")->capture_default_str();
  sw->add_flag("--quiet", sw_quiet, "suppress per-cell progress");
  sw->callback([&] {
    const auto cfg = pcm::load_sweep_config(sw_config);
    const auto rows = pcm::run_sweep(cfg, sw_jobs, sw_quiet ? nullptr : &std::cerr);
    const auto plots = pcm::emit_plots(rows, cfg.out_dir);
    std::cout << "wrote " << rows.size() << " rows to " << cfg.out_dir << "/results.csv and "
              << plots.size() << " charts\n";
  });

  // plot
  std::string pl_results, pl_out;
  auto* pl = app.add_subcommand("plot", "render charts from an existing results CSV");
  pl->add_option("--results", pl_results, "results CSV")->required();
  pl->add_option("--out", pl_out, "output directory")->required();
  pl->callback([&] {
    const auto rows = pcm::read_rows_csv(pl_results);
    const auto plots = pcm::emit_plots(rows, pl_out);
    std::cout << "wrote " << plots.size() << " charts to " << pl_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const pcm::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pcm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
