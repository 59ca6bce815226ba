// hidss: operator CLI for the business model validation service.
//
//   hidss serve    --config hidss.json
//   hidss seed     --config hidss.json [--mentors table.csv] [--world world.json]
//   hidss train    --config hidss.json [--out models.json]
//   hidss eval     [--config hidss.json] [world parameters] [--csv metrics.csv]
//   hidss export   --config hidss.json --out export.json
//   hidss import   --config hidss.json --in export.json
//   hidss simulate [--config hidss.json] [world parameters] --out world.json

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "hidss/http_api.hpp"
#include "hidss/service.hpp"
#include "hidss/simkit.hpp"

namespace {

using namespace hidss;

ServiceConfig load_config(const std::string& path) {
  if (!path.empty()) return ServiceConfig::load(path);
  ServiceConfig c;
  c.apply_overrides(process_environment());
  c.validate();
  return c;
}

Document read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open " + path);
  return Document::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("io", "cannot write " + path);
  out << text;
}

void add_world_options(CLI::App* cmd, sim::ExperimentConfig& exp) {
  cmd->add_option("--seed", exp.world.seed, "RNG seed");
  cmd->add_option("--ventures", exp.world.n_ventures, "total ventures (train + held-out)");
  cmd->add_option("--mentors", exp.world.n_mentors, "mentor pool size");
  cmd->add_option("--hard-weight,-a", exp.world.hard_weight, "weight of the business-model signal");
  cmd->add_option("--soft-weight,-b", exp.world.soft_weight, "weight of the judge-only signal");
  cmd->add_option("--judge-noise,--sigma", exp.world.judge_noise, "judge rating noise");
  cmd->add_option("--judges,-k", exp.world.judges_per_venture, "judges per venture");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid intelligence decision support for business model validation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "service configuration file");

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");

  auto* seed_cmd = app.add_subcommand("seed", "import mentors and labeled ventures");
  std::string mentors_path, world_path;
  seed_cmd->add_option("--mentors", mentors_path, "mentor table (id,tags,industries,name)");
  seed_cmd->add_option("--world", world_path, "world document written by `simulate`");

  auto* train_cmd = app.add_subcommand("train", "retrain models from the repository");
  std::string models_out;
  train_cmd->add_option("--out", models_out, "write the model set here (default: config model_path)");

  sim::ExperimentConfig exp;
  exp.world.n_ventures = 2500;
  std::string csv_path;
  auto* eval_cmd = app.add_subcommand("eval", "train and score on a synthetic world");
  add_world_options(eval_cmd, exp);
  eval_cmd->add_option("--train", exp.n_train, "ventures used for training; the rest are held out");
  eval_cmd->add_option("--csv", csv_path, "also write metrics as delimited text");

  auto* export_cmd = app.add_subcommand("export", "write the event log and state");
  std::string export_out;
  export_cmd->add_option("--out", export_out, "export file")->required();

  auto* import_cmd = app.add_subcommand("import", "append events from an export");
  std::string import_in;
  import_cmd->add_option("--in", import_in, "export file")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic world as seed data");
  sim::ExperimentConfig sim_exp;
  std::string simulate_out;
  add_world_options(simulate_cmd, sim_exp);
  simulate_cmd->add_option("--out", simulate_out, "world document")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = load_config(config_path);

    if (*serve_cmd) {
      Service service(config);
      if (!service.models() && !service.repository().venture_ids().empty()) service.retrain();
      serve(service);
    } else if (*seed_cmd) {
      Service service(config);
      std::size_t mentors = 0;
      if (!mentors_path.empty()) mentors = service.seed_mentors(mentors_path);
      else if (!config.mentors.empty()) mentors = service.seed_mentors(config.mentors);
      std::size_t ventures = 0;
      if (!world_path.empty()) {
        auto world = sim::World::from_document(read_document(world_path), service.repository().patterns());
        service.seed_world(world);
        ventures = world.ventures.size();
      }
      std::cout << "seeded " << mentors << " mentors and " << ventures << " ventures; log at sequence "
                << service.repository().last_sequence() << "\n";
    } else if (*train_cmd) {
      if (!models_out.empty()) config.model_path = models_out;
      Service service(config);
      auto summary = service.retrain();
      std::cout << summary.to_document().dump(2) << "\n";
    } else if (*eval_cmd) {
      auto patterns = PatternCatalog::load(config.pattern_catalog);
      auto criteria = CriteriaCatalog::load(config.criteria_catalog);
      exp.cart = config.cart;
      exp.hybrid_weight = config.hybrid_weight;
      exp.k_min = config.k_min;
      exp.aggregation = config.aggregation;
      if (exp.n_train >= exp.world.n_ventures) fail("invalid-params", "--train must be smaller than --ventures");
      auto evaluation = sim::run_experiment(exp, patterns, criteria);
      std::cout << evaluation.table();
      if (!csv_path.empty()) write_text(csv_path, evaluation.csv());
    } else if (*export_cmd) {
      Service service(config);
      write_text(export_out, service.export_document().dump(2) + "\n");
    } else if (*import_cmd) {
      Service service(config);
      auto n = service.import_document(read_document(import_in));
      std::cout << "imported " << n << " events\n";
    } else if (*simulate_cmd) {
      auto patterns = PatternCatalog::load(config.pattern_catalog);
      auto criteria = CriteriaCatalog::load(config.criteria_catalog);
      auto world = sim::generate_world(sim_exp.world, patterns, criteria);
      write_text(simulate_out, canonical(world.to_document()) + "\n");
      std::cout << "wrote " << world.ventures.size() << " ventures to " << simulate_out << "\n";
    }
  } catch (const Error& e) {
    for (const auto& issue : e.issues())
      std::cerr << "error [" << issue.code << "]" << (issue.field.empty() ? "" : " " + issue.field) << ": "
                << issue.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
