#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wavectl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weighted least-squares controls for the semilinear wave equation"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> help{
      {"linear-solve", "control for the linear problem, verified by a forward solve"},
      {"semilinear-solve", "fixed-point iteration for the semilinear problem"},
      {"verify-carleman", "weighted-estimate quotients over seeded dual fields"},
      {"verify-optimality", "compare the pair with the dense KKT minimizer"},
      {"growth-check", "certify the growth bounds of the nonlinearity"},
      {"sweep", "semilinear-solve over a list of values of one key"},
  };
  wavectl::CommandRequest req;
  std::string values;
  for (const auto& name : wavectl::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", req.config, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", req.seed, "seed for sampling commands");
    if (name == "sweep") {
      sub->add_option("--param", req.param, "config key, e.g. weights.s")->required();
      sub->add_option("--values", values, "comma-separated values")->required();
    }
    sub->callback([&req, name] { req.command = name; });
  }
  CLI11_PARSE(app, argc, argv);

  std::stringstream ss(values);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) req.values.push_back(item);
  }
  const wavectl::CommandResult result = wavectl::run_command(req);
  std::cout << result.summary << std::endl;
  return result.exit_code;
}
