#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "leocp/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LEO control-plane placement, assignment and handover simulator"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config;
  leocp::Overrides o;
  std::uint64_t seed = 0;
  std::string out, protocol, method;
  double delta = 0.0;
  int k = 0, clusters = 0;

  app.add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Top-level random seed");
  auto* out_opt = app.add_option("--out", out, "Output directory");
  auto* protocol_opt = app.add_option("--protocol", protocol, "Handover protocol")
                           ->check(CLI::IsMember({"seamless", "legacy"}));
  auto* method_opt = app.add_option("--method", method, "Placement method")
                         ->check(CLI::IsMember({"cnpa", "exhaustive", "random", "single"}));
  auto* delta_opt = app.add_option("--delta", delta, "Handover hysteresis factor in (0, 1]");
  auto* k_opt = app.add_option("--k", k, "Number of control nodes");
  auto* clusters_opt = app.add_option("--clusters", clusters, "Representative snapshot count");

  const std::map<std::string, std::string> help{
      {"gen", "Generate the constellation and station tables"},
      {"snapshot", "Build topology snapshots and shortest-path distance fields"},
      {"place", "Select control-node stations"},
      {"assign", "Predict per-satellite control-node handovers"},
      {"simulate", "Run the handover protocol simulation"},
      {"report", "Aggregate simulation outputs into tables and CDFs"},
      {"all", "Run every stage in order"}};
  for (const auto& name : leocp::subcommands()) app.add_subcommand(name, help.at(name));

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) o.seed = seed;
  if (*out_opt) o.out = out;
  if (*protocol_opt) o.protocol = leocp::parse_protocol(protocol);
  if (*method_opt) o.method = leocp::parse_method(method);
  if (*delta_opt) o.delta = delta;
  if (*k_opt) o.k = k;
  if (*clusters_opt) o.clusters = clusters;

  const std::string sub = app.get_subcommands().front()->get_name();
  return leocp::run_pipeline(config, sub, o, std::cout, std::cerr);
}
