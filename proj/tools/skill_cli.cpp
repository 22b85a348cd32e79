// Command-line surface for the skill-transfer stack: graph inspection,
// path planning, tactile perception, LLM plan transfer, scenario simulation
// and the tactile RMSE benchmark.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "skill/graph.hpp"
#include "skill/image.hpp"
#include "skill/planner.hpp"
#include "skill/provider.hpp"
#include "skill/sim.hpp"
#include "skill/svg.hpp"
#include "skill/synth.hpp"
#include "skill/tactile.hpp"
#include "skill/task_transfer.hpp"

namespace {

using Json = nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw skill::Error("io", "cannot open '" + path + "' for writing");
  out << text;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw skill::Error("io", "cannot open '" + path + "'");
  Json doc;
  in >> doc;
  return doc;
}

struct Overrides {
  skill::tactile::PerceptionConfig perception;
  skill::tactile::SynthConfig synth;
  skill::motion::PlannerConfig planner;
};

Overrides load_overrides(const std::string& config_path) {
  Overrides o;
  if (config_path.empty()) return o;
  Json doc = load_json_file(config_path);
  if (doc.contains("perception")) {
    const Json& p = doc["perception"];
    auto& c = o.perception;
    c.kernel_size = p.value("kernel_size", c.kernel_size);
    c.sigma = p.value("sigma", c.sigma);
    c.k_high = p.value("k_high", c.k_high);
    c.k_low = p.value("k_low", c.k_low);
    c.fixed_high = p.value("fixed_high", c.fixed_high);
    c.fixed_low = p.value("fixed_low", c.fixed_low);
    c.min_votes = p.value("min_votes", c.min_votes);
    c.max_lines = p.value("max_lines", c.max_lines);
  }
  if (doc.contains("synth")) {
    const Json& s = doc["synth"];
    auto& c = o.synth;
    c.ridge_amplitude = s.value("ridge_amplitude", c.ridge_amplitude);
    c.ridge_sigma = s.value("ridge_sigma", c.ridge_sigma);
    c.noise_sigma = s.value("noise_sigma", c.noise_sigma);
    c.texture_band = s.value("texture_band", c.texture_band);
    c.background = s.value("background", c.background);
  }
  if (doc.contains("planner")) {
    const Json& p = doc["planner"];
    auto& c = o.planner;
    c.safety_distance = p.value("safety_distance", c.safety_distance);
    c.collision_weight = p.value("collision_weight", c.collision_weight);
    c.resolution = p.value("resolution", c.resolution);
    c.hard_check = p.value("hard_check", c.hard_check);
    c.smooth = p.value("smooth", c.smooth);
  }
  return o;
}

std::unique_ptr<skill::llm::ChatProvider> make_provider(
    const std::string& kind, const std::string& mock_script) {
  if (kind == "mock") {
    if (mock_script.empty())
      throw skill::Error("usage", "--provider mock needs --mock-script");
    return std::make_unique<skill::llm::MockChatProvider>(mock_script);
  }
  if (kind == "http") {
    return std::make_unique<skill::llm::HttpChatProvider>(
        skill::llm::HttpChatProvider::from_env());
  }
  throw skill::Error("usage", "unknown provider '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skill-transfer toolkit: graphs, planning, tactile perception "
               "and scenario simulation"};
  app.require_subcommand(1);
  app.fallthrough();  // global --seed/--config may follow the subcommand

  std::string config_path;
  uint64_t seed = 1;
  app.add_option("--config", config_path,
                 "JSON file overriding perception/synth/planner defaults");
  app.add_option("--seed", seed, "seed for randomized outputs");

  // --- graph ---------------------------------------------------------------
  auto* graph_cmd = app.add_subcommand("graph", "inspect graph documents");
  graph_cmd->require_subcommand(1);
  std::string graph_file, graph_out;
  auto* graph_validate =
      graph_cmd->add_subcommand("validate", "load and validate a graph file");
  graph_validate->add_option("file", graph_file, "graph JSON document")
      ->required();
  auto* graph_triples = graph_cmd->add_subcommand(
      "triples", "print Object1-ConnectionType-Object2 triples");
  graph_triples->add_option("file", graph_file, "graph JSON document")
      ->required();
  graph_triples->add_option("--out", graph_out, "output path (default stdout)");

  // --- plan ----------------------------------------------------------------
  auto* plan_cmd =
      app.add_subcommand("plan", "plan a collision-aware path in a scenario");
  std::string plan_scenario, plan_out, plan_grid_dump, plan_svg;
  std::vector<double> plan_start, plan_goal;
  std::vector<std::string> plan_exclude;
  plan_cmd->add_option("--scenario", plan_scenario, "scenario JSON file")
      ->required();
  plan_cmd->add_option("--start", plan_start, "start x y z (meters)")
      ->expected(3)
      ->required();
  plan_cmd->add_option("--goal", plan_goal, "goal x y z (meters)")
      ->expected(3)
      ->required();
  plan_cmd->add_option("--exclude", plan_exclude,
                       "scene node ids ignored as obstacles");
  plan_cmd->add_option("--out", plan_out, "waypoint JSON output");
  plan_cmd->add_option("--dump-grid", plan_grid_dump,
                       "binary occupancy dump for visualization");
  plan_cmd->add_option("--svg", plan_svg, "top-down SVG plot");

  // --- perceive ------------------------------------------------------------
  auto* perceive_cmd = app.add_subcommand(
      "perceive", "extract tactile contours and Hough lines from an image");
  std::string perceive_image, perceive_out, perceive_svg;
  bool perceive_fixed = false;
  perceive_cmd->add_option("--image", perceive_image, "PGM (P5) or PNG frame")
      ->required();
  perceive_cmd->add_option("--out", perceive_out, "contour JSON output");
  perceive_cmd->add_option("--svg", perceive_svg, "SVG overlay output");
  perceive_cmd->add_flag("--fixed", perceive_fixed,
                         "use the fixed-threshold baseline instead of the "
                         "texture-adaptive thresholds");

  // --- synth ---------------------------------------------------------------
  auto* synth_cmd = app.add_subcommand(
      "synth", "render a synthetic tactile frame with ground truth");
  std::string synth_shape = "rect_line", synth_image_out, synth_truth_out;
  double synth_angle = 0.0;
  bool synth_textured = false;
  synth_cmd->add_option("--shape", synth_shape,
                        "rect_line|acute_angle|right_angle|circle|pentagon|"
                        "line_bundle");
  synth_cmd->add_option("--angle", synth_angle, "in-plane rotation (radians)");
  synth_cmd->add_flag("--textured", synth_textured, "add stripe texture");
  synth_cmd->add_option("--out", synth_image_out, "image output (.pgm/.png)")
      ->required();
  synth_cmd->add_option("--truth-out", synth_truth_out,
                        "ground-truth polyline JSON");

  // --- transfer ------------------------------------------------------------
  auto* transfer_cmd = app.add_subcommand(
      "transfer", "run the four-stage prompt transfer for a scenario");
  std::string transfer_scenario, transfer_provider = "mock",
              transfer_mock_script, transfer_out;
  transfer_cmd->add_option("--scenario", transfer_scenario, "scenario JSON")
      ->required();
  transfer_cmd->add_option("--provider", transfer_provider, "mock|http");
  transfer_cmd->add_option("--mock-script", transfer_mock_script,
                           "mock response script (JSON)");
  transfer_cmd->add_option("--out", transfer_out, "plan JSON output");

  // --- sim -----------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("sim", "kinematic scenario simulation");
  sim_cmd->require_subcommand(1);
  auto* sim_run = sim_cmd->add_subcommand("run", "execute a scenario plan");
  std::string sim_scenario, sim_provider, sim_mock_script, sim_out, sim_svg;
  sim_run->add_option("--scenario", sim_scenario, "scenario JSON file")
      ->required();
  sim_run->add_option("--provider", sim_provider,
                      "mock|http (for scenarios without a direct plan)");
  sim_run->add_option("--mock-script", sim_mock_script,
                      "mock response script (JSON)");
  sim_run->add_option("--out", sim_out, "RunReport JSON output");
  sim_run->add_option("--svg", sim_svg, "top-down trajectory SVG");

  // --- bench ---------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "benchmarks");
  bench_cmd->require_subcommand(1);
  auto* bench_tactile =
      bench_cmd->add_subcommand("tactile", "adaptive vs fixed RMSE table");
  std::string bench_corpus = "synth", bench_out;
  int bench_seeds = 20;
  bool bench_edge = false;
  bench_tactile->add_option("--corpus", bench_corpus,
                            "corpus name (only 'synth')");
  bench_tactile->add_option("--seeds", bench_seeds, "noise seeds per shape");
  bench_tactile->add_flag("--edge", bench_edge,
                          "include the partially-out-of-frame condition");
  bench_tactile->add_option("--out", bench_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    Overrides overrides = load_overrides(config_path);
    overrides.synth.seed = seed;

    if (*graph_validate) {
      auto g = skill::graph::load_graph(graph_file);
      std::cout << "ok: " << to_string(g.kind()) << " graph, "
                << g.nodes().size() << " nodes, " << g.edges().size()
                << " edges\n";
    } else if (*graph_triples) {
      auto g = skill::graph::load_graph(graph_file);
      std::string text;
      for (const auto& line : skill::graph::export_triples(g))
        text += line + "\n";
      write_text(graph_out, text);
    } else if (*plan_cmd) {
      auto scenario = skill::sim::load_scenario(plan_scenario);
      std::set<std::string> exclude(plan_exclude.begin(), plan_exclude.end());
      exclude.insert(scenario.gripper_id);
      auto cfg = scenario.config.planner;
      auto grid = skill::motion::build_occupancy_grid(
          scenario.scene, scenario.config.bounds, cfg.resolution, exclude);
      skill::Vec3 start{plan_start[0], plan_start[1], plan_start[2]};
      skill::Vec3 goal{plan_goal[0], plan_goal[1], plan_goal[2]};
      auto path = skill::motion::plan_path(grid, start, goal, cfg);
      double loss =
          skill::motion::collision_loss(path, grid, cfg.safety_distance);
      Json doc{{"collision_loss", loss},
               {"waypoints", skill::motion::path_to_json(path)}};
      write_text(plan_out, doc.dump(2) + "\n");
      if (!plan_grid_dump.empty()) skill::motion::dump_grid(grid, plan_grid_dump);
      if (!plan_svg.empty()) {
        auto obstacles = skill::motion::scene_obstacles(scenario.scene, exclude);
        write_text(plan_svg,
                   skill::viz::trajectory_svg(scenario.config.bounds,
                                              obstacles, {path}));
      }
    } else if (*perceive_cmd) {
      auto image = skill::tactile::load_image(perceive_image);
      auto pc = overrides.perception;
      pc.adaptive = !perceive_fixed;
      auto result = skill::tactile::extract_contours(image, pc);
      write_text(perceive_out,
                 skill::tactile::contours_to_json(result).dump(2) + "\n");
      if (!perceive_svg.empty())
        write_text(perceive_svg,
                   skill::viz::contour_overlay_svg(image, result));
    } else if (*synth_cmd) {
      auto shape = skill::tactile::shape_from_string(synth_shape);
      skill::tactile::ShapePose pose;
      pose.angle = synth_angle;
      std::optional<skill::tactile::StripeSpec> texture;
      if (synth_textured) {
        skill::tactile::StripeSpec stripes;
        stripes.angle = synth_angle + 0.45;
        texture = stripes;
      }
      auto result =
          skill::tactile::synth_tactile_image(shape, pose, texture,
                                              overrides.synth);
      skill::tactile::save_image(result.image, synth_image_out);
      if (!synth_truth_out.empty()) {
        Json truth = Json::array();
        for (const auto& line : result.truth) {
          Json poly = Json::array();
          for (const auto& p : line) poly.push_back(Json::array({p.x, p.y}));
          truth.push_back(poly);
        }
        write_text(synth_truth_out, truth.dump(2) + "\n");
      }
    } else if (*transfer_cmd) {
      auto scenario = skill::sim::load_scenario(transfer_scenario);
      auto provider = make_provider(transfer_provider, transfer_mock_script);
      auto response = skill::plan::transfer_task(
          *provider, scenario.task, scenario.scene, scenario.state,
          scenario.reference_plan, scenario.new_task_description,
          scenario.notes);
      Json doc{{"diagnostics", response.diagnostics},
               {"plan", skill::plan::plan_to_json(response.plan)}};
      write_text(transfer_out, doc.dump(2) + "\n");
    } else if (*sim_run) {
      auto scenario = skill::sim::load_scenario(sim_scenario);
      scenario.config.seed = seed;
      std::vector<skill::plan::Subtask> the_plan;
      if (scenario.plan) {
        the_plan = *scenario.plan;
      } else {
        auto provider = make_provider(
            sim_provider.empty() ? "mock" : sim_provider, sim_mock_script);
        the_plan = skill::plan::transfer_task(
                       *provider, scenario.task, scenario.scene,
                       scenario.state, scenario.reference_plan,
                       scenario.new_task_description, scenario.notes)
                       .plan;
      }
      skill::sim::Simulator simulator(scenario);
      auto report = simulator.run(the_plan);
      write_text(sim_out, skill::sim::report_to_json(report).dump(2) + "\n");
      if (!sim_svg.empty()) {
        auto obstacles = skill::motion::scene_obstacles(
            scenario.scene, {scenario.gripper_id});
        write_text(sim_svg, skill::viz::trajectory_svg(
                                scenario.config.bounds, obstacles,
                                simulator.trajectory_log()));
      }
      if (!report.success) return 1;
    } else if (*bench_tactile) {
      if (bench_corpus != "synth")
        throw skill::Error("usage", "only the synthetic corpus is available");
      auto rows = skill::tactile::tactile_benchmark(
          bench_seeds, overrides.perception, overrides.synth, bench_edge,
          seed);
      write_text(bench_out, skill::tactile::benchmark_csv(rows));
    }
    return 0;
  } catch (const skill::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
