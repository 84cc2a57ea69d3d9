#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lm/pipeline.hpp"
#include "lm/render.hpp"

namespace {

// Exit codes: 0 success, 1 DRC/metric failure, 2 infeasible assignment,
// 3 I/O or schema error.
constexpr int kOk = 0;
constexpr int kDrcFailure = 1;
constexpr int kInfeasible = 2;
constexpr int kIoError = 3;

int cmd_assign(const std::string& input, const std::string& output,
               double slab_pitch) {
  lm::Layout layout = lm::load_layout(input);
  try {
    const lm::Layout assigned = lm::run_assign(layout, slab_pitch);
    lm::save_layout(assigned, output.empty() ? input : output);
  } catch (const lm::InfeasibleAssignment& e) {
    std::cerr << e.what() << "\n";
    for (int id : e.certificate.deficient_members)
      std::cerr << "deficient member " << id << "\n";
    for (int id : e.certificate.saturated_regions)
      std::cerr << "saturated region " << id << "\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_tune(const std::string& input, const std::string& output,
             const lm::TuneOptions& options, const std::string& render_path,
             bool ura_overlay) {
  const lm::Layout layout = lm::load_layout(input);
  lm::TuneReport report;
  lm::Layout tuned;
  try {
    tuned = lm::run_tune(layout, options, &report);
  } catch (const std::exception& e) {
    std::cerr << "stage tune: " << e.what() << "\n";
    return kDrcFailure;
  }
  lm::save_layout(tuned, output.empty() ? input : output);
  for (const lm::MatchGroup& g : tuned.groups) {
    for (int id : g.members) {
      const double before = lm::member_length(layout, id);
      const double after = lm::member_length(tuned, id);
      std::printf("member %d: %.3f -> %.3f nm (extension %.2f%%)\n", id, before,
                  after, 100.0 * lm::extension_ratio(after, before));
    }
  }
  for (const lm::GroupReport& g : report.groups)
    std::printf("group %d: max error %.4f%%, avg error %.4f%%\n", g.group_id,
                100.0 * g.max_error, 100.0 * g.avg_error);
  std::printf("tuned %d patterns in %.3f s\n", report.patterns_inserted,
              report.wall_seconds);
  if (!render_path.empty()) {
    lm::RenderOptions ropts;
    ropts.ura_overlay = ura_overlay;
    lm::render_svg_file(tuned, render_path, ropts);
  }
  return kOk;
}

int cmd_check(const std::string& input) {
  const lm::Layout layout = lm::load_layout(input);
  const auto violations = lm::new_violations(layout);
  for (const lm::Violation& v : violations) std::printf("%s\n", v.describe().c_str());
  std::printf("%zu violation(s)\n", violations.size());
  return violations.empty() ? kOk : kDrcFailure;
}

int cmd_render(const std::string& input, const std::string& output,
               double scale, bool ura_overlay) {
  const lm::Layout layout = lm::load_layout(input);
  lm::RenderOptions opts;
  opts.scale = scale;
  opts.ura_overlay = ura_overlay;
  lm::render_svg_file(layout, output, opts);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obstacle-aware length-matching tuner for any-direction PCB traces"};
  app.require_subcommand(1);

  std::string input, output, render_path;
  double slab_pitch = 0.0, scale = 1.0;
  bool ura_overlay = false;
  lm::TuneOptions options;

  CLI::App* assign = app.add_subcommand("assign", "compute routable areas");
  assign->add_option("input", input)->required();
  assign->add_option("-o,--output", output);
  assign->add_option("--slab-pitch", slab_pitch, "strip pitch in nm");

  CLI::App* tune = app.add_subcommand("tune", "length-match every group");
  tune->add_option("input", input)->required();
  tune->add_option("-o,--output", output);
  tune->add_option("--l-disc", options.l_disc, "discretization step in nm");
  tune->add_option("--tolerance", options.tolerance, "target tolerance in nm");
  tune->add_option("--threads", options.threads, "worker threads");
  tune->add_option("--render", render_path, "also write an SVG here");
  tune->add_flag("--ura-overlay", ura_overlay);

  CLI::App* check = app.add_subcommand("check", "report DRC violations");
  check->add_option("input", input)->required();

  CLI::App* render = app.add_subcommand("render", "write an SVG rendering");
  render->add_option("input", input)->required();
  render->add_option("-o,--output", output)->required();
  render->add_option("--scale", scale);
  render->add_flag("--ura-overlay", ura_overlay);

  CLI11_PARSE(app, argc, argv);

  try {
    if (assign->parsed()) return cmd_assign(input, output, slab_pitch);
    if (tune->parsed()) return cmd_tune(input, output, options, render_path, ura_overlay);
    if (check->parsed()) return cmd_check(input);
    if (render->parsed()) return cmd_render(input, output, scale, ura_overlay);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}
