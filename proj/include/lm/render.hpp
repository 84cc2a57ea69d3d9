#pragma once

#include <string>

#include "lm/layout.hpp"

namespace lm {

struct RenderOptions {
  double scale = 1.0;
  bool ura_overlay = false;
};

// Deterministic SVG 1.1 rendering: obstacles filled, routable areas
// outlined, traces stroked with per-group colors.
std::string render_svg(const Layout& layout, const RenderOptions& opts = {});

void render_svg_file(const Layout& layout, const std::string& path,
                     const RenderOptions& opts = {});

}  // namespace lm
