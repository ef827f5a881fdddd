#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "cpd/record.hpp"

namespace cpd {

/// SVG of one frame: the domain outline (marching squares on the level set)
/// and the particles, red or blue by the config's colour rule applied to their
/// initial positions. Output depends only on the inputs.
std::string render_frame_svg(const ScenarioRecord &record, std::size_t frame);

void render_frame(const ScenarioRecord &record, std::size_t frame, const std::filesystem::path &path);

} // namespace cpd
