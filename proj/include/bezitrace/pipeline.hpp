#ifndef BEZITRACE_PIPELINE_HPP
#define BEZITRACE_PIPELINE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bezitrace/energy.hpp"
#include "bezitrace/init.hpp"
#include "bezitrace/shape.hpp"
#include "bezitrace/solver.hpp"

namespace bezitrace {

/// Input embedded into the smallest dyadic square (top-left anchored,
/// replicated border), with the valid-pixel mask.
struct PaddedImage {
    RasterImage image;
    RasterGrid grid;
    std::vector<uint8_t> mask;
    int orig_width = 0;
    int orig_height = 0;
};

/// depth < 0 selects ceil(log2(max(W, H))).
PaddedImage pad_to_grid(const RasterImage& input, int depth = -1);

Bezigon scale_bezigon(const Bezigon& bezigon, double factor);

/// Back-to-front render of a pixel-unit document at out_w x out_h
/// (internally padded to the dyadic grid and cropped). oracle_samples > 0
/// switches to the supersampling reference rasterizer.
RasterImage render_document(const VectorDocument& doc, int out_w, int out_h,
                            std::array<double, 3> page_background,
                            int oracle_samples = 0);

struct VectorizeConfig {
    EnergyWeights weights;
    SolverOptions solver;
    InitParams init;
    int depth = -1;  // auto
    std::optional<std::array<double, 3>> background;
    bool use_l0 = true;
    int threads = 0;  // 0: BEZITRACE_THREADS env var, then hardware
};

struct VectorizeResult {
    VectorDocument document;  // pixel units, back-to-front
    double psnr_before = 0.0;
    double psnr_after = 0.0;
    std::array<double, 3> page_background{1, 1, 1};
    nlohmann::json report;
};

/// The vectorize pipeline: initialization (or a seed document),
/// per-shape bezigon optimization, document assembly and report.
VectorizeResult vectorize_image(const RasterImage& input,
                                const VectorizeConfig& cfg,
                                const VectorDocument* seed = nullptr);

/// Per-shape energy context shared by the pipeline and diagnostics:
/// background estimate outside a 2 px dilation of the initial coverage,
/// l0 from the initial bezigon (normalized units).
EnergyContext make_shape_context(const PaddedImage& padded,
                                 const VectorShape& initial_normalized,
                                 const std::optional<std::array<double, 3>>&
                                     background_override,
                                 bool use_l0);

int worker_count(int requested);

}  // namespace bezitrace

#endif
