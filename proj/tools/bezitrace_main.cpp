#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "bezitrace/diagnostics.hpp"
#include "bezitrace/imaging.hpp"
#include "bezitrace/pipeline.hpp"
#include "bezitrace/svg.hpp"

using namespace bezitrace;

namespace {

std::array<double, 3> parse_hex_color(const std::string& s) {
    if (s.size() == 7 && s[0] == '#') {
        auto hex = [&](int i) {
            return std::stoi(s.substr(i, 2), nullptr, 16) / 255.0;
        };
        return {hex(1), hex(3), hex(5)};
    }
    if (s.size() == 4 && s[0] == '#') {
        auto hex = [&](int i) {
            return std::stoi(s.substr(i, 1), nullptr, 16) * 17 / 255.0;
        };
        return {hex(1), hex(2), hex(3)};
    }
    throw CLI::ValidationError("color must look like #rrggbb");
}

int run_vectorize(const std::string& input_path, const std::string& out_path,
                  const std::string& init_path,
                  const std::vector<double>& weights, int sweeps,
                  bool global_pass, const std::string& report_path, int depth,
                  const std::string& bg, bool no_l0, int threads,
                  double err_tol, double seg_k, int min_size) {
    RasterImage input = load_png(input_path);
    VectorizeConfig cfg;
    if (!weights.empty()) {
        if (weights.size() != 4)
            throw CLI::ValidationError(
                "--weights needs four values: spt apt hpt lpt");
        cfg.weights = {weights[0], weights[1], weights[2], weights[3]};
    }
    cfg.solver.max_sweeps = sweeps;
    cfg.solver.global_pass = global_pass;
    cfg.depth = depth;
    cfg.use_l0 = !no_l0;
    cfg.threads = threads;
    cfg.init.err_tol_px = err_tol;
    cfg.init.k = seg_k;
    cfg.init.min_size = min_size;
    if (!bg.empty()) cfg.background = parse_hex_color(bg);

    VectorizeResult result;
    if (!init_path.empty()) {
        VectorDocument seed = load_svg(init_path);
        result = vectorize_image(input, cfg, &seed);
    } else {
        result = vectorize_image(input, cfg);
    }
    save_svg(result.document, out_path);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot write " + report_path);
        out << result.report.dump(2) << "\n";
    }
    std::printf("%s: %zu shape(s), PSNR %.2f dB -> %.2f dB\n",
                out_path.c_str(), result.document.shapes.size(),
                result.psnr_before, result.psnr_after);
    return 0;
}

int run_rasterize(const std::string& svg_path, const std::string& out_path,
                  int size, const std::string& bg, int oracle) {
    VectorDocument doc = load_svg(svg_path);
    int out_w = static_cast<int>(doc.width);
    int out_h = static_cast<int>(doc.height);
    if (size > 0) {
        double scale = size / std::max(doc.width, doc.height);
        out_w = std::max(1, static_cast<int>(std::lround(doc.width * scale)));
        out_h = std::max(1, static_cast<int>(std::lround(doc.height * scale)));
    }
    auto page = bg.empty() ? std::array<double, 3>{1, 1, 1}
                           : parse_hex_color(bg);
    RasterImage img = render_document(doc, out_w, out_h, page, oracle);
    save_png(img, out_path);
    std::printf("%s: %dx%d\n", out_path.c_str(), out_w, out_h);
    return 0;
}

int run_psnr(const std::string& a_path, const std::string& b_path) {
    RasterImage a = load_png(a_path);
    RasterImage b = load_png(b_path);
    std::printf("%.6f\n", psnr(a, b));
    return 0;
}

int cmd_gradcheck(int trials, uint64_t seed, int depth) {
    GradCheckResult res = bezitrace::run_gradcheck(trials, seed, depth);
    std::printf("%-6s %12s %14s %9s %9s  %s\n", "term", "max_rel",
                "fraction_bad", "coords", "excluded", "status");
    for (const GradCheckTerm& t : res.terms)
        std::printf("%-6s %12.3e %14.5f %9d %9d  %s\n", t.name.c_str(),
                    t.max_rel, t.fraction_bad, t.coords_checked,
                    t.coords_excluded, t.pass ? "pass" : "FAIL");
    return res.pass ? 0 : 1;
}

int run_energyscan(const std::string& svg_path, const std::string& png_path,
                   const std::string& param, const std::string& range,
                   const std::string& out_csv, int shape_index) {
    VectorDocument doc = load_svg(svg_path);
    if (doc.shapes.empty()) throw std::runtime_error("svg has no shapes");
    if (shape_index < 0 ||
        shape_index >= static_cast<int>(doc.shapes.size()))
        throw CLI::ValidationError("--shape out of range");
    RasterImage input = load_png(png_path);
    PaddedImage padded = pad_to_grid(input);
    int s = padded.grid.size();

    int j, i;
    char coord;
    if (std::sscanf(param.c_str(), "%d,%d,%c", &j, &i, &coord) != 3 ||
        (coord != 'x' && coord != 'y') || i < 1 || i > 4)
        throw CLI::ValidationError("--param expects j,i,x|y with i in 1..4");
    double a, b;
    int steps;
    if (std::sscanf(range.c_str(), "%lf:%lf:%d", &a, &b, &steps) != 3 ||
        steps < 2)
        throw CLI::ValidationError("--range expects a:b:steps");

    const VectorShape& px_shape = doc.shapes[shape_index];
    VectorShape shape{scale_bezigon(px_shape.bezigon, 1.0 / s),
                      px_shape.color};
    EnergyContext ctx =
        make_shape_context(padded, shape, std::nullopt, true);

    int n = shape.bezigon.segment_count();
    j = ((j % n) + n) % n;
    int point_index = i <= 3 ? 3 * j + (i - 1) : 3 * ((j + 1) % n);
    auto rows = scan_energy(shape, ctx, point_index, coord == 'x' ? 0 : 1,
                            a / s, b / s, steps);

    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    out << "value_px,e_data_wavelet,e_data_center\n";
    char line[128];
    for (const ScanRow& r : rows) {
        std::snprintf(line, sizeof(line), "%.10g,%.12g,%.12g\n", r.value * s,
                      r.e_wavelet, r.e_center);
        out << line;
    }
    std::printf("%s: %zu rows\n", out_csv.c_str(), rows.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bezitrace: clipart vectorization by direct bezigon "
                 "optimization"};
    app.require_subcommand(1);

    // vectorize
    std::string v_input, v_out, v_init, v_report, v_bg;
    std::vector<double> v_weights;
    int v_sweeps = 3, v_depth = -1, v_threads = 0, v_min_size = 16;
    bool v_global = true, v_no_l0 = false;
    double v_err_tol = 1.0, v_k = 300.0;
    auto* vec = app.add_subcommand("vectorize",
                                   "raster image to optimized bezigons");
    vec->add_option("input", v_input, "input PNG")->required();
    vec->add_option("--out", v_out, "output SVG")->required();
    vec->add_option("--init", v_init, "seed SVG of initial bezigons");
    vec->add_option("--weights", v_weights,
                    "prior weights: spt apt hpt lpt")
        ->expected(4);
    vec->add_option("--sweeps", v_sweeps, "piecewise sweeps");
    vec->add_flag("--global,!--no-global", v_global,
                  "run the final joint pass");
    vec->add_option("--report", v_report, "write a JSON report");
    vec->add_option("--depth", v_depth, "grid depth (default: auto)");
    vec->add_option("--bg", v_bg, "background override (#rrggbb)");
    vec->add_flag("--no-l0", v_no_l0, "drop the 1/l0 data normalization");
    vec->add_option("--threads", v_threads, "worker threads");
    vec->add_option("--err-tol", v_err_tol, "fit tolerance, px");
    vec->add_option("--seg-k", v_k, "segmentation threshold");
    vec->add_option("--min-size", v_min_size, "minimum region pixels");

    // rasterize
    std::string r_svg, r_out, r_bg;
    int r_size = 0, r_oracle = 0;
    auto* ras = app.add_subcommand("rasterize", "render an SVG subset");
    ras->add_option("input", r_svg, "input SVG")->required();
    ras->add_option("--out", r_out, "output PNG")->required();
    ras->add_option("--size", r_size, "longest output side");
    ras->add_option("--bg", r_bg, "page background (#rrggbb)");
    ras->add_option("--oracle", r_oracle,
                    "supersampling reference, samples per axis");

    // psnr
    std::string p_a, p_b;
    auto* ps = app.add_subcommand("psnr", "peak signal-to-noise ratio, dB");
    ps->add_option("a", p_a)->required();
    ps->add_option("b", p_b)->required();

    // gradcheck
    int g_trials = 100, g_depth = 5;
    uint64_t g_seed = 1;
    auto* gc = app.add_subcommand("gradcheck",
                                  "analytic vs finite-difference gradients");
    gc->add_option("--trials", g_trials);
    gc->add_option("--seed", g_seed);
    gc->add_option("--depth", g_depth);

    // energyscan
    std::string e_svg, e_png, e_param = "0,1,y", e_range = "0:1:200",
                e_out = "scan.csv";
    int e_shape = 0;
    auto* es = app.add_subcommand("energyscan",
                                  "data-energy continuity scan to CSV");
    es->add_option("svg", e_svg, "shape document")->required();
    es->add_option("png", e_png, "observed raster")->required();
    es->add_option("--param", e_param, "j,i,x|y (control i of segment j)");
    es->add_option("--range", e_range, "a:b:steps, px");
    es->add_option("--out", e_out, "output CSV");
    es->add_option("--shape", e_shape, "shape index in the SVG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*vec)
            return run_vectorize(v_input, v_out, v_init, v_weights, v_sweeps,
                                 v_global, v_report, v_depth, v_bg, v_no_l0,
                                 v_threads, v_err_tol, v_k, v_min_size);
        if (*ras) return run_rasterize(r_svg, r_out, r_size, r_bg, r_oracle);
        if (*ps) return run_psnr(p_a, p_b);
        if (*gc) return cmd_gradcheck(g_trials, g_seed, g_depth);
        if (*es)
            return run_energyscan(e_svg, e_png, e_param, e_range, e_out,
                                  e_shape);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
