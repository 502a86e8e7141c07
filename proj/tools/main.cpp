// Batch CLI for sky/cloud color-channel analysis: channel bimodality reports,
// PCA variance/loading/area grids, clustering sweeps, and single-image
// segmentation over PNG/JPEG datasets with binary ground truth.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "skycolor/clustering.hpp"
#include "skycolor/colorspace.hpp"
#include "skycolor/csv.hpp"
#include "skycolor/dataset.hpp"
#include "skycolor/evaluation.hpp"
#include "skycolor/image_io.hpp"
#include "skycolor/pca.hpp"
#include "skycolor/stats.hpp"

namespace fs = std::filesystem;
using namespace skycolor;

namespace {

struct CommonOptions {
    std::string manifest;
    std::string out_dir = "out";
    double tau = 2.0;
    int max_iter = 300;
    double tol = 1e-5;
    std::string labeling = "oracle";
    std::string loadings = "scaled";
    int workers = 1;
    std::uint64_t seed = 0;
};

void add_fcm_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--tau", opt.tau, "fuzziness index (> 1)");
    cmd->add_option("--max-iter", opt.max_iter, "maximum FCM iterations");
    cmd->add_option("--tol", opt.tol, "membership-change convergence tolerance");
    cmd->add_option("--seed", opt.seed, "seed for randomized fallbacks");
}

clustering::FcmConfig fcm_config(const CommonOptions& opt) {
    clustering::FcmConfig config;
    config.fuzziness = opt.tau;
    config.max_iterations = opt.max_iter;
    config.tolerance = opt.tol;
    config.seed = opt.seed;
    return config;
}

struct LoadedDataset {
    std::vector<ChannelStack> stacks;
    std::vector<SegmentationMask> truths;
};

LoadedDataset load_stacks(const std::string& manifest) {
    std::vector<dataset::LabeledImage> images = dataset::load_dataset(manifest);
    if (images.empty()) throw Error("manifest contains no entries");
    LoadedDataset data;
    data.stacks.reserve(images.size());
    data.truths.reserve(images.size());
    for (dataset::LabeledImage& item : images) {
        data.stacks.push_back(colorspace::extract_channels(item.image, item.id));
        data.truths.push_back(std::move(item.truth));
    }
    return data;
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path path(dir);
    fs::create_directories(path);
    return path;
}

std::vector<Channel> parse_channel_list(const std::vector<std::string>& names) {
    std::vector<Channel> channels;
    for (const std::string& name : names) {
        const std::optional<Channel> ch = parse_channel(name);
        if (!ch)
            throw Error("unknown channel '" + name +
                        "' (use c1..c16 or a channel name such as R or S)");
        channels.push_back(*ch);
    }
    if (channels.empty() || channels.size() > 2)
        throw Error("select 1 or 2 channels");
    return channels;
}

void save_grid_raster(const fs::path& path, const pca::Matrix& grid) {
    std::vector<double> flat;
    flat.reserve(kChannelCount * kChannelCount);
    for (const auto& row : grid)
        for (double v : row) flat.push_back(v);
    io::save_png_gray8(path, io::gray_raster(flat, kChannelCount, kChannelCount));
}

int cmd_pbi(const CommonOptions& opt) {
    const LoadedDataset data = load_stacks(opt.manifest);
    const stats::PbiReport report = stats::dataset_pbi(data.stacks);
    const fs::path out = ensure_out_dir(opt.out_dir);
    csv::write_file(out / "pbi.csv", report.to_csv());

    std::string top;
    int shown = 0;
    for (const stats::ChannelMoments& cm : report.entries) {
        if (cm.degenerate) continue;
        if (shown) top += ", ";
        top += std::string(channel_code(cm.channel)) + " (" + std::string(channel_name(cm.channel)) + ")";
        if (++shown == 3) break;
    }
    std::cout << "wrote " << (out / "pbi.csv").string() << "\n";
    std::cout << "top-3 most bimodal: " << top << "\n";
    return 0;
}

int cmd_pca(const CommonOptions& opt) {
    const LoadedDataset data = load_stacks(opt.manifest);
    const pca::NormalizationParams params = pca::fit_normalization(data.stacks);
    const pca::VarianceReport variance = pca::variance_report(data.stacks, params, opt.workers);

    pca::CovarianceAccumulator pooled;
    for (const ChannelStack& stack : data.stacks) pooled.add(pca::normalize(stack, params));
    const pca::LoadingMode mode =
        opt.loadings == "raw" ? pca::LoadingMode::Raw : pca::LoadingMode::Scaled;
    const pca::PcaResult db = pca::eigendecompose(pooled.covariance(), mode);
    const pca::Matrix areas = pca::projection_area_grid(db);

    const fs::path out = ensure_out_dir(opt.out_dir);
    csv::write_file(out / "variance.csv", pca::variance_csv(variance));
    csv::write_file(out / "loadings.csv", pca::loadings_csv(db));
    csv::write_file(out / "area_grid.csv", pca::area_grid_csv(areas));
    save_grid_raster(out / "area_grid.png", areas);

    const double pc12 = variance.whole_database[0] + variance.whole_database[1];
    std::cout << "wrote variance.csv, loadings.csv, area_grid.csv, area_grid.png under "
              << out.string() << "\n";
    std::cout << "whole-database PC1+PC2 variance fraction: " << csv::fmt(pc12) << "\n";

    // pairs with the highest cumulative PC1 loading
    std::vector<std::pair<double, std::pair<Channel, Channel>>> pairs;
    for (int a = 0; a < kChannelCount; ++a)
        for (int b = a + 1; b < kChannelCount; ++b) {
            const Channel ca = channel_from_index(a), cb = channel_from_index(b);
            pairs.push_back({pca::pair_cumulative_loading(db, ca, cb), {ca, cb}});
        }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
        return x.first > y.first;
    });
    std::cout << "top pairs by cumulative PC1 loading:";
    for (int i = 0; i < 3; ++i)
        std::cout << (i ? ", " : " ") << channel_code(pairs[static_cast<size_t>(i)].second.first)
                  << "-" << channel_code(pairs[static_cast<size_t>(i)].second.second);
    std::cout << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::string& reference_path) {
    const LoadedDataset data = load_stacks(opt.manifest);
    evaluation::SweepOptions options;
    options.fcm = fcm_config(opt);
    options.labeling = opt.labeling == "heuristic" ? evaluation::LabelingMode::Heuristic
                                                   : evaluation::LabelingMode::Oracle;
    options.workers = opt.workers;
    const evaluation::SweepGrid grid =
        evaluation::sweep(data.stacks, data.truths, options);

    // R^2 of 1D F-scores against whole-database |PC1 loadings|
    std::optional<double> r2;
    const auto f1d = grid.fscores_1d();
    try {
        const pca::NormalizationParams params = pca::fit_normalization(data.stacks);
        pca::CovarianceAccumulator pooled;
        for (const ChannelStack& stack : data.stacks) pooled.add(pca::normalize(stack, params));
        const pca::PcaResult db = pca::eigendecompose(pooled.covariance());
        std::vector<double> x, y;
        for (int j = 0; j < kChannelCount; ++j) {
            if (!f1d[j]) continue;
            x.push_back(db.loadings[j][0]);
            y.push_back(*f1d[j]);
        }
        if (x.size() >= 3) r2 = evaluation::loading_fit(x, y);
    } catch (const Error&) {
        // leaderboard simply omits the fit line
    }

    std::vector<evaluation::ReferenceRow> reference;
    if (!reference_path.empty()) reference = evaluation::read_reference_rows(reference_path);

    const fs::path out = ensure_out_dir(opt.out_dir);
    csv::write_file(out / "sweep.csv", grid.to_csv());
    csv::write_file(out / "leaderboard.txt", evaluation::leaderboard(grid, reference, r2));
    const auto matrix = grid.fscore_matrix();
    std::vector<double> flat;
    flat.reserve(kChannelCount * kChannelCount);
    for (const auto& row : matrix)
        for (double v : row) flat.push_back(v);
    io::save_png_gray8(out / "sweep_grid.png", io::gray_raster(flat, kChannelCount, kChannelCount));

    // masks of the best 1D cell and best 2D cell
    const evaluation::SweepCell* best1d = nullptr;
    const evaluation::SweepCell* best2d = nullptr;
    for (const evaluation::SweepCell& c : grid.cells) {
        if (!c.ok() || !c.scores.mean_fscore) continue;
        auto*& slot = c.is_1d() ? best1d : best2d;
        if (!slot || *c.scores.mean_fscore > *slot->scores.mean_fscore) slot = &c;
    }
    int ok_cells = 0;
    for (const evaluation::SweepCell& c : grid.cells) ok_cells += c.ok();
    if (best1d) {
        const fs::path mask_dir = out / "masks";
        fs::create_directories(mask_dir);
        for (const evaluation::SweepCell* cell : {best1d, best2d}) {
            if (!cell) continue;
            std::vector<Channel> channels{cell->a};
            if (!cell->is_1d()) channels.push_back(cell->b);
            std::string tag(channel_code(cell->a));
            if (!cell->is_1d()) tag += "_" + std::string(channel_code(cell->b));
            for (size_t i = 0; i < data.stacks.size(); ++i) {
                const ChannelStack& stack = data.stacks[i];
                try {
                    const clustering::FcmOutput output =
                        clustering::cluster_channels(stack, channels, options.fcm);
                    clustering::ClusterLabeling labeling =
                        clustering::heuristic_labeling(stack, output);
                    if (options.labeling == evaluation::LabelingMode::Oracle) {
                        const auto m0 = clustering::mask_from_output(output, {0}, stack.width,
                                                                     stack.height);
                        const auto m1 = clustering::mask_from_output(output, {1}, stack.width,
                                                                     stack.height);
                        const auto s0 = evaluation::score(m0, data.truths[i]);
                        const auto s1 = evaluation::score(m1, data.truths[i]);
                        labeling = {s1.fscore.value_or(0) > s0.fscore.value_or(0) ? 1 : 0};
                    }
                    SegmentationMask mask = clustering::mask_from_output(
                        output, labeling, stack.width, stack.height,
                        clustering::provenance_string(channels, options.fcm, labeling));
                    io::save_png_mask(mask_dir / (stack.image_id + "_" + tag + ".png"), mask);
                } catch (const Error&) {
                    // cell-level status already captured in sweep.csv
                }
            }
        }
    }

    std::cout << "wrote sweep.csv, sweep_grid.png, leaderboard.txt under " << out.string() << "\n";
    if (best1d)
        std::cout << "best 1D channel: " << channel_code(best1d->a) << " (F="
                  << csv::fmt(*best1d->scores.mean_fscore) << ")\n";
    if (best2d)
        std::cout << "best 2D pair: " << channel_code(best2d->a) << "+"
                  << channel_code(best2d->b) << " (F=" << csv::fmt(*best2d->scores.mean_fscore)
                  << ")\n";
    return ok_cells > 0 ? 0 : 1;
}

int cmd_segment(const CommonOptions& opt, const std::string& image_path,
                const std::vector<std::string>& channel_names) {
    const std::vector<Channel> channels = parse_channel_list(channel_names);
    const RgbImage image = io::load_rgb8(image_path);
    const ChannelStack stack =
        colorspace::extract_channels(image, fs::path(image_path).stem().string());

    const clustering::FcmConfig config = fcm_config(opt);
    const clustering::FcmOutput output = clustering::cluster_channels(stack, channels, config);
    const clustering::ClusterLabeling labeling = clustering::heuristic_labeling(stack, output);
    const SegmentationMask mask =
        clustering::mask_from_output(output, labeling, stack.width, stack.height,
                                     clustering::provenance_string(channels, config, labeling));

    const fs::path out = ensure_out_dir(opt.out_dir);
    const fs::path mask_path = out / (fs::path(image_path).stem().string() + "_mask.png");
    io::save_png_mask(mask_path, mask);
    std::cout << "wrote " << mask_path.string() << "\n";
    std::cout << "cloud fraction: " << csv::fmt(mask.cloud_fraction()) << "\n";
    return 0;
}

int cmd_synth(const std::string& out_dir, int count, int width, int height, double noise_sigma,
              std::uint64_t seed) {
    const fs::path out = ensure_out_dir(out_dir);
    fs::create_directories(out / "images");
    fs::create_directories(out / "truth");
    const std::vector<dataset::SynthSpec> specs =
        dataset::fixture_specs(count, width, height, noise_sigma, seed);

    std::string manifest;
    for (size_t i = 0; i < specs.size(); ++i) {
        const dataset::SynthResult result = dataset::generate_synthetic(specs[i]);
        char id[32];
        std::snprintf(id, sizeof(id), "synth_%03zu", i);
        const std::string image_rel = "images/" + std::string(id) + ".png";
        const std::string truth_rel = "truth/" + std::string(id) + ".png";
        io::save_png_rgb8(out / image_rel, result.image);
        io::GrayImage truth_gray;
        truth_gray.width = result.truth.width;
        truth_gray.height = result.truth.height;
        truth_gray.pixels.resize(result.truth.labels.size());
        for (size_t p = 0; p < result.truth.labels.size(); ++p)
            truth_gray.pixels[p] = result.truth.labels[p] ? 255 : 0;
        io::save_png_gray8(out / truth_rel, truth_gray);
        manifest += std::string(id) + '\t' + image_rel + '\t' + truth_rel + '\n';
    }
    csv::write_file(out / "manifest.tsv", manifest);
    std::cout << "wrote " << specs.size() << " image/truth pairs and manifest.tsv under "
              << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sky/cloud color-channel analysis"};
    app.require_subcommand(1);

    CommonOptions opt;

    CLI::App* pbi = app.add_subcommand("pbi", "per-channel bimodality report");
    pbi->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    pbi->add_option("--out", opt.out_dir, "output directory");

    CLI::App* pca_cmd = app.add_subcommand("pca", "variance, loading, and area reports");
    pca_cmd->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    pca_cmd->add_option("--out", opt.out_dir, "output directory");
    pca_cmd->add_option("--loadings", opt.loadings, "loading mode")
        ->check(CLI::IsMember({"scaled", "raw"}));
    pca_cmd->add_option("--workers", opt.workers, "worker threads");

    std::string reference_path;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "1D/2D clustering F-score sweep");
    sweep_cmd->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    sweep_cmd->add_option("--out", opt.out_dir, "output directory");
    sweep_cmd->add_option("--labeling", opt.labeling, "cluster-to-class labeling")
        ->check(CLI::IsMember({"oracle", "heuristic"}));
    sweep_cmd->add_option("--workers", opt.workers, "worker threads");
    sweep_cmd->add_option("--reference", reference_path,
                          "CSV of external reference scores (name,precision,recall,fscore)");
    add_fcm_flags(sweep_cmd, opt);

    std::string image_path;
    std::vector<std::string> channel_names;
    CLI::App* segment_cmd = app.add_subcommand("segment", "segment a single image");
    segment_cmd->add_option("image", image_path, "input image (PNG or JPEG)")->required();
    segment_cmd->add_option("--channels", channel_names, "1 or 2 channels (e.g. c13 or c5,c8)")
        ->required()
        ->delimiter(',');
    segment_cmd->add_option("--out", opt.out_dir, "output directory");
    add_fcm_flags(segment_cmd, opt);

    int synth_count = 20, synth_width = 128, synth_height = 128;
    double synth_sigma = 8.0;
    std::uint64_t synth_seed = 1;
    std::string synth_out = "out/synth";
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--out", synth_out, "output directory");
    synth_cmd->add_option("--count", synth_count, "number of images");
    synth_cmd->add_option("--width", synth_width, "image width");
    synth_cmd->add_option("--height", synth_height, "image height");
    synth_cmd->add_option("--noise-sigma", synth_sigma, "max Gaussian noise sigma (8-bit units)");
    synth_cmd->add_option("--seed", synth_seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pbi->parsed()) return cmd_pbi(opt);
        if (pca_cmd->parsed()) return cmd_pca(opt);
        if (sweep_cmd->parsed()) return cmd_sweep(opt, reference_path);
        if (segment_cmd->parsed()) return cmd_segment(opt, image_path, channel_names);
        if (synth_cmd->parsed())
            return cmd_synth(synth_out, synth_count, synth_width, synth_height, synth_sigma,
                             synth_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
