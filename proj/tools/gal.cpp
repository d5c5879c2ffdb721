#include <CLI11.hpp>

#include <iostream>

#include "gal/eval.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

gal::Config load_config(const std::string& path) {
    gal::Config cfg;
    if (!path.empty()) cfg.load(path);
    return cfg;
}

std::string out_path(const std::string& dir, const std::string& stem,
                     const std::string& suffix) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / (stem + suffix)).string();
}

int cmd_run(const std::string& image_path, const std::string& boxes_path,
            const std::string& vertical_path, const std::string& params_path,
            const std::string& config_path, const std::string& out_dir) {
    gal::Config cfg = load_config(config_path);
    gal::Raster img = gal::read_raster(image_path);
    std::vector<gal::Box> boxes;
    if (!boxes_path.empty()) boxes = gal::read_boxes(boxes_path);
    std::optional<std::string> vertical;
    if (!vertical_path.empty()) vertical = vertical_path;

    gal::PipelineModels models = gal::train_models(cfg);
    if (!params_path.empty()) models.params = gal::read_params(params_path);

    auto res = gal::run_pipeline(img, models, cfg, boxes, vertical);

    std::string stem = std::filesystem::path(image_path).stem().string();
    gal::write_label_map(res.final_labels, gal::LabelMapMode::Codes,
                         out_path(out_dir, stem, "_labels.pgm"));
    gal::write_label_map(res.final_labels, gal::LabelMapMode::Colors,
                         out_path(out_dir, stem, "_labels.ppm"));
    gal::write_raster(gal::render_overlay(img, res.final_labels),
                      out_path(out_dir, stem, "_overlay.ppm"));
    gal::write_gav_report(res.gav, out_path(out_dir, stem, "_gav.txt"));
    gal::write_energy_trace(res.expansion, out_path(out_dir, stem, "_energy.txt"));
    std::cout << "labeled " << image_path << " -> " << out_dir << "/" << stem
              << "_labels.pgm\n";
    return kExitOk;
}

int cmd_eval(const std::string& pred_dir, const std::string& truth_dir) {
    gal::EvalReport report = gal::evaluate_dirs(pred_dir, truth_dir);
    gal::write_eval_report(report, std::cout);
    return report.errors.empty() ? kExitOk : kExitInput;
}

int cmd_ablate(const std::string& dataset_dir, const std::string& config_path) {
    gal::Config cfg = load_config(config_path);
    namespace fs = std::filesystem;
    std::vector<gal::SyntheticScene> scenes;
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dataset_dir))
        if (entry.path().extension() == ".ppm") stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    for (const auto& stem : stems) {
        fs::path truth = fs::path(dataset_dir) / (stem + "_truth.pgm");
        if (!fs::exists(truth)) continue;
        gal::SyntheticScene scene;
        scene.image = gal::read_raster((fs::path(dataset_dir) / (stem + ".ppm")).string());
        scene.truth = gal::read_label_map(truth.string());
        fs::path boxes = fs::path(dataset_dir) / (stem + "_boxes.txt");
        if (fs::exists(boxes)) scene.boxes = gal::read_boxes(boxes.string());
        scenes.push_back(std::move(scene));
    }
    if (scenes.empty()) throw gal::IoError("no <stem>.ppm with <stem>_truth.pgm pairs in " +
                                           dataset_dir);
    gal::PipelineModels models = gal::train_models(cfg);
    auto table = gal::ablate(scenes, models, cfg);
    gal::write_ablation_table(table, std::cout);
    return kExitOk;
}

int cmd_synth(uint64_t seed, int count, const std::string& kinds_csv,
              const std::string& out_dir, int width, int height) {
    std::vector<gal::SceneKind> kinds;
    std::stringstream ss(kinds_csv);
    std::string item;
    while (std::getline(ss, item, ',')) kinds.push_back(gal::scene_kind_from_name(item));
    if (kinds.empty())
        for (gal::SceneKind k :
             {gal::SceneKind::HorizonOnly, gal::SceneKind::FrontoBuilding,
              gal::SceneKind::CornerBuilding, gal::SceneKind::Alley, gal::SceneKind::Occluded})
            kinds.push_back(k);
    auto scenes = gal::generate_scenes(seed, count, kinds, width, height);
    for (size_t i = 0; i < scenes.size(); ++i)
        gal::write_scene(scenes[i], out_dir, static_cast<int>(i));
    std::cout << "wrote " << scenes.size() << " scenes to " << out_dir << "\n";
    return kExitOk;
}

int cmd_learn(const std::string& dataset_dir, const std::string& out_file,
              const std::string& config_path) {
    gal::Config cfg = load_config(config_path);
    namespace fs = std::filesystem;
    gal::PipelineModels models = gal::train_models(cfg);
    std::vector<gal::CrfTrainingExample> training;
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dataset_dir))
        if (entry.path().extension() == ".ppm") stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    for (const auto& stem : stems) {
        fs::path truth_path = fs::path(dataset_dir) / (stem + "_truth.pgm");
        if (!fs::exists(truth_path)) continue;
        gal::Raster img = gal::read_raster((fs::path(dataset_dir) / (stem + ".ppm")).string());
        gal::LabelMap truth = gal::read_label_map(truth_path.string());
        std::vector<gal::Box> boxes;
        fs::path boxes_path = fs::path(dataset_dir) / (stem + "_boxes.txt");
        if (fs::exists(boxes_path)) boxes = gal::read_boxes(boxes_path.string());
        auto res = gal::run_pipeline(img, models, cfg, boxes);
        gal::CrfTrainingExample ex;
        ex.maps = res.maps;
        ex.graph = res.ipl.graph;
        ex.truth.resize(ex.graph.n_segments());
        for (size_t s = 0; s < ex.graph.n_segments(); ++s) {
            std::array<long, gal::kNumClasses> counts{};
            for (int p : ex.graph.nodes[s].pixels) ++counts[truth.codes[p]];
            ex.truth[s] = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
        training.push_back(std::move(ex));
    }
    if (training.size() < 2)
        throw gal::ParamError("learn: need at least 2 training images with truth maps");
    gal::CrfParams params = gal::learn_params(training, cfg);
    gal::write_params(params, out_file);
    std::cout << "w";
    for (double w : params.w) std::cout << ' ' << w;
    std::cout << " lambda " << params.lambda << " -> " << out_file << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gal: geometric layout labeling for outdoor scenes"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "label one image through the full pipeline");
    std::string image, boxes, vertical, params, config, out_dir = "gal_out";
    run->add_option("image", image, "input image (PPM/PGM, 8-bit)")->required();
    run->add_option("--boxes", boxes, "object bounding boxes, `x y w h` per line");
    run->add_option("--vertical-probs", vertical,
                    "per-segment vertical-class probabilities file");
    run->add_option("--params", params, "CRF params file `w0 w1 w2 w3 w4 lambda`");
    run->add_option("--config", config, "flat `key value` config file");
    run->add_option("--out", out_dir, "output directory");

    auto* eval = app.add_subcommand("eval", "pixel accuracy of predictions against truth");
    std::string pred_dir, truth_dir;
    eval->add_option("pred-dir", pred_dir)->required();
    eval->add_option("truth-dir", truth_dir)->required();

    auto* ablate = app.add_subcommand("ablate", "add the global attributes one by one");
    std::string abl_dir, abl_config;
    ablate->add_option("dataset-dir", abl_dir)->required();
    ablate->add_option("--config", abl_config);

    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    uint64_t seed = 1;
    int count = 10, width = 320, height = 240;
    std::string kinds, synth_out = "gal_scenes";
    synth->add_option("--seed", seed);
    synth->add_option("--count", count);
    synth->add_option("--kinds", kinds,
                      "comma list: horizon-only,fronto-building,corner-building,alley,occluded");
    synth->add_option("--out", synth_out);
    synth->add_option("--width", width);
    synth->add_option("--height", height);

    auto* learn = app.add_subcommand("learn", "grid-search CRF params on a labeled corpus");
    std::string learn_dir, learn_out = "params.txt", learn_config;
    learn->add_option("dataset-dir", learn_dir)->required();
    learn->add_option("--out", learn_out);
    learn->add_option("--config", learn_config);

    try {
        app.parse(argc, argv);
        if (*run) return cmd_run(image, boxes, vertical, params, config, out_dir);
        if (*eval) return cmd_eval(pred_dir, truth_dir);
        if (*ablate) return cmd_ablate(abl_dir, abl_config);
        if (*synth) return cmd_synth(seed, count, kinds, synth_out, width, height);
        if (*learn) return cmd_learn(learn_dir, learn_out, learn_config);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    } catch (const gal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
