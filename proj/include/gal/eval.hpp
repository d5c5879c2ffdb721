#ifndef GAL_EVAL_HPP
#define GAL_EVAL_HPP

#include <atomic>
#include <cstdlib>
#include <thread>

#include "gal/pipeline.hpp"

namespace gal {

// Pixel-accuracy report over matched prediction/truth pairs.
struct EvalReport {
    double overall = 0;
    std::array<double, kNumClasses> per_class{};  // -1 where the class is absent
    std::array<std::array<long, kNumClasses>, kNumClasses> confusion{};  // [truth][pred]
    std::vector<std::pair<std::string, double>> per_image;
    std::vector<std::string> errors;

    long total_pixels() const {
        long t = 0;
        for (const auto& row : confusion)
            for (long v : row) t += v;
        return t;
    }
};

inline void accumulate(EvalReport& report, const LabelMap& pred, const LabelMap& truth,
                       const std::string& name) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw ParamError("evaluate: dimension mismatch for " + name);
    long correct = 0;
    for (size_t p = 0; p < pred.codes.size(); ++p) {
        ++report.confusion[truth.codes[p]][pred.codes[p]];
        correct += pred.codes[p] == truth.codes[p];
    }
    report.per_image.push_back({name, static_cast<double>(correct) / pred.codes.size()});
}

inline void finalize(EvalReport& report) {
    long diag = 0, total = 0;
    for (int t = 0; t < kNumClasses; ++t) {
        long row = 0;
        for (int q = 0; q < kNumClasses; ++q) {
            row += report.confusion[t][q];
            total += report.confusion[t][q];
        }
        diag += report.confusion[t][t];
        report.per_class[t] = row > 0 ? static_cast<double>(report.confusion[t][t]) / row : -1;
    }
    report.overall = total > 0 ? static_cast<double>(diag) / total : 0;
}

inline EvalReport evaluate_pair_list(
    const std::vector<std::pair<LabelMap, LabelMap>>& pairs) {
    EvalReport report;
    for (size_t i = 0; i < pairs.size(); ++i)
        accumulate(report, pairs[i].first, pairs[i].second, "pair" + std::to_string(i));
    finalize(report);
    return report;
}

// Directory evaluation: `<stem>.pgm` in pred_dir matched against
// `<stem>.pgm` (or `<stem>_truth.pgm`) in truth_dir.
inline EvalReport evaluate_dirs(const std::string& pred_dir, const std::string& truth_dir) {
    namespace fs = std::filesystem;
    EvalReport report;
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(pred_dir))
        if (entry.path().extension() == ".pgm") stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    for (const auto& stem : stems) {
        fs::path truth_path = fs::path(truth_dir) / (stem + ".pgm");
        if (!fs::exists(truth_path)) truth_path = fs::path(truth_dir) / (stem + "_truth.pgm");
        if (!fs::exists(truth_path)) {
            report.errors.push_back(stem + ": no matching truth");
            continue;
        }
        try {
            LabelMap pred = read_label_map((fs::path(pred_dir) / (stem + ".pgm")).string());
            LabelMap truth = read_label_map(truth_path.string());
            accumulate(report, pred, truth, stem);
        } catch (const Error& e) {
            report.errors.push_back(stem + ": " + e.what());
        }
    }
    finalize(report);
    return report;
}

inline void write_eval_report(const EvalReport& report, std::ostream& out) {
    out << "overall " << report.overall << '\n';
    for (int c = 0; c < kNumClasses; ++c)
        out << "class " << class_name(c) << ' ' << report.per_class[c] << '\n';
    out << "confusion_rows";
    for (int t = 0; t < kNumClasses; ++t)
        for (int q = 0; q < kNumClasses; ++q) out << ' ' << report.confusion[t][q];
    out << '\n';
    for (const auto& [name, acc] : report.per_image) out << "image " << name << ' ' << acc << '\n';
    for (const auto& e : report.errors) out << "error " << e << '\n';
}

// 50/50 blend of the image with the class palette.
inline Raster render_overlay(const Raster& img, const LabelMap& labels) {
    if (img.width != labels.width || img.height != labels.height)
        throw ParamError("render_overlay: dimension mismatch");
    Raster out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            auto rgb = class_color(labels.at(x, y));
            for (int c = 0; c < 3; ++c) {
                double v = img.channels == 3 ? img.at(x, y, c) : img.at(x, y);
                out.at(x, y, c) = 0.5 * v + 0.5 * (rgb[c] / 255.0);
            }
        }
    return out;
}

// Worker pool over an index range with a deterministic merge; GAL_THREADS
// caps the concurrency.
inline int thread_budget() {
    if (const char* env = std::getenv("GAL_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
inline void parallel_for_indexed(size_t count, Fn&& fn) {
    int threads = std::min<int>(thread_budget(), static_cast<int>(count));
    if (threads <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

// One row of the attribute-ablation table.
struct AblationStep {
    std::string name;
    double accuracy = 0;
};

// Cumulative attribute ablation over an in-memory corpus, one attribute
// group added per step. The empty step is the raw initial labeling.
inline std::vector<AblationStep> ablate(const std::vector<SyntheticScene>& scenes,
                                        const PipelineModels& models, const Config& cfg) {
    struct StepDef {
        std::string name;
        void (*apply)(AttributeSet&);
    };
    static const StepDef defs[] = {
        {"baseline (IPL only)", nullptr},
        {"+ porous", [](AttributeSet& a) { a.porous = true; }},
        {"+ solid", [](AttributeSet& a) { a.solid = true; }},
        {"+ horizon", [](AttributeSet& a) { a.horizon = true; }},
        {"+ vertical line", [](AttributeSet& a) { a.verticall = true; }},
        {"+ sky/ground line", [](AttributeSet& a) { a.skyground = true; }},
        {"+ vanishing line, planar surface",
         [](AttributeSet& a) { a.vanishing_planar = true; }},
    };

    std::vector<AblationStep> table;
    AttributeSet attrs = AttributeSet::none();
    for (const auto& def : defs) {
        if (def.apply) def.apply(attrs);
        std::vector<std::pair<LabelMap, LabelMap>> pairs(scenes.size());
        std::vector<std::string> failures(scenes.size());
        parallel_for_indexed(scenes.size(), [&](size_t i) {
            try {
                auto res = run_pipeline(scenes[i].image, models, cfg, scenes[i].boxes, {},
                                        attrs);
                pairs[i] = {def.apply ? res.final_labels : res.ipl_labels, scenes[i].truth};
            } catch (const Error& e) {
                failures[i] = e.what();
            }
        });
        for (const auto& f : failures)
            if (!f.empty()) throw InternalError("ablate: " + f);
        EvalReport report = evaluate_pair_list(pairs);
        table.push_back({def.name, report.overall});
    }
    return table;
}

inline void write_ablation_table(const std::vector<AblationStep>& table, std::ostream& out) {
    out << "step accuracy gain\n";
    for (size_t i = 0; i < table.size(); ++i) {
        double gain = i == 0 ? 0.0 : table[i].accuracy - table[i - 1].accuracy;
        char line[160];
        std::snprintf(line, sizeof line, "%-36s %.4f %+.2f%%\n", table[i].name.c_str(),
                      table[i].accuracy, i == 0 ? 0.0 : gain * 100.0);
        out << line;
    }
}

}  // namespace gal

#endif
