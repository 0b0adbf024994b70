// pcdenoise: command-line frontend.
//   gen     generate procedural clean/noisy datasets and a manifest
//   train   train the displacement regressor on a manifest
//   filter  denoise a cloud with a trained model
//   eval    compare a filtered cloud against its ground truth

#include "pcdn/cloud_io.hpp"
#include "pcdn/filter.hpp"
#include "pcdn/manifest.hpp"
#include "pcdn/metrics.hpp"
#include "pcdn/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace pcdn;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Flat key=value config: each entry becomes --key=value inserted right
// after the subcommand, ahead of the explicit flags, so the command line
// overrides the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ArgumentError("--config needs a file path");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (config_path.empty()) return args;

    std::size_t subcommand = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            subcommand = i;
            break;
        }
    }
    if (subcommand == args.size()) throw ArgumentError("--config requires a subcommand");

    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config '" + config_path + "'");
    std::vector<std::string> expanded;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            expanded.push_back("--" + line);  // bare key: a flag
        } else {
            expanded.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
        }
    }
    args.insert(args.begin() + static_cast<long>(subcommand) + 1, expanded.begin(),
                expanded.end());
    return args;
}

std::vector<double> parse_levels(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& item : split_list(csv)) {
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size()) throw ArgumentError("bad noise level '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_widths(const std::string& csv) {
    std::vector<int> out;
    for (const std::string& item : split_list(csv)) {
        out.push_back(std::stoi(item));
    }
    return out;
}

struct GenOptions {
    std::string out_dir;
    std::string shapes = "cube,sphere,wedge";
    std::string levels = "0,0.0025,0.005,0.01,0.015,0.025";
    std::string noise = "gaussian";
    int points = 100000;
    int patches_per_model = 8000;
    int patch_size = 500;
    double radius_fraction = 0.05;
    std::uint64_t seed = 0;
    bool no_meshes = false;
};

int run_gen(const GenOptions& opt) {
    ManifestBuildConfig config;
    config.levels = parse_levels(opt.levels);
    config.noise = noise_kind_from_string(opt.noise);
    config.out_dir = opt.out_dir;
    config.patches_per_model = opt.patches_per_model;
    config.patch_size = opt.patch_size;
    config.radius_fraction = opt.radius_fraction;
    config.seed = opt.seed;
    config.write_meshes = !opt.no_meshes;

    for (const std::string& name : split_list(opt.shapes)) {
        ShapeSpec spec;
        spec.kind = shape_kind_from_string(name);
        spec.point_count = opt.points;
        config.shapes.push_back(spec);
    }

    const DatasetManifest manifest = build_manifest(config);
    std::cout << "models=" << manifest.entries.size() << " shapes=" << config.shapes.size()
              << " levels=" << config.levels.size() << " points=" << opt.points << " manifest="
              << (fs::path(opt.out_dir) / "manifest.txt").string() << "\n";
    return 0;
}

struct TrainOptions {
    std::string manifest_path;
    std::string out_path = "model.pcdn";
    std::string log_path;
    std::string encoder = "64,128,256,512,1024";
    std::string decoder = "512,256,3";
    std::string loss = "proj_b";
    TrainConfig config;
    int patch_size = -1;           // -1: manifest value
    double radius_fraction = -1;   // -1: manifest value
    int patches_per_model = -1;    // -1: manifest value
};

int run_train(const TrainOptions& opt) {
    if (!fs::exists(opt.manifest_path)) {
        throw IoError("manifest '" + opt.manifest_path + "' does not exist");
    }
    const DatasetManifest manifest = load_manifest(opt.manifest_path);
    const std::string manifest_dir = fs::path(opt.manifest_path).parent_path().string();

    TrainConfig config = opt.config;
    config.arch.encoder_widths = parse_widths(opt.encoder);
    config.arch.decoder_widths = parse_widths(opt.decoder);
    config.loss = loss_kind_from_string(opt.loss);
    config.patch_size = opt.patch_size > 0 ? opt.patch_size : manifest.patch_size;
    config.radius_fraction =
        opt.radius_fraction > 0 ? opt.radius_fraction : manifest.radius_fraction;
    config.patches_per_model =
        opt.patches_per_model > 0 ? opt.patches_per_model : manifest.patches_per_model;
    validate_train_config(config);

    const TrainResult result = train(manifest, manifest_dir, config, &std::cout);
    save_params(result.params, opt.out_path);

    const std::string log_path = opt.log_path.empty() ? opt.out_path + ".log" : opt.log_path;
    std::ofstream log(log_path);
    if (!log) throw IoError("cannot write '" + log_path + "'");
    log << format_train_log(result.log);
    std::cout << "model=" << opt.out_path << " log=" << log_path << "\n";
    return 0;
}

struct FilterOptions {
    std::string model_path;
    std::string input_path;
    std::string output_path;
    FilterConfig config;
    int patch_size = -1;          // -1: model value
    double radius_fraction = -1;  // -1: model value
};

int run_filter(const FilterOptions& opt) {
    if (!fs::exists(opt.model_path)) {
        throw IoError("model '" + opt.model_path + "' does not exist");
    }
    const NetworkParams params = load_params(opt.model_path);
    const PointCloud noisy = load_cloud(opt.input_path);

    FilterConfig config = opt.config;
    config.patch_size = opt.patch_size > 0 ? opt.patch_size : params.patch_size;
    config.radius_fraction =
        opt.radius_fraction > 0 ? opt.radius_fraction : params.radius_fraction;

    FilterSummary summary;
    const PointCloud filtered = filter_cloud(params, noisy, config, &summary);
    save_cloud(filtered, opt.output_path);
    std::cout << "filtered=" << opt.output_path << " points=" << filtered.size()
              << " iterations=" << config.iterations
              << " isolated=" << summary.isolated_points
              << " identity_alignments=" << summary.identity_alignments << "\n";
    return 0;
}

struct EvalOptions {
    std::string clean_path;
    std::string filtered_path;
    std::string mesh_path;
    std::string per_point_path;
    int neighbors = 10;
};

int run_eval(const EvalOptions& opt) {
    const PointCloud clean = load_cloud(opt.clean_path);
    const PointCloud filtered = load_cloud(opt.filtered_path);

    MetricReport report;
    report.cd = chamfer(clean, filtered);
    MseResult mse = mse_metric(clean, filtered, opt.neighbors);
    report.mse = mse.value;
    if (!opt.mesh_path.empty()) {
        report.p2f = p2f(filtered, load_mesh_off(opt.mesh_path));
    }
    std::cout << format_report(report) << "\n";
    if (!opt.per_point_path.empty()) {
        save_per_point_errors(clean, mse.per_point, opt.per_point_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-preserving point cloud denoising toolkit"};
    app.require_subcommand(1);
    // repeated options keep the last value: config-file entries are expanded
    // ahead of explicit flags, so flags override the file
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    // --config itself is consumed by expand_config before parsing; this
    // binding only makes it show up in --help
    static std::string config_help_sink;
    auto with_config = [](CLI::App* cmd) {
        cmd->add_option("--config", config_help_sink, "Key=value defaults file (flags override)");
    };

    GenOptions gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "Generate a synthetic dataset and manifest");
    with_config(cmd_gen);
    cmd_gen->add_option("--out", gen.out_dir, "Output directory")->required();
    cmd_gen->add_option("--shapes", gen.shapes,
                        "Comma list of plane,cube,sphere,cylinder,wedge,torus");
    cmd_gen->add_option("--points", gen.points, "Points per clean model")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--levels", gen.levels, "Comma list of noise levels (bbox fractions)");
    cmd_gen->add_option("--noise", gen.noise, "gaussian | impulsive | uniform");
    cmd_gen->add_option("--seed", gen.seed, "Master random seed");
    cmd_gen->add_option("--patches-per-model", gen.patches_per_model, "Manifest header value")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--patch-size", gen.patch_size, "Manifest header value")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--radius-fraction", gen.radius_fraction, "Manifest header value")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_flag("--no-meshes", gen.no_meshes, "Skip writing OFF meshes");
    // Example: pcdenoise gen --shapes cube,sphere --points 5000 --levels 0.005,0.01 --out data/

    TrainOptions tr;
    CLI::App* cmd_train = app.add_subcommand("train", "Train a denoising model from a manifest");
    with_config(cmd_train);
    cmd_train->add_option("--manifest", tr.manifest_path, "Manifest file")->required();
    cmd_train->add_option("--out", tr.out_path, "Model output path");
    cmd_train->add_option("--log", tr.log_path, "Training log path (default <out>.log)");
    cmd_train->add_option("--epochs", tr.config.epochs)->check(CLI::PositiveNumber);
    cmd_train->add_option("--batch", tr.config.batch_size)->check(CLI::PositiveNumber);
    cmd_train->add_option("--lr-start", tr.config.lr_start)->check(CLI::PositiveNumber);
    cmd_train->add_option("--lr-end", tr.config.lr_end)->check(CLI::PositiveNumber);
    cmd_train->add_option("--eta", tr.config.eta, "Projection/repulsion trade-off")
        ->check(CLI::Range(0.0, 1.0));
    cmd_train->add_option("--sigma-n", tr.config.sigma_n_degrees, "Support angle (degrees)");
    cmd_train->add_option("--loss", tr.loss, "l2 | proj_a | proj_b");
    cmd_train->add_option("--patch-size", tr.patch_size, "Override manifest patch size");
    cmd_train->add_option("--radius-fraction", tr.radius_fraction,
                          "Override manifest radius fraction");
    cmd_train->add_option("--patches-per-model", tr.patches_per_model,
                          "Override manifest patches per model");
    cmd_train->add_option("--encoder", tr.encoder, "Encoder widths, comma list");
    cmd_train->add_option("--decoder", tr.decoder, "Decoder widths, comma list");
    cmd_train->add_option("--seed", tr.config.seed, "Random seed");
    cmd_train->add_flag("--deterministic,!--no-deterministic", tr.config.deterministic,
                        "Fixed reduction orders (default on)");
    // Example: pcdenoise train --manifest data/manifest.txt --epochs 2 --patch-size 64 --out model.pcdn

    FilterOptions fl;
    CLI::App* cmd_filter = app.add_subcommand("filter", "Denoise a cloud with a trained model");
    with_config(cmd_filter);
    cmd_filter->add_option("--model", fl.model_path, "Trained model file")->required();
    cmd_filter->add_option("--input", fl.input_path, "Noisy cloud")->required();
    cmd_filter->add_option("--output", fl.output_path, "Filtered cloud")->required();
    cmd_filter->add_option("--iters", fl.config.iterations, "Filtering passes")
        ->check(CLI::PositiveNumber);
    cmd_filter->add_option("--patch-size", fl.patch_size, "Override model patch size");
    cmd_filter->add_option("--radius-fraction", fl.radius_fraction,
                           "Override model radius fraction");
    cmd_filter->add_option("--seed", fl.config.seed, "Downsampling seed");
    cmd_filter->add_option("--threads", fl.config.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd_filter->add_flag("--deterministic,!--no-deterministic", fl.config.deterministic,
                         "Fixed reduction orders (default on)");
    // Example: pcdenoise filter --model model.pcdn --input noisy.xyz --output filtered.xyz

    EvalOptions ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate filtered vs clean");
    with_config(cmd_eval);
    cmd_eval->add_option("--clean", ev.clean_path, "Ground-truth cloud")->required();
    cmd_eval->add_option("--filtered", ev.filtered_path, "Filtered cloud")->required();
    cmd_eval->add_option("--p2f", ev.mesh_path, "OFF mesh for point-to-surface distance");
    cmd_eval->add_option("--per-point", ev.per_point_path, "Write per-point error file");
    cmd_eval->add_option("--neighbors", ev.neighbors, "Neighbors for the MSE metric")
        ->check(CLI::PositiveNumber);
    // Example: pcdenoise eval --clean clean.xyz --filtered filtered.xyz --p2f shape.off

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 parses reversed vectors
        app.parse(args);
        if (cmd_gen->parsed()) return run_gen(gen);
        if (cmd_train->parsed()) return run_train(tr);
        if (cmd_filter->parsed()) return run_filter(fl);
        if (cmd_eval->parsed()) return run_eval(ev);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "pcdenoise: usage: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "pcdenoise: parse: " << e.what() << "\n";
    } catch (const IoError& e) {
        std::cerr << "pcdenoise: io: " << e.what() << "\n";
    } catch (const FormatError& e) {
        std::cerr << "pcdenoise: format: " << e.what() << "\n";
    } catch (const EmptyInputError& e) {
        std::cerr << "pcdenoise: empty-input: " << e.what() << "\n";
    } catch (const DegeneratePatchError& e) {
        std::cerr << "pcdenoise: degenerate-patch: " << e.what() << "\n";
    } catch (const TrainingError& e) {
        std::cerr << "pcdenoise: training: " << e.what() << "\n";
    } catch (const StateError& e) {
        std::cerr << "pcdenoise: state: " << e.what() << "\n";
    } catch (const NumericError& e) {
        std::cerr << "pcdenoise: numeric: " << e.what() << "\n";
    } catch (const ArgumentError& e) {
        std::cerr << "pcdenoise: usage: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pcdenoise: error: " << e.what() << "\n";
    }
    return 1;
}
