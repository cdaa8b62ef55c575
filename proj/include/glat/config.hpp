#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace glat {

/// Every configuration key with its default. Files are `key = value` lines
/// with `#` comments; unknown keys are rejected. Values of 0 for d_k / d_v
/// mean "pick by embedding dimension" (64 for d >= 256, else 16).
struct Settings {
    // feature provider and frozen scorer
    std::string provider = "passthrough";
    std::uint64_t provider_seed = 7;
    int provider_out_dim = 0;  // required > 0 for random-projection
    std::uint64_t fm_seed = 66;
    int d_k = 0;
    int d_v = 0;

    // patch selection
    int m = 32;
    int t = 4;
    std::string score_mode = "received";
    std::string selection = "irm";  // irm | random

    // graph
    std::string sigma = "median";
    int filter_order = 2;

    // attention layer
    double lambda = 0.1;
    std::string graph_bias = "laplacian";
    int heads = 1;
    std::string attention = "gla";        // gla | msa
    std::string aggregation = "convex";   // convex | mean

    // training
    double lr = 1e-4;
    double weight_decay = 1e-5;
    int batch_size = 16;
    int max_epochs = 100;
    int patience = 10;
    double alpha = 0.01;
    std::uint64_t seed = 42;
    bool fd_check = false;
    std::string kappa_weighting = "none";
    double val_fraction = 0.2;
    int folds = 5;

    // synthetic generator
    int d = 32;
    int grid_w = 16;
    int grid_h = 16;
    int n_slides = 200;
    int lesion_count_min = 0;
    int lesion_count_max = 2;
    int lesion_radius_min = 2;
    int lesion_radius_max = 4;
    double class_signal_scale = 12.0;
    double noise_scale = 0.5;
};

/// Applies one `key`, `value` pair; unknown keys and unparsable values are
/// ConfigError.
void apply_setting(Settings& s, const std::string& key, const std::string& value);

Settings parse_settings_text(const std::string& text);
Settings load_settings(const std::filesystem::path& path);

int resolve_dk(const Settings& s, int embed_dim);
int resolve_dv(const Settings& s, int embed_dim);

}  // namespace glat
