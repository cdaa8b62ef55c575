#include "glat/config.hpp"

#include "glat/error.hpp"
#include "glat/textfmt.hpp"

#include <fstream>
#include <sstream>

namespace glat {

namespace {

int to_int(const std::string& key, const std::string& value) {
    try {
        return static_cast<int>(parse_int(value, "config key '" + key + "'"));
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return parse_double(value, "config key '" + key + "'");
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    const long long v = [&] {
        try {
            return parse_int(value, "config key '" + key + "'");
        } catch (const FormatError& e) {
            throw ConfigError(e.what());
        }
    }();
    if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative, got " + value);
    return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "' must be true/false, got '" + value + "'");
}

}  // namespace

void apply_setting(Settings& s, const std::string& key, const std::string& value) {
    if (key == "provider") s.provider = value;
    else if (key == "provider_seed") s.provider_seed = to_u64(key, value);
    else if (key == "provider_out_dim") s.provider_out_dim = to_int(key, value);
    else if (key == "fm_seed") s.fm_seed = to_u64(key, value);
    else if (key == "d_k") s.d_k = to_int(key, value);
    else if (key == "d_v") s.d_v = to_int(key, value);
    else if (key == "m") s.m = to_int(key, value);
    else if (key == "t") s.t = to_int(key, value);
    else if (key == "score_mode") s.score_mode = value;
    else if (key == "selection") s.selection = value;
    else if (key == "sigma") s.sigma = value;
    else if (key == "filter_order") s.filter_order = to_int(key, value);
    else if (key == "lambda") s.lambda = to_double(key, value);
    else if (key == "graph_bias") s.graph_bias = value;
    else if (key == "heads") s.heads = to_int(key, value);
    else if (key == "attention") s.attention = value;
    else if (key == "aggregation") s.aggregation = value;
    else if (key == "lr") s.lr = to_double(key, value);
    else if (key == "weight_decay") s.weight_decay = to_double(key, value);
    else if (key == "batch_size") s.batch_size = to_int(key, value);
    else if (key == "max_epochs") s.max_epochs = to_int(key, value);
    else if (key == "patience") s.patience = to_int(key, value);
    else if (key == "alpha") s.alpha = to_double(key, value);
    else if (key == "seed") s.seed = to_u64(key, value);
    else if (key == "fd_check") s.fd_check = to_bool(key, value);
    else if (key == "kappa_weighting") s.kappa_weighting = value;
    else if (key == "val_fraction") s.val_fraction = to_double(key, value);
    else if (key == "folds") s.folds = to_int(key, value);
    else if (key == "d") s.d = to_int(key, value);
    else if (key == "grid_w") s.grid_w = to_int(key, value);
    else if (key == "grid_h") s.grid_h = to_int(key, value);
    else if (key == "n_slides") s.n_slides = to_int(key, value);
    else if (key == "lesion_count_min") s.lesion_count_min = to_int(key, value);
    else if (key == "lesion_count_max") s.lesion_count_max = to_int(key, value);
    else if (key == "lesion_radius_min") s.lesion_radius_min = to_int(key, value);
    else if (key == "lesion_radius_max") s.lesion_radius_max = to_int(key, value);
    else if (key == "class_signal_scale") s.class_signal_scale = to_double(key, value);
    else if (key == "noise_scale") s.noise_scale = to_double(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

Settings parse_settings_text(const std::string& text) {
    Settings s;
    std::istringstream is(text);
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string_view content = line;
        const std::size_t hash = content.find('#');
        if (hash != std::string_view::npos) content = content.substr(0, hash);
        content = trim(content);
        if (content.empty()) continue;
        const std::size_t eq = content.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                              std::string(content) + "'");
        const std::string key(trim(content.substr(0, eq)));
        const std::string value(trim(content.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        apply_setting(s, key, value);
    }
    return s;
}

Settings load_settings(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_settings_text(buf.str());
}

int resolve_dk(const Settings& s, int embed_dim) {
    if (s.d_k > 0) return s.d_k;
    return embed_dim >= 256 ? 64 : 16;
}

int resolve_dv(const Settings& s, int embed_dim) {
    if (s.d_v > 0) return s.d_v;
    return embed_dim >= 256 ? 64 : 16;
}

}  // namespace glat
