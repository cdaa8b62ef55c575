#pragma once

#include "glat/config.hpp"
#include "glat/irm.hpp"
#include "glat/provider.hpp"
#include "glat/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace glat {

/// Slide tables plus labels, aligned and sorted by slide id.
struct Dataset {
    std::vector<EmbeddingTable> tables;
    std::vector<int> labels;
    int d = 0;
};

/// Reads `labels.csv` and one `<slide_id>.emb` per labeled slide.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes a dataset directory in the same layout.
void save_dataset(const std::filesystem::path& dir, const std::vector<EmbeddingTable>& tables,
                  const std::vector<int>& labels);

/// Bags plus graphs ready for training: provider features, patch selection
/// (iterative or the random ablation), then one Laplacian bundle per bag.
struct PreparedData {
    std::vector<WSIBag> bags;
    std::vector<LaplacianBundle> bundles;
    std::vector<int> labels;
    int feature_dim = 0;
};

PreparedData prepare_bags(const Dataset& data, const Settings& settings);

/// Model skeleton for the settings and embedding dimension; rejects any
/// head count other than 1.
ModelParams build_model(const Settings& settings, int feature_dim);

FrozenProjections scorer_projections(const Settings& settings, int feature_dim);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochStats>& history);

struct PredictionRow {
    std::string slide_id;
    Vector probs;  // kNumClasses
    int pred = 0;
    int label = 0;
};

void write_predictions_csv(const std::filesystem::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

/// Entry point used by the executable: parses arguments, dispatches the
/// subcommand, maps failures to distinct exit codes (I/O 2, config 3,
/// dimension 4, format 5, anything else 1).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glat
