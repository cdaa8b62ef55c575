// Acceptance gates for the patch-selection + graph-attention pipeline.
// Each criterion prints exactly one PASS/FAIL line; the exit code is the
// number of failed criteria. All tolerances are pinned here as constants.

#include "glat/gradients.hpp"
#include "glat/metrics.hpp"
#include "glat/pipeline.hpp"
#include "glat/seeds.hpp"
#include "glat/synth.hpp"

#include "support/reference.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace glat;
namespace fs = std::filesystem;

namespace {

constexpr double kTolGradRelErr = 1e-4;   // criterion 1
constexpr int kGradBudgetSec = 60;        // criterion 1
constexpr double kTolEquiv = 1e-12;       // criterion 2
constexpr double kTolRowSum = 1e-9;       // criterion 3
constexpr double kEigLowerBound = -1e-8;  // criterion 3
constexpr double kTolSmooth = 1e-10;      // criterion 3
constexpr double kTolNorm = 1e-9;         // criterion 5
constexpr double kGateAcc = 0.90;         // criterion 6
constexpr double kGateKappa = 0.85;       // criterion 6
constexpr int kGateBudgetSec = 600;       // criterion 6
constexpr double kAblationMargin = 0.02;  // criterion 7
constexpr double kAblationNoise = 0.7;    // criterion 7, tuned so the full model lands near 0.9 accuracy

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct BagFixture {
    WSIBag bag;
    LaplacianBundle bundle;
};

BagFixture random_bag(int n, int d, std::uint64_t seed, double scale = 1.0) {
    SplitMix64 gen(seed);
    BagFixture f;
    f.bag.slide_id = "bag-" + std::to_string(seed);
    f.bag.label = GradeLabel{static_cast<int>(gen.below(kNumClasses))};
    f.bag.patches.d = d;
    f.bag.patches.slide_id = f.bag.slide_id;
    std::vector<PatchId> ids;
    for (int i = 0; i < n; ++i) {
        PatchRecord rec;
        rec.id = i;
        rec.x = i % 8;
        rec.y = i / 8;
        rec.embedding.resize(d);
        fill_gaussian(rec.embedding, gen, scale);
        f.bag.patches.records.push_back(std::move(rec));
        ids.push_back(i);
    }
    f.bag.selection_scores.resize(n);
    for (int i = 0; i < n; ++i) f.bag.selection_scores[i] = gen.uniform01();
    f.bundle = build_laplacian_bundle(f.bag.patches.matrix(), SigmaSpec::median_rule(), ids);
    return f;
}

ModelParams random_model(int d, int d_k, int d_v, int m_max, GraphBiasMode bias, double lambda,
                         std::uint64_t seed) {
    ModelParams p = init_model_params(d, d_k, d_v, m_max, 2, lambda, bias, AttentionKind::Gla,
                                      AggregationMode::Convex, seed);
    SplitMix64 gen(seed ^ 0xABCDEF);
    fill_gaussian(p.glat.filter.coeffs, gen, 0.3);
    p.glat.filter.coeffs[0] += 1.0;
    fill_gaussian(p.agg_logits, gen, 0.5);
    fill_gaussian(p.cls_W, gen, 0.5);
    fill_gaussian(p.cls_b, gen, 0.5);
    return p;
}

// --- criterion 1: analytic gradients vs central finite differences ---

Outcome criterion_gradients() {
    const auto t0 = Clock::now();
    const GraphBiasMode modes[] = {GraphBiasMode::Laplacian, GraphBiasMode::NegativeLaplacian,
                                   GraphBiasMode::Adjacency};
    double worst = 0.0;
    std::string worst_at;
    int instances = 0;
    std::uint64_t seed = 1000;
    for (int m : {2, 4, 8}) {
        for (int d : {4, 8}) {
            for (double alpha : {0.0, 0.01}) {
                for (int rep = 0; rep < 2; ++rep) {
                    ++seed;
                    const ModelParams params =
                        random_model(d, 4, 4, m, modes[instances % 3], 0.3, seed);
                    std::vector<WSIBag> bags;
                    std::vector<LaplacianBundle> bundles;
                    for (int b = 0; b < 2; ++b) {
                        BagFixture f = random_bag(m, d, seed * 10 + static_cast<std::uint64_t>(b));
                        bags.push_back(std::move(f.bag));
                        bundles.push_back(std::move(f.bundle));
                    }
                    const FdReport report = finite_diff_check(bags, params, alpha, bundles, 1e-5);
                    if (report.max_rel_err > worst) {
                        worst = report.max_rel_err;
                        worst_at = "m=" + std::to_string(m) + " d=" + std::to_string(d) +
                                   " alpha=" + fmt(alpha);
                    }
                    ++instances;
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = worst < kTolGradRelErr && secs < kGradBudgetSec;
    return {pass, std::to_string(instances) + " instances, max rel err " + fmt(worst, 3) + " (" +
                      worst_at + "), budget " + std::to_string(kGradBudgetSec) + "s"};
}

// --- criterion 2: zero-bias identity-filter layer equals the plain baseline ---

Outcome criterion_equivalence() {
    double worst = 0.0;
    SplitMix64 gen(2024);
    for (int i = 0; i < 100; ++i) {
        const int n = 3 + static_cast<int>(gen.below(8));
        const int d = 4 + static_cast<int>(gen.below(9));
        const int d_k = 2 + static_cast<int>(gen.below(5));
        const int d_v = 2 + static_cast<int>(gen.below(5));
        ModelParams params = init_model_params(d, d_k, d_v, n, 2, 0.0, GraphBiasMode::Laplacian,
                                               AttentionKind::Gla, AggregationMode::Convex,
                                               gen.next());
        params.glat.lambda = 0.0;
        Matrix e(n, d);
        SplitMix64 egen(gen.next());
        fill_gaussian(e, egen, 1.0);
        const LaplacianBundle bundle = build_laplacian_bundle(e, SigmaSpec::median_rule());

        const AttentionOutput a = gla_attention(e, bundle, params.glat);
        const AttentionOutput b = msa_baseline(e, params.glat);
        worst = std::max(worst, (a.attention - b.attention).cwiseAbs().maxCoeff());
        worst = std::max(worst, (a.refined - b.refined).cwiseAbs().maxCoeff());
    }
    return {worst < kTolEquiv, "100 instances, max elementwise gap " + fmt(worst, 3)};
}

// --- criterion 3: graph structure and the smoothness identity ---

Outcome criterion_laplacian() {
    double worst_asym = 0.0, worst_diag = 0.0, worst_row = 0.0, worst_eig = 0.0, worst_smooth = 0.0;
    SplitMix64 gen(3030);
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + static_cast<int>(gen.below(11));
        const int d = 4 + static_cast<int>(gen.below(5));
        Matrix e(n, d);
        SplitMix64 egen(gen.next());
        fill_gaussian(e, egen, 1.0 + gen.uniform01() * 3.0);
        const LaplacianBundle b = build_laplacian_bundle(e, SigmaSpec::median_rule());

        worst_asym = std::max(worst_asym, (b.W - b.W.transpose()).cwiseAbs().maxCoeff());
        for (Index r = 0; r < b.W.rows(); ++r)
            worst_diag = std::max(worst_diag, std::abs(b.W(r, r) - 1.0));
        for (Index r = 0; r < b.L.rows(); ++r)
            worst_row = std::max(worst_row, std::abs(b.L.row(r).sum()));
        const std::vector<double> eig = ref::jacobi_eigenvalues(b.L);
        worst_eig = std::min(worst_eig, eig.front());

        Matrix h(n, 5);
        fill_gaussian(h, egen, 1.0);
        const double sp = smoothness_penalty(h, b.W);
        const Matrix hlh = ref::matmul(ref::transpose(h), ref::matmul(b.L, h));
        double tr = 0.0;
        for (Index r = 0; r < hlh.rows(); ++r) tr += hlh(r, r);
        worst_smooth = std::max(worst_smooth, std::abs(sp - 2.0 * tr));
    }
    const bool pass = worst_asym == 0.0 && worst_diag == 0.0 && worst_row < kTolRowSum &&
                      worst_eig > kEigLowerBound && worst_smooth < kTolSmooth;
    return {pass, "100 sets: asym " + fmt(worst_asym, 3) + ", diag " + fmt(worst_diag, 3) +
                      ", row sum " + fmt(worst_row, 3) + ", min eig " + fmt(worst_eig, 3) +
                      ", smoothness gap " + fmt(worst_smooth, 3)};
}

// --- criterion 4: the selection loop vs an independent scalar re-execution ---

std::vector<PatchId> rerun_selection(const EmbeddingTable& table, const FrozenProjections& proj,
                                     int m, int t_iters, std::uint64_t shuffle_seed) {
    std::vector<PatchId> ids;
    for (const PatchRecord& r : table.records) ids.push_back(r.id);
    ref::SplitMix gen(shuffle_seed);
    ref::fisher_yates(gen, ids);

    const std::size_t base = ids.size() / static_cast<std::size_t>(t_iters);
    std::vector<PatchId> selected;
    std::size_t cursor = 0;
    for (int t = 0; t < t_iters; ++t) {
        const std::size_t take = (t == t_iters - 1) ? ids.size() - cursor : base;
        std::vector<PatchId> pool = selected;
        pool.insert(pool.end(), ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                    ids.begin() + static_cast<std::ptrdiff_t>(cursor + take));
        cursor += take;
        std::sort(pool.begin(), pool.end());

        Matrix e(static_cast<Index>(pool.size()), table.d);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto it = std::find_if(table.records.begin(), table.records.end(),
                                         [&](const PatchRecord& r) { return r.id == pool[i]; });
            e.row(static_cast<Index>(i)) = it->embedding.transpose();
        }
        const Matrix a = ref::attention(e, proj.Wq, proj.Wk);
        const Vector s = ref::received_scores(a);

        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (s[static_cast<Index>(x)] != s[static_cast<Index>(y)])
                return s[static_cast<Index>(x)] > s[static_cast<Index>(y)];
            return pool[x] < pool[y];
        });
        const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(m), pool.size());
        selected.assign(keep, 0);
        for (std::size_t i = 0; i < keep; ++i) selected[i] = pool[order[i]];
        std::sort(selected.begin(), selected.end());
    }
    return selected;
}

Outcome criterion_selection_oracle() {
    SplitMix64 gen(4040);
    int mismatches = 0;
    for (int i = 0; i < 50; ++i) {
        const int n = 8 + static_cast<int>(gen.below(57));   // 8..64
        const int t = 1 + static_cast<int>(gen.below(4));    // 1..4
        const int m = 1 + static_cast<int>(gen.below(16));   // 1..16
        const int d = 6;
        EmbeddingTable table;
        table.d = d;
        table.slide_id = "oracle";
        SplitMix64 egen(gen.next());
        for (int p = 0; p < n; ++p) {
            PatchRecord rec;
            rec.id = p;
            rec.x = p % 8;
            rec.y = p / 8;
            rec.embedding.resize(d);
            fill_gaussian(rec.embedding, egen, 1.0);
            table.records.push_back(std::move(rec));
        }
        const FrozenProjections proj = make_frozen_projections(gen.next(), d, 4, 4);
        const std::uint64_t shuffle_seed = gen.next();

        const IrmResult run = irm_run(table, proj, m, t, shuffle_seed, ScoreMode::Received);
        if (run.final_state.selected_ids != rerun_selection(table, proj, m, t, shuffle_seed))
            ++mismatches;

        const IrmResult single = irm_run(table, proj, m, 1, shuffle_seed, ScoreMode::Received);
        const AttentionMap map = attention_matrix(table, proj);
        const Vector scores = importance_scores(map, ScoreMode::Received);
        if (single.final_state.selected_ids != select_top_m(scores, map.pool_ids, m)) ++mismatches;
        if (single.final_state.selected_ids != rerun_selection(table, proj, m, 1, shuffle_seed))
            ++mismatches;
    }
    return {mismatches == 0, "50 slides, " + std::to_string(mismatches) + " mismatches"};
}

// --- criterion 5: normalization under extreme magnitudes ---

Outcome criterion_normalization() {
    double worst = 0.0;
    bool finite = true;
    SplitMix64 gen(5050);
    for (double scale : {1e6, 1e-6}) {
        for (int i = 0; i < 20; ++i) {
            const int n = 4 + static_cast<int>(gen.below(7));
            const int d = 6;
            BagFixture f = random_bag(n, d, gen.next(), scale);
            const ModelParams params =
                random_model(d, 4, 4, n, GraphBiasMode::Laplacian, 0.25, gen.next());

            const SampleForward fwd = forward_sample(f.bag, f.bundle, params);
            finite = finite && fwd.gla.attention.allFinite() && fwd.probs.allFinite();
            for (Index r = 0; r < fwd.gla.attention.rows(); ++r)
                worst = std::max(worst, std::abs(fwd.gla.attention.row(r).sum() - 1.0));
            worst = std::max(worst, std::abs(fwd.weights.sum() - 1.0));
            worst = std::max(worst, std::abs(fwd.probs.sum() - 1.0));
        }
    }
    return {worst < kTolNorm && finite,
            "40 instances at 1e+/-6, max |sum - 1| = " + fmt(worst, 3)};
}

// --- criteria 6 and 7: the synthetic learning gate and its ablations ---

SynthSpec spec_from(const Settings& s) {
    SynthSpec spec;
    spec.grid_w = s.grid_w;
    spec.grid_h = s.grid_h;
    spec.d = s.d;
    spec.n_slides = s.n_slides;
    spec.lesion_count_min = s.lesion_count_min;
    spec.lesion_count_max = s.lesion_count_max;
    spec.lesion_radius_min = s.lesion_radius_min;
    spec.lesion_radius_max = s.lesion_radius_max;
    spec.class_signal_scale = s.class_signal_scale;
    spec.noise_scale = s.noise_scale;
    spec.seed = s.seed;
    return spec;
}

Settings gate_settings() {
    Settings s;
    s.n_slides = 200;
    s.grid_w = 16;
    s.grid_h = 16;
    s.d = 32;
    s.m = 32;
    s.t = 4;
    s.batch_size = 16;
    s.lr = 1e-4;
    s.weight_decay = 1e-5;
    s.max_epochs = 100;
    s.patience = 10;
    s.val_fraction = 0.2;
    s.seed = 42;
    return s;
}

template <typename T>
std::vector<T> take(const std::vector<T>& items, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(items[i]);
    return out;
}

struct GateRun {
    MetricsReport metrics;
    int best_epoch = 0;
};

GateRun run_gate(const Settings& s) {
    const std::vector<SynthSlide> slides = synth_generate(spec_from(s));
    Dataset data;
    data.d = s.d;
    for (const SynthSlide& slide : slides) {
        data.tables.push_back(slide.table);
        data.labels.push_back(slide.label.class_index);
    }
    const PreparedData prepared = prepare_bags(data, s);
    const SplitIndices split = stratified_split(prepared.labels, s.val_fraction, s.seed);

    TrainConfig cfg;
    cfg.lr = s.lr;
    cfg.weight_decay = s.weight_decay;
    cfg.batch_size = s.batch_size;
    cfg.max_epochs = s.max_epochs;
    cfg.patience = s.patience;
    cfg.alpha = s.alpha;
    cfg.seed = s.seed;

    const std::vector<WSIBag> val_bags = take(prepared.bags, split.val);
    const std::vector<LaplacianBundle> val_bundles = take(prepared.bundles, split.val);
    const TrainResult result =
        train_loop(take(prepared.bags, split.train), take(prepared.bundles, split.train), val_bags,
                   val_bundles, build_model(s, prepared.feature_dim), cfg);

    GateRun out;
    out.best_epoch = result.best_epoch;
    const Matrix probs = predict_probs(val_bags, val_bundles, result.best_params);
    out.metrics = compute_metrics(probs, take(prepared.labels, split.val), KappaWeighting::None);
    return out;
}

Outcome criterion_learning_gate() {
    const auto t0 = Clock::now();
    const GateRun run = run_gate(gate_settings());
    const double secs = seconds_since(t0);
    const bool pass = run.metrics.acc >= kGateAcc && run.metrics.kappa >= kGateKappa &&
                      secs < kGateBudgetSec;
    return {pass, "val acc " + fmt(run.metrics.acc) + " (need >= " + fmt(kGateAcc) + "), kappa " +
                      fmt(run.metrics.kappa) + " (need >= " + fmt(kGateKappa) + "), best epoch " +
                      std::to_string(run.best_epoch)};
}

// The mean-pooling arm is expected to stay red at this training budget: the
// rank logits start at zero and Adam moves each by at most lr per step, so
// after 100 epochs of 10 batches they remain within ~0.13 of zero and the
// learned weights within ~13% of uniform. Retrained mean-pooling variants
// then agree with the full model on every validation argmax (measured across
// signal scales 8..20, noise 0.45..1.05, and several lesion layouts). The
// margin is kept strict rather than weakened to match.
Outcome criterion_ablations() {
    double base_acc = 0.0, margin_rand = 0.0, margin_mean = 0.0;
    const int n_seeds = 5;
    for (int i = 0; i < n_seeds; ++i) {
        Settings s = gate_settings();
        s.noise_scale = kAblationNoise;
        s.seed = 101 + static_cast<std::uint64_t>(i);

        const GateRun base = run_gate(s);

        Settings rand = s;
        rand.selection = "random";
        const GateRun random_sel = run_gate(rand);

        Settings mean = s;
        mean.aggregation = "mean";
        const GateRun mean_pool = run_gate(mean);

        base_acc += base.metrics.acc / n_seeds;
        margin_rand += (base.metrics.kappa - random_sel.metrics.kappa) / n_seeds;
        margin_mean += (base.metrics.kappa - mean_pool.metrics.kappa) / n_seeds;
    }
    const bool pass = margin_rand >= kAblationMargin && margin_mean >= kAblationMargin;
    return {pass, "noise " + fmt(kAblationNoise) + ", base acc " + fmt(base_acc) +
                      ", kappa drop: random selection " + fmt(margin_rand) + ", mean pooling " +
                      fmt(margin_mean) + " (need >= " + fmt(kAblationMargin) + ")"};
}

// --- criterion 8: byte-identical cross-validation reruns ---

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

Outcome criterion_determinism() {
    const fs::path root =
        fs::temp_directory_path() /
        ("glat-accept-" + std::to_string(SplitMix64(std::random_device{}()).next() % 1000000));
    fs::create_directories(root);
    const fs::path cfg = root / "cv.cfg";
    {
        std::ofstream os(cfg);
        os << "d = 16\ngrid_w = 8\ngrid_h = 8\nn_slides = 40\nm = 8\nt = 2\n"
              "batch_size = 8\nmax_epochs = 5\npatience = 3\nlr = 0.001\nfolds = 5\nseed = 77\n";
    }
    const fs::path ds = root / "ds";
    std::ostringstream out1, err1, out2, err2;
    int code = run_cli({"synth", "--config", cfg.string(), "--output-dir", ds.string()}, out1, err1);
    if (code != 0) {
        fs::remove_all(root);
        return {false, "synth failed: " + err1.str()};
    }

    const fs::path run_a = root / "a";
    const fs::path run_b = root / "b";
    std::ostringstream outa, erra, outb, errb;
    const int ca = run_cli(
        {"crossval", "--config", cfg.string(), "--input", ds.string(), "--output-dir", run_a.string()},
        outa, erra);
    const int cb = run_cli(
        {"crossval", "--config", cfg.string(), "--input", ds.string(), "--output-dir", run_b.string()},
        outb, errb);
    if (ca != 0 || cb != 0) {
        fs::remove_all(root);
        return {false, "crossval failed: " + erra.str() + errb.str()};
    }

    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(run_a)) names_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(run_b)) names_b.insert(e.path().filename().string());
    int compared = 0, different = 0;
    bool same_names = names_a == names_b;
    for (const std::string& name : names_a) {
        ++compared;
        if (slurp(run_a / name) != slurp(run_b / name)) ++different;
    }
    const bool stdout_same = outa.str() == outb.str();
    fs::remove_all(root);
    const bool pass = same_names && different == 0 && stdout_same && compared > 0;
    return {pass, std::to_string(compared) + " files compared, " + std::to_string(different) +
                      " differ" + (same_names ? "" : ", file sets differ") +
                      (stdout_same ? "" : ", stdout differs")};
}

void report(int num, const std::string& label, const std::function<Outcome()>& fn, int& failures) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << num << " (" << label << "): " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail << "  [" << fmt(seconds_since(t0), 3) << "s]" << std::endl;
    if (!o.pass) ++failures;
}

}  // namespace

int main() {
    int failures = 0;
    report(1, "gradient check", criterion_gradients, failures);
    report(2, "baseline equivalence", criterion_equivalence, failures);
    report(3, "graph structure", criterion_laplacian, failures);
    report(4, "selection oracle", criterion_selection_oracle, failures);
    report(5, "normalization", criterion_normalization, failures);
    report(6, "learning gate", criterion_learning_gate, failures);
    report(7, "ablation margins", criterion_ablations, failures);
    report(8, "crossval determinism", criterion_determinism, failures);
    std::cout << (8 - failures) << "/8 criteria passed" << std::endl;
    return failures;
}
