// debie: post-hoc debiasing of word vector spaces and the matching
// evaluation suite. Subcommands: augment, debias, eval, transfer, project.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "debie/bias_spec.hpp"
#include "debie/debias_linear.hpp"
#include "debie/debias_net.hpp"
#include "debie/embedding.hpp"
#include "debie/eval.hpp"
#include "debie/pipeline.hpp"
#include "debie/report.hpp"
#include "debie/serialize.hpp"
#include "debie/xling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace debie;

namespace {

constexpr const char* kVersion = "0.1.0";

// Outputs created so far; removed if the command fails partway.
std::vector<fs::path> g_outputs;

void track_output(const fs::path& p) { g_outputs.push_back(p); }

void remove_partial_outputs() {
    for (const auto& p : g_outputs) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

fs::path resolve_input(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* data_dir = std::getenv("DEBIE_DATA_DIR")) {
        fs::path candidate = fs::path(data_dir) / path;
        if (fs::exists(candidate)) return candidate;
    }
    throw std::runtime_error("input file not found: " + path);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    track_output(p);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

// Every output gets a .prov.json sidecar: tool version, echoed config and
// input checksums. No timestamps, so identical runs produce identical bytes.
void write_provenance(const fs::path& output, const std::string& command,
                      const std::map<std::string, std::string>& config,
                      const std::vector<fs::path>& inputs) {
    json j;
    j["tool"] = "debie";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    json ins = json::array();
    for (const auto& in : inputs)
        ins.push_back({{"path", in.string()}, {"sha256", sha256_file_hex(in.string())}});
    j["inputs"] = ins;
    write_file(output.string() + ".prov.json", j.dump(2) + "\n");
}

VectorFormat parse_format(const std::string& name) {
    if (name == "auto") return VectorFormat::auto_detect;
    if (name == "word2vec") return VectorFormat::word2vec_text;
    if (name == "glove") return VectorFormat::glove_text;
    throw std::runtime_error("unknown vector format: " + name);
}

EmbeddingSpace load_space_checked(const std::string& path, const std::string& format,
                                  bool normalize_rows) {
    LoadReport rep;
    auto space = EmbeddingSpace::load(resolve_input(path), parse_format(format), &rep);
    std::cerr << "loaded " << path << ": " << space.size() << " words, dim " << space.dim() << ", "
              << rep.lines << " lines, " << rep.duplicates << " duplicates dropped\n";
    if (normalize_rows) return normalize(space);
    return space;
}

struct OovPolicy {
    bool error = false; // default: skip with counts
};

void enforce_oov(const OovPolicy& policy, std::size_t oov, const std::string& where) {
    if (oov > 0) {
        std::cerr << where << ": " << oov << " out-of-vocabulary terms skipped\n";
        if (policy.error) throw std::runtime_error(where + ": out-of-vocabulary terms with --oov error");
    }
}

struct DbnFlags {
    std::size_t width = 300, depth = 5, epochs = 50, batch = 64;
    double lambda = 0.2, lr = 1e-3;
};

// Fits a composition chain right-to-left, refitting each stage on the
// intermediate space produced so far. Returns the pipeline in notation
// order together with the final space.
struct ChainFit {
    DebiasPipeline pipeline;
    EmbeddingSpace result;
    std::optional<TrainResult> dbn_curve;
};

ChainFit fit_chain(const std::vector<std::string>& kinds, const EmbeddingSpace& input,
                   const SpecFile& spec_file, const DbnFlags& dbn, std::uint64_t seed,
                   const OovPolicy& oov, bool renormalize_output) {
    const BiasSpec& fit_spec = spec_file.augmented ? spec_file.aug.train : spec_file.plain;

    std::vector<Stage> applied_order;
    std::optional<TrainResult> dbn_curve;
    EmbeddingSpace current = input;
    for (auto it = kinds.rbegin(); it != kinds.rend(); ++it) {
        EmbeddingSpace fit_space = normalize(current);
        if (*it == "gbdd") {
            auto deb = fit_gbdd(fit_space, fit_spec);
            enforce_oov(oov, deb.fitted_on.t1_missing + deb.fitted_on.t2_missing, "fit gbdd");
            if (deb.degenerate)
                std::cerr << "fit gbdd: top singular pair is near-tied, direction ill-defined\n";
            applied_order.emplace_back(std::move(deb));
        } else if (*it == "bam") {
            auto deb = fit_bam(fit_space, fit_spec);
            enforce_oov(oov, deb.fitted_on.t1_missing + deb.fitted_on.t2_missing, "fit bam");
            applied_order.emplace_back(std::move(deb));
        } else { // dbn needs a single-attribute explicit spec
            BiasSpec net_spec = fit_spec;
            if (net_spec.form == AttributeForm::paired) net_spec = merge_attributes(net_spec);
            if (net_spec.form != AttributeForm::single)
                throw std::runtime_error("dbn requires an explicit spec (attribute terms)");
            TripleBuildInfo info;
            auto triples = build_triples(net_spec, fit_space, &info);
            enforce_oov(oov, info.t1_missing + info.t2_missing + info.a_missing, "dbn triples");
            NetConfig cfg;
            cfg.dim = fit_space.dim();
            cfg.hidden_width = dbn.width;
            cfg.hidden_layers = dbn.depth;
            cfg.lambda = dbn.lambda;
            cfg.learning_rate = dbn.lr;
            cfg.epochs = dbn.epochs;
            cfg.batch_size = dbn.batch;
            cfg.seed = seed;
            DebiasNetwork net(cfg);
            dbn_curve = train(net, triples, fit_space);
            std::cerr << "dbn trained on " << triples.size() << " triples, mean J "
                      << dbn_curve->curve.front().mean_j << " -> " << dbn_curve->curve.back().mean_j
                      << "\n";
            applied_order.emplace_back(std::move(net));
        }
        const bool is_last_applied = std::next(it) == kinds.rend();
        current = apply_pipeline(compose({applied_order.back()}), current,
                                 is_last_applied && renormalize_output);
    }
    ChainFit out{DebiasPipeline{}, std::move(current), std::move(dbn_curve)};
    out.pipeline.stages.assign(std::make_move_iterator(applied_order.rbegin()),
                               std::make_move_iterator(applied_order.rend()));
    return out;
}

std::map<std::string, std::string> base_config(std::initializer_list<std::pair<std::string, std::string>> kv) {
    std::map<std::string, std::string> m;
    for (auto& [k, v] : kv) m.emplace(k, v);
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"debie: debiasing toolkit for word vector spaces"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string current_command = "debie";
    try {
        // ---------------- augment ----------------
        auto* cmd_augment = app.add_subcommand("augment", "extend a bias spec with nearest neighbors");
        struct {
            std::string spec, sim_space, out, format = "auto";
            std::size_t k = 4;
            bool lowercase = false;
        } aug;
        cmd_augment->add_option("--spec", aug.spec, "bias spec JSON")->required();
        cmd_augment->add_option("--sim-space", aug.sim_space, "similarity-specialized vector file")->required();
        cmd_augment->add_option("--out", aug.out, "output augmented spec JSON")->required();
        cmd_augment->add_option("--k", aug.k, "neighbors per term");
        cmd_augment->add_option("--format", aug.format, "vector file format (auto|word2vec|glove)");
        cmd_augment->add_flag("--lowercase-fallback", aug.lowercase, "fall back to lowercased lookups");

        // ---------------- debias ----------------
        auto* cmd_debias = app.add_subcommand("debias", "fit and apply a debiasing chain");
        struct {
            std::string space, spec, chain = "gbdd", out_space, format = "auto", out_format = "auto";
            std::string save_transforms, loss_curve;
            std::string oov = "skip";
            DbnFlags dbn;
            std::uint64_t seed = 42;
            bool no_normalize = false, renormalize = false;
        } deb;
        cmd_debias->add_option("--space", deb.space, "input vector file")->required();
        cmd_debias->add_option("--spec", deb.spec, "bias spec JSON (plain or augmented)")->required();
        cmd_debias->add_option("--chain", deb.chain, "composition, rightmost applied first (gbdd,bam,dbn)");
        cmd_debias->add_option("--out-space", deb.out_space, "output vector file")->required();
        cmd_debias->add_option("--format", deb.format, "input format (auto|word2vec|glove)");
        cmd_debias->add_option("--out-format", deb.out_format, "output format (defaults to input)");
        cmd_debias->add_option("--save-transforms", deb.save_transforms, "prefix for per-stage transform files");
        cmd_debias->add_option("--loss-curve", deb.loss_curve, "CSV path for the dbn loss curve");
        cmd_debias->add_option("--oov", deb.oov, "skip|error for out-of-vocabulary spec terms");
        cmd_debias->add_option("--seed", deb.seed, "seed for dbn training");
        cmd_debias->add_option("--dbn-width", deb.dbn.width, "hidden width");
        cmd_debias->add_option("--dbn-depth", deb.dbn.depth, "hidden layers");
        cmd_debias->add_option("--dbn-lambda", deb.dbn.lambda, "regularization weight");
        cmd_debias->add_option("--dbn-lr", deb.dbn.lr, "learning rate");
        cmd_debias->add_option("--dbn-epochs", deb.dbn.epochs, "training epochs");
        cmd_debias->add_option("--dbn-batch", deb.dbn.batch, "batch size");
        cmd_debias->add_flag("--no-normalize", deb.no_normalize, "skip input row normalization");
        cmd_debias->add_flag("--renormalize", deb.renormalize, "unit-normalize output rows");

        // ---------------- eval ----------------
        auto* cmd_eval = app.add_subcommand("eval", "bias and quality metrics");
        struct {
            std::string space, spec, metrics = "weat,ect,bat", out, format = "auto";
            std::string simlex, wordsim, oov = "skip";
            std::size_t runs = 20, mc_samples = 100000;
            std::uint64_t seed = 42;
            bool normalize_space = false, lowercase = false;
        } ev;
        cmd_eval->add_option("--space", ev.space, "vector file")->required();
        cmd_eval->add_option("--spec", ev.spec, "bias spec JSON (plain or augmented)")->required();
        cmd_eval->add_option("--metrics", ev.metrics, "comma list: weat,ect,bat,km,svm,sl,ws");
        cmd_eval->add_option("--out", ev.out, "output prefix (.json/.tsv)")->required();
        cmd_eval->add_option("--format", ev.format, "vector format");
        cmd_eval->add_option("--simlex", ev.simlex, "SimLex-style benchmark file (for sl)");
        cmd_eval->add_option("--wordsim", ev.wordsim, "WordSim-style benchmark file (for ws)");
        cmd_eval->add_option("--runs", ev.runs, "implicit-test runs");
        cmd_eval->add_option("--seed", ev.seed, "base seed (runs use seed..seed+runs-1)");
        cmd_eval->add_option("--mc-samples", ev.mc_samples, "Monte Carlo permutation samples");
        cmd_eval->add_option("--oov", ev.oov, "skip|error");
        cmd_eval->add_flag("--normalize", ev.normalize_space, "unit-normalize rows before evaluating");
        cmd_eval->add_flag("--lowercase-fallback", ev.lowercase, "fall back to lowercased lookups");

        // ---------------- transfer ----------------
        auto* cmd_transfer = app.add_subcommand("transfer", "project a target space and debias it");
        struct {
            std::string src_space, tgt_space, dict, chain, spec, out_space;
            std::string src_format = "auto", tgt_format = "auto", out_format = "auto";
            std::vector<std::string> load_transforms;
            std::string save_projection, oov = "skip";
            DbnFlags dbn;
            std::uint64_t seed = 42;
            bool renormalize = false;
        } tr;
        cmd_transfer->add_option("--src-space", tr.src_space, "source-language vectors")->required();
        cmd_transfer->add_option("--tgt-space", tr.tgt_space, "target-language vectors")->required();
        cmd_transfer->add_option("--dict", tr.dict, "translation dictionary TSV")->required();
        cmd_transfer->add_option("--chain", tr.chain, "chain to fit on the source space");
        cmd_transfer->add_option("--spec", tr.spec, "source-language spec (for --chain)");
        cmd_transfer->add_option("--load-transform", tr.load_transforms,
                                 "fitted transform file, repeatable, notation order");
        cmd_transfer->add_option("--out-space", tr.out_space, "output vector file")->required();
        cmd_transfer->add_option("--src-format", tr.src_format, "source format");
        cmd_transfer->add_option("--tgt-format", tr.tgt_format, "target format");
        cmd_transfer->add_option("--out-format", tr.out_format, "output format");
        cmd_transfer->add_option("--save-projection", tr.save_projection, "write the fitted projection");
        cmd_transfer->add_option("--oov", tr.oov, "skip|error");
        cmd_transfer->add_option("--seed", tr.seed, "seed for dbn training");
        cmd_transfer->add_flag("--renormalize", tr.renormalize, "unit-normalize output rows");

        // ---------------- project ----------------
        auto* cmd_project = app.add_subcommand("project", "2d coordinates of spec terms");
        struct {
            std::string space, spec, out, format = "auto";
            bool lowercase = false;
        } pj;
        cmd_project->add_option("--space", pj.space, "vector file")->required();
        cmd_project->add_option("--spec", pj.spec, "bias spec JSON")->required();
        cmd_project->add_option("--out", pj.out, "output CSV")->required();
        cmd_project->add_option("--format", pj.format, "vector format");
        cmd_project->add_flag("--lowercase-fallback", pj.lowercase, "fall back to lowercased lookups");

        CLI11_PARSE(app, argc, argv);

        // ================= augment =================
        if (cmd_augment->parsed()) {
            current_command = "augment";
            auto spec_path = resolve_input(aug.spec);
            resolve_input(aug.sim_space);
            auto spec = parse_spec(slurp(spec_path));
            auto sim = normalize(load_space_checked(aug.sim_space, aug.format, false));
            AugmentCoverage cov;
            auto augmented = augment(spec, sim, aug.k, &cov);
            auto report_set = [](const char* name, const AugmentCoverage::SetCoverage& c) {
                if (c.total > 0)
                    std::cerr << "augment " << name << ": " << c.total - c.missing << "/" << c.total
                              << " terms found, " << c.kept << " augmentation terms kept\n";
            };
            report_set("t1", cov.t1);
            report_set("t2", cov.t2);
            report_set("a", cov.a);
            report_set("a1", cov.a1);
            report_set("a2", cov.a2);
            write_file(aug.out, write_augmented(augmented));
            write_provenance(aug.out, "augment",
                             base_config({{"spec", aug.spec},
                                          {"sim_space", aug.sim_space},
                                          {"k", std::to_string(aug.k)},
                                          {"lowercase_fallback", aug.lowercase ? "true" : "false"}}),
                             {spec_path, resolve_input(aug.sim_space)});
            return 0;
        }

        // ================= debias =================
        if (cmd_debias->parsed()) {
            current_command = "debias";
            OovPolicy oov{deb.oov == "error"};
            if (deb.oov != "skip" && deb.oov != "error") throw std::runtime_error("--oov must be skip|error");
            auto kinds = parse_chain(deb.chain);
            resolve_input(deb.space);
            auto spec_file = load_spec_file(slurp(resolve_input(deb.spec)));
            auto space = load_space_checked(deb.space, deb.format, !deb.no_normalize);

            auto fitted = fit_chain(kinds, space, spec_file, deb.dbn, deb.seed, oov, deb.renormalize);
            if (!deb.loss_curve.empty()) {
                if (!fitted.dbn_curve) throw std::runtime_error("--loss-curve given but the chain has no dbn stage");
                write_file(deb.loss_curve, loss_curve_csv(*fitted.dbn_curve));
            }

            const VectorFormat out_fmt = deb.out_format == "auto"
                                             ? VectorFormat::word2vec_text
                                             : parse_format(deb.out_format);
            track_output(deb.out_space);
            fitted.result.save(deb.out_space, out_fmt);

            if (!deb.save_transforms.empty()) {
                for (std::size_t i = 0; i < fitted.pipeline.stages.size(); ++i) {
                    const Stage& s = fitted.pipeline.stages[i];
                    const std::string path = deb.save_transforms + ".stage" + std::to_string(i) + "." +
                                             stage_kind(s) + ".json";
                    if (const auto* g = std::get_if<GbddDebiaser>(&s))
                        write_file(path, write_transform(*g));
                    else if (const auto* b = std::get_if<BamDebiaser>(&s))
                        write_file(path, write_transform(*b));
                    else
                        write_file(path, write_checkpoint(std::get<DebiasNetwork>(s)));
                }
            }
            write_provenance(deb.out_space, "debias",
                             base_config({{"space", deb.space},
                                          {"spec", deb.spec},
                                          {"chain", deb.chain},
                                          {"seed", std::to_string(deb.seed)},
                                          {"normalize", deb.no_normalize ? "false" : "true"},
                                          {"renormalize", deb.renormalize ? "true" : "false"},
                                          {"oov", deb.oov}}),
                             {resolve_input(deb.space), resolve_input(deb.spec)});
            return 0;
        }

        // ================= eval =================
        if (cmd_eval->parsed()) {
            current_command = "eval";
            OovPolicy oov{ev.oov == "error"};
            TermLookup lookup{ev.lowercase};
            // check every referenced path before any heavy work
            resolve_input(ev.space);
            if (!ev.simlex.empty()) resolve_input(ev.simlex);
            if (!ev.wordsim.empty()) resolve_input(ev.wordsim);
            auto spec_file = load_spec_file(slurp(resolve_input(ev.spec)));
            const BiasSpec& test_spec = spec_file.augmented ? spec_file.aug.test : spec_file.plain;
            auto space = load_space_checked(ev.space, ev.format, ev.normalize_space);

            EvalReport report;
            report.space_id = ev.space;
            report.spec_name = test_spec.name;
            report.config["metrics"] = ev.metrics;
            report.config["runs"] = std::to_string(ev.runs);
            report.config["seed"] = std::to_string(ev.seed);
            report.config["mc_samples"] = std::to_string(ev.mc_samples);
            report.config["normalize"] = ev.normalize_space ? "true" : "false";
            report.config["lowercase_fallback"] = ev.lowercase ? "true" : "false";
            report.config["sigma"] = "population";
            report.config["permutation_test"] = "one-sided strict";
            report.config["bat_ties"] = "fail";

            std::vector<std::string> metric_list;
            {
                std::string tok;
                std::istringstream ss(ev.metrics);
                while (std::getline(ss, tok, ','))
                    if (std::find(metric_list.begin(), metric_list.end(), tok) == metric_list.end())
                        metric_list.push_back(tok); // each metric reported once
            }
            std::vector<fs::path> inputs = {resolve_input(ev.space), resolve_input(ev.spec)};
            std::optional<ImplicitResult> implicit_cache;
            for (const auto& metric : metric_list) {
                if (metric == "weat") {
                    WeatOptions wopt;
                    wopt.samples = ev.mc_samples;
                    wopt.seed = ev.seed;
                    wopt.lookup = lookup;
                    auto r = weat(space, test_spec, wopt);
                    enforce_oov(oov, r.oov, "weat");
                    MetricEntry e{"weat", r.effect_size, "effect_size", r.p_value, r.n_targets, r.oov, ""};
                    e.notes = r.exact ? "exact permutations: " + std::to_string(r.permutations)
                                      : "monte carlo samples: " + std::to_string(r.permutations);
                    if (r.odd_union) e.notes += "; odd target union, floor/ceil partition sizes";
                    report.entries.push_back(std::move(e));
                    MetricEntry stat{"weat_statistic", r.statistic, "raw", std::nullopt, r.n_targets, r.oov, ""};
                    report.entries.push_back(std::move(stat));
                } else if (metric == "ect") {
                    BiasSpec single = test_spec.form == AttributeForm::paired ? merge_attributes(test_spec)
                                                                              : test_spec;
                    auto r = ect(space, single, lookup);
                    enforce_oov(oov, r.oov, "ect");
                    report.entries.push_back(
                        {"ect", r.value, "x100", std::nullopt, r.attributes_used, r.oov,
                         r.value ? "" : "undefined (constant similarity ranks)"});
                } else if (metric == "bat") {
                    auto r = bat(space, test_spec, lookup);
                    enforce_oov(oov, r.oov, "bat");
                    report.entries.push_back({"bat", r.value, "x100", std::nullopt, r.comparisons, r.oov, ""});
                } else if (metric == "km" || metric == "svm") {
                    if (!spec_file.augmented)
                        throw std::runtime_error(metric + " needs an augmented spec file (run augment first)");
                    if (!implicit_cache) {
                        ImplicitOptions iopt;
                        iopt.seeds = make_seed_list(ev.seed, ev.runs);
                        iopt.lookup = lookup;
                        implicit_cache = implicit_tests(space, spec_file.aug, iopt);
                        if (!implicit_cache->svm_converged)
                            std::cerr << "svm: optimizer hit the pass cap before the KKT tolerance\n";
                        enforce_oov(oov, implicit_cache->test_oov + implicit_cache->train_oov, metric);
                    }
                    const auto& r = *implicit_cache;
                    report.entries.push_back({metric, metric == "km" ? r.km : r.svm, "x100", std::nullopt,
                                              r.test_terms, r.test_oov + r.train_oov,
                                              "runs: " + std::to_string(r.runs)});
                } else if (metric == "sl" || metric == "ws") {
                    const std::string& path = metric == "sl" ? ev.simlex : ev.wordsim;
                    if (path.empty())
                        throw std::runtime_error(metric + " requires --" +
                                                 (metric == "sl" ? std::string("simlex") : std::string("wordsim")));
                    auto bench = load_benchmark(resolve_input(path));
                    inputs.push_back(resolve_input(path));
                    auto r = semantic_quality(space, bench, lookup);
                    report.entries.push_back({metric, r.value, "x100", std::nullopt, r.covered,
                                              r.total - r.covered,
                                              "coverage " + std::to_string(r.covered) + "/" +
                                                  std::to_string(r.total)});
                } else {
                    throw std::runtime_error("unknown metric: " + metric);
                }
            }
            write_file(ev.out + ".json", report_json(report));
            write_file(ev.out + ".tsv", report_tsv(report));
            write_provenance(ev.out + ".tsv", "eval", report.config, inputs);
            return 0;
        }

        // ================= transfer =================
        if (cmd_transfer->parsed()) {
            current_command = "transfer";
            OovPolicy oov{tr.oov == "error"};
            resolve_input(tr.src_space);
            resolve_input(tr.tgt_space);
            resolve_input(tr.dict);
            if (!tr.spec.empty()) resolve_input(tr.spec);
            for (const auto& tf : tr.load_transforms) resolve_input(tf);
            auto src = load_space_checked(tr.src_space, tr.src_format, true);
            auto tgt = load_space_checked(tr.tgt_space, tr.tgt_format, true);
            auto dict = load_dictionary(resolve_input(tr.dict));
            auto fit = fit_projection(src, tgt, dict);
            std::cerr << "projection fitted on " << fit.pairs_used << " pairs (" << fit.pairs_dropped
                      << " dropped)\n";
            if (fit.low_coverage) std::cerr << "warning: fewer than 100 usable dictionary pairs\n";

            DebiasPipeline pipeline;
            if (!tr.chain.empty()) {
                if (tr.spec.empty()) throw std::runtime_error("--chain needs --spec (fitted on the source space)");
                auto spec_file = load_spec_file(slurp(resolve_input(tr.spec)));
                auto fitted = fit_chain(parse_chain(tr.chain), src, spec_file, tr.dbn, tr.seed, oov, false);
                pipeline = std::move(fitted.pipeline);
            }
            for (const auto& tf : tr.load_transforms) {
                const std::string text = slurp(resolve_input(tf));
                const std::string kind = json::parse(text).value("kind", "");
                if (kind == "dbn")
                    pipeline.stages.emplace_back(read_checkpoint(text));
                else
                    std::visit([&](auto&& d) { pipeline.stages.emplace_back(std::move(d)); },
                               read_transform(text));
            }

            auto out_space = transfer_debias(tgt, fit.w, pipeline, tr.renormalize);
            const VectorFormat out_fmt = tr.out_format == "auto" ? VectorFormat::word2vec_text
                                                                 : parse_format(tr.out_format);
            track_output(tr.out_space);
            out_space.save(tr.out_space, out_fmt);
            if (!tr.save_projection.empty()) {
                json pj_json;
                pj_json["kind"] = "projection";
                pj_json["dim"] = fit.w.rows();
                pj_json["pairs_used"] = fit.pairs_used;
                pj_json["payload_hex"] =
                    doubles_to_hex(std::span<const double>(fit.w.data(), fit.w.rows() * fit.w.cols()));
                write_file(tr.save_projection, pj_json.dump(2) + "\n");
            }
            write_provenance(tr.out_space, "transfer",
                             base_config({{"src_space", tr.src_space},
                                          {"tgt_space", tr.tgt_space},
                                          {"dict", tr.dict},
                                          {"chain", tr.chain},
                                          {"spec", tr.spec},
                                          {"seed", std::to_string(tr.seed)},
                                          {"renormalize", tr.renormalize ? "true" : "false"}}),
                             {resolve_input(tr.src_space), resolve_input(tr.tgt_space),
                              resolve_input(tr.dict)});
            return 0;
        }

        // ================= project =================
        if (cmd_project->parsed()) {
            current_command = "project";
            auto spec_file = load_spec_file(slurp(resolve_input(pj.spec)));
            const BiasSpec& spec = spec_file.augmented ? spec_file.aug.test : spec_file.plain;
            auto space = load_space_checked(pj.space, pj.format, false);
            auto csv = topology_export_csv(space, spec, TermLookup{pj.lowercase});
            write_file(pj.out, csv);
            write_provenance(pj.out, "project",
                             base_config({{"space", pj.space},
                                          {"spec", pj.spec},
                                          {"lowercase_fallback", pj.lowercase ? "true" : "false"}}),
                             {resolve_input(pj.space), resolve_input(pj.spec)});
            return 0;
        }
    } catch (const std::exception& e) {
        remove_partial_outputs();
        json err;
        err["error"] = e.what();
        err["command"] = current_command;
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
