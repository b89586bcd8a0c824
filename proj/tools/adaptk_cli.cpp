#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptk/adaptk.hpp"
#include "adaptk/report.hpp"

namespace fs = std::filesystem;
using namespace adaptk;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kInput = 3;       // parse or io failure
constexpr int kViolations = 4;  // validate found problems
constexpr int kDomain = 5;      // inputs parse but the operation cannot proceed

struct Globals {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

Vocabulary load_vocab(const std::string& p) {
  return io::load(p, [](std::istream& in, const std::string& s) {
    return io::read_vocabulary(in, s);
  });
}

ScoreTable load_scores(const std::string& p, const Vocabulary& v) {
  return io::load(p, [&](std::istream& in, const std::string& s) {
    return io::read_scores(in, v, s);
  });
}

GroundTruth load_truth(const std::string& p, const Vocabulary& v) {
  return io::load(p, [&](std::istream& in, const std::string& s) {
    return io::read_truth(in, v, s);
  });
}

ThresholdModel load_thresholds(const std::string& p, const Vocabulary& v,
                               bool intercept) {
  return io::load(p, [&](std::istream& in, const std::string& s) {
    return io::read_thresholds(in, v, intercept, s);
  });
}

CooccurrenceStats load_cooccurrence(const std::string& p) {
  return io::load(p, [](std::istream& in, const std::string& s) {
    return io::read_cooccurrence(in, s);
  });
}

void save_json(const std::string& path, const nlohmann::json& j) {
  io::save(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// Writes to `path`, or stdout for "-".
template <typename Writer>
void emit(const std::string& path, Writer&& w) {
  if (path == "-")
    w(std::cout);
  else
    io::save(path, w);
}

SimilarityMatrix similarity_from(const std::string& path, const Vocabulary& v) {
  auto sim = similarity_matrix(load_cooccurrence(path), v);
  if (!sim.missing().empty())
    std::cerr << "warning: " << sim.missing().size()
              << " tag(s) have no co-occurrence statistics\n";
  return sim;
}

// Selections for every image of `table`, in table order; images absent from
// the file get an empty selection.
SelectionResult align_selections(const SelectionResult& sel, const ScoreTable& table) {
  std::map<std::string, const SelectionRow*, std::less<>> by_image;
  for (const auto& r : sel.rows) {
    if (!table.find_image(r.image))
      throw Error(ErrorKind::not_found,
                  "selected image '" + r.image + "' has no score row");
    by_image[r.image] = &r;
  }
  SelectionResult out;
  for (const auto& img : table.images()) {
    auto it = by_image.find(img);
    out.rows.push_back(it == by_image.end() ? SelectionRow{img, {}} : *it->second);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptk: adaptive tag selection with seen/novel vocabularies"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::function<int()> action;

  // validate ----------------------------------------------------------------
  struct {
    std::string vocab, scores, truth, report;
    bool training = false;
  } va;
  auto* validate = app.add_subcommand("validate", "check vocabulary, scores and labels");
  validate->add_option("--vocab", va.vocab)->required()->check(CLI::ExistingFile);
  validate->add_option("--scores", va.scores)->required()->check(CLI::ExistingFile);
  validate->add_option("--truth", va.truth)->required()->check(CLI::ExistingFile);
  validate->add_flag("--training", va.training, "labels must cover seen tags only");
  validate->add_option("--report", va.report, "write violations as JSON");
  validate->callback([&] {
    action = [&] {
      const auto v = load_vocab(va.vocab);
      const auto t = load_scores(va.scores, v);
      const auto truth = load_truth(va.truth, v);
      const auto report = validate_inputs(v, t, truth, {.training = va.training});
      for (const auto& x : report) std::cerr << to_string(x.kind) << ": " << x.message << '\n';
      if (!va.report.empty()) save_json(va.report, to_json(report));
      std::cout << (report.empty() ? "ok" : "violations: " + std::to_string(report.size()))
                << '\n';
      return report.empty() ? kOk : kViolations;
    };
  });

  // learn-thresholds --------------------------------------------------------
  struct {
    std::string vocab, scores, truth, out = "-";
    bool intercept = false;
  } lt;
  auto* learn = app.add_subcommand("learn-thresholds",
                                   "learn per-tag cutoffs on labelled seen tags");
  learn->add_option("--vocab", lt.vocab)->required()->check(CLI::ExistingFile);
  learn->add_option("--scores", lt.scores)->required()->check(CLI::ExistingFile);
  learn->add_option("--truth", lt.truth)->required()->check(CLI::ExistingFile);
  learn->add_option("--out", lt.out, "thresholds file ('-' for stdout)");
  learn->add_flag("--lsq-intercept", lt.intercept, "fit lsq with an intercept");
  learn->callback([&] {
    action = [&] {
      const auto v = load_vocab(lt.vocab);
      const auto t = load_scores(lt.scores, v);
      const auto truth = load_truth(lt.truth, v);
      const auto m = learn_all_thresholds(t, truth, v, {.lsq_intercept = lt.intercept});
      if (!m.untrainable.empty())
        std::cerr << "warning: " << m.untrainable.size()
                  << " seen tag(s) lack positive or negative labels\n";
      emit(lt.out, [&](std::ostream& o) { io::write_thresholds(o, m, v); });
      return kOk;
    };
  });

  // select / compare share adaptive settings --------------------------------
  AdaptiveConfig adaptive;
  auto add_adaptive = [&](CLI::App* cmd) {
    cmd->add_option("--fallback-k", adaptive.fallback_k, "tags when no seen tag passes")
        ->capture_default_str();
    cmd->add_flag("--refine", adaptive.refine, "reweight novel scores by similarity");
    cmd->add_option("--w", adaptive.w, "refinement weight in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_flag("--report-refined", adaptive.report_refined,
                  "report refined rather than raw scores");
  };

  struct {
    std::string vocab, scores, thresholds, cooccurrence, strategy = "adaptive", out = "-";
    std::size_t k = 5;
    bool intercept = false;
  } se;
  auto* select = app.add_subcommand("select", "choose tags per image");
  select->add_option("--vocab", se.vocab)->required()->check(CLI::ExistingFile);
  select->add_option("--scores", se.scores)->required()->check(CLI::ExistingFile);
  select->add_option("--strategy", se.strategy)
      ->check(CLI::IsMember({"top_k", "mu_sigma", "lsq", "hybrid_tau_musigma",
                             "hybrid_tau_lsq", "adaptive"}))
      ->capture_default_str();
  select->add_option("--k", se.k, "tags per image for top_k")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  select->add_option("--thresholds", se.thresholds)->check(CLI::ExistingFile);
  select->add_option("--cooccurrence", se.cooccurrence)->check(CLI::ExistingFile);
  select->add_flag("--lsq-intercept", se.intercept);
  select->add_option("--out", se.out, "selections file ('-' for stdout)");
  add_adaptive(select);
  select->callback([&] {
    action = [&] {
      const auto v = load_vocab(se.vocab);
      const auto t = load_scores(se.scores, v);
      const StrategySpec spec{parse_strategy(se.strategy), se.k, adaptive};
      std::optional<ThresholdModel> m;
      if (spec.needs_model()) {
        if (se.thresholds.empty())
          throw CLI::RequiredError("--thresholds (strategy " + se.strategy + ")");
        m = load_thresholds(se.thresholds, v, se.intercept);
      }
      std::optional<SimilarityMatrix> sim;
      if (adaptive.refine) {
        if (se.cooccurrence.empty()) throw CLI::RequiredError("--cooccurrence (--refine)");
        sim = similarity_from(se.cooccurrence, v);
      }
      const auto sel = run_strategy(spec, t, v, m ? &*m : nullptr, sim ? &*sim : nullptr, g.jobs);
      emit(se.out, [&](std::ostream& o) { io::write_selections(o, sel, v); });
      return kOk;
    };
  });

  // refine --------------------------------------------------------------------
  struct {
    std::string vocab, scores, thresholds, cooccurrence, out = "-";
    double w = 0.5;
  } re;
  auto* refine = app.add_subcommand(
      "refine", "rewrite novel scores using similarity to thresholded seen tags");
  refine->add_option("--vocab", re.vocab)->required()->check(CLI::ExistingFile);
  refine->add_option("--scores", re.scores)->required()->check(CLI::ExistingFile);
  refine->add_option("--thresholds", re.thresholds)->required()->check(CLI::ExistingFile);
  refine->add_option("--cooccurrence", re.cooccurrence)->required()->check(CLI::ExistingFile);
  refine->add_option("--w", re.w)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  refine->add_option("--out", re.out, "score table ('-' for stdout)");
  refine->callback([&] {
    action = [&] {
      const auto v = load_vocab(re.vocab);
      const auto t = load_scores(re.scores, v);
      const auto m = load_thresholds(re.thresholds, v, false);
      const auto sim = similarity_from(re.cooccurrence, v);
      const auto pool = m.trainable_seen(v);
      std::vector<double> values(t.values());
      std::vector<char> kept(t.num_images(), 0);
      parallel_for(t.num_images(), g.jobs, [&](std::size_t i) {
        const auto a = select_by_threshold(t, i, m.tau, pool);
        if (a.empty()) {  // nothing to propagate from
          kept[i] = 1;
          return;
        }
        const auto row = refine_novel_scores(t, i, a, v, m, sim, re.w);
        std::copy(row.begin(), row.end(), values.begin() + static_cast<long>(i * v.size()));
      });
      const auto untouched = std::count(kept.begin(), kept.end(), 1);
      if (untouched)
        std::cerr << "note: " << untouched
                  << " image(s) have no seen tag above threshold; scores kept\n";
      const ScoreTable out(t.images(), v, std::move(values));
      emit(re.out, [&](std::ostream& o) { io::write_scores(o, out); });
      return kOk;
    };
  });

  // evaluate -----------------------------------------------------------------
  struct {
    std::string vocab, scores, truth, selections, report;
    bool partial = false, per_image = false;
  } ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "MF and MAP of a selection");
  evaluate_cmd->add_option("--vocab", ev.vocab)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--scores", ev.scores, "scores used for the MAP ranking")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--truth", ev.truth)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--selections", ev.selections)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_flag("--partial", ev.partial,
                         "score partially labelled images on their labelled tags");
  evaluate_cmd->add_option("--report", ev.report, "write the report as JSON");
  evaluate_cmd->add_flag("--per-image", ev.per_image, "include per-image rows in JSON");
  evaluate_cmd->callback([&] {
    action = [&] {
      const auto v = load_vocab(ev.vocab);
      const auto t = load_scores(ev.scores, v);
      const auto truth = load_truth(ev.truth, v);
      const auto raw = io::load(ev.selections, [&](std::istream& in, const std::string& s) {
        return io::read_selections(in, v, s);
      });
      const auto sel = align_selections(raw, t);
      std::vector<std::vector<std::size_t>> rankings(t.num_images());
      parallel_for(t.num_images(), g.jobs,
                   [&](std::size_t i) { rankings[i] = rank_tags(t, i); });
      const auto r = evaluate(truth, v, sel, rankings,
                              {.require_full_coverage = !ev.partial});
      print_table(std::cout, r);
      if (!ev.report.empty()) save_json(ev.report, to_json(r, ev.per_image));
      return kOk;
    };
  });

  // fuse ---------------------------------------------------------------------
  struct {
    std::string vocab, truth, out = "-", model, objective = "mf", selection = "threshold";
    std::vector<std::string> scores;
    std::vector<double> weights;
    double grid_step = 0.05;
    std::size_t max_sweeps = 20, k = 5;
  } fu;
  auto* fuse_cmd = app.add_subcommand("fuse", "late fusion of several score tables");
  fuse_cmd->add_option("--vocab", fu.vocab)->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--scores", fu.scores, "score tables to fuse")
      ->required()
      ->check(CLI::ExistingFile);
  fuse_cmd->add_option("--weights", fu.weights, "fixed weights (skip learning)")
      ->delimiter(',');
  fuse_cmd->add_option("--truth", fu.truth, "training labels for weight learning")
      ->check(CLI::ExistingFile);
  fuse_cmd->add_option("--objective", fu.objective)
      ->check(CLI::IsMember({"mf", "map"}))
      ->capture_default_str();
  fuse_cmd->add_option("--selection", fu.selection, "selection used by the MF objective")
      ->check(CLI::IsMember({"threshold", "top_k"}))
      ->capture_default_str();
  fuse_cmd->add_option("--k", fu.k)->check(CLI::PositiveNumber)->capture_default_str();
  fuse_cmd->add_option("--grid-step", fu.grid_step)->capture_default_str();
  fuse_cmd->add_option("--max-sweeps", fu.max_sweeps)->capture_default_str();
  fuse_cmd->add_option("--model", fu.model, "write learned weights as JSON");
  fuse_cmd->add_option("--out", fu.out, "fused score table ('-' for stdout)");
  fuse_cmd->callback([&] {
    action = [&] {
      const auto v = load_vocab(fu.vocab);
      std::vector<ScoreTable> tables;
      for (const auto& p : fu.scores) tables.push_back(load_scores(p, v));
      std::vector<double> w = fu.weights;
      if (w.empty()) {
        if (fu.truth.empty()) throw CLI::RequiredError("--truth (or --weights)");
        const auto truth = load_truth(fu.truth, v);
        const Objective obj = fu.objective == "mf" ? Objective::mf : Objective::map;
        TrainingSelection sel;
        if (fu.selection == "top_k") sel = {TrainingSelection::Kind::top_k, fu.k};
        CoordinateAscentOptions opts;
        opts.grid_step = fu.grid_step;
        opts.max_sweeps = fu.max_sweeps;
        opts.jobs = g.jobs;
        const auto model = learn_weights(tables, truth, v, obj, sel, opts);
        w = model.weights;
        std::cerr << "objective " << model.history.front() << " -> "
                  << model.final_objective() << '\n';
        if (!fu.model.empty()) save_json(fu.model, to_json(model));
      }
      const auto fused = fuse(tables, w);
      emit(fu.out, [&](std::ostream& o) { io::write_scores(o, fused); });
      return kOk;
    };
  });

  // compare ------------------------------------------------------------------
  struct {
    std::string vocab, scores, truth, thresholds, cooccurrence, report;
    bool partial = false, intercept = false;
  } co;
  auto* compare_cmd = app.add_subcommand("compare", "run the six selection strategies");
  compare_cmd->add_option("--vocab", co.vocab)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--scores", co.scores)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--truth", co.truth)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--thresholds", co.thresholds)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--cooccurrence", co.cooccurrence)->check(CLI::ExistingFile);
  compare_cmd->add_flag("--partial", co.partial);
  compare_cmd->add_flag("--lsq-intercept", co.intercept);
  compare_cmd->add_option("--report", co.report, "write the comparison as JSON");
  add_adaptive(compare_cmd);
  compare_cmd->callback([&] {
    action = [&] {
      const auto v = load_vocab(co.vocab);
      const auto t = load_scores(co.scores, v);
      const auto truth = load_truth(co.truth, v);
      const auto m = load_thresholds(co.thresholds, v, co.intercept);
      std::optional<SimilarityMatrix> sim;
      if (adaptive.refine) {
        if (co.cooccurrence.empty()) throw CLI::RequiredError("--cooccurrence (--refine)");
        sim = similarity_from(co.cooccurrence, v);
      }
      const auto specs = standard_strategies(adaptive);
      const auto c = compare(specs, t, truth, v, &m, sim ? &*sim : nullptr,
                             {.require_full_coverage = !co.partial}, g.jobs);
      print_table(std::cout, c);
      if (!co.report.empty()) save_json(co.report, to_json(c));
      return kOk;
    };
  });

  // gen-synth ----------------------------------------------------------------
  SyntheticSpec spec;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-synth", "write a seeded synthetic benchmark");
  gen->add_option("--out-dir", out_dir)->required();
  gen->add_option("--images", spec.n_images, "evaluation images")->capture_default_str();
  gen->add_option("--train", spec.n_train, "training images")->capture_default_str();
  gen->add_option("--seen", spec.n_seen)->capture_default_str();
  gen->add_option("--novel", spec.n_novel)->capture_default_str();
  gen->add_option("--min-relevant", spec.min_relevant)->capture_default_str();
  gen->add_option("--max-relevant", spec.max_relevant)->capture_default_str();
  gen->add_option("--signal", spec.signal)->capture_default_str();
  gen->add_option("--noise", spec.noise_std)->capture_default_str();
  gen->add_option("--collection", spec.n_collection, "items behind co-occurrence counts")
      ->capture_default_str();
  gen->callback([&] {
    action = [&] {
      const auto d = generate_synthetic(spec, g.seed);
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw Error(ErrorKind::io, "cannot create '" + out_dir + "': " + ec.message());
      const fs::path dir(out_dir);
      io::save((dir / "vocab.tsv").string(), [&](std::ostream& o) { io::write_vocabulary(o, d.vocab); });
      io::save((dir / "train_scores.tsv").string(), [&](std::ostream& o) { io::write_scores(o, d.train_scores); });
      io::save((dir / "train_truth.tsv").string(), [&](std::ostream& o) { io::write_truth(o, d.train_truth); });
      io::save((dir / "test_scores.tsv").string(), [&](std::ostream& o) { io::write_scores(o, d.test_scores); });
      io::save((dir / "test_truth.tsv").string(), [&](std::ostream& o) { io::write_truth(o, d.test_truth); });
      io::save((dir / "cooccurrence.tsv").string(),
               [&](std::ostream& o) { io::write_cooccurrence(o, d.cooccurrence); });
      return kOk;
    };
  });

  // positives ----------------------------------------------------------------
  struct {
    std::string tag, mode = "search", search, clicks, user_tags, cooccurrence, out = "-";
    std::size_t n = 1000;
    std::vector<double> engine_weights{1.0, 0.5, 0.5};
  } po;
  auto* positives = app.add_subcommand(
      "positives", "rank weakly labelled images as training positives for a tag");
  positives->add_option("--tag", po.tag)->required();
  positives->add_option("--mode", po.mode)
      ->check(CLI::IsMember({"search", "click", "semantic"}))
      ->capture_default_str();
  positives->add_option("--search", po.search, "image, query, rank, engine")
      ->check(CLI::ExistingFile);
  positives->add_option("--clicks", po.clicks, "image, query, clicks")
      ->check(CLI::ExistingFile);
  positives->add_option("--user-tags", po.user_tags, "image, tag")->check(CLI::ExistingFile);
  positives->add_option("--cooccurrence", po.cooccurrence)->check(CLI::ExistingFile);
  positives->add_option("--engine-weights", po.engine_weights, "google,yahoo,bing")
      ->delimiter(',')
      ->expected(3);
  positives->add_option("--n", po.n)->check(CLI::PositiveNumber)->capture_default_str();
  positives->add_option("--out", po.out, "image and relevance ('-' for stdout)");
  positives->callback([&] {
    action = [&] {
      std::vector<ScoredImage> scored;
      if (po.mode == "search") {
        if (po.search.empty()) throw CLI::RequiredError("--search");
        const EngineWeights w{po.engine_weights[0], po.engine_weights[1],
                              po.engine_weights[2]};
        for (const auto& r : io::load(po.search, [](std::istream& in, const std::string& s) {
               return io::read_search_records(in, s);
             }))
          scored.push_back({r.image, search_relevance(r, po.tag, w)});
      } else if (po.mode == "click") {
        if (po.clicks.empty()) throw CLI::RequiredError("--clicks");
        std::map<std::string, double, std::less<>> total;
        for (const auto& c : io::load(po.clicks, [](std::istream& in, const std::string& s) {
               return io::read_click_records(in, s);
             }))
          total[c.image] += click_relevance(c, po.tag);
        for (const auto& [img, x] : total) scored.push_back({img, x});
      } else {
        if (po.user_tags.empty() || po.cooccurrence.empty())
          throw CLI::RequiredError("--user-tags and --cooccurrence");
        const auto stats = load_cooccurrence(po.cooccurrence);
        const std::string key = normalize_term(po.tag);
        for (const auto& img : io::load(po.user_tags, [](std::istream& in, const std::string& s) {
               return io::read_tagged_images(in, s);
             }))
          for (const auto& t : img.tags)
            if (normalize_term(t) == key) {
              scored.push_back({img.image, semantic_field(img, t, stats)});
              break;
            }
      }
      std::erase_if(scored, [](const ScoredImage& s) { return !(s.relevance > 0.0); });
      const auto top = top_positives(scored, po.n);
      if (top.short_list)
        std::cerr << "warning: only " << top.images.size() << " positive image(s) for '"
                  << po.tag << "'\n";
      emit(po.out, [&](std::ostream& o) {
        o << "# image\trelevance\n";
        for (const auto& s : top.images)
          o << s.image << '\t' << io::format_double(s.relevance) << '\n';
      });
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::parse:
      case ErrorKind::io:
        return kInput;
      default:
        return kDomain;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
