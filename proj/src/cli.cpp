#include "eca/cli.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "eca/algorithms.hpp"
#include "eca/config.hpp"
#include "eca/error.hpp"
#include "eca/eval.hpp"
#include "eca/io.hpp"
#include "eca/moments.hpp"
#include "eca/pipeline.hpp"
#include "eca/synthetic.hpp"

namespace eca {

namespace {

Json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return Json{{"eca", kVersion}, {"eigen", eigen.str()}, {"format", 1}};
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void write_json(const Json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) fail(ErrorCode::Io, "failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    fail(ErrorCode::MalformedLine, "'" + path + "' is not valid JSON: " + e.what());
  }
}

SvdMethod svd_from_flag(const std::string& s) {
  return s == "power" || s == "power_iteration" ? SvdMethod::PowerIteration : SvdMethod::Dense;
}

TripleEstimator estimator_from_flag(const std::string& s) {
  return s == "first-three-tokens" ? TripleEstimator::FirstThreeTokens
                                   : TripleEstimator::AllDistinctTriples;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string model = "lda";
  Eigen::Index d = 50, k = 5;
  std::size_t n = 10000;
  std::int64_t doc_len = 3;
  std::vector<double> alpha;
  double concentration = 0.1;
  double noise = 0.1;
  double flip = 0.1;
  std::vector<std::string> factors;
  double bernoulli_p = 0.25;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "out";
};

void run_generate(const GenerateArgs& a, std::ostream& out) {
  RunConfig cfg;
  cfg.command = "generate";
  cfg.output = a.out;
  cfg.seed = a.seed;
  cfg.validate_paths();
  GeneratorSpec& g = cfg.generator;
  g.model = parse_generator_model(a.model);
  g.d = a.d;
  g.k = a.k;
  g.n = a.n;
  g.doc_len = a.doc_len;
  g.alpha = a.alpha;
  g.topic_concentration = a.concentration;
  g.noise_sigma = a.noise;
  g.flip_probability = a.flip;
  g.seed = a.seed;
  for (const auto& f : a.factors) g.factors.push_back({parse_factor_kind(f), a.bernoulli_p});
  if (!g.factors.empty() && static_cast<Eigen::Index>(g.factors.size()) != g.k)
    fail(ErrorCode::DimensionMismatch, "--factor must be given k times or not at all");

  const TopicMatrix truth = g.topics();
  g.o = truth.entries();
  Json meta{{"config", to_json(cfg)}, {"versions", versions()}};

  if (g.model == GeneratorModel::Lda) {
    const Corpus c = generate_lda_corpus(truth, g.dirichlet(), g.n, g.doc_len,
                                         derive_seed(a.seed, 1), a.threads);
    write_uci_bagofwords(c, a.out + ".docword.txt");
    std::vector<std::string> vocab;
    for (Eigen::Index i = 0; i < g.d; ++i) vocab.push_back("w" + std::to_string(i));
    write_vocab(vocab, a.out + ".vocab.txt");
    write_topics_tsv(truth.entries(), a.out + ".truth.tsv");
    meta["alpha"] = to_std(g.dirichlet().alpha());
  } else {
    FactorSamples s;
    Matrix truth_out = truth.entries();
    if (g.model == GeneratorModel::FactorialHmm) {
      std::vector<Transition2> t(static_cast<std::size_t>(g.k),
                                 Transition2{{{1.0 - g.flip_probability, g.flip_probability},
                                              {g.flip_probability, 1.0 - g.flip_probability}}});
      const FactorialHmmEmbedding hmm = embed_factorial_hmm(t, truth.entries());
      s = hmm.sample(g.n, g.noise_sigma, derive_seed(a.seed, 1));
      truth_out = hmm.o3.entries();
    } else if (g.model == GeneratorModel::MultiView) {
      s = generate_multiview(truth, truth, truth, g.factor_list(), g.n, g.noise_sigma,
                             derive_seed(a.seed, 1));
    } else {
      const NoiseModel noise =
          g.model == GeneratorModel::Poisson ? NoiseModel::Poisson : NoiseModel::Gaussian;
      std::vector<FactorDistribution> factors = g.factor_list();
      s = generate_independent_factor_samples(truth, factors, noise, g.noise_sigma, g.n, 3,
                                              derive_seed(a.seed, 1));
    }
    for (std::size_t v = 0; v < s.views.size(); ++v)
      write_topics_tsv(s.views[v].transpose(), a.out + ".view" + std::to_string(v + 1) + ".tsv");
    write_topics_tsv(truth_out, a.out + ".truth.tsv");
  }
  write_json(meta, a.out + ".meta.json");
  out << Json{{"written", a.out}, {"model", a.model}}.dump() << '\n';
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string vocab;
  std::string config;
  FitOptions fit;
  std::string svd = "dense";
  std::string estimator = "all-distinct-triples";
  std::size_t top_words = 0;
  std::string out = "fit";
};

void run_fit(FitArgs a, const CLI::App& cmd, std::ostream& out) {
  RunConfig cfg;
  if (!a.config.empty()) {
    Json j = read_json(a.config);
    cfg = run_config_from_json(j.contains("config") ? j.at("config") : j);
  }
  // Flags given on the command line override a loaded configuration.
  auto given = [&](const char* name) { return cmd.count(name) > 0 || a.config.empty(); };
  cfg.command = "fit";
  if (given("input")) cfg.inputs = {a.input};
  if (given("--vocab")) cfg.vocab = a.vocab.empty() ? std::nullopt : std::optional(a.vocab);
  if (given("--out")) cfg.output = a.out;
  FitOptions& f = cfg.fit;
  if (given("--k")) f.k = a.fit.k;
  if (given("--alpha0")) f.alpha0 = a.fit.alpha0;
  if (given("--seed")) f.seed = a.fit.seed;
  if (given("--svd")) f.svd_method = svd_from_flag(a.svd);
  if (given("--estimator")) f.estimator_mode = estimator_from_flag(a.estimator);
  if (given("--theta-retries")) f.theta_retries = a.fit.theta_retries;
  if (given("--clip")) f.clip_normalize = a.fit.clip_normalize;
  if (given("--clip-fraction")) f.clip_fraction = a.fit.clip_fraction;
  if (given("--max-iter")) f.max_iter = a.fit.max_iter;
  if (given("--conv-tol")) f.conv_tol = a.fit.conv_tol;
  if (given("--threads")) f.threads = a.fit.threads;
  cfg.seed = f.seed;
  if (cfg.inputs.empty()) fail(ErrorCode::InvalidOptions, "fit needs a docword file");
  cfg.validate_paths();
  f.validate();

  const BagOfWords bow = read_uci_bagofwords(cfg.inputs.front(), cfg.vocab);
  const RecoveryResult r = fit_lda(bow.corpus, f);
  write_topics_tsv(r.columns_matrix(), cfg.output + ".topics.tsv");
  Json meta{{"config", to_json(cfg)}, {"result", to_json(r)}, {"versions", versions()},
            {"corpus", {{"documents", bow.corpus.n_docs()}, {"d", bow.corpus.d}, {"nnz", bow.nnz}}}};

  if (a.top_words > 0) {
    if (bow.vocab.empty()) fail(ErrorCode::InvalidOptions, "--top-words needs --vocab");
    const auto top = top_entries(r.columns_matrix(), a.top_words);
    std::ofstream tw(cfg.output + ".top_words.txt");
    Json topics = Json::array();
    for (std::size_t j = 0; j < top.size(); ++j) {
      tw << "topic " << j << ':';
      Json words = Json::array();
      for (std::size_t w : top[j]) {
        const double prob = r.columns[j](static_cast<Eigen::Index>(w));
        tw << ' ' << bow.vocab[w];
        words.push_back({{"word", bow.vocab[w]}, {"p", prob}});
      }
      tw << '\n';
      topics.push_back(words);
    }
    if (!tw) fail(ErrorCode::Io, "failed writing top words");
    meta["top_words"] = topics;
  }
  write_json(meta, cfg.output + ".meta.json");
  out << Json{{"status", meta["result"]["status"]}, {"columns", r.columns.size()},
              {"topics", cfg.output + ".topics.tsv"}}
             .dump()
      << '\n';
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string truth;
  std::string estimate;
  std::string estimate_meta;
  std::string truth_meta;
  bool allow_sign = false;
  std::string out;
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  RunConfig cfg;
  cfg.inputs = {a.truth, a.estimate};
  if (!a.estimate_meta.empty()) cfg.inputs.push_back(a.estimate_meta);
  if (!a.truth_meta.empty()) cfg.inputs.push_back(a.truth_meta);
  cfg.output = a.out;
  cfg.validate_paths();
  const Matrix truth = read_topics_tsv(a.truth);
  const Matrix est = read_topics_tsv(a.estimate);
  if (est.size() > 0 && est.rows() != truth.rows())
    fail(ErrorCode::DimensionMismatch, "truth and estimate disagree on d");
  std::vector<Vector> cols;
  for (Eigen::Index j = 0; j < est.cols(); ++j) cols.push_back(est.col(j));
  EvalReport rep = align_columns(truth, cols, a.allow_sign);
  if (!a.estimate_meta.empty() && !a.truth_meta.empty()) {
    const Json em = read_json(a.estimate_meta);
    const Json tm = read_json(a.truth_meta);
    if (em.contains("result") && !em["result"]["alpha_hat"].is_null() && tm.contains("alpha")) {
      const auto ah = em["result"]["alpha_hat"].get<std::vector<double>>();
      const auto at = tm["alpha"].get<std::vector<double>>();
      rep.alpha_error = aligned_alpha_error(
          Eigen::Map<const Vector>(at.data(), static_cast<Eigen::Index>(at.size())),
          Eigen::Map<const Vector>(ah.data(), static_cast<Eigen::Index>(ah.size())), rep.permutation);
    }
  }
  const Json j = to_json(rep);
  if (!a.out.empty()) write_json(j, a.out);
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  Eigen::Index d = 50, k = 5;
  std::vector<double> alpha;
  std::int64_t doc_len = 3;
  std::vector<std::size_t> ns = {1000, 10000, 100000};
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  int threads = 1;
  bool clip = true;
  std::string out;
};

void run_sweep(const SweepArgs& a, std::ostream& out) {
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.output = a.out;
  cfg.seed = a.seed;
  cfg.validate_paths();
  cfg.generator.d = a.d;
  cfg.generator.k = a.k;
  cfg.generator.alpha = a.alpha.empty() ? std::vector<double>(static_cast<std::size_t>(a.k), 0.1) : a.alpha;
  cfg.generator.doc_len = a.doc_len;
  cfg.generator.seed = a.seed;
  cfg.sweep.ns = a.ns;
  cfg.sweep.trials = a.trials;
  const TopicMatrix truth = cfg.generator.topics();
  const DirichletParams p = cfg.generator.dirichlet();
  cfg.fit.k = a.k;
  cfg.fit.alpha0 = p.alpha0();
  cfg.fit.clip_normalize = a.clip;
  cfg.fit.clip_fraction = 0.0;
  const FitOptions base = cfg.fit;
  TrialFunction trial = [&](std::size_t n, std::size_t, std::uint64_t s) {
    const Corpus c = generate_lda_corpus(truth, p, n, a.doc_len, derive_seed(s, 0));
    FitOptions o = base;
    o.seed = derive_seed(s, 1);
    try {
      return aligned_max_error(align_columns(truth, fit_lda(c, o).columns, false));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const SweepResult res = sample_complexity_sweep(a.ns, a.trials, trial, a.seed, a.threads);
  Json j{{"config", to_json(cfg)}, {"sweep", to_json(res)}, {"versions", versions()}};
  if (!a.out.empty()) write_json(j, a.out);
  out << to_json(res).dump() << '\n';
}

// ---------------------------------------------------------------------------

struct MomentsArgs {
  std::string input;
  std::string estimator = "all-distinct-triples";
  std::size_t probes = 3;
  std::uint64_t seed = 0;
  std::string out;
};

void run_moments(const MomentsArgs& a, std::ostream& out) {
  RunConfig cfg;
  cfg.inputs = {a.input};
  cfg.output = a.out;
  cfg.validate_paths();
  const BagOfWords bow = read_uci_bagofwords(a.input);
  MomentOptions mo;
  mo.estimator = estimator_from_flag(a.estimator);
  mo.seed = a.seed;
  const MomentSet m = finalize(accumulate(bow.corpus, mo));
  Json probes = Json::array();
  Rng rng(a.seed);
  for (std::size_t i = 0; i < a.probes; ++i) {
    const Vector eta = random_unit_vector(m.d(), rng);
    probes.push_back({{"eta", to_std(eta)}, {"triples", matrix_to_json(m.triples_contract(eta))}});
  }
  Json j{{"d", m.d()},
         {"documents_used", m.n_samples},
         {"estimator", a.estimator},
         {"mean", to_std(m.mean)},
         {"pairs", matrix_to_json(m.pairs)},
         {"triples_probes", probes},
         {"versions", versions()}};
  if (!a.out.empty()) write_json(j, a.out);
  else out << j.dump() << '\n';
}

}  // namespace

int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-based recovery of latent factor and topic models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Draw a synthetic data set with known ground truth");
  gen->add_option("--model", ga.model, "lda, independent-gaussian-hypercube, independent-poisson, multi-view, factorial-hmm")
      ->capture_default_str();
  gen->add_option("--d", ga.d, "Observation dimension")->capture_default_str();
  gen->add_option("--k", ga.k, "Number of latent factors")->capture_default_str();
  gen->add_option("--docs,--n", ga.n, "Documents or samples")->capture_default_str();
  gen->add_option("--doc-len", ga.doc_len, "Tokens per document")->capture_default_str();
  gen->add_option("--alpha", ga.alpha, "Dirichlet parameters (default all ones)");
  gen->add_option("--concentration", ga.concentration, "Dirichlet concentration of random topics")
      ->capture_default_str();
  gen->add_option("--noise", ga.noise, "Gaussian noise level")->capture_default_str();
  gen->add_option("--flip", ga.flip, "Factorial HMM flip probability")->capture_default_str();
  gen->add_option("--factor", ga.factors, "Factor law per column (bernoulli, rademacher, ...)");
  gen->add_option("--bernoulli-p", ga.bernoulli_p, "Success probability for bernoulli factors")
      ->capture_default_str();
  gen->add_option("--seed", ga.seed)->capture_default_str();
  gen->add_option("--threads", ga.threads)->capture_default_str();
  gen->add_option("--out", ga.out, "Output path prefix")->capture_default_str();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Recover topics from a UCI bag-of-words file");
  fit->add_option("input", fa.input, "docword file");
  fit->add_option("--vocab", fa.vocab, "Vocabulary file, one token per line");
  fit->add_option("--config", fa.config, "Rerun from a saved configuration or metadata record");
  fit->add_option("--k", fa.fit.k, "Number of topics")->capture_default_str();
  fit->add_option("--alpha0", fa.fit.alpha0, "Dirichlet concentration sum")->capture_default_str();
  fit->add_option("--seed", fa.fit.seed)->capture_default_str();
  fit->add_option("--svd", fa.svd, "dense or power")->check(CLI::IsMember({"dense", "power", "power_iteration"}));
  fit->add_option("--estimator", fa.estimator)
      ->check(CLI::IsMember({"all-distinct-triples", "first-three-tokens"}));
  fit->add_option("--theta-retries", fa.fit.theta_retries)->capture_default_str();
  fit->add_flag("--clip", fa.fit.clip_normalize, "Clip small entries and normalize columns");
  fit->add_option("--clip-fraction", fa.fit.clip_fraction)->capture_default_str();
  fit->add_option("--max-iter", fa.fit.max_iter)->capture_default_str();
  fit->add_option("--conv-tol", fa.fit.conv_tol)->capture_default_str();
  fit->add_option("--threads", fa.fit.threads)->capture_default_str();
  fit->add_option("--top-words", fa.top_words, "Write the N most probable words per topic");
  fit->add_option("--out", fa.out, "Output path prefix")->capture_default_str();

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Align an estimate with the ground truth");
  ev->add_option("--truth", ea.truth, "True topics TSV")->required();
  ev->add_option("--estimate", ea.estimate, "Estimated topics TSV")->required();
  ev->add_option("--estimate-meta", ea.estimate_meta, "Fit metadata (for alpha)");
  ev->add_option("--truth-meta", ea.truth_meta, "Generator metadata (for alpha)");
  ev->add_flag("--allow-sign", ea.allow_sign, "Resolve column signs");
  ev->add_option("--out", ea.out, "Report path");

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Sample-complexity experiment on synthetic LDA");
  sw->add_option("--d", sa.d)->capture_default_str();
  sw->add_option("--k", sa.k)->capture_default_str();
  sw->add_option("--alpha", sa.alpha, "Dirichlet parameters (default 0.1 each)");
  sw->add_option("--doc-len", sa.doc_len)->capture_default_str();
  sw->add_option("--ns", sa.ns, "Corpus sizes")->capture_default_str();
  sw->add_option("--trials", sa.trials)->capture_default_str();
  sw->add_option("--seed", sa.seed)->capture_default_str();
  sw->add_option("--threads", sa.threads)->capture_default_str();
  sw->add_option("--out", sa.out, "Report path");

  MomentsArgs ma;
  auto* mo = app.add_subcommand("moments", "Empirical moments of a corpus, for inspection");
  mo->add_option("input", ma.input, "docword file")->required();
  mo->add_option("--estimator", ma.estimator)
      ->check(CLI::IsMember({"all-distinct-triples", "first-three-tokens"}));
  mo->add_option("--probes", ma.probes, "Random contraction directions")->capture_default_str();
  mo->add_option("--seed", ma.seed)->capture_default_str();
  mo->add_option("--out", ma.out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen) run_generate(ga, out);
    else if (*fit) run_fit(fa, *fit, out);
    else if (*ev) run_eval(ea, out);
    else if (*sw) run_sweep(sa, out);
    else if (*mo) run_moments(ma, out);
    return 0;
  } catch (const Error& e) {
    err << Json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace eca
