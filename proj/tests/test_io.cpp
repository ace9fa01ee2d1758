#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eca/cli.hpp"
#include "eca/config.hpp"
#include "eca/error.hpp"
#include "eca/io.hpp"
#include "eca/synthetic.hpp"
#include "support.hpp"

using namespace eca;
namespace fs = std::filesystem;

namespace {

ErrorCode parse_error(const std::string& docword, const std::string* vocab = nullptr) {
  std::istringstream in(docword);
  std::istringstream v(vocab ? *vocab : "");
  try {
    parse_uci_bagofwords(in, vocab ? &v : nullptr);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidOptions;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "eca");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("minimal UCI file") {
  std::istringstream in("2\n3\n3\n1 1 2\n1 3 1\n2 2 4\n");
  std::istringstream vocab("apple\nbanana\ncherry\n");
  const BagOfWords b = parse_uci_bagofwords(in, &vocab);
  CHECK(b.corpus.d == 3);
  REQUIRE(b.corpus.n_docs() == 2);
  CHECK(b.nnz == 3);
  CHECK(b.corpus.documents[0].ids == std::vector<std::int32_t>{0, 2});
  CHECK(b.corpus.documents[0].counts == std::vector<std::int32_t>{2, 1});
  CHECK(b.corpus.documents[1].length == 4);
  CHECK(b.vocab == std::vector<std::string>{"apple", "banana", "cherry"});
}

TEST_CASE("UCI parse errors") {
  CHECK(parse_error("2\n3\n1\n1 4 1\n") == ErrorCode::IndexOutOfRange);
  CHECK(parse_error("2\n3\n1\n3 1 1\n") == ErrorCode::IndexOutOfRange);
  CHECK(parse_error("x\n3\n1\n1 1 1\n") == ErrorCode::MalformedHeader);
  CHECK(parse_error("2\n3\n") == ErrorCode::MalformedHeader);
  CHECK(parse_error("2\n3\n1\n1 1 0\n") == ErrorCode::CountNonPositive);
  CHECK(parse_error("2\n3\n1\n1 1\n") == ErrorCode::MalformedLine);
  CHECK(parse_error("2\n3\n2\n1 1 1\n") == ErrorCode::MalformedLine);
  const std::string two_words = "a\nb\n";
  CHECK(parse_error("2\n3\n1\n1 1 1\n", &two_words) == ErrorCode::VocabLengthMismatch);
  CHECK_THROWS_AS(read_uci_bagofwords("/nonexistent/docword.txt"), Error);

  std::istringstream in("2\n3\n1\n1 4 1\n");
  try {
    parse_uci_bagofwords(in);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("UCI write then read is the identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TopicMatrix o = random_topic_matrix(30, 3, 0.5, derive_seed(101, seed));
    const Corpus c = generate_lda_corpus(o, DirichletParams(Vector::Ones(3)), 200, 7, seed);
    std::stringstream buf;
    write_uci_bagofwords(c, buf);
    const BagOfWords b = parse_uci_bagofwords(buf);
    REQUIRE(b.corpus.n_docs() == c.n_docs());
    CHECK(b.corpus.d == c.d);
    bool same = true;
    for (std::size_t i = 0; i < c.n_docs(); ++i)
      same = same && b.corpus.documents[i].ids == c.documents[i].ids &&
             b.corpus.documents[i].counts == c.documents[i].counts;
    CHECK(same);
  }
}

TEST_CASE("topic TSV round trip is exact") {
  Rng rng(102);
  const Matrix m = random_gaussian(7, 3, rng);
  std::stringstream buf;
  write_topics_tsv(m, buf);
  CHECK((read_topics_tsv(buf).array() == m.array()).all());

  Matrix t(3, 2);
  t << 0.1, 0.5, 0.7, 0.2, 0.2, 0.3;
  CHECK(top_entries(t, 2) == std::vector<std::vector<std::size_t>>{{1, 2}, {0, 2}});
}

TEST_CASE("run configuration JSON round trip") {
  RunConfig c;
  c.command = "fit";
  c.inputs = {"a.txt"};
  c.vocab = "v.txt";
  c.output = "out";
  c.fit.k = 7;
  c.fit.alpha0 = 0.35;
  c.fit.svd_method = SvdMethod::PowerIteration;
  c.fit.estimator_mode = TripleEstimator::FirstThreeTokens;
  c.fit.clip_normalize = true;
  c.generator.model = GeneratorModel::FactorialHmm;
  c.generator.alpha = {0.1, 0.2};
  c.generator.factors = {FactorDistribution::bernoulli(0.3), FactorDistribution::rademacher()};
  c.sweep.ns = {10, 20};
  c.seed = 12345678901234ull;
  const RunConfig back = run_config_from_json(Json::parse(to_json(c).dump()));
  CHECK(same_run_config(c, back));
  c.fit.k = 8;
  CHECK_FALSE(same_run_config(c, back));

  Matrix m(2, 2);
  m << 1, 2, 3, 4.5;
  CHECK((matrix_from_json(matrix_to_json(m)).array() == m.array()).all());
}

TEST_CASE("CLI usage errors exit with status 2") {
  std::string err;
  CHECK(run_cli({"fit", "--no-such-flag"}, nullptr, &err) == 2);
  CHECK(run_cli({"eval"}) == 2);
  CHECK(run_cli({"--version"}) == 0);
}

TEST_CASE("CLI data errors exit with status 1 and a JSON line") {
  std::string err;
  CHECK(run_cli({"fit", "/nonexistent/docword.txt", "--k", "2"}, nullptr, &err) == 1);
  const Json j = Json::parse(err);
  CHECK(j["error"] == "Io");
}

TEST_CASE("CLI generate, fit and eval") {
  const TempDir dir("eca_cli_test");
  std::string out;
  REQUIRE(run_cli({"generate", "--docs", "20000", "--d", "12", "--k", "3", "--concentration", "0.3",
                   "--alpha", "0.2", "0.2", "0.2", "--seed", "5", "--out", dir / "run"}) == 0);
  CHECK(fs::exists(dir / "run.docword.txt"));
  CHECK(fs::exists(dir / "run.truth.tsv"));
  REQUIRE(run_cli({"fit", dir / "run.docword.txt", "--vocab", dir / "run.vocab.txt", "--k", "3", "--alpha0",
                   "0.6", "--seed", "1", "--top-words", "3", "--out", dir / "fit"}) == 0);
  REQUIRE(run_cli({"eval", "--truth", dir / "run.truth.tsv", "--estimate", dir / "fit.topics.tsv",
                   "--truth-meta", dir / "run.meta.json", "--estimate-meta", dir / "fit.meta.json"},
                  &out) == 0);
  const Json report = Json::parse(out);
  CHECK(report["max_l2"].get<double>() < 0.2);
  CHECK(report["missing"] == 0);
  CHECK(report.contains("alpha_error"));

  SUBCASE("rerunning from saved metadata reproduces the topics") {
    REQUIRE(run_cli({"fit", "--config", dir / "fit.meta.json", "--out", dir / "again"}) == 0);
    std::ifstream a(dir / "fit.topics.tsv"), b(dir / "again.topics.tsv");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}
