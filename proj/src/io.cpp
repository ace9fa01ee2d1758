#include "eca/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "eca/error.hpp"

namespace eca {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Reads the next non-blank line; false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::int64_t header_value(std::istream& in, std::size_t& line_no, const char* name) {
  std::string line;
  std::int64_t v = 0;
  if (!next_line(in, line, line_no) || !parse_int(trim(line), v) || v < 0)
    fail(ErrorCode::MalformedHeader,
         std::string("expected a nonnegative integer ") + name + " on header line " +
             std::to_string(line_no));
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

BagOfWords parse_uci_bagofwords(std::istream& in, std::istream* vocab) {
  std::size_t line_no = 0;
  const std::int64_t n_docs = header_value(in, line_no, "D");
  const std::int64_t n_words = header_value(in, line_no, "W");
  const std::int64_t nnz = header_value(in, line_no, "NNZ");
  if (n_words > std::numeric_limits<std::int32_t>::max())
    fail(ErrorCode::MalformedHeader, "W exceeds the supported vocabulary size");

  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> per_doc(
      static_cast<std::size_t>(n_docs));
  std::string line;
  std::int64_t seen = 0;
  while (next_line(in, line, line_no)) {
    std::istringstream fields{std::string(trim(line))};
    std::string a, b, c, extra;
    std::int64_t doc = 0, word = 0, count = 0;
    if (!(fields >> a >> b >> c) || (fields >> extra) || !parse_int(a, doc) || !parse_int(b, word) ||
        !parse_int(c, count))
      fail(ErrorCode::MalformedLine,
           "line " + std::to_string(line_no) + ": expected 'docID wordID count'");
    if (doc < 1 || doc > n_docs)
      fail(ErrorCode::IndexOutOfRange, "line " + std::to_string(line_no) + ": docID " +
                                           std::to_string(doc) + " outside 1.." +
                                           std::to_string(n_docs));
    if (word < 1 || word > n_words)
      fail(ErrorCode::IndexOutOfRange, "line " + std::to_string(line_no) + ": wordID " +
                                           std::to_string(word) + " outside 1.." +
                                           std::to_string(n_words));
    if (count <= 0 || count > std::numeric_limits<std::int32_t>::max())
      fail(ErrorCode::CountNonPositive, "line " + std::to_string(line_no) + ": count " +
                                            std::to_string(count) + " is not a positive integer");
    per_doc[static_cast<std::size_t>(doc - 1)].emplace_back(static_cast<std::int32_t>(word - 1),
                                                            static_cast<std::int32_t>(count));
    ++seen;
  }
  if (seen != nnz)
    fail(ErrorCode::MalformedLine, "header declares NNZ=" + std::to_string(nnz) + " but found " +
                                       std::to_string(seen) + " entries");

  BagOfWords out;
  out.nnz = static_cast<std::size_t>(nnz);
  out.corpus.d = static_cast<std::int32_t>(n_words);
  out.corpus.documents.reserve(per_doc.size());
  for (auto& entries : per_doc) out.corpus.documents.push_back(Document::from_counts(std::move(entries)));

  if (vocab) {
    std::string token;
    while (std::getline(*vocab, token)) {
      if (!token.empty() && token.back() == '\r') token.pop_back();
      out.vocab.push_back(token);
    }
    // A trailing newline does not add an entry; blank lines in between do.
    while (!out.vocab.empty() && out.vocab.back().empty() &&
           static_cast<std::int64_t>(out.vocab.size()) > n_words)
      out.vocab.pop_back();
    if (static_cast<std::int64_t>(out.vocab.size()) != n_words)
      fail(ErrorCode::VocabLengthMismatch, "vocab has " + std::to_string(out.vocab.size()) +
                                               " tokens but W=" + std::to_string(n_words));
  }
  return out;
}

BagOfWords read_uci_bagofwords(const std::string& docword_path,
                               const std::optional<std::string>& vocab_path) {
  std::ifstream docword = open_in(docword_path);
  if (vocab_path) {
    std::ifstream vocab = open_in(*vocab_path);
    return parse_uci_bagofwords(docword, &vocab);
  }
  return parse_uci_bagofwords(docword, nullptr);
}

void write_uci_bagofwords(const Corpus& corpus, std::ostream& out) {
  std::size_t nnz = 0;
  for (const auto& doc : corpus.documents) nnz += doc.ids.size();
  out << corpus.n_docs() << '\n' << corpus.d << '\n' << nnz << '\n';
  for (std::size_t i = 0; i < corpus.n_docs(); ++i) {
    const Document& doc = corpus.documents[i];
    for (std::size_t j = 0; j < doc.ids.size(); ++j)
      out << (i + 1) << ' ' << (doc.ids[j] + 1) << ' ' << doc.counts[j] << '\n';
  }
  if (!out) fail(ErrorCode::Io, "failed writing bag-of-words output");
}

void write_uci_bagofwords(const Corpus& corpus, const std::string& docword_path) {
  std::ofstream f = open_out(docword_path);
  write_uci_bagofwords(corpus, f);
}

void write_vocab(const std::vector<std::string>& vocab, const std::string& path) {
  std::ofstream f = open_out(path);
  for (const auto& t : vocab) f << t << '\n';
  if (!f) fail(ErrorCode::Io, "failed writing '" + path + "'");
}

void write_topics_tsv(const Matrix& topics, std::ostream& out) {
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < topics.rows(); ++r) {
    for (Eigen::Index c = 0; c < topics.cols(); ++c) {
      if (c > 0) out << '\t';
      out << topics(r, c);
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "failed writing topics");
}

void write_topics_tsv(const Matrix& topics, const std::string& path) {
  std::ofstream f = open_out(path);
  write_topics_tsv(topics, f);
}

Matrix read_topics_tsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, '\t')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(std::string(trim(cell)), &used));
      } catch (const std::exception&) {
        fail(ErrorCode::MalformedLine, "topics line " + std::to_string(line_no) + ": bad number");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::MalformedLine, "topics line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

Matrix read_topics_tsv(const std::string& path) {
  std::ifstream f = open_in(path);
  return read_topics_tsv(f);
}

std::vector<std::vector<std::size_t>> top_entries(const Matrix& topics, std::size_t count) {
  std::vector<std::vector<std::size_t>> out;
  const auto d = static_cast<std::size_t>(topics.rows());
  count = std::min(count, d);
  for (Eigen::Index c = 0; c < topics.cols(); ++c) {
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double va = topics(static_cast<Eigen::Index>(a), c);
                        const double vb = topics(static_cast<Eigen::Index>(b), c);
                        return va > vb || (va == vb && a < b);
                      });
    idx.resize(count);
    out.push_back(std::move(idx));
  }
  return out;
}

}  // namespace eca
