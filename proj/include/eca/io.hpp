#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eca/model.hpp"

namespace eca {

struct BagOfWords {
  Corpus corpus;
  std::vector<std::string> vocab;  // empty when no vocab file was given
  std::size_t nnz = 0;
};

/// UCI bag-of-words: three header lines D, W, NNZ, then NNZ lines
/// "docID wordID count" with 1-based ids. Documents without lines are kept
/// empty. The vocab file holds one token per line and must have W lines.
BagOfWords read_uci_bagofwords(const std::string& docword_path,
                               const std::optional<std::string>& vocab_path = std::nullopt);
BagOfWords parse_uci_bagofwords(std::istream& docword, std::istream* vocab = nullptr);

void write_uci_bagofwords(const Corpus& corpus, const std::string& docword_path);
void write_uci_bagofwords(const Corpus& corpus, std::ostream& out);
void write_vocab(const std::vector<std::string>& vocab, const std::string& path);

/// d rows, k tab-separated columns, printed with round-trip precision.
void write_topics_tsv(const Matrix& topics, const std::string& path);
void write_topics_tsv(const Matrix& topics, std::ostream& out);
Matrix read_topics_tsv(const std::string& path);
Matrix read_topics_tsv(std::istream& in);

/// Indices of the `count` largest entries of each column, descending.
std::vector<std::vector<std::size_t>> top_entries(const Matrix& topics, std::size_t count);

}  // namespace eca
