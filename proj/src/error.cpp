#include "eca/error.hpp"

namespace eca {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BadColumnNormalization: return "BadColumnNormalization";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::InvalidDirichlet: return "InvalidDirichlet";
    case ErrorCode::NegativeAlpha0: return "NegativeAlpha0";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyAccumulator: return "EmptyAccumulator";
    case ErrorCode::OptionsMismatch: return "OptionsMismatch";
    case ErrorCode::RankCollapse: return "RankCollapse";
    case ErrorCode::SingularProjectedPairs: return "SingularProjectedPairs";
    case ErrorCode::InsufficientRank: return "InsufficientRank";
    case ErrorCode::SingularProjection: return "SingularProjection";
    case ErrorCode::NonPositiveColumnSum: return "NonPositiveColumnSum";
    case ErrorCode::AllZeroAfterClip: return "AllZeroAfterClip";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::InvalidOptions: return "InvalidOptions";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CountNonPositive: return "CountNonPositive";
    case ErrorCode::VocabLengthMismatch: return "VocabLengthMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace eca
