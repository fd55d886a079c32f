#pragma once

#include <stdexcept>
#include <string>

namespace numta {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broad categories; the CLI maps them onto exit codes.
class ConfigError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class IoError : public DataError { using DataError::DataError; };

// datasetio
class MissingSourceError : public DataError { using DataError::DataError; };
class SubsampleTooLarge : public DataError { using DataError::DataError; };
class DegenerateSplitError : public DataError { using DataError::DataError; };
class DecodeError : public DataError { using DataError::DataError; };

// preprocess
class InvalidDimension : public Error { using Error::Error; };
class UnsupportedChannels : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class InvalidSpec : public ConfigError { using ConfigError::ConfigError; };

// models
class UnsupportedKind : public ConfigError { using ConfigError::ConfigError; };
class ArchiveError : public DataError { using DataError::DataError; };
class IncompatibleArchive : public ArchiveError { using ArchiveError::ArchiveError; };

// training
class EmptyDatasetError : public DataError { using DataError::DataError; };
class NonFiniteLossError : public TrainingError { using TrainingError::TrainingError; };

// metrics
class LengthMismatch : public DataError { using DataError::DataError; };
class LabelOutOfRange : public DataError { using DataError::DataError; };
class EmptyList : public Error { using Error::Error; };
class ZeroSupport : public Error { using Error::Error; };
class EmptyMatrix : public Error { using Error::Error; };

// reporting
class EmptyHistory : public DataError { using DataError::DataError; };
class EmptyRuns : public ConfigError { using ConfigError::ConfigError; };

}  // namespace numta
