#pragma once

#include <stdexcept>
#include <string>

namespace graphlaunder {

// Base error carrying a machine-readable kind. The CLI prints errors as
// "error: <kind>: <message>" on stderr and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define GL_DEFINE_ERROR(Name)                                       \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& message)                   \
            : Error(#Name, message) {}                              \
    };

// graph-core
GL_DEFINE_ERROR(DanglingEdge)
GL_DEFINE_ERROR(DuplicateNode)
GL_DEFINE_ERROR(UnknownNode)
GL_DEFINE_ERROR(UnresolvedAlert)
GL_DEFINE_ERROR(InvalidAmount)

// ingest
GL_DEFINE_ERROR(FileNotFound)
GL_DEFINE_ERROR(MissingColumn)
GL_DEFINE_ERROR(MalformedRow)
GL_DEFINE_ERROR(RejectionRateExceeded)
GL_DEFINE_ERROR(FeatureLengthMismatch)
GL_DEFINE_ERROR(UnknownClassToken)

// synth
GL_DEFINE_ERROR(InsufficientNodes)

// embeddings
GL_DEFINE_ERROR(EmptyCorpus)
GL_DEFINE_ERROR(DimensionMismatch)
GL_DEFINE_ERROR(MissingFeatures)
GL_DEFINE_ERROR(InsufficientHistory)
GL_DEFINE_ERROR(MissingBaseVector)

// classifiers
GL_DEFINE_ERROR(EmptyDataset)
GL_DEFINE_ERROR(EmptyEnsemble)
GL_DEFINE_ERROR(EmptyMask)
GL_DEFINE_ERROR(SingleClassMask)

// evaluation
GL_DEFINE_ERROR(TooFewSamples)
GL_DEFINE_ERROR(EmptyEvaluation)

// cli / config
GL_DEFINE_ERROR(ConfigError)
GL_DEFINE_ERROR(SerializationError)

#undef GL_DEFINE_ERROR

} // namespace graphlaunder
