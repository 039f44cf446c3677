#pragma once

#include <stdexcept>
#include <string>

namespace elcox {

/// Base class for all library errors. Specific conditions get their own
/// type so callers (and the CLI exit-code map) can distinguish them.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// data construction
struct EmptyData : Error { using Error::Error; };
struct RaggedCovariates : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct AllCensored : Error { using Error::Error; };

// shape / indexing
struct DimensionMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// solver
struct NonFiniteObjective : Error { using Error::Error; };

// model selection
struct TooFewEvents : Error { using Error::Error; };
struct AllZeroStepOne : Error { using Error::Error; };

// simulation
struct CovarianceNotPD : Error { using Error::Error; };
struct UnknownScenario : Error { using Error::Error; };

// metrics
struct ZeroCensorWeight : Error { using Error::Error; };

// file ingestion
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

}  // namespace elcox
