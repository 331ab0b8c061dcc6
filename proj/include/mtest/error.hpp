#pragma once

#include <stdexcept>
#include <string>

namespace mtest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MTEST_DEFINE_ERROR(Name)                 \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

// core
MTEST_DEFINE_ERROR(DegenerateData);
MTEST_DEFINE_ERROR(TooFewSamples);
MTEST_DEFINE_ERROR(InvalidSample);

// models
MTEST_DEFINE_ERROR(InvalidPrior);

// estimator
MTEST_DEFINE_ERROR(InvalidSettings);
MTEST_DEFINE_ERROR(NumericalUnderflow);
MTEST_DEFINE_ERROR(ChainDegenerate);

// calibration
MTEST_DEFINE_ERROR(InvalidAlpha);
MTEST_DEFINE_ERROR(IoError);
MTEST_DEFINE_ERROR(FormatVersionMismatch);
MTEST_DEFINE_ERROR(CorruptTable);
MTEST_DEFINE_ERROR(MissingCalibration);

// experiments
MTEST_DEFINE_ERROR(GridTooSparse);
MTEST_DEFINE_ERROR(ScenarioMismatch);

// configuration files and CLI input
MTEST_DEFINE_ERROR(ConfigError);
MTEST_DEFINE_ERROR(ParseError);

#undef MTEST_DEFINE_ERROR

}  // namespace mtest
